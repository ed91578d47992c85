/*
 * Copyright 2026 The drlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "drlab/errors.hpp"

#include <cstdio>

namespace drlab
{

namespace
{
std::string positivity_message(std::size_t row, double e)
{
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "positivity violation at row %zu: propensity %.6g is below the floor", row, e);
    return buf;
}
}  // namespace

PositivityError::PositivityError(double propensity)
    : Error("positivity violation: propensity " + std::to_string(propensity) + " is below the floor"),
      propensity_(propensity)
{
}

PositivityError::PositivityError(std::size_t row, double propensity)
    : Error(positivity_message(row, propensity)), row_(row), propensity_(propensity)
{
}

ConfigError::ConfigError(std::string key, const std::string& message)
    : Error("config key '" + key + "': " + message), key_(std::move(key)), detail_(message)
{
}

}  // namespace drlab
