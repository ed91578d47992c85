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

#pragma once

// Scenario files are line-oriented text:
//
//   # comment
//   base_seed = 20261016          <- keys before the first section are
//   reps = 2000                      defaults for every scenario
//
//   [scenario oracle_aipw]
//   moment = aipw                 aipw | ipw | or | mean
//   nuisance = oracle             see NuisanceStrategy::parse
//   n = 500, 2000, 8000           strictly increasing
//   reps = 2000
//   ci_level = 0.95
//   probe_taylor = true           true | false
//   base_seed = 7
//   dgp.gamma = 0, 0.5
//   dgp.beta = 1, 2
//   dgp.tau = 2
//   dgp.sigma = 1
//
// Whitespace around keys and values is ignored; a value may carry a trailing
// '# comment'. Unknown keys, duplicate scenario ids and malformed values are
// ConfigErrors naming the key.

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "drlab/simlab.hpp"

namespace drlab
{

struct SimulationConfig
{
    std::vector<ScenarioConfig> scenarios;

    /// Canonical text of every semantic field; comments, ordering of keys and
    /// number spelling do not affect it.
    std::string canonical() const;
    /// 16 hex digits of FNV-1a over canonical().
    std::string hash() const;
};

SimulationConfig parse_config(std::string_view text);
SimulationConfig load_config(const std::filesystem::path& path);

}  // namespace drlab
