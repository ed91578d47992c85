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

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace drlab
{

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Propensity evaluated below the positivity floor at a given row.
class PositivityError : public Error
{
public:
    explicit PositivityError(double propensity);
    PositivityError(std::size_t row, double propensity);

    std::optional<std::size_t> row() const noexcept { return row_; }
    double propensity() const noexcept { return propensity_; }

private:
    std::optional<std::size_t> row_;
    double propensity_;
};

class SingularMatrixError : public Error
{
public:
    using Error::Error;
};

/// Raised by the sandwich when the bread has no inverse.
class IdentificationError : public Error
{
public:
    using Error::Error;
};

class ConvergenceError : public Error
{
public:
    using Error::Error;
};

/// Logistic fit diverged: the data are (quasi-)separated.
class SeparationError : public ConvergenceError
{
public:
    using ConvergenceError::ConvergenceError;
};

class DataError : public Error
{
public:
    using Error::Error;
};

class ConfigError : public Error
{
public:
    ConfigError(std::string key, const std::string& message);

    const std::string& key() const noexcept { return key_; }
    /// The message without the key prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string key_;
    std::string detail_;
};

/// More than the allowed fraction of replications failed in a cell.
class ScenarioAbort : public Error
{
public:
    using Error::Error;
};

}  // namespace drlab
