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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drlab/dataset.hpp"
#include "drlab/dgp.hpp"
#include "drlab/moments.hpp"

namespace drlab
{

enum class NuisanceMethod
{
    oracle,
    mle,
    ols,
    degraded,
    misspecified,
    fixed,
};

std::string_view to_string(NuisanceMethod method) noexcept;

struct NuisanceFit
{
    std::vector<double> theta;
    NuisanceMethod method = NuisanceMethod::oracle;
    std::optional<double> alpha;  // present iff degraded
    bool converged = true;
    std::size_t iterations = 0;
};

enum class DegradeMode
{
    fixed_direction,
    random_direction,
};

/// theta_hat = theta* + c n^-alpha D, with D = direction (fixed mode) or a
/// uniform draw from the unit sphere (random mode).
struct DegradeSpec
{
    double alpha = 0.5;
    DegradeMode mode = DegradeMode::random_direction;
    double c = 1.0;
    std::vector<double> direction;  // fixed mode; empty selects the default

    /// Throws ConfigError; k is the length of theta.
    void validate(std::size_t k) const;
};

/// Unit vector splitting its weight equally over the intercept entry of each
/// non-empty block of the split.
std::vector<double> default_degrade_direction(const NuisanceSplit& split);

/// Logistic regression of a on the selected covariate columns (all when
/// empty) by Newton-Raphson with step-halving on the averaged score norm.
/// Converged when the averaged score has sup-norm < 1e-10.
NuisanceFit fit_logistic_mle(const Dataset& data, std::span<const std::size_t> columns = {});

/// Least squares of y on the selected columns via the normal equations.
NuisanceFit fit_ols_outcome(const Dataset& data, bool on_treated_only, std::span<const std::size_t> columns = {});

NuisanceFit degrade(std::span<const double> theta_star, std::size_t n, const DegradeSpec& spec, RngStream& stream);

enum class MisspecifiedBlock
{
    propensity,
    outcome,
};

/// Intercept-only fit of one block, returned padded with zeros to the full
/// covariate length.
NuisanceFit fit_misspecified(const Dataset& data, MisspecifiedBlock which);

/// Parsed form of the nuisance strategy string:
///   oracle | mle | degraded:alpha=<a>,mode=<fixed|random>,c=<c>[,dir=<v1;v2;...>]
///   | misspecified:<propensity|outcome|both> | fixed:<t1>,<t2>,...
struct NuisanceStrategy
{
    enum class Kind
    {
        oracle,
        mle,
        degraded,
        misspecified,
        fixed,
    };

    Kind kind = Kind::oracle;
    DegradeSpec degrade;
    bool misspecify_propensity = false;
    bool misspecify_outcome = false;
    std::vector<double> fixed_theta;

    /// Throws ConfigError with key "nuisance".
    static NuisanceStrategy parse(std::string_view text);
    std::string to_string() const;
    bool needs_truth() const noexcept { return kind == Kind::oracle || kind == Kind::degraded; }
};

/// Estimates the full theta a moment needs. truth is required for oracle and
/// degraded strategies; stream is used by random-direction degradation.
NuisanceFit fit_nuisance(const NuisanceStrategy& strategy,
                         const MomentFunction& moment,
                         const Dataset& data,
                         const Truth* truth,
                         RngStream* stream);

/// theta* laid out for a moment's split.
std::vector<double> true_theta(const MomentFunction& moment, const Truth& truth);

}  // namespace drlab
