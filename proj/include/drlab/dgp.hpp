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

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>
#include <vector>

#include "drlab/dataset.hpp"

namespace drlab
{

/// Counter-based 64-bit stream.
///
/// The key is derived from (base_seed, scenario, replication) by chaining the
/// SplitMix64 finalizer:
///   k0 = mix(base_seed + G), k1 = mix(k0 ^ scenario + G), key = mix(k1 ^ replication + G)
/// with G = 0x9e3779b97f4a7c15. Draw i (i = 1, 2, ...) is mix(key + i * G).
/// Identical ids give identical sequences; the stream is a plain value and
/// can be copied to fork it.
class RngStream
{
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t base_seed, std::uint64_t scenario, std::uint64_t replication) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    double normal();

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t position() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// FNV-1a hash of a scenario identifier, used as the middle stream id.
std::uint64_t scenario_stream_id(std::string_view scenario) noexcept;

/// x1 ~ N(0, 1); A ~ Bernoulli(expit(gamma0 + gamma1 x1));
/// Y = beta0 + beta1 x1 + tau A + sigma N(0, 1).
struct DGPSpec
{
    std::array<double, 2> gamma{0.0, 0.5};
    std::array<double, 2> beta{1.0, 2.0};
    double tau = 2.0;
    double sigma = 1.0;

    /// Throws ConfigError naming the offending field.
    void validate() const;

    friend bool operator==(const DGPSpec&, const DGPSpec&) = default;
};

struct Truth
{
    double psi = 0.0;
    std::vector<double> theta1;  // propensity coefficients
    std::vector<double> theta2;  // treated-outcome regression coefficients
};

/// Mean of Y(1) and the nuisance values the correctly specified models target.
Truth truth(const DGPSpec& spec);

/// E[expit(gamma0 + gamma1 x1)] by trapezoidal quadrature over the normal
/// density on [-10, 10]; the integrand is smooth and the truncated mass is
/// below 1e-22, so the result is accurate to rounding.
double mean_propensity(const DGPSpec& spec);

/// Marginal mean of the observed outcome, beta0 + tau E[e(x)].
double observed_outcome_mean(const DGPSpec& spec);

Dataset sample(const DGPSpec& spec, std::size_t n, RngStream& stream);

}  // namespace drlab
