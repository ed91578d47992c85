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

#include "drlab/dgp.hpp"

#include <cmath>
#include <numbers>

#include "drlab/errors.hpp"

namespace drlab
{

namespace
{
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace

RngStream::RngStream(std::uint64_t base_seed, std::uint64_t scenario, std::uint64_t replication) noexcept
{
    const std::uint64_t k0 = mix64(base_seed + kGolden);
    const std::uint64_t k1 = mix64((k0 ^ scenario) + kGolden);
    key_ = mix64((k1 ^ replication) + kGolden);
}

RngStream::result_type RngStream::operator()() noexcept
{
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
}

double RngStream::uniform() noexcept
{
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double RngStream::normal()
{
    return normal_(*this);
}

std::uint64_t scenario_stream_id(std::string_view scenario) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : scenario)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void DGPSpec::validate() const
{
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(gamma[0]) || !finite(gamma[1]))
    {
        throw ConfigError("dgp.gamma", "coefficients must be finite");
    }
    if (!finite(beta[0]) || !finite(beta[1]))
    {
        throw ConfigError("dgp.beta", "coefficients must be finite");
    }
    if (!finite(tau))
    {
        throw ConfigError("dgp.tau", "must be finite");
    }
    if (!(sigma > 0.0) || !finite(sigma))
    {
        throw ConfigError("dgp.sigma", "must be > 0");
    }
}

Truth truth(const DGPSpec& spec)
{
    spec.validate();
    Truth t;
    t.psi = spec.beta[0] + spec.tau;
    t.theta1 = {spec.gamma[0], spec.gamma[1]};
    t.theta2 = {spec.beta[0] + spec.tau, spec.beta[1]};
    return t;
}

double mean_propensity(const DGPSpec& spec)
{
    constexpr int kSteps = 20000;
    constexpr double kLo = -10.0;
    constexpr double kHi = 10.0;
    const double h = (kHi - kLo) / kSteps;
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    double acc = 0.0;
    for (int i = 0; i <= kSteps; ++i)
    {
        const double z = kLo + h * i;
        const double w = (i == 0 || i == kSteps) ? 0.5 : 1.0;
        const double e = 1.0 / (1.0 + std::exp(-(spec.gamma[0] + spec.gamma[1] * z)));
        acc += w * e * norm * std::exp(-0.5 * z * z);
    }
    return acc * h;
}

double observed_outcome_mean(const DGPSpec& spec)
{
    spec.validate();
    return spec.beta[0] + spec.tau * mean_propensity(spec);
}

Dataset sample(const DGPSpec& spec, std::size_t n, RngStream& stream)
{
    if (n == 0)
    {
        throw DataError("sample: n must be at least 1");
    }
    Dataset data(n, 2);
    auto x1 = data.column(1);
    auto a = data.treatment();
    auto y = data.outcome();
    for (std::size_t i = 0; i < n; ++i)
    {
        const double x = stream.normal();
        const double e = 1.0 / (1.0 + std::exp(-(spec.gamma[0] + spec.gamma[1] * x)));
        const double treated = stream.uniform() < e ? 1.0 : 0.0;
        x1[i] = x;
        a[i] = treated;
        y[i] = spec.beta[0] + spec.beta[1] * x + spec.tau * treated + spec.sigma * stream.normal();
    }
    return data;
}

}  // namespace drlab
