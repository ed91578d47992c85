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

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "drlab/dataset.hpp"
#include "drlab/dgp.hpp"

namespace drlab::testing
{

// Frozen quadrature values for the default DGP, produced by
// tests/oracles/dgp_integrals.py.
inline constexpr double kMeanPropensity = 0.5;
inline constexpr double kShiftedMeanPropensity = 0.5617068034592421;  // gamma = (0.3, 1)
inline constexpr double kTreatedOutcomeMean = 3.472088844879759;
inline constexpr double kIpwSlopeIntercept = -1.2639555775601201;
inline constexpr double kIpwSlopeX1 = -0.6459333663401806;
inline constexpr double kAipwVarianceAtTruth = 6.133148453066825;
inline constexpr double kIpwVarianceAtTruth = 15.198336077601436;
inline constexpr double kZ95 = 1.959963984540054;
inline constexpr double kZ6827 = 1.0000217133229992;
inline constexpr double kZ50 = 0.6744897501960817;
inline constexpr double kZ99 = 2.5758293035489004;

// Dataset with intercept plus the given extra covariate columns.
inline Dataset make_data(const std::vector<std::vector<double>>& covariates,
                         const std::vector<int>& a,
                         const std::vector<double>& y)
{
    std::vector<Observation> rows(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
    {
        rows[i].x.push_back(1.0);
        for (const auto& col : covariates)
        {
            rows[i].x.push_back(col[i]);
        }
        rows[i].a = a.empty() ? 1 : a[i];
        rows[i].y = y[i];
    }
    return Dataset::from_rows(rows);
}

inline Dataset default_sample(std::size_t n, std::uint64_t seed, const DGPSpec& spec = {})
{
    RngStream stream(seed, scenario_stream_id("unit-test"), 0);
    return sample(spec, n, stream);
}

inline bool rel_close(double a, double b, double rel)
{
    return std::abs(a - b) <= rel * std::max(1.0, std::abs(b));
}

}  // namespace drlab::testing
