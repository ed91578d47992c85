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
#include <span>
#include <vector>

#include "drlab/dataset.hpp"
#include "drlab/linalg.hpp"
#include "drlab/moments.hpp"
#include "drlab/zsolver.hpp"

namespace drlab
{

/// Sandwich variance of psi_hat with theta_hat treated as known.
struct SandwichResult
{
    Matrix bread;  // P_n dU/dpsi at (psi_hat, theta_hat)
    Matrix meat;   // P_n U U^T, 1/n divisor
    Matrix vhat;   // bread^-1 meat bread^-T
    std::vector<double> se;  // sqrt(vhat_jj / n)
    double ci_level = 0.95;
    std::vector<double> ci_lo;
    std::vector<double> ci_hi;
    std::size_t n = 0;
};

/// Throws IdentificationError when the bread is singular.
SandwichResult sandwich_variance(const MomentFunction& moment,
                                 std::span<const double> psi_hat,
                                 std::span<const double> theta_hat,
                                 const Dataset& data,
                                 double ci_level = 0.95,
                                 const SolveSettings& settings = {});

/// Two-sided standard normal critical value: the quantile at 1 - (1 - level)/2.
///
/// Acklam's rational approximation (relative error ~1e-9) followed by one
/// Halley step on erfc, which brings the result to ~1e-15. level must lie in
/// [0, 1); level = 0 gives 0.
double z_quantile(double level);

}  // namespace drlab
