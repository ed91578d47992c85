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
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "drlab/dataset.hpp"
#include "drlab/linalg.hpp"
#include "drlab/moments.hpp"

namespace drlab
{

enum class DerivativeMode
{
    automatic,          // analytic when the moment provides it
    finite_difference,  // always central differences of P_n U
};

struct SolveSettings
{
    double tol = 1e-10;  // sup-norm of P_n U
    std::size_t max_iter = 50;
    std::size_t max_halvings = 30;
    /// Central-difference step is fd_rel_step * max(1, |v|).
    double fd_rel_step = std::cbrt(std::numeric_limits<double>::epsilon());
    /// Empty: sample mean of y for the shipped moments, zeros otherwise.
    std::vector<double> initial_psi;
    DerivativeMode derivatives = DerivativeMode::automatic;

    /// Throws std::invalid_argument.
    void validate() const;
};

struct SolveReport
{
    std::vector<double> psi_hat;
    double residual_norm = 0.0;
    std::size_t iterations = 0;
    Matrix jacobian_at_solution;  // d x d, dP_nU/dpsi at psi_hat
    bool converged = false;
};

/// P_n U(psi, theta). Positivity errors carry the offending row.
std::vector<double> empirical_moment(const MomentFunction& moment,
                                     std::span<const double> psi,
                                     std::span<const double> theta,
                                     const Dataset& data);

/// d x d Jacobian of psi -> P_n U(psi, theta).
Matrix jacobian_psi(const MomentFunction& moment,
                    std::span<const double> psi,
                    std::span<const double> theta,
                    const Dataset& data,
                    const SolveSettings& settings = {});

/// d x k Jacobian of theta -> P_n U(psi, theta).
Matrix jacobian_theta(const MomentFunction& moment,
                      std::span<const double> psi,
                      std::span<const double> theta,
                      const Dataset& data,
                      const SolveSettings& settings = {});

/// Damped Newton for P_n U(psi, theta_hat) = 0. A singular Jacobian throws
/// SingularMatrixError; an exhausted budget returns converged = false with
/// the best iterate.
SolveReport solve(const MomentFunction& moment,
                  std::span<const double> theta_hat,
                  const Dataset& data,
                  const SolveSettings& settings = {});

}  // namespace drlab
