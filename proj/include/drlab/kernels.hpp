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

// Batched inner loops over a Dataset. Every kernel has a scalar reference
// implementation and, on x86-64, an AVX2/FMA variant. The variant is picked at
// runtime from the CPU features unless DRLAB_KERNEL=scalar|avx2 overrides it.
// The two variants agree to rounding (they sum in different orders); the
// equivalence is checked in tests/unit/test_kernels.cpp.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "drlab/dataset.hpp"
#include "drlab/linalg.hpp"

namespace drlab::kernels
{

enum class Backend
{
    scalar,
    avx2,
};

/// Moment families of the form U = g(theta; obs) - psi with scalar psi.
enum class MomentKind
{
    mean,     // y - psi
    outcome,  // m(x; theta2) - psi
    ipw,      // a y / e(x; theta1) - psi
    aipw,     // a y / e - (a - e) / e * m - psi
};

struct MomentBatch
{
    MomentKind kind = MomentKind::mean;
    double psi = 0.0;
    std::span<const double> propensity_coef;  // theta1, one entry per covariate column
    std::span<const double> outcome_coef;     // theta2
    double propensity_floor = 1e-6;
    bool with_gradient = false;
};

/// Column sums over the rows of U, U^2 and (optionally) dU/dtheta and its
/// square, theta ordered (theta1, theta2).
struct MomentSums
{
    std::size_t rows = 0;
    double u = 0.0;
    double uu = 0.0;
    std::vector<double> du;
    std::vector<double> dudu;
    /// Smallest row index whose propensity fell below the floor, if any.
    std::optional<std::size_t> first_violation;
    double violation_value = 0.0;
};

struct LogisticSums
{
    std::vector<double> score;  // sum (a - e) x
    Matrix information;         // sum e (1 - e) x x^T
};

Backend active_backend() noexcept;
void set_backend(Backend backend);
bool backend_available(Backend backend) noexcept;
std::string_view to_string(Backend backend) noexcept;
std::optional<Backend> parse_backend(std::string_view name) noexcept;

std::size_t gradient_size(MomentKind kind, std::size_t num_covariates) noexcept;

MomentSums accumulate_moment(const Dataset& data, const MomentBatch& batch);
MomentSums accumulate_moment(Backend backend, const Dataset& data, const MomentBatch& batch);

/// Logistic score and information over the selected covariate columns.
LogisticSums accumulate_logistic(const Dataset& data,
                                 std::span<const std::size_t> columns,
                                 std::span<const double> coef);
LogisticSums accumulate_logistic(Backend backend,
                                 const Dataset& data,
                                 std::span<const std::size_t> columns,
                                 std::span<const double> coef);

void expit(std::span<const double> eta, std::span<double> out);
void expit(Backend backend, std::span<const double> eta, std::span<double> out);

}  // namespace drlab::kernels
