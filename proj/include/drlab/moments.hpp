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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drlab/dataset.hpp"
#include "drlab/dgp.hpp"
#include "drlab/kernels.hpp"
#include "drlab/linalg.hpp"

namespace drlab
{

/// Propensities below this value are positivity violations.
inline constexpr double kPropensityFloor = 1e-6;

double expit(double eta) noexcept;
double logit(double p) noexcept;

/// theta = (theta1, theta2): the first propensity_size entries are the
/// propensity coefficients, the remaining outcome_size the outcome-model ones.
struct NuisanceSplit
{
    std::size_t propensity_size = 0;
    std::size_t outcome_size = 0;

    std::size_t size() const noexcept { return propensity_size + outcome_size; }
    std::span<const double> propensity(std::span<const double> theta) const
    {
        return theta.first(propensity_size);
    }
    std::span<const double> outcome(std::span<const double> theta) const
    {
        return theta.subspan(propensity_size, outcome_size);
    }
};

/// U(psi, theta; obs) with dim U == dim psi == d and dim theta == k.
///
/// Implementations are immutable and safe to share between threads.
class MomentFunction
{
public:
    virtual ~MomentFunction() = default;

    virtual std::string id() const = 0;
    virtual std::size_t dim() const = 0;
    virtual NuisanceSplit split() const = 0;
    std::size_t nuisance_dim() const { return split().size(); }
    virtual bool is_doubly_robust() const = 0;

    virtual void evaluate(std::span<const double> psi,
                          std::span<const double> theta,
                          const Observation& obs,
                          std::span<double> out) const = 0;

    virtual bool has_analytic_derivatives() const { return false; }
    /// d x d, entry (q, j) = dU_q / dpsi_j. Only when has_analytic_derivatives().
    virtual void derivative_psi(std::span<const double> psi,
                                std::span<const double> theta,
                                const Observation& obs,
                                Matrix& out) const;
    /// d x k, entry (q, p) = dU_q / dtheta_p.
    virtual void derivative_theta(std::span<const double> psi,
                                  std::span<const double> theta,
                                  const Observation& obs,
                                  Matrix& out) const;

    /// Set for moments of the form U = g(theta; obs) - psi that the batched
    /// kernels evaluate directly. dU/dpsi is then -1.
    virtual std::optional<kernels::MomentKind> kernel_kind() const { return std::nullopt; }
};

using MomentPtr = std::shared_ptr<const MomentFunction>;

// Scalar forms with e(x) = expit(theta1' x) and m(x) = theta2' x.
double aipw_moment(double psi,
                   std::span<const double> theta1,
                   std::span<const double> theta2,
                   const Observation& obs);
double ipw_moment(double psi, std::span<const double> theta1, const Observation& obs);
double or_moment(double psi, std::span<const double> theta2, const Observation& obs);

/// The shipped moments, keyed by "aipw", "ipw", "or", "mean". num_covariates
/// counts the intercept. Throws std::invalid_argument for an unknown id.
MomentPtr make_moment(std::string_view id, std::size_t num_covariates);
bool is_known_moment(std::string_view id) noexcept;

/// U' = M U for a fixed invertible d x d matrix M.
class TransformedMoment final : public MomentFunction
{
public:
    TransformedMoment(MomentPtr base, Matrix transform);

    std::string id() const override;
    std::size_t dim() const override { return base_->dim(); }
    NuisanceSplit split() const override { return base_->split(); }
    bool is_doubly_robust() const override { return base_->is_doubly_robust(); }
    void evaluate(std::span<const double> psi,
                  std::span<const double> theta,
                  const Observation& obs,
                  std::span<double> out) const override;
    bool has_analytic_derivatives() const override { return base_->has_analytic_derivatives(); }
    void derivative_psi(std::span<const double> psi,
                        std::span<const double> theta,
                        const Observation& obs,
                        Matrix& out) const override;
    void derivative_theta(std::span<const double> psi,
                          std::span<const double> theta,
                          const Observation& obs,
                          Matrix& out) const override;

private:
    MomentPtr base_;
    Matrix transform_;
};

/// Relative central-difference step: cbrt(machine epsilon) * max(1, |v|).
double fd_step(double v) noexcept;

/// Per-observation central differences, for moments without analytic
/// derivatives and for cross-checking those that have them.
void numeric_derivative_psi(const MomentFunction& moment,
                            std::span<const double> psi,
                            std::span<const double> theta,
                            const Observation& obs,
                            Matrix& out);
void numeric_derivative_theta(const MomentFunction& moment,
                              std::span<const double> psi,
                              std::span<const double> theta,
                              const Observation& obs,
                              Matrix& out);

/// Monte Carlo estimate of E dU_q/dtheta_p at (psi, theta) under a DGP.
struct DrDerivativeCheck
{
    Matrix mean;  // d x k
    Matrix se;    // d x k Monte Carlo standard errors
    std::size_t draws = 0;

    /// Largest |mean| / se over the entries; 0 for an empty matrix. Entries
    /// with se == 0 count as 0 when mean == 0 and as +inf otherwise.
    double max_abs_z() const;
};

/// Throws std::invalid_argument when draws < 1000.
DrDerivativeCheck verify_dr_derivative(const MomentFunction& moment,
                                       const DGPSpec& dgp,
                                       std::span<const double> psi,
                                       std::span<const double> theta,
                                       std::size_t draws,
                                       RngStream& stream);

}  // namespace drlab
