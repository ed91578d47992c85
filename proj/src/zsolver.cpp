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

#include "drlab/zsolver.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

#include "drlab/errors.hpp"
#include "drlab/kernels.hpp"

namespace drlab
{

namespace
{

constexpr double kSingularPivot = 1e-12;

void check_nonempty(const Dataset& data)
{
    if (data.empty())
    {
        throw DataError("empirical average over an empty dataset");
    }
}

kernels::MomentBatch make_batch(const MomentFunction& moment,
                                kernels::MomentKind kind,
                                std::span<const double> psi,
                                std::span<const double> theta,
                                bool gradient)
{
    const auto split = moment.split();
    if (psi.size() != 1 || theta.size() != split.size())
    {
        throw std::invalid_argument("moment '" + moment.id() + "': psi/theta dimensions do not match");
    }
    kernels::MomentBatch batch;
    batch.kind = kind;
    batch.psi = psi[0];
    batch.propensity_coef = split.propensity(theta);
    batch.outcome_coef = split.outcome(theta);
    batch.propensity_floor = kPropensityFloor;
    batch.with_gradient = gradient;
    return batch;
}

kernels::MomentSums kernel_sums(const MomentFunction& moment,
                                kernels::MomentKind kind,
                                std::span<const double> psi,
                                std::span<const double> theta,
                                const Dataset& data,
                                bool gradient)
{
    auto sums = kernels::accumulate_moment(data, make_batch(moment, kind, psi, theta, gradient));
    if (sums.first_violation)
    {
        throw PositivityError(*sums.first_violation, sums.violation_value);
    }
    return sums;
}

// Runs f(obs, row) over every row, re-raising positivity errors with the row.
template <class F>
void for_each_row(const Dataset& data, F&& f)
{
    Observation obs;
    for (std::size_t i = 0; i < data.size(); ++i)
    {
        data.load_row(i, obs);
        try
        {
            f(obs, i);
        }
        catch (const PositivityError& e)
        {
            if (e.row())
            {
                throw;
            }
            throw PositivityError(i, e.propensity());
        }
    }
}

void check_finite(const Matrix& m, const char* what)
{
    for (double v : m.data())
    {
        if (!std::isfinite(v))
        {
            throw Error(std::string(what) + " has non-finite entries");
        }
    }
}

template <class Eval>
Matrix central_difference(std::span<const double> at, std::size_t d, double rel_step, Eval&& eval)
{
    Matrix out(d, at.size());
    std::vector<double> point(at.begin(), at.end());
    for (std::size_t j = 0; j < at.size(); ++j)
    {
        const double h = rel_step * std::max(1.0, std::abs(at[j]));
        point[j] = at[j] + h;
        const double hi = point[j];
        const auto up = eval(point);
        point[j] = at[j] - h;
        const double lo = point[j];
        const auto down = eval(point);
        point[j] = at[j];
        for (std::size_t q = 0; q < d; ++q)
        {
            out(q, j) = (up[q] - down[q]) / (hi - lo);
        }
    }
    return out;
}

}  // namespace

void SolveSettings::validate() const
{
    if (!(tol > 0.0))
    {
        throw std::invalid_argument("SolveSettings: tol must be > 0");
    }
    if (max_iter < 1 || max_halvings < 1)
    {
        throw std::invalid_argument("SolveSettings: iteration budgets must be >= 1");
    }
    if (!(fd_rel_step > 0.0))
    {
        throw std::invalid_argument("SolveSettings: fd_rel_step must be > 0");
    }
    for (double v : initial_psi)
    {
        if (!std::isfinite(v))
        {
            throw std::invalid_argument("SolveSettings: initial psi must be finite");
        }
    }
}

std::vector<double> empirical_moment(const MomentFunction& moment,
                                     std::span<const double> psi,
                                     std::span<const double> theta,
                                     const Dataset& data)
{
    check_nonempty(data);
    const double n = static_cast<double>(data.size());
    if (const auto kind = moment.kernel_kind())
    {
        const auto sums = kernel_sums(moment, *kind, psi, theta, data, false);
        return {sums.u / n};
    }

    const std::size_t d = moment.dim();
    std::vector<double> total(d, 0.0), u(d);
    for_each_row(data, [&](const Observation& obs, std::size_t) {
        moment.evaluate(psi, theta, obs, u);
        for (std::size_t q = 0; q < d; ++q)
        {
            total[q] += u[q];
        }
    });
    for (auto& v : total)
    {
        v /= n;
    }
    return total;
}

Matrix jacobian_psi(const MomentFunction& moment,
                    std::span<const double> psi,
                    std::span<const double> theta,
                    const Dataset& data,
                    const SolveSettings& settings)
{
    check_nonempty(data);
    const std::size_t d = moment.dim();
    Matrix jac;
    if (settings.derivatives == DerivativeMode::automatic && moment.kernel_kind())
    {
        jac = Matrix(1, 1, -1.0);
    }
    else if (settings.derivatives == DerivativeMode::automatic && moment.has_analytic_derivatives())
    {
        jac = Matrix(d, d);
        Matrix row;
        for_each_row(data, [&](const Observation& obs, std::size_t) {
            moment.derivative_psi(psi, theta, obs, row);
            jac = jac + row;
        });
        jac = (1.0 / static_cast<double>(data.size())) * jac;
    }
    else
    {
        jac = central_difference(psi, d, settings.fd_rel_step, [&](std::span<const double> at) {
            return empirical_moment(moment, at, theta, data);
        });
    }
    check_finite(jac, "psi Jacobian");
    return jac;
}

Matrix jacobian_theta(const MomentFunction& moment,
                      std::span<const double> psi,
                      std::span<const double> theta,
                      const Dataset& data,
                      const SolveSettings& settings)
{
    check_nonempty(data);
    const std::size_t d = moment.dim();
    const std::size_t k = moment.nuisance_dim();
    const double n = static_cast<double>(data.size());
    Matrix jac(d, k);
    if (k == 0)
    {
        return jac;
    }
    if (settings.derivatives == DerivativeMode::automatic && moment.kernel_kind())
    {
        const auto sums = kernel_sums(moment, *moment.kernel_kind(), psi, theta, data, true);
        for (std::size_t p = 0; p < k; ++p)
        {
            jac(0, p) = sums.du[p] / n;
        }
    }
    else if (settings.derivatives == DerivativeMode::automatic && moment.has_analytic_derivatives())
    {
        Matrix row;
        for_each_row(data, [&](const Observation& obs, std::size_t) {
            moment.derivative_theta(psi, theta, obs, row);
            jac = jac + row;
        });
        jac = (1.0 / n) * jac;
    }
    else
    {
        jac = central_difference(theta, d, settings.fd_rel_step, [&](std::span<const double> at) {
            return empirical_moment(moment, psi, at, data);
        });
    }
    check_finite(jac, "theta Jacobian");
    return jac;
}

SolveReport solve(const MomentFunction& moment,
                  std::span<const double> theta_hat,
                  const Dataset& data,
                  const SolveSettings& settings)
{
    settings.validate();
    check_nonempty(data);
    const std::size_t d = moment.dim();

    std::vector<double> psi = settings.initial_psi;
    if (psi.empty())
    {
        psi.assign(d, 0.0);
        if (moment.kernel_kind())
        {
            const auto y = data.outcome();
            psi[0] = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(data.size());
        }
    }
    else if (psi.size() != d)
    {
        throw std::invalid_argument("initial psi has the wrong dimension");
    }

    SolveReport report;
    auto residual = empirical_moment(moment, psi, theta_hat, data);
    double norm = sup_norm(residual);
    if (!std::isfinite(norm))
    {
        throw Error("moment is not finite at the initial psi");
    }

    bool stalled = false;
    while (!(norm < settings.tol) && report.iterations < settings.max_iter)
    {
        const Matrix jac = jacobian_psi(moment, psi, theta_hat, data, settings);
        auto step = LuDecomposition(jac, kSingularPivot).solve(residual);

        std::vector<double> trial(d);
        double t = 1.0;
        bool accepted = false;
        for (std::size_t h = 0; h <= settings.max_halvings; ++h, t *= 0.5)
        {
            for (std::size_t j = 0; j < d; ++j)
            {
                trial[j] = psi[j] - t * step[j];
            }
            auto trial_residual = empirical_moment(moment, trial, theta_hat, data);
            const double trial_norm = sup_norm(trial_residual);
            if (trial_norm < norm)
            {
                psi = trial;
                residual = std::move(trial_residual);
                norm = trial_norm;
                accepted = true;
                break;
            }
        }
        ++report.iterations;
        if (!accepted)
        {
            stalled = true;
            break;
        }
    }

    report.psi_hat = psi;
    report.residual_norm = norm;
    report.converged = !stalled && norm < settings.tol;
    report.jacobian_at_solution = jacobian_psi(moment, psi, theta_hat, data, settings);
    return report;
}

}  // namespace drlab
