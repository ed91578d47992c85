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

#include "drlab/sandwich.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "drlab/errors.hpp"
#include "drlab/kernels.hpp"

namespace drlab
{

namespace
{

Matrix empirical_outer(const MomentFunction& moment,
                       std::span<const double> psi,
                       std::span<const double> theta,
                       const Dataset& data)
{
    const double n = static_cast<double>(data.size());
    const std::size_t d = moment.dim();
    if (const auto kind = moment.kernel_kind())
    {
        const auto split = moment.split();
        kernels::MomentBatch batch;
        batch.kind = *kind;
        batch.psi = psi[0];
        batch.propensity_coef = split.propensity(theta);
        batch.outcome_coef = split.outcome(theta);
        batch.propensity_floor = kPropensityFloor;
        const auto sums = kernels::accumulate_moment(data, batch);
        if (sums.first_violation)
        {
            throw PositivityError(*sums.first_violation, sums.violation_value);
        }
        return Matrix(1, 1, sums.uu / n);
    }

    Matrix meat(d, d);
    std::vector<double> u(d);
    Observation obs;
    for (std::size_t i = 0; i < data.size(); ++i)
    {
        data.load_row(i, obs);
        moment.evaluate(psi, theta, obs, u);
        for (std::size_t a = 0; a < d; ++a)
        {
            for (std::size_t b = 0; b < d; ++b)
            {
                meat(a, b) += u[a] * u[b];
            }
        }
    }
    return (1.0 / n) * meat;
}

}  // namespace

SandwichResult sandwich_variance(const MomentFunction& moment,
                                 std::span<const double> psi_hat,
                                 std::span<const double> theta_hat,
                                 const Dataset& data,
                                 double ci_level,
                                 const SolveSettings& settings)
{
    if (data.empty())
    {
        throw DataError("sandwich variance of an empty dataset");
    }
    const std::size_t d = moment.dim();
    SandwichResult r;
    r.n = data.size();
    r.ci_level = ci_level;
    const double z = z_quantile(ci_level);

    r.bread = jacobian_psi(moment, psi_hat, theta_hat, data, settings);
    r.meat = empirical_outer(moment, psi_hat, theta_hat, data);

    Matrix bread_inv;
    try
    {
        bread_inv = LuDecomposition(r.bread).inverse();
    }
    catch (const SingularMatrixError& e)
    {
        throw IdentificationError(std::string("dP_nU/dpsi has no inverse at psi_hat; psi is not identified (")
                                  + e.what() + ")");
    }
    Matrix v = bread_inv * r.meat * bread_inv.transpose();
    for (std::size_t i = 0; i < d; ++i)
    {
        for (std::size_t j = i + 1; j < d; ++j)
        {
            const double s = 0.5 * (v(i, j) + v(j, i));
            v(i, j) = s;
            v(j, i) = s;
        }
    }
    double trace = 0.0;
    for (std::size_t i = 0; i < d; ++i)
    {
        trace += v(i, i);
    }
    for (double pivot : symmetric_pivots(v))
    {
        if (pivot < -1e-10 * std::abs(trace))
        {
            throw Error("sandwich matrix is not positive semidefinite");
        }
    }
    r.vhat = std::move(v);

    const double n = static_cast<double>(r.n);
    r.se.resize(d);
    r.ci_lo.resize(d);
    r.ci_hi.resize(d);
    for (std::size_t j = 0; j < d; ++j)
    {
        r.se[j] = std::sqrt(std::max(0.0, r.vhat(j, j)) / n);
        r.ci_lo[j] = psi_hat[j] - z * r.se[j];
        r.ci_hi[j] = psi_hat[j] + z * r.se[j];
    }
    return r;
}

double z_quantile(double level)
{
    if (!(level >= 0.0 && level < 1.0))
    {
        throw std::invalid_argument("z_quantile: level must lie in [0, 1), got " + std::to_string(level));
    }
    if (level == 0.0)
    {
        return 0.0;
    }
    const double p = 1.0 - (1.0 - level) / 2.0;

    constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                            1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                            6.680131188771972e+01,  -1.328068155288572e+01};
    constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                            -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                            3.754408661907416e+00};
    constexpr double p_high = 1.0 - 0.02425;

    double x;
    if (p <= p_high)
    {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    else
    {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // Halley refinement on the upper tail 1 - p, which is where the precision is.
    const double tail = (1.0 - level) / 2.0;
    const double e = 0.5 * std::erfc(x / std::numbers::sqrt2) - tail;
    const double u = -e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
    return x;
}

}  // namespace drlab
