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

// Reference kernels: one row at a time, sequential sums, formulas written the
// way they are stated for the moment functions.

#include <cmath>

#include "impl.hpp"

namespace drlab::kernels::detail
{

namespace
{
double linear_predictor(const Dataset& data, std::size_t i, std::span<const double> coef)
{
    double s = 0.0;
    for (std::size_t j = 0; j < coef.size(); ++j)
    {
        s += coef[j] * data.x(i, j);
    }
    return s;
}
}  // namespace

void moment_scalar(const Dataset& data, const MomentBatch& batch, MomentSums& sums)
{
    const std::size_t n = data.size();
    const std::size_t p = data.num_covariates();
    const auto a = data.treatment();
    const auto y = data.outcome();
    const bool uses_e = batch.kind == MomentKind::ipw || batch.kind == MomentKind::aipw;
    const bool uses_m = batch.kind == MomentKind::outcome || batch.kind == MomentKind::aipw;
    const std::size_t off2 = batch.kind == MomentKind::aipw ? p : 0;

    for (std::size_t i = 0; i < n; ++i)
    {
        const double e = uses_e ? expit(linear_predictor(data, i, batch.propensity_coef)) : 1.0;
        const double m = uses_m ? linear_predictor(data, i, batch.outcome_coef) : 0.0;
        if (uses_e && e < batch.propensity_floor && !sums.first_violation)
        {
            sums.first_violation = i;
            sums.violation_value = e;
        }

        double u = 0.0;
        double g1 = 0.0;  // dU/dtheta1 = g1 * x
        double g2 = 0.0;  // dU/dtheta2 = g2 * x
        switch (batch.kind)
        {
        case MomentKind::mean:
            u = y[i] - batch.psi;
            break;
        case MomentKind::outcome:
            u = m - batch.psi;
            g2 = 1.0;
            break;
        case MomentKind::ipw:
            u = a[i] * y[i] / e - batch.psi;
            g1 = -a[i] * y[i] * (1.0 - e) / e;
            break;
        case MomentKind::aipw:
            u = a[i] * y[i] / e - ((a[i] - e) / e) * m - batch.psi;
            g1 = -a[i] * (y[i] - m) * (1.0 - e) / e;
            g2 = 1.0 - a[i] / e;
            break;
        }
        sums.u += u;
        sums.uu += u * u;

        if (batch.with_gradient)
        {
            for (std::size_t j = 0; j < p; ++j)
            {
                const double xj = data.x(i, j);
                if (uses_e)
                {
                    const double g = g1 * xj;
                    sums.du[j] += g;
                    sums.dudu[j] += g * g;
                }
                if (uses_m)
                {
                    const double g = g2 * xj;
                    sums.du[off2 + j] += g;
                    sums.dudu[off2 + j] += g * g;
                }
            }
        }
    }
}

void logistic_scalar(const Dataset& data,
                     std::span<const std::size_t> columns,
                     std::span<const double> coef,
                     LogisticSums& sums)
{
    const std::size_t n = data.size();
    const std::size_t q = columns.size();
    const auto a = data.treatment();
    for (std::size_t i = 0; i < n; ++i)
    {
        double eta = 0.0;
        for (std::size_t j = 0; j < q; ++j)
        {
            eta += coef[j] * data.x(i, columns[j]);
        }
        const double e = expit(eta);
        const double r = a[i] - e;
        const double w = e * (1.0 - e);
        for (std::size_t j = 0; j < q; ++j)
        {
            const double xj = data.x(i, columns[j]);
            sums.score[j] += r * xj;
            for (std::size_t l = j; l < q; ++l)
            {
                sums.information(j, l) += w * xj * data.x(i, columns[l]);
            }
        }
    }
}

void expit_scalar(std::span<const double> eta, std::span<double> out)
{
    for (std::size_t i = 0; i < eta.size(); ++i)
    {
        out[i] = expit(eta[i]);
    }
}

}  // namespace drlab::kernels::detail
