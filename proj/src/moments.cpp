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

#include "drlab/moments.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "drlab/errors.hpp"

namespace drlab
{

double expit(double eta) noexcept
{
    return 1.0 / (1.0 + std::exp(-eta));
}

double logit(double p) noexcept
{
    return std::log(p / (1.0 - p));
}

void MomentFunction::derivative_psi(std::span<const double>,
                                    std::span<const double>,
                                    const Observation&,
                                    Matrix&) const
{
    throw std::logic_error("moment '" + id() + "' has no analytic psi derivative");
}

void MomentFunction::derivative_theta(std::span<const double>,
                                      std::span<const double>,
                                      const Observation&,
                                      Matrix&) const
{
    throw std::logic_error("moment '" + id() + "' has no analytic theta derivative");
}

namespace
{

double dot(std::span<const double> coef, const std::vector<double>& x)
{
    if (coef.size() != x.size())
    {
        throw std::invalid_argument("coefficient length " + std::to_string(coef.size())
                                    + " does not match covariate length " + std::to_string(x.size()));
    }
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j)
    {
        s += coef[j] * x[j];
    }
    return s;
}

double propensity(std::span<const double> theta1, const Observation& obs)
{
    const double e = expit(dot(theta1, obs.x));
    if (!(e >= kPropensityFloor))
    {
        throw PositivityError(e);
    }
    return e;
}

// Shared body of the scalar-psi shipped moments.
class ScalarMoment : public MomentFunction
{
public:
    ScalarMoment(std::string id, NuisanceSplit split, bool dr, kernels::MomentKind kind)
        : split_(split), id_(std::move(id)), dr_(dr), kind_(kind)
    {
    }

    std::string id() const override { return id_; }
    std::size_t dim() const override { return 1; }
    NuisanceSplit split() const override { return split_; }
    bool is_doubly_robust() const override { return dr_; }
    bool has_analytic_derivatives() const override { return true; }
    std::optional<kernels::MomentKind> kernel_kind() const override { return kind_; }

    void derivative_psi(std::span<const double>,
                        std::span<const double>,
                        const Observation&,
                        Matrix& out) const override
    {
        out = Matrix(1, 1, -1.0);
    }

protected:
    void check(std::span<const double> psi, std::span<const double> theta) const
    {
        if (psi.size() != 1 || theta.size() != split_.size())
        {
            throw std::invalid_argument("moment '" + id_ + "': expected psi of length 1 and theta of length "
                                        + std::to_string(split_.size()));
        }
    }

    NuisanceSplit split_;

private:
    std::string id_;
    bool dr_;
    kernels::MomentKind kind_;
};

class AipwMoment final : public ScalarMoment
{
public:
    explicit AipwMoment(std::size_t p) : ScalarMoment("aipw", {p, p}, true, kernels::MomentKind::aipw) {}

    void evaluate(std::span<const double> psi,
                  std::span<const double> theta,
                  const Observation& obs,
                  std::span<double> out) const override
    {
        check(psi, theta);
        out[0] = aipw_moment(psi[0], split_.propensity(theta), split_.outcome(theta), obs);
    }

    void derivative_theta(std::span<const double> psi,
                          std::span<const double> theta,
                          const Observation& obs,
                          Matrix& out) const override
    {
        check(psi, theta);
        const double e = propensity(split_.propensity(theta), obs);
        const double m = dot(split_.outcome(theta), obs.x);
        const double g1 = -obs.a * (obs.y - m) * (1.0 - e) / e;
        const double g2 = 1.0 - obs.a / e;
        const std::size_t p = obs.x.size();
        out = Matrix(1, 2 * p);
        for (std::size_t j = 0; j < p; ++j)
        {
            out(0, j) = g1 * obs.x[j];
            out(0, p + j) = g2 * obs.x[j];
        }
    }
};

class IpwMoment final : public ScalarMoment
{
public:
    explicit IpwMoment(std::size_t p) : ScalarMoment("ipw", {p, 0}, false, kernels::MomentKind::ipw) {}

    void evaluate(std::span<const double> psi,
                  std::span<const double> theta,
                  const Observation& obs,
                  std::span<double> out) const override
    {
        check(psi, theta);
        out[0] = ipw_moment(psi[0], theta, obs);
    }

    void derivative_theta(std::span<const double> psi,
                          std::span<const double> theta,
                          const Observation& obs,
                          Matrix& out) const override
    {
        check(psi, theta);
        const double e = propensity(theta, obs);
        const double g = -obs.a * obs.y * (1.0 - e) / e;
        out = Matrix(1, obs.x.size());
        for (std::size_t j = 0; j < obs.x.size(); ++j)
        {
            out(0, j) = g * obs.x[j];
        }
    }
};

class OutcomeMoment final : public ScalarMoment
{
public:
    explicit OutcomeMoment(std::size_t p) : ScalarMoment("or", {0, p}, false, kernels::MomentKind::outcome) {}

    void evaluate(std::span<const double> psi,
                  std::span<const double> theta,
                  const Observation& obs,
                  std::span<double> out) const override
    {
        check(psi, theta);
        out[0] = or_moment(psi[0], theta, obs);
    }

    void derivative_theta(std::span<const double> psi,
                          std::span<const double> theta,
                          const Observation& obs,
                          Matrix& out) const override
    {
        check(psi, theta);
        out = Matrix(1, obs.x.size());
        for (std::size_t j = 0; j < obs.x.size(); ++j)
        {
            out(0, j) = obs.x[j];
        }
    }
};

class MeanMoment final : public ScalarMoment
{
public:
    MeanMoment() : ScalarMoment("mean", {0, 0}, false, kernels::MomentKind::mean) {}

    void evaluate(std::span<const double> psi,
                  std::span<const double> theta,
                  const Observation& obs,
                  std::span<double> out) const override
    {
        check(psi, theta);
        out[0] = obs.y - psi[0];
    }

    void derivative_theta(std::span<const double>,
                          std::span<const double>,
                          const Observation&,
                          Matrix& out) const override
    {
        out = Matrix(1, 0);
    }
};

}  // namespace

double aipw_moment(double psi,
                   std::span<const double> theta1,
                   std::span<const double> theta2,
                   const Observation& obs)
{
    const double e = propensity(theta1, obs);
    const double m = dot(theta2, obs.x);
    const double a = obs.a;
    return a * obs.y / e - ((a - e) / e) * m - psi;
}

double ipw_moment(double psi, std::span<const double> theta1, const Observation& obs)
{
    const double e = propensity(theta1, obs);
    return obs.a * obs.y / e - psi;
}

double or_moment(double psi, std::span<const double> theta2, const Observation& obs)
{
    return dot(theta2, obs.x) - psi;
}

MomentPtr make_moment(std::string_view id, std::size_t num_covariates)
{
    if (id == "aipw")
    {
        return std::make_shared<AipwMoment>(num_covariates);
    }
    if (id == "ipw")
    {
        return std::make_shared<IpwMoment>(num_covariates);
    }
    if (id == "or")
    {
        return std::make_shared<OutcomeMoment>(num_covariates);
    }
    if (id == "mean")
    {
        return std::make_shared<MeanMoment>();
    }
    throw std::invalid_argument("unknown moment '" + std::string(id) + "' (expected aipw, ipw, or, mean)");
}

bool is_known_moment(std::string_view id) noexcept
{
    return id == "aipw" || id == "ipw" || id == "or" || id == "mean";
}

TransformedMoment::TransformedMoment(MomentPtr base, Matrix transform)
    : base_(std::move(base)), transform_(std::move(transform))
{
    if (transform_.rows() != base_->dim() || transform_.cols() != base_->dim())
    {
        throw std::invalid_argument("TransformedMoment: transform must be d x d");
    }
    LuDecomposition check(transform_);
}

std::string TransformedMoment::id() const
{
    return "transformed(" + base_->id() + ")";
}

void TransformedMoment::evaluate(std::span<const double> psi,
                                 std::span<const double> theta,
                                 const Observation& obs,
                                 std::span<double> out) const
{
    std::vector<double> u(base_->dim());
    base_->evaluate(psi, theta, obs, u);
    const auto mu = transform_ * std::span<const double>(u);
    std::copy(mu.begin(), mu.end(), out.begin());
}

void TransformedMoment::derivative_psi(std::span<const double> psi,
                                       std::span<const double> theta,
                                       const Observation& obs,
                                       Matrix& out) const
{
    Matrix j;
    base_->derivative_psi(psi, theta, obs, j);
    out = transform_ * j;
}

void TransformedMoment::derivative_theta(std::span<const double> psi,
                                         std::span<const double> theta,
                                         const Observation& obs,
                                         Matrix& out) const
{
    Matrix j;
    base_->derivative_theta(psi, theta, obs, j);
    out = transform_ * j;
}

double fd_step(double v) noexcept
{
    static const double base = std::cbrt(std::numeric_limits<double>::epsilon());
    return base * std::max(1.0, std::abs(v));
}

namespace
{
template <class Eval>
void central_columns(std::span<const double> at, std::size_t d, Matrix& out, Eval&& eval)
{
    std::vector<double> point(at.begin(), at.end());
    std::vector<double> up(d), down(d);
    out = Matrix(d, at.size());
    for (std::size_t j = 0; j < at.size(); ++j)
    {
        const double h = fd_step(at[j]);
        point[j] = at[j] + h;
        const double hi = point[j];
        eval(point, up);
        point[j] = at[j] - h;
        const double lo = point[j];
        eval(point, down);
        point[j] = at[j];
        for (std::size_t q = 0; q < d; ++q)
        {
            out(q, j) = (up[q] - down[q]) / (hi - lo);
        }
    }
}
}  // namespace

void numeric_derivative_psi(const MomentFunction& moment,
                            std::span<const double> psi,
                            std::span<const double> theta,
                            const Observation& obs,
                            Matrix& out)
{
    central_columns(psi, moment.dim(), out, [&](std::span<const double> at, std::span<double> u) {
        moment.evaluate(at, theta, obs, u);
    });
}

void numeric_derivative_theta(const MomentFunction& moment,
                              std::span<const double> psi,
                              std::span<const double> theta,
                              const Observation& obs,
                              Matrix& out)
{
    central_columns(theta, moment.dim(), out, [&](std::span<const double> at, std::span<double> u) {
        moment.evaluate(psi, at, obs, u);
    });
}

double DrDerivativeCheck::max_abs_z() const
{
    double worst = 0.0;
    for (std::size_t i = 0; i < mean.rows(); ++i)
    {
        for (std::size_t j = 0; j < mean.cols(); ++j)
        {
            const double m = std::abs(mean(i, j));
            const double s = se(i, j);
            const double z = s > 0.0 ? m / s : (m == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
            worst = std::max(worst, z);
        }
    }
    return worst;
}

DrDerivativeCheck verify_dr_derivative(const MomentFunction& moment,
                                       const DGPSpec& dgp,
                                       std::span<const double> psi,
                                       std::span<const double> theta,
                                       std::size_t draws,
                                       RngStream& stream)
{
    if (draws < 1000)
    {
        throw std::invalid_argument("verify_dr_derivative: at least 1000 draws are required");
    }
    const std::size_t d = moment.dim();
    const std::size_t k = moment.nuisance_dim();
    if (psi.size() != d || theta.size() != k)
    {
        throw std::invalid_argument("verify_dr_derivative: psi/theta dimensions do not match the moment");
    }

    DrDerivativeCheck out{Matrix(d, k), Matrix(d, k), draws};
    if (k == 0)
    {
        return out;
    }

    const Dataset data = sample(dgp, draws, stream);
    const double m = static_cast<double>(draws);
    Matrix sum(d, k), sum_sq(d, k);

    if (const auto kind = moment.kernel_kind())
    {
        const auto split = moment.split();
        kernels::MomentBatch batch;
        batch.kind = *kind;
        batch.psi = psi[0];
        batch.propensity_coef = split.propensity(theta);
        batch.outcome_coef = split.outcome(theta);
        batch.propensity_floor = kPropensityFloor;
        batch.with_gradient = true;
        const auto sums = kernels::accumulate_moment(data, batch);
        if (sums.first_violation)
        {
            throw PositivityError(*sums.first_violation, sums.violation_value);
        }
        for (std::size_t p = 0; p < k; ++p)
        {
            sum(0, p) = sums.du[p];
            sum_sq(0, p) = sums.dudu[p];
        }
    }
    else
    {
        Observation obs;
        Matrix g;
        for (std::size_t i = 0; i < draws; ++i)
        {
            data.load_row(i, obs);
            if (moment.has_analytic_derivatives())
            {
                moment.derivative_theta(psi, theta, obs, g);
            }
            else
            {
                numeric_derivative_theta(moment, psi, theta, obs, g);
            }
            for (std::size_t q = 0; q < d; ++q)
            {
                for (std::size_t p = 0; p < k; ++p)
                {
                    sum(q, p) += g(q, p);
                    sum_sq(q, p) += g(q, p) * g(q, p);
                }
            }
        }
    }

    for (std::size_t q = 0; q < d; ++q)
    {
        for (std::size_t p = 0; p < k; ++p)
        {
            const double mean = sum(q, p) / m;
            const double var = std::max(0.0, (sum_sq(q, p) - m * mean * mean) / (m - 1.0));
            out.mean(q, p) = mean;
            out.se(q, p) = std::sqrt(var / m);
        }
    }
    return out;
}

}  // namespace drlab
