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

#include "drlab/nuisance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "drlab/errors.hpp"
#include "drlab/kernels.hpp"
#include "drlab/linalg.hpp"
#include "drlab/text.hpp"

namespace drlab
{

namespace
{
constexpr double kScoreTol = 1e-10;
constexpr std::size_t kMaxNewton = 100;
constexpr std::size_t kMaxHalvings = 30;
constexpr double kSeparationNorm = 1e3;
constexpr double kOlsRankTol = 1e-10;

std::vector<std::size_t> resolve_columns(const Dataset& data, std::span<const std::size_t> columns)
{
    std::vector<std::size_t> cols;
    if (columns.empty())
    {
        cols.resize(data.num_covariates());
        std::iota(cols.begin(), cols.end(), std::size_t{0});
    }
    else
    {
        cols.assign(columns.begin(), columns.end());
        for (auto c : cols)
        {
            if (c >= data.num_covariates())
            {
                throw std::invalid_argument("feature selector refers to a missing covariate column");
            }
        }
    }
    return cols;
}

double averaged_norm(std::span<const double> score, double n)
{
    double s = 0.0;
    for (double v : score)
    {
        s += (v / n) * (v / n);
    }
    return std::sqrt(s);
}
}  // namespace

std::string_view to_string(NuisanceMethod method) noexcept
{
    switch (method)
    {
    case NuisanceMethod::oracle:
        return "oracle";
    case NuisanceMethod::mle:
        return "mle";
    case NuisanceMethod::ols:
        return "ols";
    case NuisanceMethod::degraded:
        return "degraded";
    case NuisanceMethod::misspecified:
        return "misspecified";
    case NuisanceMethod::fixed:
        return "fixed";
    }
    return "unknown";
}

NuisanceFit fit_logistic_mle(const Dataset& data, std::span<const std::size_t> columns)
{
    const auto cols = resolve_columns(data, columns);
    const std::size_t q = cols.size();
    const std::size_t n = data.size();
    if (n < q + 1)
    {
        throw DataError("logistic fit needs at least " + std::to_string(q + 1) + " rows");
    }
    const auto a = data.treatment();
    const double treated = std::accumulate(a.begin(), a.end(), 0.0);
    if (treated == 0.0 || treated == static_cast<double>(n))
    {
        throw DataError("logistic fit needs both treatment classes");
    }

    const double nn = static_cast<double>(n);
    std::vector<double> beta(q, 0.0);
    auto sums = kernels::accumulate_logistic(data, cols, beta);
    double norm = averaged_norm(sums.score, nn);

    NuisanceFit fit;
    fit.method = NuisanceMethod::mle;
    fit.converged = false;

    for (std::size_t iter = 0; iter < kMaxNewton; ++iter)
    {
        if (sup_norm(sums.score) / nn < kScoreTol)
        {
            fit.converged = true;
            break;
        }
        std::vector<double> step;
        try
        {
            step = solve_linear(sums.information, sums.score);
        }
        catch (const SingularMatrixError& e)
        {
            throw ConvergenceError(std::string("logistic fit: singular information matrix (") + e.what() + ")");
        }

        double t = 1.0;
        std::vector<double> trial(q);
        bool accepted = false;
        for (std::size_t h = 0; h <= kMaxHalvings; ++h, t *= 0.5)
        {
            for (std::size_t j = 0; j < q; ++j)
            {
                trial[j] = beta[j] + t * step[j];
            }
            if (euclidean_norm(trial) > kSeparationNorm)
            {
                throw SeparationError("logistic fit diverged (coefficient norm above 1e3): data are separated");
            }
            auto trial_sums = kernels::accumulate_logistic(data, cols, trial);
            const double trial_norm = averaged_norm(trial_sums.score, nn);
            if (trial_norm < norm)
            {
                beta = trial;
                sums = std::move(trial_sums);
                norm = trial_norm;
                accepted = true;
                break;
            }
        }
        fit.iterations = iter + 1;
        if (!accepted)
        {
            break;
        }
    }
    if (!fit.converged && sup_norm(sums.score) / nn < kScoreTol)
    {
        fit.converged = true;
    }
    if (!fit.converged)
    {
        throw ConvergenceError("logistic fit did not converge in " + std::to_string(fit.iterations)
                               + " iterations (score norm " + text::shortest(norm) + ")");
    }

    // Perfect prediction with finite coefficients: the score vanished because
    // every fitted probability saturated, not because a maximum exists.
    if (sup_norm(beta) > 20.0)
    {
        std::vector<double> eta(n, 0.0);
        for (std::size_t j = 0; j < q; ++j)
        {
            const auto col = data.column(cols[j]);
            for (std::size_t i = 0; i < n; ++i)
            {
                eta[i] += beta[j] * col[i];
            }
        }
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            worst = std::max(worst, std::abs(a[i] - expit(eta[i])));
        }
        if (worst < 1e-6)
        {
            throw SeparationError("logistic fit: every fitted probability is 0 or 1; data are separated");
        }
    }

    fit.theta = std::move(beta);
    return fit;
}

NuisanceFit fit_ols_outcome(const Dataset& data, bool on_treated_only, std::span<const std::size_t> columns)
{
    const auto cols = resolve_columns(data, columns);
    const std::size_t q = cols.size();
    const auto a = data.treatment();
    const auto y = data.outcome();
    Matrix xtx(q, q);
    std::vector<double> xty(q, 0.0);
    std::size_t used = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
    {
        if (on_treated_only && a[i] == 0.0)
        {
            continue;
        }
        ++used;
        for (std::size_t j = 0; j < q; ++j)
        {
            const double xj = data.x(i, cols[j]);
            xty[j] += xj * y[i];
            for (std::size_t l = j; l < q; ++l)
            {
                xtx(j, l) += xj * data.x(i, cols[l]);
            }
        }
    }
    for (std::size_t j = 0; j < q; ++j)
    {
        for (std::size_t l = 0; l < j; ++l)
        {
            xtx(j, l) = xtx(l, j);
        }
    }
    if (used < q)
    {
        throw DataError("outcome regression: rank-deficient design (" + std::to_string(used) + " rows for "
                        + std::to_string(q) + " coefficients)");
    }

    NuisanceFit fit;
    fit.method = NuisanceMethod::ols;
    try
    {
        fit.theta = solve_linear(xtx, xty, kOlsRankTol);
    }
    catch (const SingularMatrixError& e)
    {
        throw DataError(std::string("outcome regression: rank-deficient design (") + e.what() + ")");
    }
    fit.iterations = 1;
    return fit;
}

void DegradeSpec::validate(std::size_t k) const
{
    if (!(alpha > 0.0 && alpha <= 0.5))
    {
        throw ConfigError("alpha", "alpha ∈ (0, 0.5] is required, got " + text::shortest(alpha));
    }
    if (!(c >= 0.0) || !std::isfinite(c))
    {
        throw ConfigError("c", "scale c must be a finite value >= 0");
    }
    if (mode == DegradeMode::fixed_direction && !direction.empty())
    {
        if (direction.size() != k)
        {
            throw ConfigError("dir", "direction has " + std::to_string(direction.size()) + " entries, theta has "
                                         + std::to_string(k));
        }
        if (std::abs(euclidean_norm(direction) - 1.0) > 1e-9)
        {
            throw ConfigError("dir", "direction must be a unit vector");
        }
    }
}

std::vector<double> default_degrade_direction(const NuisanceSplit& split)
{
    std::vector<double> d(split.size(), 0.0);
    const int blocks = (split.propensity_size > 0 ? 1 : 0) + (split.outcome_size > 0 ? 1 : 0);
    if (blocks == 0)
    {
        return d;
    }
    const double w = 1.0 / std::sqrt(static_cast<double>(blocks));
    if (split.propensity_size > 0)
    {
        d[0] = w;
    }
    if (split.outcome_size > 0)
    {
        d[split.propensity_size] = w;
    }
    return d;
}

NuisanceFit degrade(std::span<const double> theta_star, std::size_t n, const DegradeSpec& spec, RngStream& stream)
{
    const std::size_t k = theta_star.size();
    spec.validate(k);
    if (n == 0)
    {
        throw std::invalid_argument("degrade: n must be at least 1");
    }

    std::vector<double> dir;
    if (spec.mode == DegradeMode::fixed_direction)
    {
        if (spec.direction.empty())
        {
            dir.assign(k, 0.0);
            if (k > 0)
            {
                dir[0] = 1.0;
            }
        }
        else
        {
            dir = spec.direction;
        }
    }
    else
    {
        dir.resize(k);
        double norm = 0.0;
        while (k > 0 && norm == 0.0)
        {
            for (auto& v : dir)
            {
                v = stream.normal();
            }
            norm = euclidean_norm(dir);
        }
        for (auto& v : dir)
        {
            v /= norm;
        }
    }

    const double radius = spec.c * std::pow(static_cast<double>(n), -spec.alpha);
    NuisanceFit fit;
    fit.method = NuisanceMethod::degraded;
    fit.alpha = spec.alpha;
    fit.theta.resize(k);
    for (std::size_t j = 0; j < k; ++j)
    {
        fit.theta[j] = theta_star[j] + radius * dir[j];
    }
    return fit;
}

NuisanceFit fit_misspecified(const Dataset& data, MisspecifiedBlock which)
{
    const std::size_t intercept[] = {0};
    NuisanceFit inner = which == MisspecifiedBlock::propensity ? fit_logistic_mle(data, intercept)
                                                               : fit_ols_outcome(data, true, intercept);
    NuisanceFit fit;
    fit.method = NuisanceMethod::misspecified;
    fit.converged = inner.converged;
    fit.iterations = inner.iterations;
    fit.theta.assign(data.num_covariates(), 0.0);
    fit.theta[0] = inner.theta[0];
    return fit;
}

namespace
{
DegradeSpec parse_degrade(std::string_view args)
{
    DegradeSpec spec;
    bool have_alpha = false;
    bool have_mode = false;
    for (auto item : text::split(args, ','))
    {
        item = text::trim(item);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos)
        {
            throw ConfigError("nuisance", "degraded option '" + std::string(item) + "' is not key=value");
        }
        const auto key = text::trim(item.substr(0, eq));
        const auto value = text::trim(item.substr(eq + 1));
        if (key == "alpha")
        {
            const auto v = text::parse_double(value);
            if (!v)
            {
                throw ConfigError("alpha", "not a number: '" + std::string(value) + "'");
            }
            spec.alpha = *v;
            have_alpha = true;
        }
        else if (key == "mode")
        {
            if (value == "fixed")
            {
                spec.mode = DegradeMode::fixed_direction;
            }
            else if (value == "random")
            {
                spec.mode = DegradeMode::random_direction;
            }
            else
            {
                throw ConfigError("mode", "expected fixed or random, got '" + std::string(value) + "'");
            }
            have_mode = true;
        }
        else if (key == "c")
        {
            const auto v = text::parse_double(value);
            if (!v)
            {
                throw ConfigError("c", "not a number: '" + std::string(value) + "'");
            }
            spec.c = *v;
        }
        else if (key == "dir")
        {
            for (auto part : text::split(value, ';'))
            {
                const auto v = text::parse_double(part);
                if (!v)
                {
                    throw ConfigError("dir", "not a number: '" + std::string(part) + "'");
                }
                spec.direction.push_back(*v);
            }
        }
        else
        {
            throw ConfigError("nuisance", "unknown degraded option '" + std::string(key) + "'");
        }
    }
    if (!have_alpha)
    {
        throw ConfigError("alpha", "degraded strategy needs alpha=<value>");
    }
    if (!have_mode)
    {
        throw ConfigError("mode", "degraded strategy needs mode=<fixed|random>");
    }
    if (!(spec.alpha > 0.0 && spec.alpha <= 0.5))
    {
        throw ConfigError("alpha", "alpha ∈ (0, 0.5] is required, got " + text::shortest(spec.alpha));
    }
    if (!(spec.c >= 0.0) || !std::isfinite(spec.c))
    {
        throw ConfigError("c", "scale c must be a finite value >= 0");
    }
    return spec;
}
}  // namespace

NuisanceStrategy NuisanceStrategy::parse(std::string_view text_in)
{
    const auto s = text::trim(text_in);
    const auto colon = s.find(':');
    const auto head = s.substr(0, colon);
    const auto rest = colon == std::string_view::npos ? std::string_view{} : s.substr(colon + 1);

    NuisanceStrategy st;
    if (head == "oracle" && colon == std::string_view::npos)
    {
        st.kind = Kind::oracle;
    }
    else if (head == "mle" && colon == std::string_view::npos)
    {
        st.kind = Kind::mle;
    }
    else if (head == "degraded")
    {
        st.kind = Kind::degraded;
        st.degrade = parse_degrade(rest);
    }
    else if (head == "misspecified")
    {
        st.kind = Kind::misspecified;
        const auto which = text::trim(rest);
        st.misspecify_propensity = which == "propensity" || which == "both";
        st.misspecify_outcome = which == "outcome" || which == "both";
        if (!st.misspecify_propensity && !st.misspecify_outcome)
        {
            throw ConfigError("nuisance", "misspecified needs propensity, outcome or both");
        }
    }
    else if (head == "fixed")
    {
        st.kind = Kind::fixed;
        if (!text::trim(rest).empty())
        {
            for (auto part : text::split(rest, ','))
            {
                const auto v = text::parse_double(part);
                if (!v)
                {
                    throw ConfigError("nuisance", "fixed theta entry '" + std::string(part) + "' is not a number");
                }
                st.fixed_theta.push_back(*v);
            }
        }
    }
    else
    {
        throw ConfigError("nuisance", "unknown strategy '" + std::string(s)
                                          + "' (expected oracle, mle, degraded:..., misspecified:..., fixed:...)");
    }
    return st;
}

std::string NuisanceStrategy::to_string() const
{
    switch (kind)
    {
    case Kind::oracle:
        return "oracle";
    case Kind::mle:
        return "mle";
    case Kind::degraded:
    {
        std::string s = "degraded:alpha=" + text::shortest(degrade.alpha) + ",mode="
                        + (degrade.mode == DegradeMode::fixed_direction ? "fixed" : "random")
                        + ",c=" + text::shortest(degrade.c);
        if (!degrade.direction.empty())
        {
            s += ",dir=";
            for (std::size_t j = 0; j < degrade.direction.size(); ++j)
            {
                s += (j ? ";" : "") + text::shortest(degrade.direction[j]);
            }
        }
        return s;
    }
    case Kind::misspecified:
        return std::string("misspecified:")
               + (misspecify_propensity && misspecify_outcome ? "both"
                  : misspecify_propensity                     ? "propensity"
                                                              : "outcome");
    case Kind::fixed:
    {
        std::string s = "fixed:";
        for (std::size_t j = 0; j < fixed_theta.size(); ++j)
        {
            s += (j ? "," : "") + text::shortest(fixed_theta[j]);
        }
        return s;
    }
    }
    return {};
}

std::vector<double> true_theta(const MomentFunction& moment, const Truth& truth)
{
    const auto split = moment.split();
    std::vector<double> theta;
    theta.reserve(split.size());
    if (split.propensity_size > 0)
    {
        if (truth.theta1.size() != split.propensity_size)
        {
            throw std::invalid_argument("true propensity coefficients do not match the moment");
        }
        theta.insert(theta.end(), truth.theta1.begin(), truth.theta1.end());
    }
    if (split.outcome_size > 0)
    {
        if (truth.theta2.size() != split.outcome_size)
        {
            throw std::invalid_argument("true outcome coefficients do not match the moment");
        }
        theta.insert(theta.end(), truth.theta2.begin(), truth.theta2.end());
    }
    return theta;
}

NuisanceFit fit_nuisance(const NuisanceStrategy& strategy,
                         const MomentFunction& moment,
                         const Dataset& data,
                         const Truth* truth,
                         RngStream* stream)
{
    const auto split = moment.split();
    const std::size_t k = split.size();
    if (strategy.needs_truth() && truth == nullptr)
    {
        throw ConfigError("nuisance", "strategy '" + strategy.to_string() + "' needs the true nuisance values");
    }

    switch (strategy.kind)
    {
    case NuisanceStrategy::Kind::oracle:
    {
        NuisanceFit fit;
        fit.method = NuisanceMethod::oracle;
        fit.theta = true_theta(moment, *truth);
        return fit;
    }
    case NuisanceStrategy::Kind::degraded:
    {
        if (strategy.degrade.mode == DegradeMode::random_direction && stream == nullptr)
        {
            throw std::invalid_argument("random-direction degradation needs an rng stream");
        }
        DegradeSpec spec = strategy.degrade;
        if (spec.mode == DegradeMode::fixed_direction && spec.direction.empty())
        {
            spec.direction = default_degrade_direction(split);
        }
        RngStream unused(0, 0, 0);
        return degrade(true_theta(moment, *truth), data.size(), spec, stream ? *stream : unused);
    }
    case NuisanceStrategy::Kind::fixed:
    {
        if (strategy.fixed_theta.size() != k)
        {
            throw ConfigError("nuisance", "fixed theta has " + std::to_string(strategy.fixed_theta.size())
                                              + " entries, moment '" + moment.id() + "' needs "
                                              + std::to_string(k));
        }
        NuisanceFit fit;
        fit.method = NuisanceMethod::fixed;
        fit.theta = strategy.fixed_theta;
        return fit;
    }
    case NuisanceStrategy::Kind::mle:
    case NuisanceStrategy::Kind::misspecified:
        break;
    }

    const bool mis = strategy.kind == NuisanceStrategy::Kind::misspecified;
    NuisanceFit fit;
    fit.method = mis ? NuisanceMethod::misspecified : NuisanceMethod::mle;
    if (split.propensity_size > 0)
    {
        NuisanceFit f = mis && strategy.misspecify_propensity ? fit_misspecified(data, MisspecifiedBlock::propensity)
                                                              : fit_logistic_mle(data);
        fit.converged = fit.converged && f.converged;
        fit.iterations = f.iterations;
        fit.theta.insert(fit.theta.end(), f.theta.begin(), f.theta.end());
    }
    if (split.outcome_size > 0)
    {
        NuisanceFit f = mis && strategy.misspecify_outcome ? fit_misspecified(data, MisspecifiedBlock::outcome)
                                                           : fit_ols_outcome(data, true);
        fit.converged = fit.converged && f.converged;
        fit.theta.insert(fit.theta.end(), f.theta.begin(), f.theta.end());
    }
    if (fit.theta.size() != k)
    {
        throw std::invalid_argument("fitted nuisance length does not match moment '" + moment.id() + "'");
    }
    return fit;
}

}  // namespace drlab
