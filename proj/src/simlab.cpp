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

#include "drlab/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "drlab/errors.hpp"
#include "drlab/sandwich.hpp"
#include "drlab/text.hpp"
#include "drlab/zsolver.hpp"

namespace drlab
{

namespace
{
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

void ScenarioConfig::validate(std::size_t min_reps) const
{
    if (id.empty())
    {
        throw ConfigError("id", "scenario id must not be empty");
    }
    for (char c : id)
    {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
        if (!ok)
        {
            throw ConfigError("id", "scenario id '" + id + "' may only use letters, digits, '_', '-', '.'");
        }
    }
    dgp.validate();
    if (!is_known_moment(moment))
    {
        throw ConfigError("moment", "unknown moment '" + moment + "' (expected aipw, ipw, or, mean)");
    }
    if (n_grid.empty())
    {
        throw ConfigError("n", "n grid must not be empty");
    }
    for (std::size_t i = 0; i < n_grid.size(); ++i)
    {
        if (n_grid[i] < 2)
        {
            throw ConfigError("n", "every n must be at least 2");
        }
        if (i > 0 && n_grid[i] <= n_grid[i - 1])
        {
            throw ConfigError("n", "n grid must be strictly increasing");
        }
    }
    if (reps < std::max<std::size_t>(min_reps, 2))
    {
        throw ConfigError("reps", "need at least " + std::to_string(std::max<std::size_t>(min_reps, 2))
                                      + " replications");
    }
    if (!(ci_level > 0.0 && ci_level < 1.0))
    {
        throw ConfigError("ci_level", "must lie in (0, 1)");
    }
    if (nuisance.kind == NuisanceStrategy::Kind::degraded)
    {
        const auto m = make_moment(moment, 2);
        try
        {
            nuisance.degrade.validate(m->nuisance_dim());
        }
        catch (const ConfigError& e)
        {
            throw ConfigError("nuisance", e.what());
        }
    }
    if (nuisance.kind == NuisanceStrategy::Kind::fixed)
    {
        const auto m = make_moment(moment, 2);
        if (nuisance.fixed_theta.size() != m->nuisance_dim())
        {
            throw ConfigError("nuisance", "fixed theta needs " + std::to_string(m->nuisance_dim()) + " entries");
        }
    }
}

std::size_t default_worker_count()
{
    if (const char* env = std::getenv("DRLAB_WORKERS"))
    {
        if (const auto v = text::parse_uint(env); v && *v > 0)
        {
            return static_cast<std::size_t>(*v);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

double taylor_probe(const MomentFunction& moment,
                    std::span<const double> psi_hat,
                    std::span<const double> theta_hat,
                    const Dataset& data)
{
    if (moment.nuisance_dim() == 0)
    {
        return 0.0;
    }
    const Matrix jac = jacobian_theta(moment, psi_hat, theta_hat, data);
    return std::pow(static_cast<double>(data.size()), 0.25) * jac.max_abs();
}

namespace
{

ReplicationRecord run_replication(const ScenarioConfig& config,
                                  const MomentFunction& moment,
                                  const Truth& truth,
                                  std::span<const double> theta_star,
                                  std::size_t n,
                                  std::size_t rep,
                                  std::uint64_t stream_index)
{
    ReplicationRecord rec;
    rec.scenario_id = config.id;
    rec.n = n;
    rec.rep = rep;
    rec.psi_hat = rec.se = rec.ci_lo = rec.ci_hi = rec.theta_err = kNaN;
    rec.taylor_term = kNaN;

    RngStream stream(config.base_seed, scenario_stream_id(config.id), stream_index);
    const Dataset data = sample(config.dgp, n, stream);
    try
    {
        const NuisanceFit fit = fit_nuisance(config.nuisance, moment, data, &truth, &stream);
        double err = 0.0;
        for (std::size_t j = 0; j < theta_star.size(); ++j)
        {
            const double diff = fit.theta[j] - theta_star[j];
            err += diff * diff;
        }
        rec.theta_err = std::sqrt(err);

        const SolveReport report = solve(moment, fit.theta, data);
        rec.psi_hat = report.psi_hat[0];
        if (!report.converged)
        {
            return rec;
        }
        const SandwichResult sw = sandwich_variance(moment, report.psi_hat, fit.theta, data, config.ci_level);
        rec.se = sw.se[0];
        rec.ci_lo = sw.ci_lo[0];
        rec.ci_hi = sw.ci_hi[0];
        rec.covered = rec.ci_lo <= truth.psi && truth.psi <= rec.ci_hi;
        if (config.probe_taylor)
        {
            rec.taylor_term = taylor_probe(moment, report.psi_hat, fit.theta, data);
        }
        rec.converged = true;
    }
    catch (const PositivityError&)
    {
    }
    catch (const ConvergenceError&)
    {
    }
    catch (const SingularMatrixError&)
    {
    }
    catch (const IdentificationError&)
    {
    }
    catch (const DataError&)
    {
    }
    return rec;
}

}  // namespace

SummaryRow summarize_cell(std::span<const ReplicationRecord> records, std::size_t n, double psi_star)
{
    SummaryRow row;
    row.n = n;
    std::vector<const ReplicationRecord*> cell;
    for (const auto& r : records)
    {
        if (r.n == n)
        {
            cell.push_back(&r);
        }
    }
    std::sort(cell.begin(), cell.end(), [](const auto* a, const auto* b) { return a->rep < b->rep; });
    row.reps = cell.size();

    double sum_psi = 0.0, sum_se = 0.0, sum_cov = 0.0, sum_err2 = 0.0;
    std::vector<double> taylor;
    for (const auto* r : cell)
    {
        if (!r->converged)
        {
            continue;
        }
        ++row.used;
        sum_psi += r->psi_hat;
        sum_se += r->se;
        sum_cov += r->covered ? 1.0 : 0.0;
        sum_err2 += r->theta_err * r->theta_err;
        if (!std::isnan(r->taylor_term))
        {
            taylor.push_back(r->taylor_term);
        }
    }
    row.failures = row.reps - row.used;
    if (row.used == 0)
    {
        row.mean_psi = row.mean_bias = row.bias_mcse = row.emp_sd = row.mean_se = kNaN;
        row.se_sd_ratio = row.coverage = row.coverage_mcse = row.sqrt_n_abs_bias = kNaN;
        row.taylor_median = row.taylor_q90 = row.nuisance_rmse = kNaN;
        return row;
    }

    const double used = static_cast<double>(row.used);
    row.mean_psi = sum_psi / used;
    double ss = 0.0;
    for (const auto* r : cell)
    {
        if (r->converged)
        {
            const double dev = r->psi_hat - row.mean_psi;
            ss += dev * dev;
        }
    }
    row.emp_sd = row.used > 1 ? std::sqrt(ss / (used - 1.0)) : kNaN;
    row.mean_bias = row.mean_psi - psi_star;
    row.bias_mcse = row.emp_sd / std::sqrt(used);
    row.mean_se = sum_se / used;
    row.se_sd_ratio = row.mean_se / row.emp_sd;
    row.coverage = sum_cov / used;
    row.coverage_mcse = std::sqrt(row.coverage * (1.0 - row.coverage) / used);
    row.sqrt_n_abs_bias = std::sqrt(static_cast<double>(n)) * std::abs(row.mean_bias);
    row.nuisance_rmse = std::sqrt(sum_err2 / used);
    if (taylor.empty())
    {
        row.taylor_median = row.taylor_q90 = kNaN;
    }
    else
    {
        row.taylor_median = quantile(taylor, 0.5);
        row.taylor_q90 = quantile(taylor, 0.9);
    }
    return row;
}

SimSummary summarize(std::span<const ReplicationRecord> records,
                     const ScenarioConfig& config,
                     std::span<const std::size_t> n_grid)
{
    SimSummary s;
    s.scenario_id = config.id;
    s.moment = config.moment;
    s.nuisance = config.nuisance.to_string();
    s.psi_star = target_psi(config.moment, config.dgp);
    s.ci_level = config.ci_level;
    if (config.nuisance.kind == NuisanceStrategy::Kind::degraded)
    {
        s.alpha = config.nuisance.degrade.alpha;
    }
    for (std::size_t n : n_grid)
    {
        s.rows.push_back(summarize_cell(records, n, s.psi_star));
    }
    return s;
}

double target_psi(std::string_view moment, const DGPSpec& dgp)
{
    return moment == "mean" ? observed_outcome_mean(dgp) : truth(dgp).psi;
}

ScenarioResult run_scenario(const ScenarioConfig& config, const RunOptions& options)
{
    config.validate();
    const auto moment = make_moment(config.moment, 2);
    Truth t = truth(config.dgp);
    const auto theta_star = true_theta(*moment, t);
    t.psi = target_psi(config.moment, config.dgp);

    const std::size_t cells = config.n_grid.size();
    const std::size_t total = cells * config.reps;
    std::vector<ReplicationRecord> records(total);

    const std::size_t workers = std::min(options.workers == 0 ? default_worker_count() : options.workers, total);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&]() {
        while (true)
        {
            const std::size_t idx = next.fetch_add(1, std::memory_order_relaxed);
            if (idx >= total)
            {
                return;
            }
            try
            {
                const std::size_t cell = idx / config.reps;
                const std::size_t rep = idx % config.reps;
                records[idx] = run_replication(config, *moment, t, theta_star, config.n_grid[cell], rep, idx);
            }
            catch (...)
            {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                {
                    failure = std::current_exception();
                }
                next.store(total);
                return;
            }
        }
    };

    if (workers <= 1)
    {
        work();
    }
    else
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
        {
            pool.emplace_back(work);
        }
    }
    if (failure)
    {
        std::rethrow_exception(failure);
    }

    ScenarioResult result;
    result.summary = summarize(records, config, config.n_grid);
    for (const auto& row : result.summary.rows)
    {
        if (static_cast<double>(row.failures) > options.failure_budget * static_cast<double>(row.reps))
        {
            throw ScenarioAbort("scenario '" + config.id + "' at n = " + std::to_string(row.n) + ": "
                                + std::to_string(row.failures) + " of " + std::to_string(row.reps)
                                + " replications failed (budget " + text::shortest(100.0 * options.failure_budget)
                                + "%)");
        }
    }
    result.records = std::move(records);
    return result;
}

ScenarioConfig sweep_config(const ScenarioConfig& base, double alpha)
{
    ScenarioConfig cfg = base;
    cfg.id = base.id + "_alpha" + text::shortest(alpha);
    NuisanceStrategy st;
    st.kind = NuisanceStrategy::Kind::degraded;
    st.degrade.alpha = alpha;
    st.degrade.mode = DegradeMode::fixed_direction;
    st.degrade.c = 1.0;
    if (base.nuisance.kind == NuisanceStrategy::Kind::degraded)
    {
        st.degrade.c = base.nuisance.degrade.c;
        st.degrade.direction = base.nuisance.degrade.direction;
    }
    cfg.nuisance = st;
    cfg.validate();
    return cfg;
}

std::vector<std::pair<double, ScenarioResult>> rate_sweep(const ScenarioConfig& base,
                                                          std::span<const double> alphas,
                                                          const RunOptions& options)
{
    for (double a : alphas)
    {
        if (!(a > 0.0 && a <= 0.5))
        {
            throw ConfigError("alphas", "alpha ∈ (0, 0.5] is required, got " + text::shortest(a));
        }
    }
    std::vector<std::pair<double, ScenarioResult>> out;
    for (double a : alphas)
    {
        out.emplace_back(a, run_scenario(sweep_config(base, a), options));
    }
    return out;
}

RateSlope fit_rate_slope(std::span<const std::pair<double, double>> pairs)
{
    if (pairs.size() < 3)
    {
        throw std::invalid_argument("fit_rate_slope: at least 3 (n, rmse) pairs are required");
    }
    std::vector<double> lx, ly;
    for (const auto& [n, rmse] : pairs)
    {
        if (!(n > 0.0) || !(rmse > 0.0))
        {
            throw std::invalid_argument("fit_rate_slope: n and rmse must be positive");
        }
        lx.push_back(std::log(n));
        ly.push_back(std::log(rmse));
    }
    const double m = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i)
    {
        mx += lx[i];
        my += ly[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i)
    {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0)
    {
        throw std::invalid_argument("fit_rate_slope: n values must not all coincide");
    }
    RateSlope r;
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i)
    {
        const double res = ly[i] - r.intercept - r.slope * lx[i];
        sse += res * res;
    }
    r.slope_se = std::sqrt(sse / (m - 2.0) / sxx);
    return r;
}

double quantile(std::vector<double> values, double prob)
{
    if (values.empty())
    {
        return kNaN;
    }
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace drlab
