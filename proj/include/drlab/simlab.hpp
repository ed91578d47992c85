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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "drlab/dataset.hpp"
#include "drlab/dgp.hpp"
#include "drlab/moments.hpp"
#include "drlab/nuisance.hpp"

namespace drlab
{

struct ScenarioConfig
{
    std::string id = "scenario";
    DGPSpec dgp;
    std::string moment = "aipw";
    NuisanceStrategy nuisance;
    std::vector<std::size_t> n_grid{500, 2000, 8000};
    std::size_t reps = 2000;
    double ci_level = 0.95;
    std::uint64_t base_seed = 1;
    bool probe_taylor = false;

    /// Throws ConfigError naming the offending key.
    void validate(std::size_t min_reps = 1) const;
};

/// Unavailable numeric fields (failed replications, unprobed taylor terms)
/// are NaN.
struct ReplicationRecord
{
    std::string scenario_id;
    std::size_t n = 0;
    std::size_t rep = 0;
    double psi_hat = 0.0;
    double se = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    bool covered = false;
    double theta_err = 0.0;
    double taylor_term = 0.0;
    bool converged = false;
};

struct SummaryRow
{
    std::size_t n = 0;
    std::size_t reps = 0;
    std::size_t used = 0;
    std::size_t failures = 0;
    double mean_psi = 0.0;
    double mean_bias = 0.0;
    double bias_mcse = 0.0;
    double emp_sd = 0.0;
    double mean_se = 0.0;
    double se_sd_ratio = 0.0;
    double coverage = 0.0;
    double coverage_mcse = 0.0;
    double sqrt_n_abs_bias = 0.0;
    double taylor_median = 0.0;  // NaN when not probed
    double taylor_q90 = 0.0;
    double nuisance_rmse = 0.0;
};

struct SimSummary
{
    std::string scenario_id;
    std::string moment;
    std::string nuisance;
    double psi_star = 0.0;
    double ci_level = 0.95;
    std::optional<double> alpha;
    std::vector<SummaryRow> rows;  // one per n, grid order
};

struct ScenarioResult
{
    std::vector<ReplicationRecord> records;  // sorted by (n grid position, rep)
    SimSummary summary;
};

struct RunOptions
{
    /// 0 picks DRLAB_WORKERS from the environment, else the hardware count.
    std::size_t workers = 0;
    /// Fraction of failed replications per n above which the scenario aborts.
    double failure_budget = 0.05;
};

std::size_t default_worker_count();

/// The value a moment identifies under a DGP: the mean of y for "mean", the
/// mean of Y(1) for the others.
double target_psi(std::string_view moment, const DGPSpec& dgp);

/// Results do not depend on the number of workers: every replication owns
/// the stream (base_seed, scenario id, grid position * reps + rep).
ScenarioResult run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

/// Aggregates records (any order) into per-n rows; failures are excluded.
SimSummary summarize(std::span<const ReplicationRecord> records,
                     const ScenarioConfig& config,
                     std::span<const std::size_t> n_grid);
SummaryRow summarize_cell(std::span<const ReplicationRecord> records, std::size_t n, double psi_star);

/// n^(1/4) * max |dP_nU/dtheta| at the estimates; 0 for a theta-free moment.
double taylor_probe(const MomentFunction& moment,
                    std::span<const double> psi_hat,
                    std::span<const double> theta_hat,
                    const Dataset& data);

/// One scenario per alpha with fixed-direction degradation. The scale and
/// direction come from the base config when it is itself degraded (c = 1 and
/// the default direction otherwise).
std::vector<std::pair<double, ScenarioResult>> rate_sweep(const ScenarioConfig& base,
                                                          std::span<const double> alphas,
                                                          const RunOptions& options = {});
ScenarioConfig sweep_config(const ScenarioConfig& base, double alpha);

struct RateSlope
{
    double slope = 0.0;
    double slope_se = 0.0;
    double intercept = 0.0;
};

/// Least-squares slope of log(rmse) on log(n). Needs >= 3 positive pairs.
RateSlope fit_rate_slope(std::span<const std::pair<double, double>> pairs);

/// Type-7 (linear interpolation) sample quantile of unsorted values.
double quantile(std::vector<double> values, double prob);

}  // namespace drlab
