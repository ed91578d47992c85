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
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "drlab/dgp.hpp"

namespace drlab::cli
{

enum ExitCode : int
{
    kOk = 0,
    kFailure = 1,
    kConfigError = 2,
    kScenarioAbort = 3,
    kNonConvergence = 4,
};

struct SimulateArgs
{
    std::filesystem::path config;
    std::filesystem::path out_dir;
    std::size_t workers = 0;
};

struct RateSweepArgs
{
    std::filesystem::path config;
    std::vector<double> alphas;
    std::filesystem::path out_dir;
    std::size_t workers = 0;
};

struct EstimateArgs
{
    std::filesystem::path data;
    std::string moment = "aipw";
    std::string nuisance = "mle";
    double ci_level = 0.95;
};

struct SampleArgs
{
    DGPSpec dgp;
    std::size_t n = 1000;
    std::uint64_t seed = 1;
    std::filesystem::path out;
};

/// Writes records_<scenario>.csv per scenario, summary.json and manifest.json.
int cmd_simulate(const SimulateArgs& args, std::ostream& err);
/// One records file and summary block per (scenario, alpha).
int cmd_rate_sweep(const RateSweepArgs& args, std::ostream& err);
/// Prints psi_hat, SE and CI as one JSON object on out.
int cmd_estimate(const EstimateArgs& args, std::ostream& out, std::ostream& err);
/// Re-aggregates the records of a run directory and writes report.txt and
/// report_long.csv; the table is also printed on out.
int cmd_report(const std::filesystem::path& dir, std::ostream& out, std::ostream& err);
/// Draws an observation CSV from the synthetic DGP.
int cmd_sample(const SampleArgs& args, std::ostream& err);

/// Parses "a1,a2,..." into numbers; throws ConfigError("alphas", ...).
std::vector<double> parse_alpha_list(const std::string& text);

}  // namespace drlab::cli
