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

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "drlab/cli.hpp"
#include "drlab/config.hpp"
#include "drlab/errors.hpp"
#include "drlab/io.hpp"
#include "drlab/kernels.hpp"
#include "drlab/moments.hpp"
#include "drlab/nuisance.hpp"
#include "drlab/sandwich.hpp"
#include "drlab/simlab.hpp"
#include "drlab/text.hpp"
#include "drlab/zsolver.hpp"

namespace drlab::cli
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

std::string utc_now()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const fs::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw Error("cannot write '" + path.string() + "'");
    }
    out << content;
    if (!out)
    {
        throw Error("write to '" + path.string() + "' failed");
    }
}

fs::path write_records(const fs::path& dir, const ScenarioResult& result)
{
    const fs::path path = dir / ("records_" + result.summary.scenario_id + ".csv");
    std::ostringstream ss;
    io::write_records_csv(ss, result.records);
    write_text(path, ss.str());
    return path;
}

void log_scenario(std::ostream& err, const ScenarioResult& r)
{
    err << "scenario " << r.summary.scenario_id << ": " << r.records.size() << " replications";
    std::size_t failures = 0;
    for (const auto& row : r.summary.rows)
    {
        failures += row.failures;
    }
    err << ", " << failures << " failed\n";
}

struct RunOutput
{
    std::vector<ScenarioResult> results;
    std::vector<fs::path> record_files;
};

int finish_run(const fs::path& out_dir,
               const SimulationConfig& cfg,
               const RunOutput& run,
               const std::string& started,
               const char* kind,
               std::size_t workers)
{
    json scenarios = json::array();
    json outputs = json::object();
    for (std::size_t i = 0; i < run.results.size(); ++i)
    {
        const auto& s = run.results[i].summary;
        scenarios.push_back(io::to_json(s));
        outputs[s.scenario_id] = {{"records", run.record_files[i].filename().string()}};
    }
    const json summary = {
        {"artifact_version", DRLAB_VERSION},
        {"run", kind},
        {"config_hash", cfg.hash()},
        {"scenarios", scenarios},
    };
    write_text(out_dir / "summary.json", summary.dump(2) + "\n");

    json seeds = json::object();
    for (const auto& s : cfg.scenarios)
    {
        seeds[s.id] = s.base_seed;
    }
    const json manifest = {
        {"artifact_version", DRLAB_VERSION},
        {"run", kind},
        {"config_hash", cfg.hash()},
        {"base_seed", cfg.scenarios.front().base_seed},
        {"base_seeds", seeds},
        {"kernel_backend", std::string(kernels::to_string(kernels::active_backend()))},
        {"workers", workers},
        {"started", started},
        {"finished", utc_now()},
        {"outputs", outputs},
        {"summary", "summary.json"},
    };
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
    return kOk;
}

template <class Body>
int guarded(std::ostream& err, Body&& body)
{
    try
    {
        return body();
    }
    catch (const ConfigError& e)
    {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    catch (const ScenarioAbort& e)
    {
        err << "scenario aborted: " << e.what() << '\n';
        return kScenarioAbort;
    }
    catch (const std::exception& e)
    {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
}

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
    {
        throw Error("cannot create output directory '" + dir.string() + "'");
    }
}

}  // namespace

std::vector<double> parse_alpha_list(const std::string& s)
{
    std::vector<double> out;
    for (auto part : text::split(s, ','))
    {
        const auto v = text::parse_double(part);
        if (!v)
        {
            throw ConfigError("alphas", "'" + std::string(part) + "' is not a number");
        }
        if (!(*v > 0.0 && *v <= 0.5))
        {
            throw ConfigError("alphas", "alpha ∈ (0, 0.5] is required, got " + text::shortest(*v));
        }
        out.push_back(*v);
    }
    return out;
}

int cmd_simulate(const SimulateArgs& args, std::ostream& err)
{
    return guarded(err, [&] {
        const auto cfg = load_config(args.config);
        ensure_dir(args.out_dir);
        const std::string started = utc_now();
        RunOptions opts;
        opts.workers = args.workers;
        const std::size_t workers = args.workers ? args.workers : default_worker_count();
        RunOutput run;
        for (const auto& sc : cfg.scenarios)
        {
            run.results.push_back(run_scenario(sc, opts));
            log_scenario(err, run.results.back());
            run.record_files.push_back(write_records(args.out_dir, run.results.back()));
        }
        return finish_run(args.out_dir, cfg, run, started, "simulate", workers);
    });
}

int cmd_rate_sweep(const RateSweepArgs& args, std::ostream& err)
{
    return guarded(err, [&] {
        if (args.alphas.empty())
        {
            throw ConfigError("alphas", "at least one alpha is required");
        }
        for (double a : args.alphas)
        {
            if (!(a > 0.0 && a <= 0.5))
            {
                throw ConfigError("alphas", "alpha ∈ (0, 0.5] is required, got " + text::shortest(a));
            }
        }
        const auto base = load_config(args.config);
        ensure_dir(args.out_dir);
        const std::string started = utc_now();
        RunOptions opts;
        opts.workers = args.workers;
        const std::size_t workers = args.workers ? args.workers : default_worker_count();

        SimulationConfig expanded;
        RunOutput run;
        for (const auto& sc : base.scenarios)
        {
            for (double a : args.alphas)
            {
                expanded.scenarios.push_back(sweep_config(sc, a));
                run.results.push_back(run_scenario(expanded.scenarios.back(), opts));
                log_scenario(err, run.results.back());
                run.record_files.push_back(write_records(args.out_dir, run.results.back()));
            }
        }
        return finish_run(args.out_dir, expanded, run, started, "rate-sweep", workers);
    });
}

int cmd_estimate(const EstimateArgs& args, std::ostream& out, std::ostream& err)
{
    Dataset data;
    MomentPtr moment;
    NuisanceStrategy strategy;
    try
    {
        std::ifstream in(args.data);
        if (!in)
        {
            err << "error: cannot open '" << args.data.string() << "'\n";
            return kConfigError;
        }
        data = io::read_observations_csv(in);
        if (!is_known_moment(args.moment))
        {
            throw ConfigError("moment", "unknown moment '" + args.moment + "' (expected aipw, ipw, or, mean)");
        }
        moment = make_moment(args.moment, data.num_covariates());
        strategy = NuisanceStrategy::parse(args.nuisance);
        if (strategy.needs_truth())
        {
            throw ConfigError("nuisance", "strategy '" + strategy.to_string()
                                              + "' needs the true nuisance values, which observed data lack");
        }
        z_quantile(args.ci_level);
        if (!(args.ci_level > 0.0))
        {
            throw ConfigError("ci", "ci level must lie in (0, 1)");
        }
    }
    catch (const DataError& e)
    {
        err << "data error: " << e.what() << '\n';
        return kConfigError;
    }
    catch (const ConfigError& e)
    {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    catch (const std::invalid_argument& e)
    {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }

    try
    {
        const NuisanceFit fit = fit_nuisance(strategy, *moment, data, nullptr, nullptr);
        const SolveReport report = solve(*moment, fit.theta, data);
        if (!report.converged)
        {
            err << "solver did not converge after " << report.iterations << " iterations (residual "
                << text::shortest(report.residual_norm) << ")\n";
            return kNonConvergence;
        }
        const SandwichResult sw = sandwich_variance(*moment, report.psi_hat, fit.theta, data, args.ci_level);
        json j = {
            {"moment", moment->id()},
            {"nuisance", strategy.to_string()},
            {"n", data.size()},
            {"psi_hat", report.psi_hat.size() == 1 ? json(report.psi_hat[0]) : json(report.psi_hat)},
            {"se", sw.se.size() == 1 ? json(sw.se[0]) : json(sw.se)},
            {"ci_level", args.ci_level},
            {"ci_lo", sw.ci_lo.size() == 1 ? json(sw.ci_lo[0]) : json(sw.ci_lo)},
            {"ci_hi", sw.ci_hi.size() == 1 ? json(sw.ci_hi[0]) : json(sw.ci_hi)},
            {"theta", fit.theta},
            {"iterations", report.iterations},
            {"residual_norm", report.residual_norm},
        };
        out << j.dump() << '\n';
        return kOk;
    }
    catch (const ConfigError& e)
    {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    catch (const DataError& e)
    {
        err << "data error: " << e.what() << '\n';
        return kConfigError;
    }
    catch (const std::exception& e)
    {
        err << "estimation failed: " << e.what() << '\n';
        return kNonConvergence;
    }
}

namespace
{

struct Column
{
    const char* name;
    double SummaryRow::*field;
    int precision;
};

constexpr Column kReportColumns[] = {
    {"mean_bias", &SummaryRow::mean_bias, 5},
    {"emp_sd", &SummaryRow::emp_sd, 5},
    {"mean_se", &SummaryRow::mean_se, 5},
    {"se/sd", &SummaryRow::se_sd_ratio, 3},
    {"coverage", &SummaryRow::coverage, 3},
    {"sqrt_n_bias", &SummaryRow::sqrt_n_abs_bias, 4},
    {"taylor_med", &SummaryRow::taylor_median, 4},
    {"taylor_q90", &SummaryRow::taylor_q90, 4},
    {"nuis_rmse", &SummaryRow::nuisance_rmse, 5},
};

bool close(double a, double b)
{
    if (std::isnan(a) || std::isnan(b))
    {
        return std::isnan(a) && std::isnan(b);
    }
    return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a));
}

std::string fixed(double v, int precision)
{
    if (std::isnan(v))
    {
        return "-";
    }
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(precision) << v;
    return ss.str();
}

}  // namespace

int cmd_report(const fs::path& dir, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&]() -> int {
        const fs::path summary_path = dir / "summary.json";
        std::ifstream in(summary_path);
        if (!in)
        {
            err << "error: '" << summary_path.string() << "' not found\n";
            return kConfigError;
        }
        json summary;
        try
        {
            in >> summary;
        }
        catch (const json::exception& e)
        {
            err << "error: cannot parse summary.json: " << e.what() << '\n';
            return kConfigError;
        }

        std::ostringstream table, longcsv;
        longcsv << "scenario_id,alpha,n,metric,value\n";
        table << std::left << std::setw(28) << "scenario" << std::right << std::setw(8) << "n" << std::setw(7)
              << "used";
        for (const auto& c : kReportColumns)
        {
            table << std::setw(12) << c.name;
        }
        table << '\n';

        bool consistent = true;
        for (const auto& block : summary.at("scenarios"))
        {
            const SimSummary stored = io::summary_from_json(block);
            const fs::path records_path = dir / ("records_" + stored.scenario_id + ".csv");
            std::ifstream rin(records_path);
            if (!rin)
            {
                err << "error: '" << records_path.string() << "' not found\n";
                return kConfigError;
            }
            const auto records = io::read_records_csv(rin);
            const std::string alpha = stored.alpha ? text::shortest(*stored.alpha) : "";
            for (const auto& srow : stored.rows)
            {
                const SummaryRow row = summarize_cell(records, srow.n, stored.psi_star);
                if (row.used != srow.used || row.reps != srow.reps)
                {
                    consistent = false;
                }
                table << std::left << std::setw(28) << stored.scenario_id << std::right << std::setw(8) << row.n
                      << std::setw(7) << row.used;
                for (const auto& c : kReportColumns)
                {
                    const double v = row.*(c.field);
                    if (!close(v, srow.*(c.field)))
                    {
                        consistent = false;
                        err << "warning: " << stored.scenario_id << " n=" << row.n << " " << c.name
                            << " re-aggregates to " << text::full_precision(v) << ", summary.json has "
                            << text::full_precision(srow.*(c.field)) << '\n';
                    }
                    table << std::setw(12) << fixed(v, c.precision);
                    longcsv << stored.scenario_id << ',' << alpha << ',' << row.n << ',' << c.name << ','
                            << (std::isnan(v) ? std::string{} : text::full_precision(v)) << '\n';
                }
                longcsv << stored.scenario_id << ',' << alpha << ',' << row.n << ",failures," << row.failures
                        << '\n';
                table << '\n';
            }
        }

        write_text(dir / "report.txt", table.str());
        write_text(dir / "report_long.csv", longcsv.str());
        out << table.str();
        if (!consistent)
        {
            err << "error: records do not reproduce summary.json\n";
            return kFailure;
        }
        return kOk;
    });
}

int cmd_sample(const SampleArgs& args, std::ostream& err)
{
    return guarded(err, [&] {
        args.dgp.validate();
        if (args.n == 0)
        {
            throw ConfigError("n", "must be at least 1");
        }
        RngStream stream(args.seed, scenario_stream_id("sample"), 0);
        const Dataset data = sample(args.dgp, args.n, stream);
        std::ostringstream ss;
        io::write_observations_csv(ss, data);
        write_text(args.out, ss.str());
        return static_cast<int>(kOk);
    });
}

}  // namespace drlab::cli
