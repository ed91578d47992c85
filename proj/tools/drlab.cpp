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

#include <array>
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "drlab/cli.hpp"
#include "drlab/errors.hpp"
#include "drlab/text.hpp"

namespace
{

std::array<double, 2> parse_pair(const std::string& key, const std::string& value)
{
    const auto parts = drlab::text::split(value, ',');
    if (parts.size() != 2)
    {
        throw drlab::ConfigError(key, "expected two comma-separated numbers");
    }
    std::array<double, 2> out{};
    for (std::size_t i = 0; i < 2; ++i)
    {
        const auto part = parts[i];
        const auto v = drlab::text::parse_double(part);
        if (!v)
        {
            throw drlab::ConfigError(key, "'" + std::string(part) + "' is not a number");
        }
        out[i] = *v;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv)
{
    namespace cli = drlab::cli;
    CLI::App app{"drlab: Z-estimation with plug-in nuisance parameters and a Monte Carlo lab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", DRLAB_VERSION);

    // Worker count: explicit flag wins, then DRLAB_WORKERS, then hardware.
    std::size_t workers = 0;

    cli::SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "run every scenario in a config file");
    simulate->add_option("--config", sim.config, "scenario config")->required();
    simulate->add_option("--out", sim.out_dir, "output directory")->required();
    simulate->add_option("--workers", workers, "worker threads")->envname("DRLAB_WORKERS");

    cli::RateSweepArgs sweep;
    std::string alphas;
    auto* rate = app.add_subcommand("rate-sweep", "run each scenario under fixed-direction degradation per alpha");
    rate->add_option("--config", sweep.config, "scenario config")->required();
    rate->add_option("--alphas", alphas, "comma-separated alphas in (0, 0.5]")->required();
    rate->add_option("--out", sweep.out_dir, "output directory")->required();
    rate->add_option("--workers", workers, "worker threads")->envname("DRLAB_WORKERS");

    cli::EstimateArgs est;
    auto* estimate = app.add_subcommand("estimate", "estimate psi on an observation CSV");
    estimate->add_option("--data", est.data, "CSV with columns x1..xp,a,y")->required();
    estimate->add_option("--moment", est.moment, "aipw | ipw | or | mean")->required();
    estimate->add_option("--nuisance", est.nuisance, "mle | misspecified:<which> | fixed:<theta>")->required();
    estimate->add_option("--ci", est.ci_level, "confidence level");

    std::filesystem::path report_dir;
    auto* report = app.add_subcommand("report", "tabulate a simulate or rate-sweep output directory");
    report->add_option("--in", report_dir, "run directory")->required();

    cli::SampleArgs smp;
    std::string gamma = "0,0.5", beta = "1,2";
    auto* sample = app.add_subcommand("sample", "draw an observation CSV from the synthetic DGP");
    sample->add_option("--n", smp.n, "rows")->required();
    sample->add_option("--seed", smp.seed, "seed")->required();
    sample->add_option("--out", smp.out, "output CSV")->required();
    sample->add_option("--gamma", gamma, "propensity coefficients");
    sample->add_option("--beta", beta, "outcome coefficients");
    sample->add_option("--tau", smp.dgp.tau, "treatment effect");
    sample->add_option("--sigma", smp.dgp.sigma, "noise SD");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cli::kConfigError;
    }

    if (simulate->parsed())
    {
        sim.workers = workers;
        return cli::cmd_simulate(sim, std::cerr);
    }
    if (rate->parsed())
    {
        try
        {
            sweep.alphas = cli::parse_alpha_list(alphas);
        }
        catch (const drlab::ConfigError& e)
        {
            std::cerr << "config error: " << e.what() << '\n';
            return cli::kConfigError;
        }
        sweep.workers = workers;
        return cli::cmd_rate_sweep(sweep, std::cerr);
    }
    if (estimate->parsed())
    {
        return cli::cmd_estimate(est, std::cout, std::cerr);
    }
    if (report->parsed())
    {
        return cli::cmd_report(report_dir, std::cout, std::cerr);
    }
    try
    {
        smp.dgp.gamma = parse_pair("gamma", gamma);
        smp.dgp.beta = parse_pair("beta", beta);
    }
    catch (const drlab::ConfigError& e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return cli::kConfigError;
    }
    return cli::cmd_sample(smp, std::cerr);
}
