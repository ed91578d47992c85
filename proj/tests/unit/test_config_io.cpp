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

#include <cmath>
#include <sstream>
#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"

#include "drlab/config.hpp"
#include "drlab/errors.hpp"
#include "drlab/io.hpp"

using namespace drlab;
using namespace drlab::testing;

namespace
{

const char* kBase = R"(# defaults
base_seed = 7
reps = 200
n = 500, 2000

[scenario a]
moment = aipw
nuisance = mle   # trailing comment
probe_taylor = true

[scenario b]
moment = ipw
nuisance = degraded:alpha=0.3,mode=random,c=1
dgp.gamma = 0, 0.25
)";

std::string key_of(const std::string& text)
{
    try
    {
        parse_config(text);
    }
    catch (const ConfigError& e)
    {
        return e.key();
    }
    return "<none>";
}

}  // namespace

TEST_CASE("parse a two-scenario config")
{
    const auto cfg = parse_config(kBase);
    REQUIRE(cfg.scenarios.size() == 2);
    const auto& a = cfg.scenarios[0];
    CHECK(a.id == "a");
    CHECK(a.base_seed == 7);
    CHECK(a.reps == 200);
    CHECK(a.n_grid == std::vector<std::size_t>{500, 2000});
    CHECK(a.probe_taylor);
    CHECK(a.nuisance.kind == NuisanceStrategy::Kind::mle);
    const auto& b = cfg.scenarios[1];
    CHECK(b.moment == "ipw");
    CHECK(b.dgp.gamma[1] == 0.25);
    CHECK(b.nuisance.degrade.alpha == 0.3);
}

TEST_CASE("config errors name the key")
{
    CHECK(key_of("[scenario a]\nreps = many\n") == "reps");
    CHECK(key_of("[scenario a]\nwidth = 3\n") == "width");
    CHECK(key_of("[scenario a]\ndgp.sigma = -1\n") == "dgp.sigma");
    CHECK(key_of("[scenario a]\nn = 2000, 500\n") == "n");
    CHECK(key_of("[scenario a]\nmoment = dr\n") == "moment");
    CHECK(key_of("reps = 3\n") == "scenario");
    CHECK(key_of("[scenario a]\n[scenario a]\n") == "scenario");
    try
    {
        parse_config("[scenario a]\nnuisance = degraded:alpha=0.7,mode=fixed,c=1\n");
        FAIL("expected ConfigError");
    }
    catch (const ConfigError& e)
    {
        CHECK(e.key() == "nuisance.alpha");
        CHECK(std::string(e.what()).find("alpha ∈ (0, 0.5]") != std::string::npos);
    }
}

TEST_CASE("config hash tracks semantic fields only")
{
    const auto h0 = parse_config(kBase).hash();
    CHECK(h0.size() == 16);

    // Comments, spacing, key order and number spelling do not matter.
    std::string cosmetic = kBase;
    cosmetic.insert(0, "# another comment\n\n");
    cosmetic.replace(cosmetic.find("reps = 200"), 10, "reps=200   ");
    cosmetic.replace(cosmetic.find("dgp.gamma = 0, 0.25"), 19, "dgp.gamma = 0.0,2.5e-1");
    CHECK(parse_config(cosmetic).hash() == h0);

    // A key repeated in a section with its default value is a no-op.
    std::string redundant = kBase;
    redundant += "reps = 200\n";
    CHECK(parse_config(redundant).hash() == h0);

    const std::pair<const char*, const char*> edits[] = {
        {"base_seed = 7", "base_seed = 8"},
        {"reps = 200", "reps = 201"},
        {"n = 500, 2000", "n = 500, 2001"},
        {"probe_taylor = true", "probe_taylor = false"},
        {"moment = ipw", "moment = or"},
        {"alpha=0.3", "alpha=0.31"},
        {"dgp.gamma = 0, 0.25", "dgp.gamma = 0, 0.26"},
    };
    for (const auto& [from, to] : edits)
    {
        std::string changed = kBase;
        changed.replace(changed.find(from), std::string(from).size(), to);
        CAPTURE(to);
        CHECK(parse_config(changed).hash() != h0);
    }
    std::string extra = kBase;
    extra += "dgp.sigma = 2\n";
    CHECK(parse_config(extra).hash() != h0);
}

TEST_CASE("shipped configs parse")
{
    for (const char* name : {"smoke.cfg", "acceptance.cfg", "rate_sweep.cfg"})
    {
        CAPTURE(name);
        CHECK_NOTHROW(load_config(std::string(DRLAB_CONFIG_DIR) + "/" + name));
    }
    CHECK_THROWS_AS(load_config("/nonexistent/x.cfg"), ConfigError);
}

TEST_CASE("records CSV round trip")
{
    std::vector<ReplicationRecord> recs(3);
    recs[0] = {"s", 500, 0, 2.9, 0.11, 2.7, 3.1, true, 0.2, 0.05, true};
    recs[1] = {"s", 500, 1, 1.0 / 3.0, 1e-300, -1e300, 5e-324, false, 0.0, std::nan(""), true};
    const double nan = std::nan("");
    recs[2] = {"s", 2000, 0, nan, nan, nan, nan, false, 0.3, nan, false};

    std::ostringstream out;
    io::write_records_csv(out, recs);
    const std::string text = out.str();
    CHECK(text.substr(0, text.find('\n')) == io::kRecordsHeader);
    CHECK(text.find("s,500,1,0.33333333333333331,") != std::string::npos);
    CHECK(text.find(",0,0,,1\n") != std::string::npos);

    std::istringstream in(text);
    const auto back = io::read_records_csv(in);
    REQUIRE(back.size() == 3);
    CHECK(back[1].psi_hat == recs[1].psi_hat);
    CHECK(back[1].se == recs[1].se);
    CHECK(back[1].ci_hi == recs[1].ci_hi);
    CHECK(std::isnan(back[1].taylor_term));
    CHECK(std::isnan(back[2].psi_hat));
    CHECK_FALSE(back[2].converged);
    CHECK(back[0].covered);

    std::ostringstream again;
    io::write_records_csv(again, back);
    CHECK(again.str() == text);
}

TEST_CASE("records CSV errors report the line")
{
    std::istringstream bad_header("scenario_id,n\n");
    CHECK_THROWS_AS(io::read_records_csv(bad_header), DataError);
    std::istringstream bad_row(std::string(io::kRecordsHeader) + "\ns,500,0,x,1,1,1,1,1,,1\n");
    try
    {
        io::read_records_csv(bad_row);
        FAIL("expected DataError");
    }
    catch (const DataError& e)
    {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("summary JSON round trip keeps NaN as null")
{
    SimSummary s;
    s.scenario_id = "x";
    s.moment = "aipw";
    s.nuisance = "mle";
    s.psi_star = 3.0;
    s.alpha = 0.25;
    SummaryRow r;
    r.n = 500;
    r.reps = 10;
    r.used = 9;
    r.failures = 1;
    r.mean_psi = 1.0 / 3.0;
    r.taylor_median = std::nan("");
    s.rows.push_back(r);
    const auto j = io::to_json(s);
    CHECK(j["rows"][0]["taylor_median"].is_null());
    const auto back = io::summary_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.scenario_id == "x");
    CHECK(back.alpha == 0.25);
    CHECK(back.rows.at(0).mean_psi == r.mean_psi);
    CHECK(std::isnan(back.rows.at(0).taylor_median));
    CHECK(back.rows.at(0).failures == 1);
}

TEST_CASE("observation CSV reader")
{
    std::istringstream ok("x1,a,y\n0.5,1,2\n-1,0,3.5\n");
    const Dataset d = io::read_observations_csv(ok);
    CHECK(d.size() == 2);
    CHECK(d.num_covariates() == 2);
    CHECK(d.x(0, 0) == 1.0);
    CHECK(d.x(1, 1) == -1.0);
    CHECK(d.outcome()[1] == 3.5);

    std::istringstream no_x("a,y\n1,2\n0,4\n");
    CHECK(io::read_observations_csv(no_x).num_covariates() == 1);

    auto line_of_error = [](const std::string& text) -> std::string {
        std::istringstream in(text);
        try
        {
            io::read_observations_csv(in);
        }
        catch (const DataError& e)
        {
            return e.what();
        }
        return "";
    };
    CHECK(line_of_error("x1,a,y\n0.5,1,2\n0.1,2,3\n").find("row 2") != std::string::npos);
    CHECK(line_of_error("x1,a,y\n0.5,1\n").find("row 1") != std::string::npos);
    CHECK(line_of_error("x1,a,y\n0.5,1,abc\n").find("row 1") != std::string::npos);
    CHECK_FALSE(line_of_error("x1,y\n0.5,1\n").empty());
    CHECK_FALSE(line_of_error("").empty());

    std::ostringstream out;
    io::write_observations_csv(out, d);
    std::istringstream in(out.str());
    const Dataset back = io::read_observations_csv(in);
    CHECK(back.x(0, 1) == d.x(0, 1));
    CHECK(back.outcome()[0] == d.outcome()[0]);
}
