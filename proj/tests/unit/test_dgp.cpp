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
#include <numeric>
#include <set>

#include "doctest.h"
#include "helpers.hpp"

#include "drlab/dgp.hpp"
#include "drlab/errors.hpp"
#include "drlab/nuisance.hpp"

using namespace drlab;
using namespace drlab::testing;

TEST_CASE("truth of the default and special specs")
{
    const Truth t = truth({});
    CHECK(t.psi == 3.0);
    CHECK(t.theta1 == std::vector<double>{0.0, 0.5});
    CHECK(t.theta2 == std::vector<double>{3.0, 2.0});

    DGPSpec no_effect;
    no_effect.tau = 0.0;
    CHECK(truth(no_effect).psi == 1.0);

    DGPSpec flat;
    flat.beta = {0.0, 0.0};
    flat.tau = 5.0;
    CHECK(truth(flat).psi == 5.0);
}

TEST_CASE("counterfactual Monte Carlo confirms psi* = 3")
{
    // Y(1) = beta0 + tau + beta1 x1 + sigma eps, drawn directly.
    RngStream s(314, 1, 0);
    const std::size_t draws = 10000000;
    double acc = 0.0;
    for (std::size_t i = 0; i < draws; ++i)
    {
        acc += 3.0 + 2.0 * s.normal() + s.normal();
    }
    const double mean = acc / static_cast<double>(draws);
    CHECK(std::abs(mean - 3.0) < 4.0 * std::sqrt(5.0 / static_cast<double>(draws)));
}

TEST_CASE("spec validation names the field")
{
    DGPSpec bad;
    bad.sigma = 0.0;
    try
    {
        bad.validate();
        FAIL("expected ConfigError");
    }
    catch (const ConfigError& e)
    {
        CHECK(e.key() == "dgp.sigma");
    }
    DGPSpec nan_gamma;
    nan_gamma.gamma[1] = std::nan("");
    CHECK_THROWS_AS(nan_gamma.validate(), ConfigError);
}

TEST_CASE("streams are reproducible and distinct")
{
    RngStream a(1, 2, 3), b(1, 2, 3), c(1, 2, 4), d(1, 3, 3), e(2, 2, 3);
    std::set<std::uint64_t> firsts;
    for (int i = 0; i < 100; ++i)
    {
        const auto va = a();
        CHECK(va == b());
        if (i == 0)
        {
            firsts = {va, c(), d(), e()};
        }
    }
    CHECK(firsts.size() == 4);
    CHECK(scenario_stream_id("x") != scenario_stream_id("y"));
    RngStream u(9, 9, 9);
    for (int i = 0; i < 1000; ++i)
    {
        const double v = u.uniform();
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("sampling is bit-reproducible")
{
    const Dataset a = default_sample(500, 77);
    const Dataset b = default_sample(500, 77);
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        CHECK(a.x(i, 1) == b.x(i, 1));
        CHECK(a.treatment()[i] == b.treatment()[i]);
        CHECK(a.outcome()[i] == b.outcome()[i]);
    }
}

TEST_CASE("saturated propensity treats every row")
{
    DGPSpec spec;
    spec.gamma = {50.0, 0.0};
    const Dataset d = default_sample(10000, 3, spec);
    CHECK(std::accumulate(d.treatment().begin(), d.treatment().end(), 0.0) == 10000.0);
}

TEST_CASE("near-degenerate outcome")
{
    DGPSpec spec;
    spec.tau = 0.0;
    spec.beta = {0.0, 0.0};
    spec.sigma = 1e-12;
    const Dataset d = default_sample(1000, 4, spec);
    for (double y : d.outcome())
    {
        CHECK(std::abs(y) < 1e-10);
    }
}

TEST_CASE("treatment share and quadrature")
{
    const Dataset d = default_sample(1000000, 5);
    const double share = std::accumulate(d.treatment().begin(), d.treatment().end(), 0.0) / 1e6;
    CHECK(std::abs(share - kMeanPropensity) < 0.002);
    CHECK(mean_propensity({}) == doctest::Approx(kMeanPropensity).epsilon(1e-13));
    CHECK(observed_outcome_mean({}) == doctest::Approx(2.0).epsilon(1e-13));

    DGPSpec shifted;
    shifted.gamma = {0.3, 1.0};
    CHECK(mean_propensity(shifted) == doctest::Approx(kShiftedMeanPropensity).epsilon(1e-12));
}

TEST_CASE("treated-row regression recovers theta2*")
{
    double prev_rmse = 0.0;
    for (std::size_t n : {2000u, 32000u})
    {
        double sq = 0.0;
        const int reps = 50;
        for (int r = 0; r < reps; ++r)
        {
            RngStream s(n, 11, r);
            const Dataset d = sample({}, n, s);
            const auto fit = fit_ols_outcome(d, true);
            sq += std::pow(fit.theta[0] - 3.0, 2) + std::pow(fit.theta[1] - 2.0, 2);
        }
        const double rmse = std::sqrt(sq / reps);
        if (prev_rmse > 0.0)
        {
            // log(rmse ratio) / log(16) should be near -1/2.
            const double slope = std::log(rmse / prev_rmse) / std::log(16.0);
            CHECK(slope == doctest::Approx(-0.5).epsilon(0.3));
        }
        prev_rmse = rmse;
    }
}
