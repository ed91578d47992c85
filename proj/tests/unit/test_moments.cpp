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
#include <random>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"

#include "drlab/errors.hpp"
#include "drlab/moments.hpp"
#include "drlab/zsolver.hpp"

using namespace drlab;
using namespace drlab::testing;

namespace
{

Observation obs(std::vector<double> x, int a, double y)
{
    return Observation{std::move(x), a, y};
}

// theta1 giving e(x) = p at x = (1, anything) through the intercept alone.
std::vector<double> propensity_for(double p)
{
    return {logit(p), 0.0};
}

std::vector<double> true_theta_for_test(const Truth& t)
{
    std::vector<double> theta = t.theta1;
    theta.insert(theta.end(), t.theta2.begin(), t.theta2.end());
    return theta;
}

}  // namespace

TEST_CASE("aipw examples")
{
    const std::vector<double> th2{1.0, 0.0};
    CHECK(aipw_moment(0.0, propensity_for(0.5), th2, obs({1.0, 0.3}, 1, 2.0)) == doctest::Approx(3.0));
    CHECK(aipw_moment(1.0, propensity_for(0.5), th2, obs({1.0, 0.3}, 0, 7.0)) == doctest::Approx(0.0));
}

TEST_CASE("ipw examples")
{
    CHECK(ipw_moment(0.0, propensity_for(0.5), obs({1.0, 0.1}, 1, 3.0)) == doctest::Approx(6.0));
    CHECK(ipw_moment(2.0, propensity_for(0.25), obs({1.0, 0.1}, 0, 9.0)) == doctest::Approx(-2.0));
}

TEST_CASE("outcome-regression examples")
{
    const std::vector<double> th2{1.0, 2.0};
    CHECK(or_moment(0.0, th2, obs({1.0, 0.5}, 1, 0.0)) == 2.0);
    const std::vector<double> zero{0.0, 0.0};
    CHECK(or_moment(0.0, zero, obs({1.0, 0.5}, 0, 4.0)) == 0.0);
}

TEST_CASE("outcome-regression solve is the mean of fitted values")
{
    const Dataset d = make_data({{0.5, -1.0, 2.0}}, {1, 0, 1}, {1.0, 2.0, 3.0});
    const auto m = make_moment("or", 2);
    const std::vector<double> th2{1.0, 2.0};
    const double mean_m = ((1 + 1.0) + (1 - 2.0) + (1 + 4.0)) / 3.0;
    const std::vector<double> psi{mean_m};
    CHECK(std::abs(empirical_moment(*m, psi, th2, d)[0]) < 1e-15);
}

TEST_CASE("saturated propensity reduces aipw and ipw to the sample mean")
{
    const Dataset d = make_data({{0.3, -0.7, 1.1, 0.0}}, {1, 1, 1, 1}, {1.0, 4.0, 2.5, -0.5});
    // expit(40) rounds to exactly 1.
    const std::vector<double> th1{40.0, 0.0};
    REQUIRE(expit(40.0) == 1.0);
    const std::vector<double> th2{-3.0, 7.0};
    std::vector<double> theta = th1;
    theta.insert(theta.end(), th2.begin(), th2.end());

    const auto aipw = make_moment("aipw", 2);
    const auto ipw = make_moment("ipw", 2);
    const double mean_y = (1.0 + 4.0 + 2.5 - 0.5) / 4.0;
    CHECK(solve(*aipw, theta, d).psi_hat[0] == doctest::Approx(mean_y).epsilon(1e-14));
    CHECK(solve(*ipw, th1, d).psi_hat[0] == doctest::Approx(mean_y).epsilon(1e-14));
}

TEST_CASE("positivity floor")
{
    const std::vector<double> th1{-20.0, 0.0};
    const std::vector<double> th2{0.0, 0.0};
    CHECK_THROWS_AS(aipw_moment(0.0, th1, th2, obs({1.0, 0.0}, 1, 1.0)), PositivityError);
    CHECK_THROWS_AS(ipw_moment(0.0, th1, obs({1.0, 0.0}, 0, 1.0)), PositivityError);
    const std::vector<double> ok{-13.0, 0.0};
    CHECK_NOTHROW(ipw_moment(0.0, ok, obs({1.0, 0.0}, 1, 1.0)));
}

TEST_CASE("ipw equals aipw with a zero outcome model")
{
    std::mt19937_64 rng(42);
    std::normal_distribution<double> nd;
    std::bernoulli_distribution bd(0.5);
    const std::vector<double> zero{0.0, 0.0};
    for (int i = 0; i < 1000; ++i)
    {
        const std::vector<double> th1{nd(rng), nd(rng)};
        const Observation o = obs({1.0, nd(rng)}, bd(rng) ? 1 : 0, 3.0 * nd(rng));
        const double psi = 2.0 * nd(rng);
        CHECK(ipw_moment(psi, th1, o) == aipw_moment(psi, th1, zero, o));
    }
}

TEST_CASE("registry")
{
    CHECK(is_known_moment("aipw"));
    CHECK_FALSE(is_known_moment("dr"));
    CHECK_THROWS_AS(make_moment("dr", 2), std::invalid_argument);
    const auto m = make_moment("aipw", 2);
    CHECK(m->dim() == 1);
    CHECK(m->nuisance_dim() == 4);
    CHECK(m->split().propensity_size == 2);
    CHECK(m->is_doubly_robust());
    CHECK_FALSE(make_moment("ipw", 2)->is_doubly_robust());
    CHECK(make_moment("mean", 2)->nuisance_dim() == 0);
}

TEST_CASE("analytic derivatives match central differences at 100 random points")
{
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(-5.0, 5.0);
    std::bernoulli_distribution bd(0.5);

    std::vector<MomentPtr> moments;
    for (const char* id : {"aipw", "ipw", "or", "mean"})
    {
        moments.push_back(make_moment(id, 2));
    }
    moments.push_back(std::make_shared<TransformedMoment>(make_moment("aipw", 2), Matrix(1, 1, {-2.5})));

    for (const auto& m : moments)
    {
        CAPTURE(m->id());
        REQUIRE(m->has_analytic_derivatives());
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial)
        {
            const std::vector<double> psi{ud(rng)};
            std::vector<double> theta(m->nuisance_dim());
            for (auto& t : theta)
            {
                t = nd(rng);
            }
            const Observation o = obs({1.0, nd(rng)}, bd(rng) ? 1 : 0, 3.0 + 2.0 * nd(rng));
            Matrix an, fd;
            m->derivative_psi(psi, theta, o, an);
            numeric_derivative_psi(*m, psi, theta, o, fd);
            for (std::size_t j = 0; j < an.data().size(); ++j)
            {
                worst = std::max(worst, std::abs(an.data()[j] - fd.data()[j]) / std::max(1.0, std::abs(an.data()[j])));
            }
            m->derivative_theta(psi, theta, o, an);
            numeric_derivative_theta(*m, psi, theta, o, fd);
            REQUIRE(an.cols() == theta.size());
            for (std::size_t j = 0; j < an.data().size(); ++j)
            {
                worst = std::max(worst, std::abs(an.data()[j] - fd.data()[j]) / std::max(1.0, std::abs(an.data()[j])));
            }
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("aipw at the truth has mean zero over 10^6 draws")
{
    const Dataset d = default_sample(1000000, 2024);
    const auto m = make_moment("aipw", 2);
    const Truth t = truth({});
    const auto theta = true_theta_for_test(t);
    const std::vector<double> psi{t.psi};
    const double mean_u = empirical_moment(*m, psi, theta, d)[0];
    // SD from the quadrature oracle.
    CHECK(std::abs(mean_u) < 4.0 * std::sqrt(kAipwVarianceAtTruth) / 1e3);
}

TEST_CASE("double robustness at random wrong nuisance blocks")
{
    const Dataset d = default_sample(200000, 99);
    const auto m = make_moment("aipw", 2);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    const std::vector<double> psi{3.0};
    int failures = 0;
    for (int trial = 0; trial < 40; ++trial)
    {
        // Even trials perturb theta2, odd ones theta1.
        std::vector<double> theta{0.0, 0.5, 3.0, 2.0};
        const std::size_t off = trial % 2 == 0 ? 2 : 0;
        theta[off] += 0.5 * nd(rng);
        theta[off + 1] += 0.5 * nd(rng);
        const auto sums = [&] {
            double s = 0.0, ss = 0.0;
            std::vector<double> u(1);
            for (std::size_t i = 0; i < d.size(); ++i)
            {
                m->evaluate(psi, theta, d.row(i), u);
                s += u[0];
                ss += u[0] * u[0];
            }
            return std::pair{s, ss};
        }();
        const double n = static_cast<double>(d.size());
        const double mean = sums.first / n;
        const double sd = std::sqrt(sums.second / n - mean * mean);
        CAPTURE(trial);
        if (std::abs(mean) >= 4.0 * sd / std::sqrt(n))
        {
            ++failures;
        }
    }
    CHECK(failures == 0);
}

TEST_CASE("verify_dr_derivative")
{
    const DGPSpec spec;
    const Truth t = truth(spec);
    SUBCASE("aipw entries vanish")
    {
        const auto m = make_moment("aipw", 2);
        RngStream s(1, 2, 3);
        const std::vector<double> psi{t.psi};
        const auto r = verify_dr_derivative(*m, spec, psi, true_theta_for_test(t), 200000, s);
        CHECK(r.mean.rows() == 1);
        CHECK(r.mean.cols() == 4);
        CHECK(r.max_abs_z() < 4.0);
    }
    SUBCASE("ipw entries match quadrature")
    {
        const auto m = make_moment("ipw", 2);
        RngStream s(1, 2, 4);
        const std::vector<double> psi{t.psi};
        const auto r = verify_dr_derivative(*m, spec, psi, t.theta1, 200000, s);
        CHECK(std::abs(r.mean(0, 0) - kIpwSlopeIntercept) < 4.0 * r.se(0, 0));
        CHECK(std::abs(r.mean(0, 1) - kIpwSlopeX1) < 4.0 * r.se(0, 1));
        CHECK(r.max_abs_z() > 4.0);
    }
    SUBCASE("theta-free moment gives an empty matrix")
    {
        const auto m = make_moment("mean", 2);
        RngStream s(1, 2, 5);
        const std::vector<double> psi{2.0};
        const auto r = verify_dr_derivative(*m, spec, psi, {}, 1000, s);
        CHECK(r.mean.empty());
        CHECK(r.max_abs_z() == 0.0);
    }
    SUBCASE("too few draws")
    {
        const auto m = make_moment("aipw", 2);
        RngStream s(1, 2, 6);
        const std::vector<double> psi{t.psi};
        CHECK_THROWS_AS(verify_dr_derivative(*m, spec, psi, true_theta_for_test(t), 999, s), std::invalid_argument);
    }
}
