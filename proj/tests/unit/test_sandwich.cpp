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

#include "doctest.h"
#include "helpers.hpp"

#include "drlab/errors.hpp"
#include "drlab/sandwich.hpp"

using namespace drlab;
using namespace drlab::testing;

namespace
{

class MeanVarianceMoment final : public MomentFunction
{
public:
    std::string id() const override { return "mean_variance"; }
    std::size_t dim() const override { return 2; }
    NuisanceSplit split() const override { return {}; }
    bool is_doubly_robust() const override { return false; }
    void evaluate(std::span<const double> psi,
                  std::span<const double>,
                  const Observation& obs,
                  std::span<double> out) const override
    {
        out[0] = obs.y - psi[0];
        out[1] = obs.y * obs.y - psi[0] * psi[0] - psi[1];
    }
};

}  // namespace

TEST_CASE("sample-mean sandwich on y = (1, 2, 3)")
{
    const Dataset d = make_data({}, {1, 1, 1}, {1.0, 2.0, 3.0});
    const std::vector<double> psi{2.0};
    const auto r = sandwich_variance(*make_moment("mean", 1), psi, {}, d);
    CHECK(r.bread == Matrix(1, 1, {-1.0}));
    CHECK(r.meat(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(r.vhat(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(std::abs(r.se[0] - std::sqrt(2.0 / 9.0)) < 1e-12);
    CHECK(r.ci_lo[0] == doctest::Approx(2.0 - kZ95 * std::sqrt(2.0 / 9.0)).epsilon(1e-12));
    CHECK(r.ci_hi[0] == doctest::Approx(2.0 + kZ95 * std::sqrt(2.0 / 9.0)).epsilon(1e-12));
    CHECK(r.n == 3);
}

TEST_CASE("constant data gives a degenerate interval")
{
    const Dataset d = make_data({}, {1, 1, 1, 1}, {4.5, 4.5, 4.5, 4.5});
    const std::vector<double> psi{4.5};
    const auto r = sandwich_variance(*make_moment("mean", 1), psi, {}, d);
    CHECK(r.meat(0, 0) == 0.0);
    CHECK(r.se[0] == 0.0);
    CHECK(r.ci_lo[0] == 4.5);
    CHECK(r.ci_hi[0] == 4.5);
}

TEST_CASE("mean moment: se^2 n is the 1/n sample variance")
{
    const Dataset d = default_sample(5000, 1);
    const auto m = make_moment("mean", 2);
    const auto sol = solve(*m, {}, d);
    const auto r = sandwich_variance(*m, sol.psi_hat, {}, d);
    double ss = 0.0;
    for (double y : d.outcome())
    {
        ss += (y - sol.psi_hat[0]) * (y - sol.psi_hat[0]);
    }
    CHECK(r.se[0] * r.se[0] * 5000.0 == doctest::Approx(ss / 5000.0).epsilon(1e-12));
}

TEST_CASE("invariance under rescaling of U")
{
    const Dataset d = default_sample(4000, 2);
    const std::vector<double> theta{0.05, 0.55, 2.95, 2.05};
    const auto base = make_moment("aipw", 2);
    const auto sol = solve(*base, theta, d);
    // The identity wrapper evaluates U row by row, like every scaled copy;
    // the base moment takes the batched kernel and sums in another order.
    const auto per_row = std::make_shared<TransformedMoment>(base, Matrix::identity(1));
    const auto ref = sandwich_variance(*per_row, sol.psi_hat, theta, d);
    const auto kernel = sandwich_variance(*base, sol.psi_hat, theta, d);
    CHECK(kernel.vhat(0, 0) == doctest::Approx(ref.vhat(0, 0)).epsilon(1e-12));

    SUBCASE("power-of-two scalings are bit-exact")
    {
        for (double s : {2.0, -0.25, 1024.0})
        {
            const TransformedMoment m(base, Matrix(1, 1, {s}));
            const auto r = sandwich_variance(m, sol.psi_hat, theta, d);
            CHECK(r.bread(0, 0) == s * ref.bread(0, 0));
            CHECK(r.meat(0, 0) == s * s * ref.meat(0, 0));
            CHECK(r.vhat == ref.vhat);
            CHECK(r.se == ref.se);
            CHECK(r.ci_lo == ref.ci_lo);
            CHECK(r.ci_hi == ref.ci_hi);
        }
    }
    SUBCASE("general scalings agree to rounding")
    {
        for (double s : {3.0, -0.1, 17.3})
        {
            const TransformedMoment m(base, Matrix(1, 1, {s}));
            const auto r = sandwich_variance(m, sol.psi_hat, theta, d);
            CHECK(r.vhat(0, 0) == doctest::Approx(ref.vhat(0, 0)).epsilon(1e-12));
        }
    }
    SUBCASE("two-dimensional mixing")
    {
        const Dataset y = default_sample(2000, 3);
        const auto mv = std::make_shared<MeanVarianceMoment>();
        const auto s0 = solve(*mv, {}, y);
        const auto r0 = sandwich_variance(*mv, s0.psi_hat, {}, y);
        const TransformedMoment mixed(mv, Matrix(2, 2, {2.0, 1.0, -1.0, 3.0}));
        const auto r1 = sandwich_variance(mixed, s0.psi_hat, {}, y);
        for (std::size_t i = 0; i < 2; ++i)
        {
            for (std::size_t j = 0; j < 2; ++j)
            {
                CHECK(r1.vhat(i, j) == doctest::Approx(r0.vhat(i, j)).epsilon(1e-9));
            }
        }
        CHECK(r0.vhat(0, 1) == r0.vhat(1, 0));
    }
}

TEST_CASE("vhat is symmetric PSD and the CI contains psi_hat")
{
    const Dataset y = default_sample(1000, 4);
    const MeanVarianceMoment mv;
    const auto s = solve(mv, {}, y);
    const auto r = sandwich_variance(mv, s.psi_hat, {}, y, 0.9);
    CHECK(r.vhat(0, 1) == r.vhat(1, 0));
    for (double p : symmetric_pivots(r.vhat))
    {
        CHECK(p >= 0.0);
    }
    for (std::size_t j = 0; j < 2; ++j)
    {
        CHECK(r.ci_lo[j] <= s.psi_hat[j]);
        CHECK(s.psi_hat[j] <= r.ci_hi[j]);
    }
}

TEST_CASE("singular bread is an identification error")
{
    // U = y does not depend on psi.
    class Flat final : public MomentFunction
    {
    public:
        std::string id() const override { return "flat"; }
        std::size_t dim() const override { return 1; }
        NuisanceSplit split() const override { return {}; }
        bool is_doubly_robust() const override { return false; }
        void evaluate(std::span<const double>, std::span<const double>, const Observation& o,
                      std::span<double> out) const override
        {
            out[0] = o.y;
        }
    };
    const Dataset d = make_data({}, {1, 1}, {1.0, 2.0});
    const std::vector<double> psi{1.5};
    CHECK_THROWS_AS(sandwich_variance(Flat{}, psi, {}, d), IdentificationError);
}

TEST_CASE("normal quantiles")
{
    CHECK(std::abs(z_quantile(0.95) - kZ95) < 1e-12);
    CHECK(std::abs(z_quantile(0.6827) - kZ6827) < 1e-12);
    CHECK(std::abs(z_quantile(0.5) - kZ50) < 1e-12);
    CHECK(std::abs(z_quantile(0.99) - kZ99) < 1e-12);
    CHECK(z_quantile(0.0) == 0.0);
    CHECK(z_quantile(1e-12) < 1e-11);
    CHECK(z_quantile(1.0 - 1e-12) > 7.0);
    CHECK_THROWS_AS(z_quantile(1.0), std::invalid_argument);
    CHECK_THROWS_AS(z_quantile(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(z_quantile(std::nan("")), std::invalid_argument);
}
