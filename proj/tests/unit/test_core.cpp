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
#include <limits>
#include <string>

#include "doctest.h"

#include "drlab/dataset.hpp"
#include "drlab/errors.hpp"
#include "drlab/linalg.hpp"
#include "drlab/text.hpp"

using namespace drlab;

TEST_CASE("matrix products and transpose")
{
    const Matrix a(2, 3, {1, 2, 3, 4, 5, 6});
    const Matrix b(3, 2, {7, 8, 9, 10, 11, 12});
    const Matrix c = a * b;
    CHECK(c == Matrix(2, 2, {58, 64, 139, 154}));
    CHECK(a.transpose() == Matrix(3, 2, {1, 4, 2, 5, 3, 6}));
    CHECK((a + a) == 2.0 * a);
    CHECK((a - a).max_abs() == 0.0);
    const std::vector<double> v{1, 1, 1};
    CHECK(a * v == std::vector<double>{6, 15});
}

TEST_CASE("LU solves and inverts with partial pivoting")
{
    const Matrix a(3, 3, {0, 2, 1, 1, 1, 1, 2, 1, 0});
    const std::vector<double> b{3, 3, 3};
    const auto x = solve_linear(a, b);
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(x[2] == doctest::Approx(1.0).epsilon(1e-14));

    const Matrix inv = LuDecomposition(a).inverse();
    const Matrix id = a * inv;
    CHECK((id - Matrix::identity(3)).max_abs() < 1e-14);
}

TEST_CASE("LU rejects singular and non-finite matrices")
{
    CHECK_THROWS_AS(LuDecomposition(Matrix(2, 2, {1, 2, 2, 4})), SingularMatrixError);
    CHECK_THROWS_AS(LuDecomposition(Matrix(2, 2, {1, 0, 0, 1e-14})), SingularMatrixError);
    CHECK_THROWS_AS(LuDecomposition(Matrix(1, 1, {std::nan("")})), SingularMatrixError);
    CHECK_NOTHROW(LuDecomposition(Matrix(2, 2, {1, 0, 0, 1e-11})));
}

TEST_CASE("norms")
{
    const std::vector<double> v{3, -4};
    CHECK(sup_norm(v) == 4.0);
    CHECK(euclidean_norm(v) == 5.0);
    const std::vector<double> bad{1.0, std::nan("")};
    CHECK(std::isnan(sup_norm(bad)));
}

TEST_CASE("symmetric pivots of a PSD matrix are nonnegative")
{
    const auto piv = symmetric_pivots(Matrix(2, 2, {4, 2, 2, 1}));
    REQUIRE(piv.size() == 2);
    CHECK(piv[0] == 4.0);
    CHECK(std::abs(piv[1]) < 1e-15);
}

TEST_CASE("text helpers")
{
    CHECK(text::trim("  a b \t") == "a b");
    const auto parts = text::split("1, 2,3", ',');
    REQUIRE(parts.size() == 3);
    CHECK(text::parse_double(" 2 ").value() == 2.0);
    CHECK_FALSE(text::parse_double("2x").has_value());
    CHECK_FALSE(text::parse_uint("-1").has_value());
    CHECK(text::full_precision(0.1) == "0.10000000000000001");
    CHECK(text::full_precision(std::nan("")) == "nan");
    const double v = 2.0 / 3.0;
    CHECK(std::stod(text::full_precision(v)) == v);
    CHECK(text::shortest(0.25) == "0.25");
}

TEST_CASE("dataset layout and validation")
{
    std::vector<Observation> rows{{{1.0, 0.5}, 1, 2.0}, {{1.0, -1.0}, 0, 3.0}};
    const Dataset d = Dataset::from_rows(rows);
    CHECK(d.size() == 2);
    CHECK(d.num_covariates() == 2);
    CHECK(d.x(1, 1) == -1.0);
    CHECK(d.treatment()[0] == 1.0);
    const Observation r = d.row(1);
    CHECK(r.a == 0);
    CHECK(r.y == 3.0);

    const std::size_t order[] = {1, 0};
    const Dataset p = d.permuted(order);
    CHECK(p.row(0).y == 3.0);

    std::vector<Observation> bad{{{2.0}, 1, 1.0}};
    CHECK_THROWS_AS(Dataset::from_rows(bad), DataError);
    std::vector<Observation> bad_a{{{1.0}, 2, 1.0}};
    CHECK_THROWS_AS(Dataset::from_rows(bad_a), DataError);
    std::vector<Observation> bad_y{{{1.0}, 1, std::numeric_limits<double>::infinity()}};
    CHECK_THROWS_AS(Dataset::from_rows(bad_y), DataError);
}

TEST_CASE("config errors carry the key")
{
    const ConfigError e("dgp.sigma", "must be positive");
    CHECK(e.key() == "dgp.sigma");
    CHECK(std::string(e.what()).find("dgp.sigma") != std::string::npos);
    const PositivityError p(7, 1e-9);
    CHECK(p.row().value() == 7);
}
