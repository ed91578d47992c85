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
#include <span>
#include <vector>

namespace drlab
{

/// One unit: covariates with x[0] == 1 (intercept), binary treatment, outcome.
struct Observation
{
    std::vector<double> x;
    int a = 0;
    double y = 0.0;
};

/// Column-major sample. Column j of the covariates is contiguous, which is the
/// layout the batched kernels stream over. Column 0 is the intercept.
class Dataset
{
public:
    Dataset() = default;
    /// Allocates n rows and p covariate columns (intercept included), all zero
    /// except the intercept column.
    Dataset(std::size_t n, std::size_t p);

    static Dataset from_rows(std::span<const Observation> rows);

    std::size_t size() const noexcept { return n_; }
    std::size_t num_covariates() const noexcept { return p_; }
    bool empty() const noexcept { return n_ == 0; }

    std::span<const double> column(std::size_t j) const { return {x_.data() + j * n_, n_}; }
    std::span<double> column(std::size_t j) { return {x_.data() + j * n_, n_}; }
    std::span<const double> treatment() const noexcept { return a_; }
    std::span<double> treatment() noexcept { return a_; }
    std::span<const double> outcome() const noexcept { return y_; }
    std::span<double> outcome() noexcept { return y_; }

    double x(std::size_t row, std::size_t j) const { return x_[j * n_ + row]; }

    Observation row(std::size_t i) const;
    /// Fills obs in place, reusing its covariate buffer.
    void load_row(std::size_t i, Observation& obs) const;

    /// New dataset with rows reordered as data[order[0]], data[order[1]], ...
    Dataset permuted(std::span<const std::size_t> order) const;

    /// Throws DataError if an invariant (binary a, finite values, unit
    /// intercept column) is broken; the message names the first bad row.
    void validate() const;

private:
    std::size_t n_ = 0;
    std::size_t p_ = 0;
    std::vector<double> x_;
    std::vector<double> a_;
    std::vector<double> y_;
};

}  // namespace drlab
