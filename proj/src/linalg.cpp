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

#include "drlab/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <string>

#include "drlab/errors.hpp"

namespace drlab
{

Matrix::Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values)
    : rows_(rows), cols_(cols), data_(values)
{
    if (data_.size() != rows * cols)
    {
        throw std::invalid_argument("Matrix: initializer size does not match dimensions");
    }
}

Matrix Matrix::identity(std::size_t n)
{
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
    {
        m(i, i) = 1.0;
    }
    return m;
}

Matrix Matrix::transpose() const
{
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
    {
        for (std::size_t j = 0; j < cols_; ++j)
        {
            t(j, i) = (*this)(i, j);
        }
    }
    return t;
}

double Matrix::max_abs() const
{
    double m = 0.0;
    for (double v : data_)
    {
        m = std::max(m, std::abs(v));
    }
    return m;
}

Matrix operator*(const Matrix& a, const Matrix& b)
{
    assert(a.cols() == b.rows());
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
    {
        for (std::size_t l = 0; l < a.cols(); ++l)
        {
            const double ail = a(i, l);
            for (std::size_t j = 0; j < b.cols(); ++j)
            {
                c(i, j) += ail * b(l, j);
            }
        }
    }
    return c;
}

Matrix operator*(double s, const Matrix& a)
{
    Matrix c = a;
    for (double& v : c.data())
    {
        v *= s;
    }
    return c;
}

Matrix operator+(const Matrix& a, const Matrix& b)
{
    assert(a.rows() == b.rows() && a.cols() == b.cols());
    Matrix c = a;
    for (std::size_t i = 0; i < c.data().size(); ++i)
    {
        c.data()[i] += b.data()[i];
    }
    return c;
}

Matrix operator-(const Matrix& a, const Matrix& b)
{
    assert(a.rows() == b.rows() && a.cols() == b.cols());
    Matrix c = a;
    for (std::size_t i = 0; i < c.data().size(); ++i)
    {
        c.data()[i] -= b.data()[i];
    }
    return c;
}

std::vector<double> operator*(const Matrix& a, std::span<const double> v)
{
    assert(a.cols() == v.size());
    std::vector<double> out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
    {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j)
        {
            s += a(i, j) * v[j];
        }
        out[i] = s;
    }
    return out;
}

LuDecomposition::LuDecomposition(Matrix a, double rel_tol) : lu_(std::move(a))
{
    const std::size_t n = lu_.rows();
    if (n != lu_.cols())
    {
        throw std::invalid_argument("LuDecomposition: matrix must be square");
    }
    perm_.resize(n);
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    min_pivot_ = n == 0 ? 0.0 : std::numeric_limits<double>::infinity();

    for (std::size_t col = 0; col < n; ++col)
    {
        std::size_t best = col;
        for (std::size_t r = col + 1; r < n; ++r)
        {
            if (std::abs(lu_(r, col)) > std::abs(lu_(best, col)))
            {
                best = r;
            }
        }
        if (best != col)
        {
            for (std::size_t j = 0; j < n; ++j)
            {
                std::swap(lu_(col, j), lu_(best, j));
            }
            std::swap(perm_[col], perm_[best]);
        }

        const double pivot = lu_(col, col);
        const double mag = std::abs(pivot);
        max_pivot_ = std::max(max_pivot_, mag);
        min_pivot_ = std::min(min_pivot_, mag);
        if (!std::isfinite(pivot) || mag == 0.0 || mag < rel_tol * max_pivot_)
        {
            throw SingularMatrixError("matrix is singular: pivot " + std::to_string(col) + " is "
                                      + std::to_string(mag) + ", largest pivot "
                                      + std::to_string(max_pivot_));
        }

        for (std::size_t r = col + 1; r < n; ++r)
        {
            const double factor = lu_(r, col) / pivot;
            lu_(r, col) = factor;
            for (std::size_t j = col + 1; j < n; ++j)
            {
                lu_(r, j) -= factor * lu_(col, j);
            }
        }
    }
}

std::vector<double> LuDecomposition::solve(std::span<const double> b) const
{
    const std::size_t n = lu_.rows();
    assert(b.size() == n);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        double s = b[perm_[i]];
        for (std::size_t j = 0; j < i; ++j)
        {
            s -= lu_(i, j) * x[j];
        }
        x[i] = s;
    }
    for (std::size_t i = n; i-- > 0;)
    {
        double s = x[i];
        for (std::size_t j = i + 1; j < n; ++j)
        {
            s -= lu_(i, j) * x[j];
        }
        x[i] = s / lu_(i, i);
    }
    return x;
}

Matrix LuDecomposition::solve(const Matrix& b) const
{
    Matrix out(b.rows(), b.cols());
    std::vector<double> column(b.rows());
    for (std::size_t j = 0; j < b.cols(); ++j)
    {
        for (std::size_t i = 0; i < b.rows(); ++i)
        {
            column[i] = b(i, j);
        }
        const auto x = solve(column);
        for (std::size_t i = 0; i < b.rows(); ++i)
        {
            out(i, j) = x[i];
        }
    }
    return out;
}

Matrix LuDecomposition::inverse() const
{
    return solve(Matrix::identity(lu_.rows()));
}

std::vector<double> solve_linear(const Matrix& a, std::span<const double> b, double rel_tol)
{
    return LuDecomposition(a, rel_tol).solve(b);
}

std::vector<double> symmetric_pivots(const Matrix& a)
{
    const std::size_t n = a.rows();
    Matrix w = a;
    std::vector<double> pivots;
    pivots.reserve(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        const double p = w(k, k);
        pivots.push_back(p);
        if (p == 0.0)
        {
            continue;
        }
        for (std::size_t i = k + 1; i < n; ++i)
        {
            const double f = w(i, k) / p;
            for (std::size_t j = k + 1; j < n; ++j)
            {
                w(i, j) -= f * w(k, j);
            }
        }
    }
    return pivots;
}

double sup_norm(std::span<const double> v)
{
    double m = 0.0;
    for (double x : v)
    {
        if (std::isnan(x))
        {
            return x;
        }
        m = std::max(m, std::abs(x));
    }
    return m;
}

double euclidean_norm(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v)
    {
        s += x * x;
    }
    return std::sqrt(s);
}

}  // namespace drlab
