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
#include <initializer_list>
#include <span>
#include <vector>

namespace drlab
{

/// Small dense row-major matrix. Dimensions here are a handful at most.
class Matrix
{
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill)
    {
    }
    Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values);

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    Matrix transpose() const;
    double max_abs() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
std::vector<double> operator*(const Matrix& a, std::span<const double> v);

/// Result of Gaussian elimination with partial pivoting.
class LuDecomposition
{
public:
    /// Throws SingularMatrixError when a pivot falls below rel_tol times the
    /// largest pivot seen (or is exactly zero).
    explicit LuDecomposition(Matrix a, double rel_tol = 1e-12);

    std::vector<double> solve(std::span<const double> b) const;
    Matrix solve(const Matrix& b) const;
    Matrix inverse() const;

    double min_abs_pivot() const noexcept { return min_pivot_; }
    double max_abs_pivot() const noexcept { return max_pivot_; }

private:
    Matrix lu_;
    std::vector<std::size_t> perm_;
    double min_pivot_ = 0.0;
    double max_pivot_ = 0.0;
};

std::vector<double> solve_linear(const Matrix& a, std::span<const double> b, double rel_tol = 1e-12);

/// Pivots of the symmetric elimination of a (no pivoting). Used for PSD checks
/// on symmetric matrices; a zero pivot is skipped together with its row/column.
std::vector<double> symmetric_pivots(const Matrix& a);

double sup_norm(std::span<const double> v);
double euclidean_norm(std::span<const double> v);

}  // namespace drlab
