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

#include "drlab/dataset.hpp"

#include <cmath>
#include <string>

#include "drlab/errors.hpp"

namespace drlab
{

Dataset::Dataset(std::size_t n, std::size_t p) : n_(n), p_(p), x_(n * p, 0.0), a_(n, 0.0), y_(n, 0.0)
{
    if (p == 0)
    {
        throw DataError("dataset needs at least the intercept column");
    }
    for (std::size_t i = 0; i < n; ++i)
    {
        x_[i] = 1.0;
    }
}

Dataset Dataset::from_rows(std::span<const Observation> rows)
{
    if (rows.empty())
    {
        return Dataset{};
    }
    const std::size_t p = rows.front().x.size();
    Dataset d(rows.size(), p);
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        const auto& r = rows[i];
        if (r.x.size() != p)
        {
            throw DataError("row " + std::to_string(i) + " has " + std::to_string(r.x.size())
                            + " covariates, expected " + std::to_string(p));
        }
        for (std::size_t j = 0; j < p; ++j)
        {
            d.x_[j * d.n_ + i] = r.x[j];
        }
        d.a_[i] = r.a;
        d.y_[i] = r.y;
    }
    d.validate();
    return d;
}

Observation Dataset::row(std::size_t i) const
{
    Observation obs;
    load_row(i, obs);
    return obs;
}

void Dataset::load_row(std::size_t i, Observation& obs) const
{
    obs.x.resize(p_);
    for (std::size_t j = 0; j < p_; ++j)
    {
        obs.x[j] = x_[j * n_ + i];
    }
    obs.a = a_[i] != 0.0 ? 1 : 0;
    obs.y = y_[i];
}

Dataset Dataset::permuted(std::span<const std::size_t> order) const
{
    Dataset d(order.size(), p_);
    for (std::size_t i = 0; i < order.size(); ++i)
    {
        const std::size_t src = order[i];
        for (std::size_t j = 0; j < p_; ++j)
        {
            d.x_[j * d.n_ + i] = x_[j * n_ + src];
        }
        d.a_[i] = a_[src];
        d.y_[i] = y_[src];
    }
    return d;
}

void Dataset::validate() const
{
    if (n_ > 0 && p_ == 0)
    {
        throw DataError("covariates must include the intercept column");
    }
    for (std::size_t i = 0; i < n_; ++i)
    {
        if (a_[i] != 0.0 && a_[i] != 1.0)
        {
            throw DataError("row " + std::to_string(i) + ": treatment must be 0 or 1");
        }
        if (!std::isfinite(y_[i]))
        {
            throw DataError("row " + std::to_string(i) + ": outcome is not finite");
        }
        if (x_[i] != 1.0)
        {
            throw DataError("row " + std::to_string(i) + ": intercept column must equal 1");
        }
        for (std::size_t j = 1; j < p_; ++j)
        {
            if (!std::isfinite(x_[j * n_ + i]))
            {
                throw DataError("row " + std::to_string(i) + ": covariate " + std::to_string(j)
                                + " is not finite");
            }
        }
    }
}

}  // namespace drlab
