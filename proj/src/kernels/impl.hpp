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

#include <cmath>

#include "drlab/kernels.hpp"

namespace drlab::kernels::detail
{

void moment_scalar(const Dataset& data, const MomentBatch& batch, MomentSums& sums);
void logistic_scalar(const Dataset& data,
                     std::span<const std::size_t> columns,
                     std::span<const double> coef,
                     LogisticSums& sums);
void expit_scalar(std::span<const double> eta, std::span<double> out);

#ifdef DRLAB_BUILD_AVX2
void moment_avx2(const Dataset& data, const MomentBatch& batch, MomentSums& sums);
void logistic_avx2(const Dataset& data,
                   std::span<const std::size_t> columns,
                   std::span<const double> coef,
                   LogisticSums& sums);
void expit_avx2(std::span<const double> eta, std::span<double> out);
#endif

inline double expit(double eta)
{
    return 1.0 / (1.0 + std::exp(-eta));
}

}  // namespace drlab::kernels::detail
