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

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "impl.hpp"

namespace drlab::kernels
{

namespace
{

bool cpu_has_avx2() noexcept
{
#if defined(DRLAB_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend initial_backend() noexcept
{
    if (const char* env = std::getenv("DRLAB_KERNEL"))
    {
        if (auto b = parse_backend(env); b && backend_available(*b))
        {
            return *b;
        }
    }
    return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& backend_slot() noexcept
{
    static std::atomic<Backend> slot{initial_backend()};
    return slot;
}

}  // namespace

Backend active_backend() noexcept
{
    return backend_slot().load(std::memory_order_relaxed);
}

void set_backend(Backend backend)
{
    if (!backend_available(backend))
    {
        throw std::invalid_argument("kernel backend '" + std::string(to_string(backend))
                                    + "' is not available on this CPU/build");
    }
    backend_slot().store(backend, std::memory_order_relaxed);
}

bool backend_available(Backend backend) noexcept
{
    switch (backend)
    {
    case Backend::scalar:
        return true;
    case Backend::avx2:
        return cpu_has_avx2();
    }
    return false;
}

std::string_view to_string(Backend backend) noexcept
{
    return backend == Backend::avx2 ? "avx2" : "scalar";
}

std::optional<Backend> parse_backend(std::string_view name) noexcept
{
    if (name == "scalar")
    {
        return Backend::scalar;
    }
    if (name == "avx2")
    {
        return Backend::avx2;
    }
    if (name == "auto")
    {
        return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
    }
    return std::nullopt;
}

std::size_t gradient_size(MomentKind kind, std::size_t num_covariates) noexcept
{
    switch (kind)
    {
    case MomentKind::mean:
        return 0;
    case MomentKind::outcome:
    case MomentKind::ipw:
        return num_covariates;
    case MomentKind::aipw:
        return 2 * num_covariates;
    }
    return 0;
}

MomentSums accumulate_moment(const Dataset& data, const MomentBatch& batch)
{
    return accumulate_moment(active_backend(), data, batch);
}

MomentSums accumulate_moment(Backend backend, const Dataset& data, const MomentBatch& batch)
{
    const std::size_t p = data.num_covariates();
    const bool uses_e = batch.kind == MomentKind::ipw || batch.kind == MomentKind::aipw;
    const bool uses_m = batch.kind == MomentKind::outcome || batch.kind == MomentKind::aipw;
    if ((uses_e && batch.propensity_coef.size() != p) || (uses_m && batch.outcome_coef.size() != p))
    {
        throw std::invalid_argument("accumulate_moment: coefficient length does not match covariates");
    }

    MomentSums sums;
    sums.rows = data.size();
    const std::size_t k = batch.with_gradient ? gradient_size(batch.kind, p) : 0;
    sums.du.assign(k, 0.0);
    sums.dudu.assign(k, 0.0);

#ifdef DRLAB_BUILD_AVX2
    if (backend == Backend::avx2)
    {
        detail::moment_avx2(data, batch, sums);
        return sums;
    }
#endif
    (void)backend;
    detail::moment_scalar(data, batch, sums);
    return sums;
}

LogisticSums accumulate_logistic(const Dataset& data,
                                 std::span<const std::size_t> columns,
                                 std::span<const double> coef)
{
    return accumulate_logistic(active_backend(), data, columns, coef);
}

LogisticSums accumulate_logistic(Backend backend,
                                 const Dataset& data,
                                 std::span<const std::size_t> columns,
                                 std::span<const double> coef)
{
    const std::size_t q = columns.size();
    if (coef.size() != q)
    {
        throw std::invalid_argument("accumulate_logistic: coefficient length does not match columns");
    }
    LogisticSums sums{std::vector<double>(q, 0.0), Matrix(q, q)};
#ifdef DRLAB_BUILD_AVX2
    if (backend == Backend::avx2)
    {
        detail::logistic_avx2(data, columns, coef, sums);
    }
    else
    {
        detail::logistic_scalar(data, columns, coef, sums);
    }
#else
    (void)backend;
    detail::logistic_scalar(data, columns, coef, sums);
#endif
    for (std::size_t j = 0; j < q; ++j)
    {
        for (std::size_t l = 0; l < j; ++l)
        {
            sums.information(j, l) = sums.information(l, j);
        }
    }
    return sums;
}

void expit(std::span<const double> eta, std::span<double> out)
{
    expit(active_backend(), eta, out);
}

void expit(Backend backend, std::span<const double> eta, std::span<double> out)
{
    if (out.size() < eta.size())
    {
        throw std::invalid_argument("expit: output buffer too small");
    }
#ifdef DRLAB_BUILD_AVX2
    if (backend == Backend::avx2)
    {
        detail::expit_avx2(eta, out);
        return;
    }
#endif
    (void)backend;
    detail::expit_scalar(eta, out);
}

}  // namespace drlab::kernels
