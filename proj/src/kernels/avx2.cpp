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

// AVX2/FMA kernels. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after the dispatcher has confirmed CPU support.

#include <immintrin.h>

#include <array>
#include <cmath>
#include <vector>

#include "impl.hpp"

namespace drlab::kernels::detail
{

namespace
{

// exp(x) for packed doubles: Cody-Waite reduction by ln 2 followed by the
// Cephes (2,3) rational approximation on [-ln2/2, ln2/2]. About 1 ulp over
// the clamped range [-708, 709].
inline __m256d exp_pd(__m256d x)
{
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
    const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);
    const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
    const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
    const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
    const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
    const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
    const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
    const __m256d q3 = _mm256_set1_pd(2.00000000000000000009e0);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d two = _mm256_set1_pd(2.0);

    x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-708.0)), _mm256_set1_pd(709.0));
    const __m256d fx = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(fx, c1, x);
    r = _mm256_fnmadd_pd(fx, c2, r);

    const __m256d rr = _mm256_mul_pd(r, r);
    __m256d px = _mm256_fmadd_pd(p0, rr, p1);
    px = _mm256_fmadd_pd(px, rr, p2);
    px = _mm256_mul_pd(px, r);
    __m256d qx = _mm256_fmadd_pd(q0, rr, q1);
    qx = _mm256_fmadd_pd(qx, rr, q2);
    qx = _mm256_fmadd_pd(qx, rr, q3);
    const __m256d frac = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
    const __m256d er = _mm256_fmadd_pd(two, frac, one);

    const __m128i n32 = _mm256_cvtpd_epi32(fx);
    __m256i bits = _mm256_cvtepi32_epi64(n32);
    bits = _mm256_add_epi64(bits, _mm256_set1_epi64x(1023));
    bits = _mm256_slli_epi64(bits, 52);
    return _mm256_mul_pd(er, _mm256_castsi256_pd(bits));
}

inline __m256d expit_pd(__m256d eta)
{
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d z = exp_pd(_mm256_sub_pd(_mm256_setzero_pd(), eta));
    return _mm256_div_pd(one, _mm256_add_pd(one, z));
}

inline double hsum(__m256d v)
{
    alignas(32) std::array<double, 4> lanes;
    _mm256_store_pd(lanes.data(), v);
    return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

inline double lane(__m256d v, int k)
{
    alignas(32) std::array<double, 4> lanes;
    _mm256_store_pd(lanes.data(), v);
    return lanes[static_cast<std::size_t>(k)];
}

}  // namespace

void moment_avx2(const Dataset& data, const MomentBatch& batch, MomentSums& sums)
{
    const std::size_t n = data.size();
    const std::size_t p = data.num_covariates();
    const double* a = data.treatment().data();
    const double* y = data.outcome().data();
    const bool uses_e = batch.kind == MomentKind::ipw || batch.kind == MomentKind::aipw;
    const bool uses_m = batch.kind == MomentKind::outcome || batch.kind == MomentKind::aipw;
    const std::size_t off2 = batch.kind == MomentKind::aipw ? p : 0;
    const std::size_t k = sums.du.size();

    std::vector<const double*> cols(p);
    for (std::size_t j = 0; j < p; ++j)
    {
        cols[j] = data.column(j).data();
    }

    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d psi = _mm256_set1_pd(batch.psi);
    const __m256d floor = _mm256_set1_pd(batch.propensity_floor);
    __m256d acc_u = _mm256_setzero_pd();
    __m256d acc_uu = _mm256_setzero_pd();
    std::vector<__m256d> acc_du(k, _mm256_setzero_pd());
    std::vector<__m256d> acc_dudu(k, _mm256_setzero_pd());

    const std::size_t blocked = n - n % 4;
    for (std::size_t i = 0; i < blocked; i += 4)
    {
        const __m256d av = _mm256_loadu_pd(a + i);
        const __m256d yv = _mm256_loadu_pd(y + i);
        __m256d e = one;
        __m256d m = _mm256_setzero_pd();
        if (uses_e)
        {
            __m256d eta = _mm256_setzero_pd();
            for (std::size_t j = 0; j < p; ++j)
            {
                eta = _mm256_fmadd_pd(_mm256_set1_pd(batch.propensity_coef[j]), _mm256_loadu_pd(cols[j] + i), eta);
            }
            e = expit_pd(eta);
            const int bad = _mm256_movemask_pd(_mm256_cmp_pd(e, floor, _CMP_LT_OQ));
            if (bad != 0 && !sums.first_violation)
            {
                const int first = __builtin_ctz(static_cast<unsigned>(bad));
                sums.first_violation = i + static_cast<std::size_t>(first);
                sums.violation_value = lane(e, first);
            }
        }
        if (uses_m)
        {
            for (std::size_t j = 0; j < p; ++j)
            {
                m = _mm256_fmadd_pd(_mm256_set1_pd(batch.outcome_coef[j]), _mm256_loadu_pd(cols[j] + i), m);
            }
        }

        __m256d u;
        __m256d g1 = _mm256_setzero_pd();
        __m256d g2 = _mm256_setzero_pd();
        switch (batch.kind)
        {
        case MomentKind::mean:
            u = _mm256_sub_pd(yv, psi);
            break;
        case MomentKind::outcome:
            u = _mm256_sub_pd(m, psi);
            g2 = one;
            break;
        case MomentKind::ipw:
        {
            const __m256d ay_e = _mm256_div_pd(_mm256_mul_pd(av, yv), e);
            u = _mm256_sub_pd(ay_e, psi);
            g1 = _mm256_mul_pd(ay_e, _mm256_sub_pd(e, one));
            break;
        }
        case MomentKind::aipw:
        {
            // a (y - m) / e + m - psi, algebraically the stated form.
            const __m256d resid_e = _mm256_div_pd(_mm256_mul_pd(av, _mm256_sub_pd(yv, m)), e);
            u = _mm256_sub_pd(_mm256_add_pd(resid_e, m), psi);
            g1 = _mm256_mul_pd(resid_e, _mm256_sub_pd(e, one));
            g2 = _mm256_sub_pd(one, _mm256_div_pd(av, e));
            break;
        }
        }
        acc_u = _mm256_add_pd(acc_u, u);
        acc_uu = _mm256_fmadd_pd(u, u, acc_uu);

        if (batch.with_gradient)
        {
            for (std::size_t j = 0; j < p; ++j)
            {
                const __m256d xj = _mm256_loadu_pd(cols[j] + i);
                if (uses_e)
                {
                    const __m256d g = _mm256_mul_pd(g1, xj);
                    acc_du[j] = _mm256_add_pd(acc_du[j], g);
                    acc_dudu[j] = _mm256_fmadd_pd(g, g, acc_dudu[j]);
                }
                if (uses_m)
                {
                    const __m256d g = _mm256_mul_pd(g2, xj);
                    acc_du[off2 + j] = _mm256_add_pd(acc_du[off2 + j], g);
                    acc_dudu[off2 + j] = _mm256_fmadd_pd(g, g, acc_dudu[off2 + j]);
                }
            }
        }
    }

    sums.u += hsum(acc_u);
    sums.uu += hsum(acc_uu);
    for (std::size_t j = 0; j < k; ++j)
    {
        sums.du[j] += hsum(acc_du[j]);
        sums.dudu[j] += hsum(acc_dudu[j]);
    }

    if (blocked < n)
    {
        // Remainder rows go through the reference kernel on a view of the tail.
        Dataset tail(n - blocked, p);
        for (std::size_t j = 0; j < p; ++j)
        {
            auto dst = tail.column(j);
            for (std::size_t i = blocked; i < n; ++i)
            {
                dst[i - blocked] = cols[j][i];
            }
        }
        for (std::size_t i = blocked; i < n; ++i)
        {
            tail.treatment()[i - blocked] = a[i];
            tail.outcome()[i - blocked] = y[i];
        }
        MomentSums rest;
        rest.du.assign(k, 0.0);
        rest.dudu.assign(k, 0.0);
        moment_scalar(tail, batch, rest);
        sums.u += rest.u;
        sums.uu += rest.uu;
        for (std::size_t j = 0; j < k; ++j)
        {
            sums.du[j] += rest.du[j];
            sums.dudu[j] += rest.dudu[j];
        }
        if (rest.first_violation && !sums.first_violation)
        {
            sums.first_violation = blocked + *rest.first_violation;
            sums.violation_value = rest.violation_value;
        }
    }
}

void logistic_avx2(const Dataset& data,
                   std::span<const std::size_t> columns,
                   std::span<const double> coef,
                   LogisticSums& sums)
{
    const std::size_t n = data.size();
    const std::size_t q = columns.size();
    const double* a = data.treatment().data();
    std::vector<const double*> cols(q);
    for (std::size_t j = 0; j < q; ++j)
    {
        cols[j] = data.column(columns[j]).data();
    }

    const __m256d one = _mm256_set1_pd(1.0);
    std::vector<__m256d> acc_score(q, _mm256_setzero_pd());
    std::vector<__m256d> acc_info(q * q, _mm256_setzero_pd());
    std::vector<__m256d> xv(q);

    const std::size_t blocked = n - n % 4;
    for (std::size_t i = 0; i < blocked; i += 4)
    {
        __m256d eta = _mm256_setzero_pd();
        for (std::size_t j = 0; j < q; ++j)
        {
            xv[j] = _mm256_loadu_pd(cols[j] + i);
            eta = _mm256_fmadd_pd(_mm256_set1_pd(coef[j]), xv[j], eta);
        }
        const __m256d e = expit_pd(eta);
        const __m256d r = _mm256_sub_pd(_mm256_loadu_pd(a + i), e);
        const __m256d w = _mm256_mul_pd(e, _mm256_sub_pd(one, e));
        for (std::size_t j = 0; j < q; ++j)
        {
            acc_score[j] = _mm256_fmadd_pd(r, xv[j], acc_score[j]);
            const __m256d wx = _mm256_mul_pd(w, xv[j]);
            for (std::size_t l = j; l < q; ++l)
            {
                acc_info[j * q + l] = _mm256_fmadd_pd(wx, xv[l], acc_info[j * q + l]);
            }
        }
    }
    for (std::size_t j = 0; j < q; ++j)
    {
        sums.score[j] += hsum(acc_score[j]);
        for (std::size_t l = j; l < q; ++l)
        {
            sums.information(j, l) += hsum(acc_info[j * q + l]);
        }
    }

    for (std::size_t i = blocked; i < n; ++i)
    {
        double eta = 0.0;
        for (std::size_t j = 0; j < q; ++j)
        {
            eta += coef[j] * cols[j][i];
        }
        const double e = expit(eta);
        const double r = a[i] - e;
        const double w = e * (1.0 - e);
        for (std::size_t j = 0; j < q; ++j)
        {
            sums.score[j] += r * cols[j][i];
            for (std::size_t l = j; l < q; ++l)
            {
                sums.information(j, l) += w * cols[j][i] * cols[l][i];
            }
        }
    }
}

void expit_avx2(std::span<const double> eta, std::span<double> out)
{
    const std::size_t n = eta.size();
    const std::size_t blocked = n - n % 4;
    for (std::size_t i = 0; i < blocked; i += 4)
    {
        _mm256_storeu_pd(out.data() + i, expit_pd(_mm256_loadu_pd(eta.data() + i)));
    }
    for (std::size_t i = blocked; i < n; ++i)
    {
        out[i] = expit(eta[i]);
    }
}

}  // namespace drlab::kernels::detail
