// avx2.cpp: AVX2/FMA variants of the data-parallel kernels.
//
// Compiled with -mavx2 -mfma; only reached through the dispatcher after a CPU
// feature check. Elementary functions use Cephes-style rational/polynomial
// approximations (about 1 ulp on the reduced range).

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "series.hpp"
#include "stochlim/kernels.hpp"

namespace stochlim::kernels::avx2 {

namespace {

inline __m256d splat(double v) { return _mm256_set1_pd(v); }

template <std::size_t N>
inline __m256d horner(__m256d x, const double (&c)[N]) {
    __m256d acc = splat(c[0]);
    for (std::size_t i = 1; i < N; ++i) acc = _mm256_fmadd_pd(acc, x, splat(c[i]));
    return acc;
}

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// exp(x) for x <= 0; returns 0 below -700 where the result is < 1e-304.
inline __m256d exp_nonpositive(__m256d x) {
    static constexpr double P[] = {1.26177193074810590878E-4, 3.02994407707441961300E-2, 9.99999999999999999910E-1};
    static constexpr double Q[] = {3.00198505138664455042E-6, 2.52448340349684104192E-3, 2.27265548208155028766E-1,
                                   2.00000000000000000009E0};
    const __m256d underflow = _mm256_cmp_pd(x, splat(-700.0), _CMP_LT_OQ);
    x = _mm256_max_pd(x, splat(-700.0));
    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, splat(std::numbers::log2e)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    x = _mm256_fnmadd_pd(n, splat(6.93145751953125E-1), x);
    x = _mm256_fnmadd_pd(n, splat(1.42860682030941723212E-6), x);
    const __m256d xx = _mm256_mul_pd(x, x);
    const __m256d px = _mm256_mul_pd(x, horner(xx, P));
    const __m256d qx = horner(xx, Q);
    __m256d r = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
    r = _mm256_fmadd_pd(splat(2.0), r, splat(1.0));
    const __m256i ni = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(n));
    const __m256i bits = _mm256_add_epi64(_mm256_castpd_si256(r), _mm256_slli_epi64(ni, 52));
    return _mm256_andnot_pd(underflow, _mm256_castsi256_pd(bits));
}

// sin and cos of |x| < 2^30; Cody-Waite reduction by pi/2 with three FMA steps.
inline void sincos(__m256d x, __m256d& s, __m256d& c) {
    static constexpr double S[] = {1.58962301576546568060E-10, -2.50507477628578072866E-8,
                                   2.75573136213857245213E-6,  -1.98412698295895385996E-4,
                                   8.33333333332211858878E-3,  -1.66666666666666307295E-1};
    static constexpr double C[] = {-1.13585365213876817300E-11, 2.08757008419747316778E-9,
                                   -2.75573141792967388112E-7, 2.48015872888517045348E-5,
                                   -1.38888888888730564116E-3, 4.16666666666665929218E-2};
    using namespace detail;
    const __m256d j = _mm256_round_pd(_mm256_mul_pd(x, splat(kTwoOverPi)), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(j, splat(kPio2Hi), x);
    r = _mm256_fnmadd_pd(j, splat(kPio2Mid), r);
    r = _mm256_fnmadd_pd(j, splat(kPio2Lo), r);
    const __m256d z = _mm256_mul_pd(r, r);
    const __m256d sin_r = _mm256_fmadd_pd(_mm256_mul_pd(r, z), horner(z, S), r);
    const __m256d cos_r =
        _mm256_fmadd_pd(_mm256_mul_pd(z, z), horner(z, C), _mm256_fnmadd_pd(splat(0.5), z, splat(1.0)));

    const __m256i q = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(j));
    const __m256i one = _mm256_set1_epi64x(1);
    const __m256i two = _mm256_set1_epi64x(2);
    const __m256d swap = _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(q, one), one));
    const __m256d neg_s = _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(q, two), two));
    const __m256d neg_c =
        _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(_mm256_add_epi64(q, one), two), two));
    const __m256d sign = splat(-0.0);
    s = _mm256_blendv_pd(sin_r, cos_r, swap);
    c = _mm256_blendv_pd(cos_r, sin_r, swap);
    s = _mm256_xor_pd(s, _mm256_and_pd(neg_s, sign));
    c = _mm256_xor_pd(c, _mm256_and_pd(neg_c, sign));
}

// Natural log of finite x > 0 (normal range); +inf maps to +inf, 0 to -inf.
inline __m256d log_positive(__m256d x) {
    static constexpr double P[] = {1.01875663804580931796E-4, 4.97494994976747001425E-1, 4.70579119878881725854E0,
                                   1.44989225341610930846E1,  1.79368678507819816313E1,  7.70838733755885391666E0};
    static constexpr double Q[] = {1.0,
                                   1.12873587189167450590E1,
                                   4.52279145837532221105E1,
                                   8.29875266912776603211E1,
                                   7.11544750618563894466E1,
                                   2.31251620126765340583E1};
    const __m256i bits = _mm256_castpd_si256(x);
    const __m256i exp_field = _mm256_and_si256(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(0x7ff));
    // exponent as double: bias 1022 maps the mantissa into [0.5, 1)
    const __m256i mant_bits = _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000fffffffffffffLL)),
                                              _mm256_set1_epi64x(0x3fe0000000000000LL));
    __m256d m = _mm256_castsi256_pd(mant_bits);
    const __m256d two52 = splat(4503599627370496.0);
    __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(exp_field, _mm256_castpd_si256(two52))), two52);
    e = _mm256_sub_pd(e, splat(1022.0));
    const __m256d small = _mm256_cmp_pd(m, splat(std::numbers::sqrt2 / 2.0), _CMP_LT_OQ);
    e = _mm256_sub_pd(e, _mm256_and_pd(small, splat(1.0)));
    m = _mm256_sub_pd(_mm256_add_pd(m, _mm256_and_pd(small, m)), splat(1.0));

    const __m256d z = _mm256_mul_pd(m, m);
    __m256d y = _mm256_mul_pd(m, _mm256_div_pd(_mm256_mul_pd(z, horner(m, P)), horner(m, Q)));
    y = _mm256_fnmadd_pd(e, splat(2.121944400546905827679e-4), y);
    y = _mm256_fnmadd_pd(splat(0.5), z, y);
    __m256d out = _mm256_add_pd(m, y);
    out = _mm256_fmadd_pd(e, splat(0.693359375), out);

    const __m256d inf = splat(INFINITY);
    out = _mm256_blendv_pd(out, inf, _mm256_cmp_pd(x, inf, _CMP_EQ_OQ));
    out = _mm256_blendv_pd(out, splat(-INFINITY), _mm256_cmp_pd(x, splat(0.0), _CMP_EQ_OQ));
    return out;
}

}  // namespace

PhaseSums damped_phase_sums(std::span<const double> w_primary, std::span<const double> w_secondary,
                            std::span<const double> rate_re, std::span<const double> rate_im, double t) {
    const std::size_t n = rate_re.size();
    const __m256d vt = splat(t);
    const __m256d neg_t = splat(-t);
    PhaseSums total{};
    for (std::size_t start = 0; start < n; start += kSumBlock) {
        const std::size_t stop = std::min(n, start + kSumBlock);
        __m256d pr = _mm256_setzero_pd(), pi = _mm256_setzero_pd();
        __m256d sr = _mm256_setzero_pd(), si = _mm256_setzero_pd();
        std::size_t j = start;
        for (; j + 4 <= stop; j += 4) {
            const __m256d damp = exp_nonpositive(_mm256_mul_pd(neg_t, _mm256_loadu_pd(&rate_re[j])));
            const __m256d phase = _mm256_mul_pd(vt, _mm256_loadu_pd(&rate_im[j]));
            __m256d sn, cs;
            // lanes beyond the reduction range go through libm
            if (_mm256_movemask_pd(_mm256_cmp_pd(_mm256_andnot_pd(splat(-0.0), phase), splat(1e9), _CMP_GT_OQ))) {
                alignas(32) double ph[4], sv[4], cv[4];
                _mm256_store_pd(ph, phase);
                for (int l = 0; l < 4; ++l) {
                    sv[l] = std::sin(ph[l]);
                    cv[l] = std::cos(ph[l]);
                }
                sn = _mm256_load_pd(sv);
                cs = _mm256_load_pd(cv);
            } else {
                sincos(phase, sn, cs);
            }
            const __m256d re = _mm256_mul_pd(damp, cs);
            const __m256d im = _mm256_mul_pd(damp, sn);  // sign applied at the end
            const __m256d wp = _mm256_loadu_pd(&w_primary[j]);
            const __m256d ws = _mm256_loadu_pd(&w_secondary[j]);
            pr = _mm256_fmadd_pd(wp, re, pr);
            pi = _mm256_fmadd_pd(wp, im, pi);
            sr = _mm256_fmadd_pd(ws, re, sr);
            si = _mm256_fmadd_pd(ws, im, si);
        }
        double bpr = hsum(pr), bpi = -hsum(pi), bsr = hsum(sr), bsi = -hsum(si);
        for (; j < stop; ++j) {
            const double damp = std::exp(-t * rate_re[j]);
            const double phase = t * rate_im[j];
            const double re = damp * std::cos(phase);
            const double im = -damp * std::sin(phase);
            bpr += w_primary[j] * re;
            bpi += w_primary[j] * im;
            bsr += w_secondary[j] * re;
            bsi += w_secondary[j] * im;
        }
        total.primary += std::complex<double>(bpr, bpi);
        total.secondary += std::complex<double>(bsr, bsi);
    }
    return total;
}

void angular_reduce_batch(std::span<const double> a, std::span<const double> b, std::span<const double> c0,
                          std::span<const double> c1, std::span<double> pv, std::span<double> delta) {
    using namespace detail;
    const std::size_t n = a.size();
    const __m256d abs_mask = splat(-0.0);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d va = _mm256_loadu_pd(&a[j]);
        const __m256d vb = _mm256_loadu_pd(&b[j]);
        const __m256d vc0 = _mm256_loadu_pd(&c0[j]);
        const __m256d vc1 = _mm256_loadu_pd(&c1[j]);
        const __m256d x = _mm256_div_pd(vb, va);
        const __m256d ax = _mm256_andnot_pd(abs_mask, x);
        const __m256d x2 = _mm256_mul_pd(x, x);

        // series branch (also exact for b == 0)
        __m256d p0 = splat(kAtanhOverX[kSeriesTerms - 1]);
        __m256d p1 = splat(kAtanhRemainder[kSeriesTerms - 1]);
        for (std::size_t k = kSeriesTerms - 1; k-- > 0;) {
            p0 = _mm256_fmadd_pd(p0, x2, splat(kAtanhOverX[k]));
            p1 = _mm256_fmadd_pd(p1, x2, splat(kAtanhRemainder[k]));
        }
        __m256d s0 = p0;
        __m256d s1 = _mm256_mul_pd(x, p1);

        const __m256d use_log = _mm256_cmp_pd(ax, splat(kSeriesSwitch), _CMP_GT_OQ);
        if (_mm256_movemask_pd(use_log)) {
            const __m256d num = _mm256_andnot_pd(abs_mask, _mm256_add_pd(splat(1.0), x));
            const __m256d den = _mm256_andnot_pd(abs_mask, _mm256_sub_pd(splat(1.0), x));
            // series lanes get a harmless ratio so the log stays finite
            const __m256d ratio = _mm256_blendv_pd(splat(1.0), _mm256_div_pd(num, den), use_log);
            const __m256d half_log = _mm256_mul_pd(splat(0.5), log_positive(ratio));
            const __m256d safe_x = _mm256_blendv_pd(splat(1.0), x, use_log);
            const __m256d ls0 = _mm256_div_pd(half_log, safe_x);
            const __m256d ls1 = _mm256_div_pd(_mm256_sub_pd(half_log, safe_x), _mm256_mul_pd(safe_x, safe_x));
            s0 = _mm256_blendv_pd(s0, ls0, use_log);
            s1 = _mm256_blendv_pd(s1, ls1, use_log);
        }
        const __m256d two_over_a = _mm256_div_pd(splat(2.0), va);
        const __m256d vpv = _mm256_mul_pd(two_over_a, _mm256_fmadd_pd(vc1, s1, _mm256_mul_pd(vc0, s0)));
        _mm256_storeu_pd(&pv[j], vpv);

        const __m256d inside = _mm256_cmp_pd(ax, splat(1.0), _CMP_GT_OQ);
        __m256d vdelta = _mm256_setzero_pd();
        if (_mm256_movemask_pd(inside)) {
            const __m256d safe_b = _mm256_blendv_pd(splat(1.0), vb, inside);
            const __m256d weight = _mm256_fmadd_pd(vc1, _mm256_div_pd(va, safe_b), vc0);
            const __m256d positive = _mm256_cmp_pd(weight, _mm256_setzero_pd(), _CMP_GT_OQ);
            const __m256d value =
                _mm256_div_pd(_mm256_mul_pd(splat(std::numbers::pi), weight), _mm256_andnot_pd(abs_mask, safe_b));
            vdelta = _mm256_and_pd(_mm256_and_pd(inside, positive), value);
        }
        _mm256_storeu_pd(&delta[j], vdelta);
    }
    for (; j < n; ++j) scalar::angular_reduce_one(a[j], b[j], c0[j], c1[j], pv[j], delta[j]);
}

}  // namespace stochlim::kernels::avx2
