// scalar.cpp: reference implementations of the data-parallel kernels

#include <algorithm>
#include <cmath>
#include <numbers>

#include "series.hpp"
#include "stochlim/kernels.hpp"

namespace stochlim::kernels::scalar {

void angular_reduce_one(double a, double b, double c0, double c1, double& pv, double& delta) noexcept {
    using namespace detail;
    delta = 0.0;
    if (b == 0.0) {
        pv = 2.0 * c0 / a;
        return;
    }
    const double x = b / a;
    const double ax = std::abs(x);
    double s0 = 0.0;  // atanh(x)/x, or its log-form continuation for |x| > 1
    double s1 = 0.0;  // (atanh(x) - x)/x^2
    if (ax <= kSeriesSwitch) {
        const double x2 = x * x;
        double p0 = kAtanhOverX[kSeriesTerms - 1];
        double p1 = kAtanhRemainder[kSeriesTerms - 1];
        for (std::size_t n = kSeriesTerms - 1; n-- > 0;) {
            p0 = p0 * x2 + kAtanhOverX[n];
            p1 = p1 * x2 + kAtanhRemainder[n];
        }
        s0 = p0;
        s1 = x * p1;
    } else {
        const double log_ratio = std::log(std::abs(1.0 + x) / std::abs(1.0 - x));
        s0 = 0.5 * log_ratio / x;
        s1 = (0.5 * log_ratio - x) / (x * x);
    }
    pv = (2.0 / a) * (c0 * s0 + c1 * s1);
    if (ax > 1.0) {
        const double weight = c0 + c1 * (a / b);
        delta = weight > 0.0 ? std::numbers::pi * weight / std::abs(b) : 0.0;
    }
}

PhaseSums damped_phase_sums(std::span<const double> w_primary, std::span<const double> w_secondary,
                            std::span<const double> rate_re, std::span<const double> rate_im, double t) {
    const std::size_t n = rate_re.size();
    PhaseSums total{};
    for (std::size_t start = 0; start < n; start += kSumBlock) {
        const std::size_t stop = std::min(n, start + kSumBlock);
        double pr = 0.0, pi = 0.0, sr = 0.0, si = 0.0;
        for (std::size_t j = start; j < stop; ++j) {
            const double damp = std::exp(-t * rate_re[j]);
            const double phase = t * rate_im[j];
            const double re = damp * std::cos(phase);
            const double im = -damp * std::sin(phase);
            pr += w_primary[j] * re;
            pi += w_primary[j] * im;
            sr += w_secondary[j] * re;
            si += w_secondary[j] * im;
        }
        total.primary += std::complex<double>(pr, pi);
        total.secondary += std::complex<double>(sr, si);
    }
    return total;
}

void angular_reduce_batch(std::span<const double> a, std::span<const double> b, std::span<const double> c0,
                          std::span<const double> c1, std::span<double> pv, std::span<double> delta) {
    for (std::size_t j = 0; j < a.size(); ++j) angular_reduce_one(a[j], b[j], c0[j], c1[j], pv[j], delta[j]);
}

}  // namespace stochlim::kernels::scalar
