// series.hpp: shared coefficients for the kernel variants (internal)

#pragma once

#include <array>
#include <cstddef>

namespace stochlim::kernels::detail {

// |b/a| at or below which the angular reduction switches from the logarithm
// to the Maclaurin series of atanh(x)/x and (atanh(x) - x)/x^2.
inline constexpr double kSeriesSwitch = 0.5;
inline constexpr std::size_t kSeriesTerms = 28;

// 1/(2n+1), n = 0..kSeriesTerms-1: atanh(x)/x = sum_n x^{2n}/(2n+1)
constexpr std::array<double, kSeriesTerms> make_odd_reciprocals(int offset) {
    std::array<double, kSeriesTerms> c{};
    for (std::size_t n = 0; n < kSeriesTerms; ++n) c[n] = 1.0 / static_cast<double>(2 * n + 1 + offset);
    return c;
}

// atanh(x)/x
inline constexpr auto kAtanhOverX = make_odd_reciprocals(0);
// (atanh(x) - x)/x^3 = sum_n x^{2n}/(2n+3)
inline constexpr auto kAtanhRemainder = make_odd_reciprocals(2);

// pi/2 split for Cody-Waite reduction with fused multiply-add
inline constexpr double kPio2Hi = 1.5707963267948966;
inline constexpr double kPio2Mid = 6.123233995736766e-17;
inline constexpr double kPio2Lo = -1.4973849048591698e-33;
inline constexpr double kTwoOverPi = 0.6366197723675814;

}  // namespace stochlim::kernels::detail
