// kernels.hpp: data-parallel inner loops with a scalar reference and
// SIMD variants, selected once at runtime from the host CPU features.
//
// Every variant folds the same blocks of kSumBlock elements; inside a block the
// SIMD variants accumulate lane-wise, so variants agree to rounding level.

#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>

namespace stochlim::kernels {

enum class Isa { scalar, avx2 };

const char* isa_name(Isa isa) noexcept;
bool isa_available(Isa isa) noexcept;

// ISA used by the dispatching entry points below. Chosen from the CPU on first
// use; STOCHLIM_ISA=scalar|avx2 in the environment pins it.
Isa active_isa() noexcept;

// Pin (or with nullopt, release) the dispatch target. Intended for tests and
// benchmarking; requesting an unavailable ISA falls back to scalar.
void force_isa(std::optional<Isa> isa) noexcept;

// Number of elements folded into one partial sum before the partial sums are
// combined; keeps rounding growth logarithmic-like for long node tables.
inline constexpr std::size_t kSumBlock = 512;

struct PhaseSums {
    std::complex<double> primary;
    std::complex<double> secondary;
};

// primary   = sum_j w_primary[j]   * exp(-t * (rate_re[j] + i rate_im[j]))
// secondary = sum_j w_secondary[j] * exp(-t * (rate_re[j] + i rate_im[j]))
// All spans must have the same length. rate_re >= 0 is assumed (damping).
PhaseSums damped_phase_sums(std::span<const double> w_primary, std::span<const double> w_secondary,
                            std::span<const double> rate_re, std::span<const double> rate_im, double t);

// Element-wise angular reduction of (c0 + c1 mu) / (a - b mu) over mu in [-1, 1]:
// pv = principal value, delta = pi * (c0 + c1 mu*) / |b| when the pole
// mu* = a/b lies strictly inside (-1, 1), else 0. a must be nonzero.
void angular_reduce_batch(std::span<const double> a, std::span<const double> b, std::span<const double> c0,
                          std::span<const double> c1, std::span<double> pv, std::span<double> delta);

namespace scalar {
void angular_reduce_one(double a, double b, double c0, double c1, double& pv, double& delta) noexcept;
PhaseSums damped_phase_sums(std::span<const double> w_primary, std::span<const double> w_secondary,
                            std::span<const double> rate_re, std::span<const double> rate_im, double t);
void angular_reduce_batch(std::span<const double> a, std::span<const double> b, std::span<const double> c0,
                          std::span<const double> c1, std::span<double> pv, std::span<double> delta);
}  // namespace scalar

#if defined(STOCHLIM_HAVE_AVX2) || defined(STOCHLIM_DECLARE_AVX2)
namespace avx2 {
PhaseSums damped_phase_sums(std::span<const double> w_primary, std::span<const double> w_secondary,
                            std::span<const double> rate_re, std::span<const double> rate_im, double t);
void angular_reduce_batch(std::span<const double> a, std::span<const double> b, std::span<const double> c0,
                          std::span<const double> c1, std::span<double> pv, std::span<double> delta);
}  // namespace avx2
#endif

// Variant-specific entry points that bypass dispatch (equivalence tests).
PhaseSums damped_phase_sums_with(Isa isa, std::span<const double> w_primary, std::span<const double> w_secondary,
                                 std::span<const double> rate_re, std::span<const double> rate_im, double t);
void angular_reduce_batch_with(Isa isa, std::span<const double> a, std::span<const double> b,
                               std::span<const double> c0, std::span<const double> c1, std::span<double> pv,
                               std::span<double> delta);

}  // namespace stochlim::kernels
