// dispatch.cpp: runtime selection between kernel variants

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "stochlim/kernels.hpp"

namespace stochlim::kernels {

namespace {

constexpr int kUnset = -1;
std::atomic<int> g_forced{kUnset};

bool cpu_has_avx2() noexcept {
#if defined(STOCHLIM_HAVE_AVX2)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa detect() noexcept {
    if (const char* env = std::getenv("STOCHLIM_ISA")) {
        if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Isa::avx2;
    }
    return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

}  // namespace

const char* isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

bool isa_available(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2: return cpu_has_avx2();
    }
    return false;
}

Isa active_isa() noexcept {
    const int forced = g_forced.load(std::memory_order_relaxed);
    if (forced != kUnset) return static_cast<Isa>(forced);
    static const Isa detected = detect();
    return detected;
}

void force_isa(std::optional<Isa> isa) noexcept {
    if (!isa) {
        g_forced.store(kUnset, std::memory_order_relaxed);
        return;
    }
    const Isa target = isa_available(*isa) ? *isa : Isa::scalar;
    g_forced.store(static_cast<int>(target), std::memory_order_relaxed);
}

PhaseSums damped_phase_sums_with(Isa isa, std::span<const double> w_primary, std::span<const double> w_secondary,
                                 std::span<const double> rate_re, std::span<const double> rate_im, double t) {
#if defined(STOCHLIM_HAVE_AVX2)
    if (isa == Isa::avx2 && cpu_has_avx2()) return avx2::damped_phase_sums(w_primary, w_secondary, rate_re, rate_im, t);
#endif
    (void)isa;
    return scalar::damped_phase_sums(w_primary, w_secondary, rate_re, rate_im, t);
}

void angular_reduce_batch_with(Isa isa, std::span<const double> a, std::span<const double> b,
                               std::span<const double> c0, std::span<const double> c1, std::span<double> pv,
                               std::span<double> delta) {
#if defined(STOCHLIM_HAVE_AVX2)
    if (isa == Isa::avx2 && cpu_has_avx2()) return avx2::angular_reduce_batch(a, b, c0, c1, pv, delta);
#endif
    (void)isa;
    scalar::angular_reduce_batch(a, b, c0, c1, pv, delta);
}

PhaseSums damped_phase_sums(std::span<const double> w_primary, std::span<const double> w_secondary,
                            std::span<const double> rate_re, std::span<const double> rate_im, double t) {
    return damped_phase_sums_with(active_isa(), w_primary, w_secondary, rate_re, rate_im, t);
}

void angular_reduce_batch(std::span<const double> a, std::span<const double> b, std::span<const double> c0,
                          std::span<const double> c1, std::span<double> pv, std::span<double> delta) {
    angular_reduce_batch_with(active_isa(), a, b, c0, c1, pv, delta);
}

}  // namespace stochlim::kernels
