#include <doctest.h>

#include <array>
#include <cmath>
#include <complex>
#include <random>

#include "stochlim/decay.hpp"
#include "stochlim/errors.hpp"
#include "stochlim/quadrature.hpp"

using namespace stochlim;
using cd = std::complex<double>;

namespace {

ModelConfig gaussian_polaron() { return ModelConfig::polaron(RadialProfile::gaussian(1.0)); }
ModelConfig bump_polaron() { return ModelConfig::polaron(RadialProfile::compact_bump(1.0, 2.0)); }

// 4π∫p²|f|² exp(-t gg(p)) dp straight from gg_minus at every node
cd survival_direct(const ModelConfig& m, const SmearingFunction& f, double t, double p_max) {
    const std::array<double, 2> bp{0.0, p_max};
    auto g = quad::pointwise<cd>([&](double p) {
        const ComplexRate r = gg_minus(m, p);
        return 4.0 * M_PI * p * p * f(p) * std::exp(-t * cd(r.re, r.im));
    });
    return quad::integrate<cd>(g, bp, quad::Controls{1e-11, 1e-14, 4000}).value;
}

DecayCurve synthetic(const std::vector<double>& t, auto fn) {
    DecayCurve c;
    c.times = t;
    for (double x : t) c.values.push_back(fn(x));
    return c;
}

}  // namespace

TEST_CASE("kernel names round-trip") {
    for (KernelKind k : {KernelKind::full, KernelKind::quadratic_model, KernelKind::closed_form})
        CHECK(parse_kernel(kernel_name(k)) == k);
    CHECK_FALSE(parse_kernel("bogus").has_value());
}

TEST_CASE("gaussian closed form") {
    CHECK(std::abs(gaussian_closed_form(1.0, 1.0, 1.0)) == doctest::Approx(3.3109476362505582710).epsilon(1e-14));
    const cd x0 = gaussian_closed_form(2.0, 4.0, 0.0);
    CHECK(x0.real() == doctest::Approx(std::pow(M_PI / 4.0, 1.5)));
    CHECK(x0.imag() == 0.0);
    // principal branch: continuous in t, phase -> 3π/4 at late times
    const cd late = gaussian_closed_form(1.0, 1.0, 1e8);
    CHECK(std::arg(late) == doctest::Approx(0.75 * M_PI).epsilon(1e-6));
    CHECK_THROWS_AS(gaussian_closed_form(1.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("time grids") {
    const auto g = log_time_grid(0.1, 1000.0, 5);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == 0.1);
    CHECK(g.back() == 1000.0);
    CHECK(g[2] == doctest::Approx(10.0));
    const auto d = default_time_grid(2.0, 10.0);
    CHECK(d.size() == 64);
    CHECK(d.front() == doctest::Approx(0.05));
    CHECK(d.back() == doctest::Approx(5e4));
    CHECK(default_time_grid(0.0, 10.0, 8).front() == doctest::Approx(1e-2));
    CHECK_THROWS_AS(log_time_grid(1.0, 1.0, 4), std::invalid_argument);
}

TEST_CASE("X(0) is the smearing mass for every kernel") {
    const auto f = SmearingFunction::normalized_gaussian(25.0);
    for (KernelKind k : {KernelKind::full, KernelKind::quadratic_model}) {
        const cd x = survival_amplitude(gaussian_polaron(), f, 0.0, {}, k);
        CHECK(x.real() == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(std::abs(x.imag()) < 1e-12);
    }
    CHECK_THROWS_AS(survival_amplitude(gaussian_polaron(), f, 1.0, {}, KernelKind::closed_form), std::invalid_argument);
    CHECK_THROWS_AS(survival_amplitude(gaussian_polaron(), f, -1.0, {}, KernelKind::full), std::invalid_argument);
}

TEST_CASE("quadratic model equals the closed form with its phase") {
    const auto m = gaussian_polaron();
    const SmallPModel sp = small_p_model(m);
    for (double B : {5.0, 25.0}) {
        const auto f = SmearingFunction::normalized_gaussian(B);
        for (double t : {0.01, 0.3, 4.0, 60.0}) {
            const cd num = survival_amplitude(m, f, t, {}, KernelKind::quadratic_model);
            const cd ref = f.normalization() * gaussian_closed_form(sp.A, B, t) * std::polar(1.0, -t * sp.constant);
            CHECK(std::abs(num - ref) <= 1e-7 * std::abs(ref));
        }
    }
}

TEST_CASE("closed-form curve carries normalization and phase") {
    const auto m = gaussian_polaron();
    const auto f = SmearingFunction::gaussian(25.0, 2.0);
    const std::vector<double> t{0.0, 0.5, 3.0};
    const DecayCurve c = build_decay_curve(m, f, t, {}, KernelKind::closed_form);
    const SmallPModel sp = small_p_model(m);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const cd ref = 2.0 * gaussian_closed_form(sp.A, 25.0, t[i]) * std::polar(1.0, -t[i] * sp.constant);
        CHECK(std::abs(c.values[i] - ref) <= 1e-14 * std::abs(ref));
    }
    CHECK(c.meta.A.value() == doctest::Approx(sp.A));
    CHECK(c.meta.phase_constant == doctest::Approx(sp.constant));
}

TEST_CASE("quadratic model warns when smearing leaks past sqrt(2)") {
    const auto m = gaussian_polaron();
    SurvivalDiagnostics d5, d100;
    survival_amplitude(m, SmearingFunction::normalized_gaussian(5.0), 1.0, {}, KernelKind::quadratic_model, &d5);
    survival_amplitude(m, SmearingFunction::normalized_gaussian(100.0), 1.0, {}, KernelKind::quadratic_model, &d100);
    CHECK(d5.mass_beyond_sqrt2 > 1e-5);
    CHECK_FALSE(d5.warnings.empty());
    CHECK(d100.warnings.empty());
}

TEST_CASE("full kernel matches direct quadrature of gg_minus") {
    const auto f = SmearingFunction::normalized_gaussian(100.0);
    const auto m = bump_polaron();
    for (double t : {0.05, 0.4, 2.0}) {
        const cd fast = survival_amplitude(m, f, t, {}, KernelKind::full);
        const cd ref = survival_direct(m, f, t, 0.8);
        CHECK(std::abs(fast - ref) <= 1e-8 * std::abs(ref));
    }
    // a smearing that straddles the damping threshold
    const auto g = gaussian_polaron();
    const auto wide = SmearingFunction::normalized_gaussian(5.0);
    for (double t : {0.02, 0.2}) {
        const cd fast = survival_amplitude(g, wide, t, {}, KernelKind::full);
        const cd ref = survival_direct(g, wide, t, wide.support_radius(8.0));
        CHECK(std::abs(fast - ref) <= 1e-7 * std::abs(ref));
    }
}

TEST_CASE("rate table interpolates the kernel across the threshold") {
    const auto m = gaussian_polaron();
    const RateTable table = RateTable::build(m, 2.5, {});
    CHECK(table.worst_tail() == 0.0);
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 2.5);
    std::vector<double> ps{0.0, std::sqrt(2.0) - 1e-6, std::sqrt(2.0) + 1e-6, 2.5};
    for (int i = 0; i < 40; ++i) ps.push_back(u(rng));
    for (double p : ps) {
        const ComplexRate a = table(p), b = gg_minus(m, p, {1e-12, 1e-15, 4000, 8.0, 1e-3});
        const double scale = std::hypot(b.re, b.im);
        CHECK(std::abs(a.re - b.re) <= 1e-9 * scale);
        CHECK(std::abs(a.im - b.im) <= 1e-9 * scale);
    }
}

TEST_CASE("property: |X(t)| never exceeds X(0) for the full kernel") {
    const auto f = SmearingFunction::normalized_gaussian(5.0);
    const auto times = log_time_grid(0.01, 100.0, 12);
    const DecayCurve c = build_decay_curve(gaussian_polaron(), f, times, {}, KernelKind::full);
    for (const cd& x : c.values) CHECK(std::abs(x) <= 1.0 + 1e-10);
}

TEST_CASE("zero cutoff gives a constant modulus") {
    const auto f = SmearingFunction::normalized_gaussian(25.0);
    const ModelConfig z = ModelConfig::polaron(RadialProfile::zero());
    const DecayCurve c = build_decay_curve(z, f, default_time_grid(0.0, 25.0, 64), {}, KernelKind::full);
    for (const cd& x : c.values) CHECK(std::abs(x) == doctest::Approx(1.0).epsilon(1e-12));
    const TailFit fit = fit_tail_exponent(c);
    CHECK(fit.classification == TailClass::power_law);
    CHECK(std::abs(fit.exponent) < 1e-10);
}

TEST_CASE("curves do not depend on the thread count") {
    const auto f = SmearingFunction::normalized_gaussian(25.0);
    const auto times = log_time_grid(0.05, 500.0, 9);
    const DecayCurve a = build_decay_curve(bump_polaron(), f, times, {}, KernelKind::full, 1);
    const DecayCurve b = build_decay_curve(bump_polaron(), f, times, {}, KernelKind::full, 3);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("tail fitting on synthetic curves") {
    const auto t = log_time_grid(1.0, 1e4, 40);
    const TailFit p = fit_tail_exponent(synthetic(t, [](double x) { return cd(3.0 * std::pow(x, -1.5), 0.0); }),
                                        WindowRule::explicit_range(10.0, 1e4));
    CHECK(p.exponent == doctest::Approx(-1.5).epsilon(1e-12));
    CHECK(p.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(p.classification == TailClass::power_law);

    const auto tl = log_time_grid(1.0, 100.0, 40);
    const TailFit e = fit_tail_exponent(synthetic(tl, [](double x) { return cd(std::exp(-0.2 * x), 0.0); }),
                                        WindowRule::explicit_range(10.0, 100.0));
    CHECK(e.classification == TailClass::exponential);
    CHECK(e.exponential_rate == doctest::Approx(0.2).epsilon(1e-12));

    CHECK_THROWS_AS(fit_tail_exponent(synthetic(t, [](double) { return cd(1.0, 0.0); }),
                                      WindowRule::explicit_range(5e3, 6e3)),
                    InsufficientSamplesError);
    CHECK_THROWS_AS(fit_tail_exponent(DecayCurve{}), InsufficientSamplesError);
    CHECK(tail_class_name(TailClass::undetermined) == std::string("undetermined"));
}
