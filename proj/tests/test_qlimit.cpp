#include <doctest.h>

#include <array>
#include <cmath>
#include <complex>
#include <random>

#include "stochlim/errors.hpp"
#include "stochlim/qlimit.hpp"
#include "stochlim/quadrature.hpp"

using namespace stochlim;
using cd = std::complex<double>;

namespace {

// ∫φ(t) e^{-iωt} dt for a Gaussian φ, completed square done by hand
cd gaussian_fourier(double c, double w, double omega) {
    return w * std::sqrt(M_PI) * std::exp(-0.25 * w * w * omega * omega) * std::polar(1.0, -omega * c);
}

cd direct_q_integral(const TestFunction& phi, double x, double lambda) {
    const auto [lo, hi] = phi.support(7.0);
    const std::array<double, 2> bp{lo, hi};
    auto f = quad::pointwise<cd>([&](double t) { return phi(t) * std::exp(cd(0.0, -t * x / (lambda * lambda))); });
    return quad::integrate<cd>(f, bp, quad::Controls{1e-13, 1e-16, 8000}).value;
}

}  // namespace

TEST_CASE("q_lambda is unimodular with the expected phase") {
    const cd q = q_lambda(0.3, 2.0, 0.5);
    CHECK(std::abs(q) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::arg(q) == doctest::Approx(std::remainder(-0.3 * 2.0 / 0.25, 2.0 * M_PI)));
    CHECK(q_lambda(0.0, 5.0, 0.1) == cd(1.0, 0.0));
    CHECK_THROWS_AS(q_lambda(1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("test function transform against the completed square") {
    const auto phi = TestFunction::gaussian(0.5, 1.3);
    for (double w : {0.0, 0.7, 3.0, 11.0}) {
        const cd ref = gaussian_fourier(0.5, 1.3, w);
        CHECK(std::abs(phi.fourier(w) - ref) <= 1e-14 * std::abs(ref));
        CHECK(phi.log_fourier_abs(w) == doctest::Approx(std::log(std::abs(ref))).epsilon(1e-13));
    }
    // far past underflow the log stays finite
    CHECK(phi.log_fourier_abs(1e4) == doctest::Approx(std::log(1.3 * std::sqrt(M_PI)) - 0.25 * 1.69 * 1e8));
    CHECK(phi.integral() == doctest::Approx(1.3 * std::sqrt(M_PI)));
    CHECK_THROWS_AS(TestFunction::gaussian(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("smeared q integral matches quadrature and decays") {
    const auto phi = TestFunction::gaussian(0.0, 1.0);
    const auto lambdas = geometric_lambdas(1.0, 0.6, 5);
    const ConvergenceReport r = smeared_q_limit(phi, 1.0, lambdas);
    REQUIRE(r.values.size() == lambdas.size());
    CHECK(r.limit_target == cd(0.0, 0.0));
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        const cd ref = direct_q_integral(phi, 1.0, lambdas[i]);
        CHECK(std::abs(r.values[i] - ref) <= 1e-10 * phi.integral());
        CHECK(r.errors[i] == doctest::Approx(std::abs(r.values[i])));
        if (i > 0) CHECK(r.errors[i] < r.errors[i - 1]);
    }
    CHECK_THROWS_AS(smeared_q_limit(phi, 0.0, lambdas), DomainError);
    CHECK_THROWS_AS(smeared_q_limit(phi, 1.0, {0.1, 0.2}), std::invalid_argument);
}

TEST_CASE("smeared q integral keeps finite logs past underflow") {
    const auto phi = TestFunction::gaussian(0.3, 1.0);
    const ConvergenceReport r = smeared_q_limit(phi, 2.0, geometric_lambdas(0.5, 0.5, 6));
    for (std::size_t i = 0; i < r.lambdas.size(); ++i) {
        const double omega = 2.0 / (r.lambdas[i] * r.lambdas[i]);
        CHECK(std::isfinite(r.log_abs_values[i]));
        CHECK(r.log_abs_values[i] == doctest::Approx(std::log(std::sqrt(M_PI)) - 0.25 * omega * omega).epsilon(1e-9));
    }
}

TEST_CASE("delta limit for the symmetric triple has a closed form") {
    const auto g = TestFunction::gaussian(0.0, 1.0);
    const auto lambdas = geometric_lambdas(0.5, 0.5, 5);
    const ConvergenceReport r = smeared_delta_limit(g, g, g, lambdas);
    const double target = 2.0 * M_PI * std::sqrt(M_PI / 2.0);
    CHECK(r.limit_target.real() == doctest::Approx(target).epsilon(1e-13));
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        const double l4 = std::pow(lambdas[i], 4);
        const double exact = target / std::sqrt(1.0 + 2.0 * l4);
        CHECK(std::abs(r.values[i] - exact) <= 1e-9 * target);
    }
    // error ~ λ⁴
    CHECK(r.fitted_order == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("delta limit converges at second order off-centre") {
    const auto phi = TestFunction::gaussian(0.0, 1.0);
    const auto shifted = TestFunction::gaussian(0.5, 1.0);
    const ConvergenceReport r = smeared_delta_limit(phi, shifted, shifted, geometric_lambdas(0.5, 0.5, 6));
    CHECK(r.fitted_order > 1.5);
    CHECK(r.fitted_order < 2.5);
    // 2π χ(0) ∫φψ
    const double overlap = std::sqrt(M_PI / 2.0) * std::exp(-0.125);
    CHECK(r.limit_target.real() == doctest::Approx(2.0 * M_PI * shifted(0.0) * overlap).epsilon(1e-13));
}

TEST_CASE("lemma factor: closed form, quadrature and bound") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ut(-3.0, 3.0), udt(0.01, 2.0), ux(-4.0, 4.0), ul(0.1, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double t = ut(rng), dt = udt(rng), x = ux(rng), l = ul(rng);
        const cd v = lemma_oscillatory_factor(t, dt, x, l);
        CHECK(std::abs(v) <= 2.0 * l * l / std::abs(x) * (1.0 + 1e-14));
        CHECK(std::abs(v) <= dt * (1.0 + 1e-14));
        const std::array<double, 2> bp{t, t + dt};
        auto f = quad::pointwise<cd>([&](double s) { return q_lambda(s, x, l); });
        const cd ref = quad::integrate<cd>(f, bp, quad::Controls{1e-14, 1e-17, 8000}).value;
        CHECK(std::abs(v - ref) <= 1e-10 * std::max(std::abs(ref), 1e-3 * dt));
    }
    CHECK(lemma_oscillatory_factor(1.0, 0.25, 0.0, 0.5) == cd(0.25, 0.0));
    CHECK_THROWS_AS(lemma_oscillatory_factor(0.0, 0.0, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("fitted order recovers a power law") {
    const std::vector<double> l{0.5, 0.25, 0.125, 0.0625};
    std::vector<double> e;
    for (double x : l) e.push_back(std::log(7.0 * x * x));
    CHECK(fitted_order(l, e) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(geometric_lambdas(0.5, 1.5), std::invalid_argument);
    const auto g = geometric_lambdas(0.5, 0.5, 3);
    CHECK(g == std::vector<double>{0.5, 0.25, 0.125});
}
