#include <doctest.h>

#include <array>
#include <cmath>
#include <complex>

#include "stochlim/errors.hpp"
#include "stochlim/quadrature.hpp"

using namespace stochlim;
using namespace stochlim::quad;

TEST_CASE("GK21 rule: weights, symmetry and polynomial exactness") {
    const auto& r = gauss_kronrod21();
    double wk = 0.0, wg = 0.0;
    for (std::size_t i = 0; i < kNodes; ++i) {
        wk += r.kronrod[i];
        wg += r.gauss[i];
        CHECK(r.nodes[i] == doctest::Approx(-r.nodes[kNodes - 1 - i]).epsilon(1e-15));
        if (i > 0) CHECK(r.nodes[i] > r.nodes[i - 1]);
    }
    CHECK(wk == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(wg == doctest::Approx(2.0).epsilon(1e-15));
    // Kronrod is exact to degree 31, the embedded Gauss rule to degree 19
    for (int d : {2, 10, 18, 30}) {
        double k = 0.0, g = 0.0;
        for (std::size_t i = 0; i < kNodes; ++i) {
            k += r.kronrod[i] * std::pow(r.nodes[i], d);
            g += r.gauss[i] * std::pow(r.nodes[i], d);
        }
        const double exact = 2.0 / (d + 1);
        CHECK(k == doctest::Approx(exact).epsilon(1e-14));
        if (d <= 19) CHECK(g == doctest::Approx(exact).epsilon(1e-14));
    }
}

TEST_CASE("integrate smooth, singular and complex integrands") {
    Controls c{1e-12, 1e-15, 2000};
    {
        const std::array<double, 2> bp{0.0, 1.0};
        auto r = integrate<double>(pointwise<double>([](double x) { return std::exp(x); }), bp, c);
        CHECK(r.converged);
        CHECK(r.value == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
    }
    {
        // endpoint log singularity
        const std::array<double, 2> bp{0.0, 1.0};
        auto r = integrate<double>(pointwise<double>([](double x) { return x > 0 ? std::log(x) : 0.0; }), bp, c);
        CHECK(r.value == doctest::Approx(-1.0).epsilon(1e-11));
    }
    {
        // inverse-square-root singularity at the origin, where doubles resolve it
        const std::array<double, 3> bp{-0.7, 0.0, 0.3};
        auto f = pointwise<double>([](double x) { return x == 0.0 ? 0.0 : 1.0 / std::sqrt(std::abs(x)); });
        auto r = integrate<double>(f, bp, c);
        CHECK(r.value == doctest::Approx(2.0 * std::sqrt(0.3) + 2.0 * std::sqrt(0.7)).epsilon(1e-10));
    }
    {
        const std::array<double, 2> bp{0.0, 2.0 * M_PI};
        auto f = pointwise<std::complex<double>>([](double x) { return std::exp(std::complex<double>(0.0, 3.0 * x)) * x; });
        auto r = integrate<std::complex<double>>(f, bp, c);
        // ∫ x e^{3ix} over one period = 2π/(3i)
        CHECK(std::abs(r.value - std::complex<double>(0.0, -2.0 * M_PI / 3.0)) < 1e-12);
    }
}

TEST_CASE("nonconvergence is reported") {
    const std::array<double, 2> bp{0.0, 1.0};
    auto f = pointwise<double>([](double x) { return std::sin(1e4 * x * x); });
    Controls c{1e-14, 0.0, 3};
    CHECK_THROWS_AS(integrate<double>(f, bp, c), NonConvergenceError);
    auto r = integrate<double>(f, bp, c, false);
    CHECK_FALSE(r.converged);
    CHECK(r.panels <= 3);
}

TEST_CASE("degenerate ranges") {
    const std::array<double, 1> one{0.0};
    auto f = pointwise<double>([](double) { return 1.0; });
    CHECK(integrate<double>(f, one, Controls{}).value == 0.0);
}
