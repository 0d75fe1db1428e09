// quadrature.cpp: Gauss-Kronrod node table

#include "stochlim/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace stochlim::quad {

namespace {

GaussKronrod21 build_rule() {
    using boost::math::quadrature::gauss;
    using boost::math::quadrature::gauss_kronrod;
    const auto& kx = gauss_kronrod<double, 21>::abscissa();  // 0 and positive nodes
    const auto& kw = gauss_kronrod<double, 21>::weights();
    const auto& gx = gauss<double, 10>::abscissa();
    const auto& gw = gauss<double, 10>::weights();

    GaussKronrod21 rule{};
    // mirror the half-rule: index 10 is the center
    for (std::size_t i = 0; i < kx.size(); ++i) {
        rule.nodes[10 + i] = kx[i];
        rule.nodes[10 - i] = -kx[i];
        rule.kronrod[10 + i] = kw[i];
        rule.kronrod[10 - i] = kw[i];
    }
    // 10-point Gauss nodes sit at odd positions of the positive half-rule
    for (std::size_t g = 0; g < gx.size(); ++g) {
        const std::size_t i = 2 * g + 1;
        rule.gauss[10 + i] = gw[g];
        rule.gauss[10 - i] = gw[g];
    }
    return rule;
}

}  // namespace

const GaussKronrod21& gauss_kronrod21() {
    static const GaussKronrod21 rule = build_rule();
    return rule;
}

}  // namespace stochlim::quad
