// ggkernel.hpp: the complex decay-rate kernel (g|g)_-(p), its small-momentum
// model and the coefficients A and Q.
//
// (g|g)_-(p) = ∫dk |g(k)|^2 N(k,p) (π δ(D) - i P.V. 1/D),  D = ω(|k|) - k·p + k²/2
// with N = (2p + k)^2 (dipole vertex) or 1 (scalar vertex). The angle between
// k and p is integrated in closed form, the radius numerically.

#pragma once

#include <vector>

#include "stochlim/model.hpp"
#include "stochlim/vec3.hpp"

namespace stochlim {

struct ComplexRate {
    double re{0.0};  // damping, >= 0
    double im{0.0};  // phase rate

    friend bool operator==(const ComplexRate&, const ComplexRate&) = default;
};

struct AngularResult {
    double pv_part{0.0};
    double delta_part{0.0};
    bool tangent{false};  // |a| == |b|: pole on the endpoint of [-1, 1]
};

// P.V.∫_{-1}^{1} (c0 + c1 μ)/(a - b μ) dμ and the matching δ weight
// π (c0 + c1 μ*)/|b|, μ* = a/b, counted only for |μ*| < 1 and clamped at 0.
// At tangency the P.V. diverges logarithmically and delta_part is 0.
// Throws DomainError for a = b = 0.
AngularResult angular_reduce(double a, double b, double c0, double c1);

struct RateEvaluation {
    ComplexRate rate;
    double error{0.0};  // absolute quadrature error estimate on the complex value
    int panels{0};
};

ComplexRate gg_minus(const ModelConfig& model, double p_mag, const QuadratureSpec& quad = {});
RateEvaluation gg_minus_detailed(const ModelConfig& model, double p_mag, const QuadratureSpec& quad = {});

// Radii in (lo, hi) where the resonance shell touches the k-sphere of radius r,
// i.e. ω(r) + r²/2 = r p. These are the log-singular points of the radial integrand.
std::vector<double> tangency_radii(const ModelConfig& model, double p_mag, double lo, double hi);

// A = 10∫dk |g|²/(1 + k²/2) - ∫dk |g|²/(1 + k²/2)^2.  Requires ω = 1.
double a_coefficient(const ModelConfig& model, const QuadratureSpec& quad = {});

// Q = 6∫dk |g|² k/(1 + k²/2): zero for every spherically symmetric cutoff.
Vec3 q_coefficient(const ModelConfig& model, const QuadratureSpec& quad = {});

// -2∫dk |g|² + 2∫dk |g|²/(1 + k²/2): the p-independent part of the small-p model.
double smallp_constant(const ModelConfig& model, const QuadratureSpec& quad = {});

struct SmallPModel {
    double constant{0.0};
    double A{0.0};
    Vec3 Q{};

    // im = constant - A p² - p·Q, re = 0; throws DomainError for |p| >= √2
    ComplexRate operator()(const Vec3& p) const;
};

SmallPModel small_p_model(const ModelConfig& model, const QuadratureSpec& quad = {});

ComplexRate gg_minus_smallp(const ModelConfig& model, const Vec3& p_vec, const QuadratureSpec& quad = {});

// -½ d²/dp² im(g|g)_-(p) at p = 0 for the full kernel, by Richardson-extrapolated
// central differences. This is the curvature the exact kernel actually has; it
// differs from A in general.
double effective_curvature(const ModelConfig& model, const QuadratureSpec& quad = {});

}  // namespace stochlim
