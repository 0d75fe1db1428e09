// ggkernel.cpp: rate kernel by closed-form angular reduction + adaptive radial quadrature

#include "stochlim/ggkernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "stochlim/errors.hpp"
#include "stochlim/kernels.hpp"
#include "stochlim/quadrature.hpp"

namespace stochlim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kN = quad::kNodes;
constexpr double kNearTangent = 1e-3;  // |a - b| < kNearTangent·a

void require_unit_constant_dispersion(const ModelConfig& model, const char* what) {
    const auto w = model.dispersion.constant_value();
    if (!w || *w != 1.0) throw UnsupportedError(std::string(what) + " requires the constant dispersion omega = 1");
}

// 4π ∫ r² |g(r)|² h(r) dr over the cutoff support
template <class H>
double cutoff_moment(const ModelConfig& model, const QuadratureSpec& spec, H h) {
    const RadialSupport support = model.cutoff_sq.support(spec.radial_cutoff_sigma);
    if (support.empty()) return 0.0;
    const std::array<double, 2> bp{support.lo, support.hi};
    auto f = quad::pointwise<double>([&](double r) { return 4.0 * kPi * r * r * model.cutoff_sq(r) * h(r); });
    return quad::integrate<double>(f, bp, quad::Controls::from(spec)).value;
}

QuadratureSpec tightened(const QuadratureSpec& spec) {
    QuadratureSpec t = spec;
    t.rel_tol = std::min(spec.rel_tol, 1e-13);
    t.abs_tol = std::min(spec.abs_tol, 1e-15);
    return t;
}

}  // namespace

AngularResult angular_reduce(double a, double b, double c0, double c1) {
    if (a == 0.0 && b == 0.0) throw DomainError("angular_reduce: a = b = 0 has no finite principal value");
    AngularResult out;
    if (a == 0.0) {
        // pole at μ* = 0: the odd part c0/μ cancels
        out.pv_part = -2.0 * c1 / b;
        out.delta_part = std::max(0.0, kPi * c0 / std::abs(b));
        return out;
    }
    out.tangent = std::abs(a) == std::abs(b);
    if (out.tangent) {
        out.pv_part = std::numeric_limits<double>::infinity();
        const double x = b / a;
        // c0 + c1 μ vanishing at the endpoint pole keeps the integral finite
        if (c0 + c1 / x == 0.0) out.pv_part = -2.0 * c1 / b;
        return out;
    }
    kernels::scalar::angular_reduce_one(a, b, c0, c1, out.pv_part, out.delta_part);
    return out;
}

std::vector<double> tangency_radii(const ModelConfig& model, double p_mag, double lo, double hi) {
    std::vector<double> roots;
    if (!(p_mag > 0.0) || !(hi > lo)) return roots;
    if (const auto w = model.dispersion.constant_value()) {
        // r² - 2pr + 2ω0 = 0
        const double disc = p_mag * p_mag - 2.0 * *w;
        if (disc < 0.0) return roots;
        const double s = std::sqrt(disc);
        for (double r : {p_mag - s, p_mag + s})
            if (r > lo && r < hi && (roots.empty() || roots.back() != r)) roots.push_back(r);
        return roots;
    }
    auto h = [&](double r) { return model.dispersion(r) + 0.5 * r * r - r * p_mag; };
    constexpr int kScan = 1024;
    double r_prev = lo;
    double h_prev = h(lo);
    for (int i = 1; i <= kScan; ++i) {
        const double r = lo + (hi - lo) * i / kScan;
        const double h_cur = h(r);
        if (h_cur == 0.0 && r < hi) {
            roots.push_back(r);
        } else if (h_prev != 0.0 && std::signbit(h_prev) != std::signbit(h_cur)) {
            std::uintmax_t iters = 200;
            auto tol = boost::math::tools::eps_tolerance<double>(52);
            const auto [a, b] = boost::math::tools::toms748_solve(h, r_prev, r, h_prev, h_cur, tol, iters);
            roots.push_back(0.5 * (a + b));
        }
        r_prev = r;
        h_prev = h_cur;
    }
    return roots;
}

RateEvaluation gg_minus_detailed(const ModelConfig& model, double p_mag, const QuadratureSpec& spec) {
    if (!(std::isfinite(p_mag) && p_mag >= 0.0)) throw std::invalid_argument("gg_minus requires finite p_mag >= 0");
    RateEvaluation out;
    const RadialSupport support = model.cutoff_sq.support(spec.radial_cutoff_sigma);
    if (support.empty()) return out;

    std::vector<double> breakpoints{support.lo};
    for (double r : tangency_radii(model, p_mag, support.lo, support.hi)) breakpoints.push_back(r);
    breakpoints.push_back(support.hi);

    const bool dipole = model.vertex == Vertex::dipole;
    const std::optional<double> w0 = model.dispersion.constant_value();
    // p² - 2ω0 with a single rounding
    const double disc = w0 ? std::fma(p_mag, p_mag, -2.0 * *w0) : 0.0;
    auto panel = [&](std::span<const double> r, std::span<std::complex<double>> y) {
        std::array<double, kN> a, b, c0, c1, pv, delta, amp;
        const std::size_t n = r.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double ri = r[i];
            a[i] = model.dispersion(ri) + 0.5 * ri * ri;
            b[i] = ri * p_mag;
            c0[i] = dipole ? 4.0 * p_mag * p_mag + ri * ri : 1.0;
            c1[i] = dipole ? 4.0 * ri * p_mag : 0.0;
            amp[i] = 2.0 * kPi * ri * ri * model.cutoff_sq(ri);
        }
        kernels::angular_reduce_batch(std::span(a.data(), n), std::span(b.data(), n), std::span(c0.data(), n),
                                      std::span(c1.data(), n), std::span(pv.data(), n), std::span(delta.data(), n));
        for (std::size_t i = 0; i < n; ++i) {
            // Near tangency a - b cancels and the batch logarithm sees only
            // rounding noise; for constant dispersion a - b = ((r - p)² - disc)/2
            // is available without the cancellation.
            if (w0 && b[i] > 0.0 && std::abs(a[i] - b[i]) < kNearTangent * a[i]) {
                const double u = r[i] - p_mag;
                const double gap = 0.5 * (u * u - disc);
                if (gap == 0.0) {
                    pv[i] = delta[i] = 0.0;
                } else {
                    const double x = b[i] / a[i];
                    const double half_log = 0.5 * std::log((a[i] + b[i]) / std::abs(gap));
                    pv[i] = (2.0 / a[i]) * (c0[i] * half_log / x + c1[i] * (half_log - x) / (x * x));
                    delta[i] = gap < 0.0 ? std::max(0.0, kPi * (c0[i] + c1[i] / x) / b[i]) : 0.0;
                }
            }
            // a node that lands exactly on a tangency point: the singularity is
            // integrable, the single value carries no weight
            if (!std::isfinite(pv[i])) pv[i] = delta[i] = 0.0;
            y[i] = {amp[i] * delta[i], -amp[i] * pv[i]};
        }
    };

    const auto result = quad::integrate<std::complex<double>>(panel, breakpoints, quad::Controls::from(spec));
    out.rate = ComplexRate{std::max(0.0, result.value.real()), result.value.imag()};
    out.error = result.error;
    out.panels = result.panels;
    return out;
}

ComplexRate gg_minus(const ModelConfig& model, double p_mag, const QuadratureSpec& quad) {
    return gg_minus_detailed(model, p_mag, quad).rate;
}

double a_coefficient(const ModelConfig& model, const QuadratureSpec& quad) {
    require_unit_constant_dispersion(model, "a_coefficient");
    return cutoff_moment(model, quad, [](double r) {
        const double d0 = 1.0 + 0.5 * r * r;
        return 10.0 / d0 - 1.0 / (d0 * d0);
    });
}

Vec3 q_coefficient(const ModelConfig& model, const QuadratureSpec& quad) {
    require_unit_constant_dispersion(model, "q_coefficient");
    quad.validate();
    // the integrand k|g(|k|)|²/(1 + k²/2) is odd under k -> -k
    return Vec3{0.0, 0.0, 0.0};
}

double smallp_constant(const ModelConfig& model, const QuadratureSpec& quad) {
    require_unit_constant_dispersion(model, "smallp_constant");
    return cutoff_moment(model, quad, [](double r) { return -2.0 + 2.0 / (1.0 + 0.5 * r * r); });
}

ComplexRate SmallPModel::operator()(const Vec3& p) const {
    const double p2 = dot(p, p);
    if (!(p2 < 2.0)) throw DomainError("small-p model requires |p| < sqrt(2)");
    return ComplexRate{0.0, constant - A * p2 - dot(p, Q)};
}

SmallPModel small_p_model(const ModelConfig& model, const QuadratureSpec& quad) {
    if (model.vertex != Vertex::dipole) throw UnsupportedError("the small-p model is derived for the dipole vertex");
    return SmallPModel{smallp_constant(model, quad), a_coefficient(model, quad), q_coefficient(model, quad)};
}

ComplexRate gg_minus_smallp(const ModelConfig& model, const Vec3& p_vec, const QuadratureSpec& quad) {
    if (!(dot(p_vec, p_vec) < 2.0)) throw DomainError("gg_minus_smallp requires |p| < sqrt(2)");
    return small_p_model(model, quad)(p_vec);
}

double effective_curvature(const ModelConfig& model, const QuadratureSpec& quad) {
    const QuadratureSpec tight = tightened(quad);
    const double im0 = gg_minus(model, 0.0, tight).im;
    auto estimate = [&](double h) { return (im0 - gg_minus(model, h, tight).im) / (h * h); };
    // the kernel is even in p, so the difference quotient has an h² error term
    constexpr double h = 0.04;
    return (4.0 * estimate(0.5 * h) - estimate(h)) / 3.0;
}

}  // namespace stochlim
