// model.cpp: radial profiles, dispersion laws and smearing functions

#include "stochlim/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "stochlim/errors.hpp"

namespace stochlim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

// ------------------------------- RadialProfile -------------------------------

RadialProfile RadialProfile::gaussian(double width, double amplitude, double center) {
    if (!(std::isfinite(width) && width > 0.0)) throw std::invalid_argument("gaussian profile requires width > 0");
    if (!finite_nonneg(amplitude)) throw std::invalid_argument("gaussian profile requires amplitude >= 0");
    if (!finite_nonneg(center)) throw std::invalid_argument("gaussian profile requires center >= 0");
    return RadialProfile(GaussianShape{width, amplitude, center});
}

RadialProfile RadialProfile::compact_bump(double inner, double outer, double amplitude) {
    if (!finite_nonneg(inner)) throw std::invalid_argument("compact_bump requires inner >= 0");
    if (!(std::isfinite(outer) && outer > inner)) throw std::invalid_argument("compact_bump requires outer > inner");
    if (!finite_nonneg(amplitude)) throw std::invalid_argument("compact_bump requires amplitude >= 0");
    return RadialProfile(CompactBump{inner, outer, amplitude});
}

double RadialProfile::operator()(double r) const noexcept {
    return std::visit(overloaded{
                          [r](const GaussianShape& g) {
                              const double s = (r - g.center) / g.width;
                              return g.amplitude * std::exp(-s * s);
                          },
                          [r](const CompactBump& b) {
                              if (!(r > b.inner && r < b.outer)) return 0.0;
                              const double s = (2.0 * r - b.inner - b.outer) / (b.outer - b.inner);
                              const double gap = 1.0 - s * s;
                              if (!(gap > 0.0)) return 0.0;
                              return b.amplitude * std::exp(1.0 - 1.0 / gap);
                          },
                          [](const ZeroShape&) { return 0.0; },
                      },
                      shape_);
}

RadialSupport RadialProfile::support(double cutoff_sigma) const noexcept {
    return std::visit(overloaded{
                          [cutoff_sigma](const GaussianShape& g) {
                              if (g.amplitude == 0.0) return RadialSupport{};
                              return RadialSupport{std::max(0.0, g.center - cutoff_sigma * g.width),
                                                   g.center + cutoff_sigma * g.width};
                          },
                          [](const CompactBump& b) {
                              if (b.amplitude == 0.0) return RadialSupport{};
                              return RadialSupport{b.inner, b.outer};
                          },
                          [](const ZeroShape&) { return RadialSupport{}; },
                      },
                      shape_);
}

bool RadialProfile::is_zero() const noexcept { return support(1.0).empty(); }

RadialProfile RadialProfile::scaled(double factor) const {
    if (!finite_nonneg(factor)) throw std::invalid_argument("profile scale factor must be >= 0");
    return std::visit(overloaded{
                          [factor](GaussianShape g) {
                              g.amplitude *= factor;
                              return RadialProfile(g);
                          },
                          [factor](CompactBump b) {
                              b.amplitude *= factor;
                              return RadialProfile(b);
                          },
                          [](ZeroShape z) { return RadialProfile(z); },
                      },
                      shape_);
}

// --------------------------------- Dispersion --------------------------------

Dispersion Dispersion::constant(double omega0) {
    if (!(std::isfinite(omega0) && omega0 > 0.0)) throw std::invalid_argument("constant dispersion requires omega0 > 0");
    return Dispersion(ConstantDispersion{omega0});
}

Dispersion Dispersion::radial(double base, RadialProfile profile) {
    if (!(std::isfinite(base) && base > 0.0)) throw std::invalid_argument("radial dispersion requires base > 0");
    return Dispersion(RadialDispersion{base, std::move(profile)});
}

double Dispersion::operator()(double r) const noexcept {
    return std::visit(overloaded{
                          [](const ConstantDispersion& c) { return c.omega0; },
                          [r](const RadialDispersion& d) { return d.base + d.profile(r); },
                      },
                      law_);
}

std::optional<double> Dispersion::constant_value() const noexcept {
    if (const auto* c = std::get_if<ConstantDispersion>(&law_)) return c->omega0;
    return std::nullopt;
}

// ------------------------------ SmearingFunction -----------------------------

SmearingFunction SmearingFunction::gaussian(double B, double normalization) {
    if (!(std::isfinite(B) && B > 0.0)) throw std::invalid_argument("smearing requires B > 0");
    if (!(std::isfinite(normalization) && normalization > 0.0))
        throw std::invalid_argument("smearing requires normalization > 0");
    return SmearingFunction(B, normalization);
}

SmearingFunction SmearingFunction::normalized_gaussian(double B) {
    if (!(std::isfinite(B) && B > 0.0)) throw std::invalid_argument("smearing requires B > 0");
    return SmearingFunction(B, std::pow(B / std::numbers::pi, 1.5));
}

double SmearingFunction::operator()(double p_mag) const noexcept {
    return normalization_ * std::exp(-B_ * p_mag * p_mag);
}

double SmearingFunction::total_mass() const noexcept {
    return normalization_ * std::pow(std::numbers::pi / B_, 1.5);
}

double SmearingFunction::mass_beyond(double radius) const noexcept {
    if (radius <= 0.0) return total_mass();
    const double pi = std::numbers::pi;
    const double tail = std::pow(pi / B_, 1.5) * std::erfc(std::sqrt(B_) * radius) +
                        2.0 * pi * radius * std::exp(-B_ * radius * radius) / B_;
    return normalization_ * tail;
}

double SmearingFunction::support_radius(double cutoff_sigma) const noexcept {
    return cutoff_sigma / std::sqrt(B_);
}

// ------------------------------- QuadratureSpec ------------------------------

void QuadratureSpec::validate() const {
    if (!(std::isfinite(rel_tol) && rel_tol > 0.0)) throw std::invalid_argument("quadrature.rel_tol must be > 0");
    if (!(std::isfinite(abs_tol) && abs_tol > 0.0)) throw std::invalid_argument("quadrature.abs_tol must be > 0");
    if (max_subdivisions <= 0) throw std::invalid_argument("quadrature.max_subdivisions must be > 0");
    if (!(std::isfinite(radial_cutoff_sigma) && radial_cutoff_sigma > 0.0))
        throw std::invalid_argument("quadrature.radial_cutoff_sigma must be > 0");
    if (!(std::isfinite(pv_excision) && pv_excision > 0.0))
        throw std::invalid_argument("quadrature.pv_excision must be > 0");
}

// --------------------------------- Operations --------------------------------

double eval_cutoff_sq(const ModelConfig& model, double r) noexcept { return model.cutoff_sq(r); }

std::optional<double> resonance_shell_radius(const ModelConfig& model, double p_mag) {
    const auto omega0 = model.dispersion.constant_value();
    if (!omega0) throw UnsupportedError("resonance_shell_radius: closed form needs a constant dispersion");
    const double disc = p_mag * p_mag - 2.0 * *omega0;
    if (disc < 0.0) return std::nullopt;
    return std::sqrt(disc);
}

double resonance_energy(const Dispersion& dispersion, const Vec3& k, const Vec3& p) noexcept {
    return dispersion(norm(k)) - dot(k, p) + 0.5 * dot(k, k);
}

}  // namespace stochlim
