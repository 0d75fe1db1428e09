// model.hpp: physical model: dispersion law, squared cutoff |g(k)|^2, vertex,
// particle smearing profile and quadrature controls.

#pragma once

#include <optional>
#include <variant>

#include "stochlim/vec3.hpp"

namespace stochlim {

// ------------------------------- Radial profiles -----------------------------

struct GaussianShape {
    double width{1.0};      // e-fold radius: amplitude * exp(-((r - center)/width)^2)
    double amplitude{1.0};
    double center{0.0};

    friend bool operator==(const GaussianShape&, const GaussianShape&) = default;
};

// Standard mollifier rescaled to [inner, outer], peak value `amplitude` at the midpoint.
struct CompactBump {
    double inner{1.0};
    double outer{2.0};
    double amplitude{1.0};

    friend bool operator==(const CompactBump&, const CompactBump&) = default;
};

struct ZeroShape {
    friend bool operator==(const ZeroShape&, const ZeroShape&) = default;
};

struct RadialSupport {
    double lo{0.0};
    double hi{0.0};
    bool empty() const noexcept { return !(hi > lo); }
};

// Nonnegative spherically symmetric profile r -> value, r = |k| >= 0.
class RadialProfile {
public:
    using Shape = std::variant<GaussianShape, CompactBump, ZeroShape>;

    RadialProfile() : shape_(ZeroShape{}) {}

    static RadialProfile gaussian(double width, double amplitude = 1.0, double center = 0.0);
    static RadialProfile compact_bump(double inner, double outer, double amplitude = 1.0);
    static RadialProfile zero() { return RadialProfile{}; }

    double operator()(double r) const noexcept;

    // Interval outside which the profile is exactly zero (compact kinds) or
    // negligible (gaussian, truncated `cutoff_sigma` widths from its center).
    RadialSupport support(double cutoff_sigma) const noexcept;

    bool is_zero() const noexcept;
    RadialProfile scaled(double factor) const;
    const Shape& shape() const noexcept { return shape_; }

    friend bool operator==(const RadialProfile&, const RadialProfile&) = default;

private:
    explicit RadialProfile(Shape s) : shape_(s) {}
    Shape shape_;
};

// ---------------------------------- Dispersion -------------------------------

struct ConstantDispersion {
    double omega0{1.0};

    friend bool operator==(const ConstantDispersion&, const ConstantDispersion&) = default;
};

// omega(r) = base + profile(r), base > 0 keeps the dispersion strictly positive.
struct RadialDispersion {
    double base{1.0};
    RadialProfile profile;

    friend bool operator==(const RadialDispersion&, const RadialDispersion&) = default;
};

class Dispersion {
public:
    using Law = std::variant<ConstantDispersion, RadialDispersion>;

    Dispersion() : law_(ConstantDispersion{}) {}
    static Dispersion constant(double omega0);
    static Dispersion radial(double base, RadialProfile profile);

    double operator()(double r) const noexcept;
    std::optional<double> constant_value() const noexcept;
    const Law& law() const noexcept { return law_; }

    friend bool operator==(const Dispersion&, const Dispersion&) = default;

private:
    explicit Dispersion(Law l) : law_(std::move(l)) {}
    Law law_;
};

enum class Vertex { dipole, scalar };

struct ModelConfig {
    Dispersion dispersion{};
    RadialProfile cutoff_sq{};  // |g(k)|^2, spherically symmetric
    Vertex vertex{Vertex::dipole};

    // omega = 1, dipole vertex (2p + k)^2
    static ModelConfig polaron(RadialProfile cutoff_sq, Vertex vertex = Vertex::dipole) {
        return ModelConfig{Dispersion::constant(1.0), std::move(cutoff_sq), vertex};
    }

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// ---------------------------------- Smearing ---------------------------------

// |f(p)|^2 = normalization * exp(-B p^2).
class SmearingFunction {
public:
    static SmearingFunction gaussian(double B, double normalization = 1.0);
    // normalization chosen so that the integral of |f|^2 over R^3 equals 1
    static SmearingFunction normalized_gaussian(double B);

    double operator()(double p_mag) const noexcept;
    double B() const noexcept { return B_; }
    double normalization() const noexcept { return normalization_; }
    double total_mass() const noexcept;             // integral of |f|^2 dp over R^3
    double mass_beyond(double radius) const noexcept;  // same, restricted to |p| > radius
    double support_radius(double cutoff_sigma) const noexcept;

    friend bool operator==(const SmearingFunction&, const SmearingFunction&) = default;

private:
    SmearingFunction(double B, double n) : B_(B), normalization_(n) {}
    double B_;
    double normalization_;
};

// -------------------------------- Quadrature ---------------------------------

struct QuadratureSpec {
    double rel_tol{1e-8};
    double abs_tol{1e-12};
    int max_subdivisions{4000};
    double radial_cutoff_sigma{8.0};
    double pv_excision{1e-3};  // brute-force principal-value oracle only

    void validate() const;  // throws std::invalid_argument

    friend bool operator==(const QuadratureSpec&, const QuadratureSpec&) = default;
};

// ---------------------------------- Operations -------------------------------

double eval_cutoff_sq(const ModelConfig& model, double r) noexcept;

// Radius of the resonant sphere |k - p| = sqrt(p^2 - 2 omega0) for constant
// dispersion; empty when p^2 < 2 omega0. Throws UnsupportedError otherwise.
std::optional<double> resonance_shell_radius(const ModelConfig& model, double p_mag);

// omega(|k|) - k.p + k^2/2
double resonance_energy(const Dispersion& dispersion, const Vec3& k, const Vec3& p) noexcept;

}  // namespace stochlim
