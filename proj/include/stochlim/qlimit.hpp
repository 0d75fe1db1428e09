// qlimit.hpp: the oscillating exponent q_λ(t, x) = exp(-i t x / λ²) and
// numerical checks of its distributional limits as λ -> 0.

#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "stochlim/model.hpp"

namespace stochlim {

// φ(t) = exp(-((t - center)/width)²)
class TestFunction {
public:
    static TestFunction gaussian(double center, double width);

    double operator()(double t) const noexcept;
    // analytic continuation to complex t
    std::complex<double> operator()(std::complex<double> z) const noexcept;

    double center() const noexcept { return center_; }
    double width() const noexcept { return width_; }

    double integral() const noexcept;                         // ∫φ
    std::complex<double> fourier(double omega) const noexcept;  // ∫φ(t) e^{-iωt} dt
    double log_fourier_abs(double omega) const noexcept;        // ln|∫φ(t) e^{-iωt} dt|
    // interval outside which φ is below exp(-sigma²)
    std::pair<double, double> support(double sigma) const noexcept;
    // |ω| beyond which |fourier(ω)| < relative * fourier(0)
    double fourier_radius(double relative) const noexcept;

    friend bool operator==(const TestFunction&, const TestFunction&) = default;

private:
    TestFunction(double c, double w) : center_(c), width_(w) {}
    double center_;
    double width_;
};

struct ConvergenceReport {
    std::vector<double> lambdas;  // strictly decreasing
    std::vector<std::complex<double>> values;
    std::vector<double> log_abs_values;  // ln|value|, finite even where the value underflows
    std::vector<double> errors;          // |value - limit_target|
    std::complex<double> limit_target;
    double fitted_order{0.0};  // slope of ln|value - target| against ln λ
};

std::complex<double> q_lambda(double t, double x, double lambda);

// first, first·ratio, ... (count terms)
std::vector<double> geometric_lambdas(double first = 0.5, double ratio = 0.5, std::size_t count = 6);

// ∫φ(t) q_λ(t, x) dt for each λ; the target is 0. Throws DomainError for x = 0.
ConvergenceReport smeared_q_limit(const TestFunction& phi, double x, const std::vector<double>& lambdas,
                                  const QuadratureSpec& quad = {});

// ∫dx χ(x) ∫∫dt dt' φ(t) ψ(t') λ^{-2} q_λ(t - t', x) for each λ; the target is 2π χ(0) ∫φψ.
ConvergenceReport smeared_delta_limit(const TestFunction& phi, const TestFunction& psi, const TestFunction& chi,
                                      const std::vector<double>& lambdas, const QuadratureSpec& quad = {});

// ∫_t^{t+dt} q_λ(τ, x) dτ in closed form; dt for x = 0.
std::complex<double> lemma_oscillatory_factor(double t, double dt, double x, double lambda);

// least-squares slope of ln(errors) against ln(lambdas), skipping zero errors
double fitted_order(const std::vector<double>& lambdas, const std::vector<double>& log_errors);

}  // namespace stochlim
