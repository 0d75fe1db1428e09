// qlimit.cpp: smeared limits of the oscillating exponent

#include "stochlim/qlimit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "stochlim/errors.hpp"
#include "stochlim/quadrature.hpp"

namespace stochlim {

namespace {

constexpr double kPi = std::numbers::pi;
using cd = std::complex<double>;

void validate_lambdas(const std::vector<double>& lambdas) {
    if (lambdas.empty()) throw std::invalid_argument("lambda sequence is empty");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(std::isfinite(lambdas[i]) && lambdas[i] > 0.0)) throw std::invalid_argument("lambdas must be > 0");
        if (i > 0 && !(lambdas[i] < lambdas[i - 1])) throw std::invalid_argument("lambdas must be strictly decreasing");
    }
}

// Fixed Gauss-Kronrod panels with precomputed weights; used for the inner
// integral whose integrand is reused for every outer node.
struct PanelRule {
    std::vector<double> nodes;
    std::vector<double> kronrod;
    std::vector<double> gauss;
};

PanelRule panel_rule(double lo, double hi, std::size_t panels) {
    const auto& r = quad::gauss_kronrod21();
    PanelRule rule;
    const double h = (hi - lo) / static_cast<double>(panels);
    for (std::size_t j = 0; j < panels; ++j) {
        const double center = lo + h * (j + 0.5);
        for (std::size_t i = 0; i < quad::kNodes; ++i) {
            rule.nodes.push_back(center + 0.5 * h * r.nodes[i]);
            rule.kronrod.push_back(0.5 * h * r.kronrod[i]);
            rule.gauss.push_back(0.5 * h * r.gauss[i]);
        }
    }
    return rule;
}

}  // namespace

// -------------------------------- TestFunction -------------------------------

TestFunction TestFunction::gaussian(double center, double width) {
    if (!std::isfinite(center)) throw std::invalid_argument("test function center must be finite");
    if (!(std::isfinite(width) && width > 0.0)) throw std::invalid_argument("test function width must be > 0");
    return TestFunction(center, width);
}

double TestFunction::operator()(double t) const noexcept {
    const double s = (t - center_) / width_;
    return std::exp(-s * s);
}

std::complex<double> TestFunction::operator()(std::complex<double> z) const noexcept {
    const cd s = (z - center_) / width_;
    return std::exp(-s * s);
}

double TestFunction::integral() const noexcept { return width_ * std::sqrt(kPi); }

std::complex<double> TestFunction::fourier(double omega) const noexcept {
    return integral() * std::polar(std::exp(-0.25 * omega * omega * width_ * width_), -omega * center_);
}

double TestFunction::log_fourier_abs(double omega) const noexcept {
    return std::log(integral()) - 0.25 * omega * omega * width_ * width_;
}

std::pair<double, double> TestFunction::support(double sigma) const noexcept {
    return {center_ - sigma * width_, center_ + sigma * width_};
}

double TestFunction::fourier_radius(double relative) const noexcept {
    return 2.0 / width_ * std::sqrt(std::log(1.0 / relative));
}

// --------------------------------- Operations --------------------------------

std::complex<double> q_lambda(double t, double x, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("q_lambda requires lambda > 0");
    return std::polar(1.0, -(t / (lambda * lambda)) * x);
}

std::vector<double> geometric_lambdas(double first, double ratio, std::size_t count) {
    if (!(first > 0.0 && ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("geometric lambdas need first > 0, 0 < ratio < 1");
    std::vector<double> out(count);
    for (std::size_t j = 0; j < count; ++j) out[j] = first * std::pow(ratio, static_cast<double>(j));
    return out;
}

double fitted_order(const std::vector<double>& lambdas, const std::vector<double>& log_errors) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!std::isfinite(log_errors[i])) continue;
        x.push_back(std::log(lambdas[i]));
        y.push_back(log_errors[i]);
    }
    if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxy / sxx;
}

ConvergenceReport smeared_q_limit(const TestFunction& phi, double x, const std::vector<double>& lambdas,
                                  const QuadratureSpec& quad) {
    if (x == 0.0) throw DomainError("smeared_q_limit requires x != 0; at x = 0 the integral is ∫φ");
    validate_lambdas(lambdas);
    quad.validate();
    ConvergenceReport report;
    report.lambdas = lambdas;
    report.limit_target = 0.0;

    const double c = phi.center(), w = phi.width();
    const auto [lo, hi] = phi.support(quad.radial_cutoff_sigma);
    for (double lambda : lambdas) {
        const double omega = x / (lambda * lambda);
        // Integrate along Im t = -σ through the saddle of φ(t) e^{-iωt}; the
        // integrand there no longer oscillates. The real part L of the exponent
        // at the saddle is factored out so deep values stay representable.
        const double sigma = 0.5 * omega * w * w;
        const double L = -0.25 * omega * omega * w * w;
        auto integrand = quad::pointwise<cd>([&](double u) {
            const cd z(u, -sigma);
            const cd s = (z - c) / w;
            return std::exp(-s * s - cd(0.0, omega) * z - L);
        });
        const std::array<double, 3> bp{lo, c, hi};
        const auto r = quad::integrate<cd>(integrand, bp, quad::Controls::from(quad));
        const double log_abs = L + std::log(std::abs(r.value));
        report.values.push_back(std::exp(L) * r.value);
        report.log_abs_values.push_back(log_abs);
        report.errors.push_back(std::exp(log_abs));
    }
    report.fitted_order = fitted_order(report.lambdas, report.log_abs_values);
    return report;
}

ConvergenceReport smeared_delta_limit(const TestFunction& phi, const TestFunction& psi, const TestFunction& chi,
                                      const std::vector<double>& lambdas, const QuadratureSpec& quad) {
    validate_lambdas(lambdas);
    quad.validate();
    const auto controls = quad::Controls::from(quad);
    const double sig = quad.radial_cutoff_sigma;

    // χ̂(s) = ∫χ(x) e^{-isx} dx at the nodes of a fixed s-rule covering the
    // region where χ̂ is above double-precision relevance.
    const double s_max = chi.fourier_radius(1e-17);
    const PanelRule srule = panel_rule(-s_max, s_max, 96);
    std::vector<cd> chi_hat(srule.nodes.size());
    {
        const auto [xlo, xhi] = chi.support(sig);
        const std::array<double, 3> bp{xlo, chi.center(), xhi};
        for (std::size_t j = 0; j < srule.nodes.size(); ++j) {
            const double s = srule.nodes[j];
            auto f = quad::pointwise<cd>([&](double x) { return chi(x) * std::polar(1.0, -s * x); });
            quad::Controls c = controls;
            c.abs_tol = std::max(controls.abs_tol * 1e-3, 1e-18);
            chi_hat[j] = quad::integrate<cd>(f, bp, c).value;
        }
    }

    ConvergenceReport report;
    report.lambdas = lambdas;
    {
        const auto [a0, a1] = phi.support(sig);
        const auto [b0, b1] = psi.support(sig);
        const std::array<double, 2> bp{std::max(a0, b0), std::min(a1, b1)};
        double overlap = 0.0;
        if (bp[1] > bp[0]) {
            auto f = quad::pointwise<double>([&](double t) { return phi(t) * psi(t); });
            overlap = quad::integrate<double>(f, bp, controls).value;
        }
        report.limit_target = 2.0 * kPi * chi(0.0) * overlap;
    }

    const auto [tlo, thi] = phi.support(sig);
    const std::array<double, 3> tbp{tlo, phi.center(), thi};
    for (double lambda : lambdas) {
        // t' = t - λ² s turns the λ^{-2} q_λ kernel into χ̂(s) ds
        const double eps = lambda * lambda;
        double inner_error = 0.0;
        auto outer = [&](std::span<const double> t, std::span<cd> y) {
            for (std::size_t i = 0; i < t.size(); ++i) {
                cd k{}, g{};
                for (std::size_t j = 0; j < srule.nodes.size(); ++j) {
                    const cd v = psi(t[i] - eps * srule.nodes[j]) * chi_hat[j];
                    k += srule.kronrod[j] * v;
                    g += srule.gauss[j] * v;
                }
                inner_error = std::max(inner_error, phi(t[i]) * std::abs(k - g));
                y[i] = phi(t[i]) * k;
            }
        };
        const auto r = quad::integrate<cd>(outer, tbp, controls);
        const double inner_bound = inner_error * (thi - tlo);
        if (inner_bound > std::max(quad.abs_tol, quad.rel_tol * std::abs(r.value)))
            throw NonConvergenceError("smeared_delta_limit: inner s-rule did not resolve the kernel", inner_bound,
                                      std::abs(r.value));
        report.values.push_back(r.value);
        report.log_abs_values.push_back(std::log(std::abs(r.value)));
        report.errors.push_back(std::abs(r.value - report.limit_target));
    }
    std::vector<double> log_err;
    for (double e : report.errors) log_err.push_back(std::log(e));
    report.fitted_order = fitted_order(report.lambdas, log_err);
    return report;
}

std::complex<double> lemma_oscillatory_factor(double t, double dt, double x, double lambda) {
    if (!(dt > 0.0)) throw std::invalid_argument("lemma_oscillatory_factor requires dt > 0");
    if (!(lambda > 0.0)) throw std::invalid_argument("lemma_oscillatory_factor requires lambda > 0");
    if (x == 0.0) return {dt, 0.0};
    const double alpha = x / (lambda * lambda);
    const double half = 0.5 * alpha * dt;
    const double phase = -alpha * t - half;
    return (2.0 * std::sin(half) / alpha) * cd(std::cos(phase), std::sin(phase));
}

}  // namespace stochlim
