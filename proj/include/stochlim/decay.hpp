// decay.hpp: survival amplitude X(t) = 4π∫p²|f(p)|² exp(-t (g|g)_-(p)) dp,
// the Gaussian closed form and power-law tail fitting.

#pragma once

#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stochlim/ggkernel.hpp"
#include "stochlim/model.hpp"

namespace stochlim {

enum class KernelKind { full, quadratic_model, closed_form };

const char* kernel_name(KernelKind kind) noexcept;
std::optional<KernelKind> parse_kernel(std::string_view name) noexcept;

// Piecewise Chebyshev interpolant of the full kernel on [0, p_max]. Built once
// per model so that oscillatory momentum quadrature can afford millions of
// kernel values.
class RateTable {
public:
    static RateTable build(const ModelConfig& model, double p_max, const QuadratureSpec& quad);

    ComplexRate operator()(double p) const;
    double p_max() const noexcept { return p_max_; }
    std::size_t pieces() const noexcept { return pieces_.size(); }
    // largest trailing Chebyshev coefficient accepted, relative to the piece scale
    double worst_tail() const noexcept { return worst_tail_; }

private:
    // interpolation variable: p itself, or s = sqrt|p² - threshold²| on either
    // side of the constant-dispersion threshold
    enum class Mapping { identity, below, above };
    static double to_momentum(Mapping map, double threshold, double v) noexcept;
    static double to_variable(Mapping map, double threshold, double p) noexcept;

    struct Piece {
        Mapping map;
        double lo;  // in the interpolation variable
        double hi;
        double p_lo;
        double p_hi;
        std::vector<double> re;
        std::vector<double> im;
    };
    std::vector<Piece> pieces_;
    double threshold_{0.0};
    double p_max_{0.0};
    double worst_tail_{0.0};
};

struct SurvivalDiagnostics {
    double error_estimate{0.0};
    std::size_t panels{0};
    double mass_beyond_sqrt2{0.0};  // |f|² mass outside the small-p domain (quadratic model)
    std::vector<std::string> warnings;
};

std::complex<double> survival_amplitude(const ModelConfig& model, const SmearingFunction& f, double t,
                                        const QuadratureSpec& quad, KernelKind kernel,
                                        SurvivalDiagnostics* diagnostics = nullptr);

// (π/(B - iAt))^{3/2}, principal branch
std::complex<double> gaussian_closed_form(double A, double B, double t);

struct CurveMetadata {
    std::optional<double> A;       // curvature setting the time scale B/A
    std::optional<double> A_model;  // A of the small-p model, when defined
    double B{0.0};
    double phase_constant{0.0};     // small-p constant term, when defined
    double max_error{0.0};
    std::vector<std::string> warnings;
};

struct DecayCurve {
    std::vector<double> times;
    std::vector<std::complex<double>> values;
    KernelKind kernel_kind{KernelKind::full};
    CurveMetadata meta;
};

std::vector<double> log_time_grid(double t_first, double t_last, std::size_t count);
// count points log-spaced over [1e-2 B/A, 1e4 B/A]; [1e-2, 1e4] when A <= 0
std::vector<double> default_time_grid(double A, double B, std::size_t count = 64);

// Curve time points are evaluated on `threads` workers; the result does not
// depend on the thread count.
DecayCurve build_decay_curve(const ModelConfig& model, const SmearingFunction& f, const std::vector<double>& times,
                             const QuadratureSpec& quad, KernelKind kernel, unsigned threads = 1);

enum class TailClass { power_law, exponential, undetermined };
const char* tail_class_name(TailClass c) noexcept;

struct TailFit {
    double exponent{0.0};
    double intercept{0.0};
    std::pair<double, double> fit_window{0.0, 0.0};
    double residual{0.0};  // RMS of the ln|X| vs ln t fit
    TailClass classification{TailClass::undetermined};
    double exponential_rate{0.0};      // -slope of ln|X| vs t
    double exponential_residual{0.0};  // RMS of that fit
    std::size_t samples{0};
};

struct WindowRule {
    std::optional<std::pair<double, double>> range;  // empty: automatic

    static WindowRule automatic() { return {}; }
    static WindowRule explicit_range(double t_min, double t_max) { return {std::make_pair(t_min, t_max)}; }
};

TailFit fit_tail_exponent(const DecayCurve& curve, const WindowRule& rule = WindowRule::automatic());

}  // namespace stochlim
