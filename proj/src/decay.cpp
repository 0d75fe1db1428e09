// decay.cpp: survival amplitude, closed form, tail fits

#include "stochlim/decay.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "stochlim/errors.hpp"
#include "stochlim/kernels.hpp"
#include "stochlim/quadrature.hpp"

namespace stochlim {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);

// ------------------------------ Chebyshev pieces -----------------------------

constexpr std::size_t kChebPoints = 32;
constexpr double kChebAcceptTail = 1e-12;
constexpr int kChebMaxDepth = 24;

std::vector<double> cheb_coefficients(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<double> c(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += values[j] * std::cos(kPi * k * (j + 0.5) / n);
        c[k] = 2.0 * s / n;
    }
    c[0] *= 0.5;
    return c;
}

double clenshaw(const std::vector<double>& c, double x) {
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t k = c.size(); k-- > 1;) {
        const double b0 = 2.0 * x * b1 - b2 + c[k];
        b2 = b1;
        b1 = b0;
    }
    return x * b1 - b2 + c[0];
}

double tail_magnitude(const std::vector<double>& c) {
    const std::size_t n = c.size();
    return std::max({std::abs(c[n - 1]), std::abs(c[n - 2]), std::abs(c[n - 3])});
}

// ------------------------- Oscillation-aware momentum rule -------------------

using RateFn = std::function<ComplexRate(double)>;

struct MomentumResult {
    std::complex<double> value;
    double error{0.0};
    std::size_t panels{0};
};

// Momentum integral of amp(p) exp(-t gg(p)) over [0, R]. Panels are sized so
// that the phase t·gg changes by at most a fixed budget across each, using
// speed bounds taken once from a coarse sampling of gg.
class MomentumQuadrature {
public:
    MomentumQuadrature(RateFn rate, std::function<double(double)> amp, std::vector<double> breakpoints)
        : rate_(std::move(rate)), amp_(std::move(amp)) {
        for (std::size_t s = 0; s + 1 < breakpoints.size(); ++s) {
            const double lo = breakpoints[s], hi = breakpoints[s + 1];
            if (!(hi > lo)) continue;
            std::vector<ComplexRate> samples(kCells + 1);
            for (std::size_t i = 0; i <= kCells; ++i) samples[i] = rate_(lo + (hi - lo) * i / kCells);
            const double h = (hi - lo) / kCells;
            std::vector<double> diff(kCells);
            for (std::size_t i = 0; i < kCells; ++i)
                diff[i] = std::hypot(samples[i + 1].re - samples[i].re, samples[i + 1].im - samples[i].im) / h;
            for (std::size_t i = 0; i < kCells; ++i) {
                double s_max = diff[i];
                if (i > 0) s_max = std::max(s_max, diff[i - 1]);
                if (i + 1 < kCells) s_max = std::max(s_max, diff[i + 1]);
                cells_.push_back(Cell{lo + h * i, i + 1 == kCells ? hi : lo + h * (i + 1), 1.25 * s_max});
            }
        }
    }

    MomentumResult evaluate(double t, const QuadratureSpec& quad) const {
        double budget = 3.0;
        MomentumResult last;
        for (int attempt = 0; attempt < 6; ++attempt, budget *= 0.5) {
            last = pass(t, budget);
            if (last.error <= std::max(quad.abs_tol, quad.rel_tol * std::abs(last.value))) return last;
            if (last.panels > kMaxPanels) break;
        }
        throw NonConvergenceError("survival_amplitude: momentum quadrature did not converge at t = " +
                                      std::to_string(t) + " (error estimate " + std::to_string(last.error) + ")",
                                  last.error, std::abs(last.value));
    }

private:
    struct Cell {
        double lo, hi, speed;
    };
    static constexpr std::size_t kCells = 256;
    static constexpr std::size_t kChunk = 1 << 15;
    static constexpr std::size_t kMaxPanels = 20'000'000;

    MomentumResult pass(double t, double budget) const {
        const auto& rule = quad::gauss_kronrod21();
        std::vector<double> wk, wg, re, im;
        wk.reserve(kChunk + quad::kNodes);
        wg.reserve(kChunk + quad::kNodes);
        re.reserve(kChunk + quad::kNodes);
        im.reserve(kChunk + quad::kNodes);
        kernels::PhaseSums total{};
        double abs_mass = 0.0;
        std::size_t panels = 0;
        auto flush = [&] {
            const auto s = kernels::damped_phase_sums(wk, wg, re, im, t);
            total.primary += s.primary;
            total.secondary += s.secondary;
            wk.clear();
            wg.clear();
            re.clear();
            im.clear();
        };
        for (const Cell& c : cells_) {
            const double width = c.hi - c.lo;
            const double phase = t * c.speed * width;
            const std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(phase / budget)));
            panels += n;
            if (panels > kMaxPanels) return MomentumResult{{}, std::numeric_limits<double>::infinity(), panels};
            const double h = width / static_cast<double>(n);
            for (std::size_t j = 0; j < n; ++j) {
                const double lo = c.lo + h * j;
                const double center = lo + 0.5 * h;
                for (std::size_t i = 0; i < quad::kNodes; ++i) {
                    const double p = center + 0.5 * h * rule.nodes[i];
                    const double a = 0.5 * h * amp_(p);
                    const ComplexRate g = rate_(p);
                    wk.push_back(rule.kronrod[i] * a);
                    wg.push_back(rule.gauss[i] * a);
                    re.push_back(g.re);
                    im.push_back(g.im);
                    abs_mass += std::abs(rule.kronrod[i] * a);
                }
                if (wk.size() >= kChunk) flush();
            }
        }
        if (!wk.empty()) flush();
        const double roundoff = 50.0 * std::numeric_limits<double>::epsilon() * abs_mass;
        return MomentumResult{total.primary, std::max(std::abs(total.primary - total.secondary), roundoff), panels};
    }

    RateFn rate_;
    std::function<double(double)> amp_;
    std::vector<Cell> cells_;
};

// Everything the momentum integral needs for one (model, f, kernel) triple.
struct SurvivalSetup {
    std::optional<MomentumQuadrature> quadrature;
    std::optional<SmallPModel> small_p;
    double mass_beyond_sqrt2{0.0};
    std::vector<std::string> warnings;
    double norm{0.0};
    double B{0.0};
};

SurvivalSetup prepare(const ModelConfig& model, const SmearingFunction& f, const QuadratureSpec& quad,
                      KernelKind kernel) {
    quad.validate();
    SurvivalSetup s;
    s.norm = f.normalization();
    s.B = f.B();
    auto amp = [f](double p) { return 4.0 * kPi * p * p * f(p); };
    const double R = f.support_radius(quad.radial_cutoff_sigma);

    if (kernel != KernelKind::full) {
        s.small_p = small_p_model(model, quad);
        if (s.small_p->Q != Vec3{0.0, 0.0, 0.0})
            throw UnsupportedError("survival_amplitude: Q != 0 configurations are not supported");
        s.mass_beyond_sqrt2 = f.mass_beyond(kSqrt2);
        if (s.mass_beyond_sqrt2 > 1e-12 * f.total_mass())
            s.warnings.push_back("smearing has " + std::to_string(s.mass_beyond_sqrt2 / f.total_mass()) +
                                 " of its mass beyond |p| = sqrt(2); the quadratic model is extended past its domain");
        if (kernel == KernelKind::quadratic_model) {
            const SmallPModel m = *s.small_p;
            s.quadrature.emplace([m](double p) { return ComplexRate{0.0, m.constant - m.A * p * p}; }, amp,
                                 std::vector<double>{0.0, R});
        }
        return s;
    }

    if (model.cutoff_sq.is_zero()) {
        s.quadrature.emplace([](double) { return ComplexRate{}; }, amp, std::vector<double>{0.0, R});
        return s;
    }
    auto table = std::make_shared<RateTable>(RateTable::build(model, R, quad));
    if (table->worst_tail() > kChebAcceptTail)
        s.warnings.push_back("rate table resolved only to relative " + std::to_string(table->worst_tail()));
    std::vector<double> bp{0.0};
    if (const auto w = model.dispersion.constant_value()) {
        const double threshold = std::sqrt(2.0 * *w);
        if (threshold < R) bp.push_back(threshold);
    }
    bp.push_back(R);
    s.quadrature.emplace([table](double p) { return (*table)(p); }, amp, bp);
    return s;
}

std::complex<double> evaluate(const SurvivalSetup& s, double t, const QuadratureSpec& quad, KernelKind kernel,
                              double& error) {
    if (kernel == KernelKind::closed_form) {
        error = 0.0;
        const double phase = -t * s.small_p->constant;
        return s.norm * gaussian_closed_form(s.small_p->A, s.B, t) * std::polar(1.0, phase);
    }
    const MomentumResult r = s.quadrature->evaluate(t, quad);
    error = r.error;
    return r.value;
}

}  // namespace

// ---------------------------------- Names ------------------------------------

const char* kernel_name(KernelKind kind) noexcept {
    switch (kind) {
        case KernelKind::full: return "full";
        case KernelKind::quadratic_model: return "quadratic_model";
        case KernelKind::closed_form: return "closed_form";
    }
    return "unknown";
}

std::optional<KernelKind> parse_kernel(std::string_view name) noexcept {
    for (KernelKind k : {KernelKind::full, KernelKind::quadratic_model, KernelKind::closed_form})
        if (name == kernel_name(k)) return k;
    return std::nullopt;
}

const char* tail_class_name(TailClass c) noexcept {
    switch (c) {
        case TailClass::power_law: return "power_law";
        case TailClass::exponential: return "exponential";
        case TailClass::undetermined: return "undetermined";
    }
    return "unknown";
}

// --------------------------------- RateTable ---------------------------------

RateTable RateTable::build(const ModelConfig& model, double p_max, const QuadratureSpec& quad) {
    if (!(std::isfinite(p_max) && p_max > 0.0)) throw std::invalid_argument("RateTable requires p_max > 0");

    // Near the threshold a - b cancels, so the tightest tolerance can sit under
    // the integrand's noise floor; step down a short ladder instead of failing.
    const std::array<double, 3> ladder{1e-13, 1e-11, 1e-9};
    auto rate = [&](double p) {
        for (std::size_t i = 0;; ++i) {
            QuadratureSpec q = quad;
            q.rel_tol = std::min(quad.rel_tol, ladder[i]);
            q.abs_tol = std::min(quad.abs_tol, 1e-15);
            try {
                return gg_minus(model, p, q);
            } catch (const NonConvergenceError&) {
                if (i + 1 == ladder.size() || q.rel_tol == quad.rel_tol) throw;
            }
        }
    };

    RateTable table;
    table.p_max_ = p_max;
    // For constant dispersion the kernel has a square-root branch point at
    // p² = 2ω0 and is smooth in s = sqrt|p² - 2ω0| on either side.
    double threshold = std::numeric_limits<double>::infinity();
    if (const auto w = model.dispersion.constant_value()) threshold = std::sqrt(2.0 * *w);

    std::function<void(Mapping, double, double, int)> fit = [&](Mapping map, double lo, double hi, int depth) {
        std::vector<double> re(kChebPoints), im(kChebPoints);
        double scale = 0.0;
        for (std::size_t j = 0; j < kChebPoints; ++j) {
            const double x = std::cos(kPi * (j + 0.5) / kChebPoints);
            const ComplexRate g = rate(to_momentum(map, threshold, 0.5 * (lo + hi) + 0.5 * (hi - lo) * x));
            re[j] = g.re;
            im[j] = g.im;
            scale = std::max(scale, std::hypot(g.re, g.im));
        }
        Piece piece{map, lo, hi, 0.0, 0.0, cheb_coefficients(re), cheb_coefficients(im)};
        const double pa = to_momentum(map, threshold, lo), pb = to_momentum(map, threshold, hi);
        piece.p_lo = std::min(pa, pb);
        piece.p_hi = std::max(pa, pb);
        const double tail = std::max(tail_magnitude(piece.re), tail_magnitude(piece.im)) / std::max(scale, 1e-300);
        const bool accept = tail <= kChebAcceptTail || scale == 0.0;
        if (accept || depth >= kChebMaxDepth) {
            table.worst_tail_ = std::max(table.worst_tail_, accept ? 0.0 : tail);
            table.pieces_.push_back(std::move(piece));
            return;
        }
        const double mid = 0.5 * (lo + hi);
        fit(map, lo, mid, depth + 1);
        fit(map, mid, hi, depth + 1);
    };
    if (!(threshold < std::numeric_limits<double>::infinity())) {
        fit(Mapping::identity, 0.0, p_max, 0);
    } else if (p_max <= threshold) {
        fit(Mapping::below, std::sqrt((threshold - p_max) * (threshold + p_max)), threshold, 0);
    } else {
        fit(Mapping::below, 0.0, threshold, 0);
        fit(Mapping::above, 0.0, std::sqrt((p_max - threshold) * (p_max + threshold)), 0);
    }
    std::sort(table.pieces_.begin(), table.pieces_.end(),
              [](const Piece& a, const Piece& b) { return a.p_lo < b.p_lo; });
    table.threshold_ = threshold;
    return table;
}

double RateTable::to_momentum(Mapping map, double threshold, double v) noexcept {
    switch (map) {
        case Mapping::identity: return v;
        case Mapping::below: return std::sqrt(std::max(0.0, (threshold - v) * (threshold + v)));
        case Mapping::above: return std::sqrt(threshold * threshold + v * v);
    }
    return v;
}

double RateTable::to_variable(Mapping map, double threshold, double p) noexcept {
    switch (map) {
        case Mapping::identity: return p;
        case Mapping::below: return std::sqrt(std::max(0.0, (threshold - p) * (threshold + p)));
        case Mapping::above: return std::sqrt(std::max(0.0, (p - threshold) * (p + threshold)));
    }
    return p;
}

ComplexRate RateTable::operator()(double p) const {
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), p, [](double v, const Piece& pc) { return v < pc.p_lo; });
    const Piece& pc = it == pieces_.begin() ? pieces_.front() : *std::prev(it);
    const double v = to_variable(pc.map, threshold_, p);
    const double x = std::clamp((2.0 * v - pc.lo - pc.hi) / (pc.hi - pc.lo), -1.0, 1.0);
    return ComplexRate{std::max(0.0, clenshaw(pc.re, x)), clenshaw(pc.im, x)};
}

// ------------------------------ Survival amplitude ---------------------------

std::complex<double> survival_amplitude(const ModelConfig& model, const SmearingFunction& f, double t,
                                        const QuadratureSpec& quad, KernelKind kernel,
                                        SurvivalDiagnostics* diagnostics) {
    if (!(std::isfinite(t) && t >= 0.0)) throw std::invalid_argument("survival_amplitude requires finite t >= 0");
    if (kernel == KernelKind::closed_form)
        throw std::invalid_argument("survival_amplitude evaluates the full or quadratic_model kernel");
    const SurvivalSetup s = prepare(model, f, quad, kernel);
    double error = 0.0;
    const auto value = evaluate(s, t, quad, kernel, error);
    if (diagnostics) {
        diagnostics->error_estimate = error;
        diagnostics->mass_beyond_sqrt2 = s.mass_beyond_sqrt2;
        diagnostics->warnings = s.warnings;
    }
    return value;
}

std::complex<double> gaussian_closed_form(double A, double B, double t) {
    if (!(B > 0.0)) throw std::invalid_argument("gaussian_closed_form requires B > 0");
    return std::pow(std::complex<double>(kPi, 0.0) / std::complex<double>(B, -A * t), 1.5);
}

// -------------------------------- Curves -------------------------------------

std::vector<double> log_time_grid(double t_first, double t_last, std::size_t count) {
    if (!(t_first > 0.0 && t_last > t_first) || count < 2)
        throw std::invalid_argument("log_time_grid requires 0 < t_first < t_last and count >= 2");
    std::vector<double> grid(count);
    const double l0 = std::log(t_first), l1 = std::log(t_last);
    for (std::size_t i = 0; i < count; ++i)
        grid[i] = std::exp(l0 + (l1 - l0) * static_cast<double>(i) / static_cast<double>(count - 1));
    grid.front() = t_first;
    grid.back() = t_last;
    return grid;
}

std::vector<double> default_time_grid(double A, double B, std::size_t count) {
    if (A > 0.0 && B > 0.0) return log_time_grid(1e-2 * B / A, 1e4 * B / A, count);
    return log_time_grid(1e-2, 1e4, count);
}

DecayCurve build_decay_curve(const ModelConfig& model, const SmearingFunction& f, const std::vector<double>& times,
                             const QuadratureSpec& quad, KernelKind kernel, unsigned threads) {
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(std::isfinite(times[i]) && times[i] >= 0.0))
            throw std::invalid_argument("time grid entries must be finite and >= 0");
        if (i > 0 && !(times[i] > times[i - 1])) throw std::invalid_argument("time grid must be strictly increasing");
    }
    const SurvivalSetup s = prepare(model, f, quad, kernel);

    DecayCurve curve;
    curve.times = times;
    curve.kernel_kind = kernel;
    curve.meta.B = f.B();
    curve.meta.warnings = s.warnings;
    if (s.small_p) {
        curve.meta.A_model = s.small_p->A;
        curve.meta.phase_constant = s.small_p->constant;
    }
    if (kernel == KernelKind::full) {
        if (!model.cutoff_sq.is_zero()) curve.meta.A = effective_curvature(model, quad);
    } else {
        curve.meta.A = s.small_p->A;
    }

    const std::size_t n = times.size();
    curve.values.assign(n, {});
    std::vector<double> errors(n, 0.0);
    std::vector<std::exception_ptr> failures(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                curve.values[i] = evaluate(s, times[i], quad, kernel, errors[i]);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    for (auto& e : failures)
        if (e) std::rethrow_exception(e);
    for (double e : errors) curve.meta.max_error = std::max(curve.meta.max_error, e);
    return curve;
}

// ------------------------------- Tail fitting --------------------------------

namespace {

struct LineFit {
    double slope{0.0};
    double intercept{0.0};
    double rms{0.0};
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
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
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss += r * r;
    }
    fit.rms = std::sqrt(ss / n);
    return fit;
}

}  // namespace

TailFit fit_tail_exponent(const DecayCurve& curve, const WindowRule& rule) {
    if (curve.times.empty()) throw InsufficientSamplesError("fit_tail_exponent: empty curve");
    std::pair<double, double> window;
    if (rule.range) {
        window = *rule.range;
        if (!(window.second > window.first)) throw std::invalid_argument("fit window requires t_min < t_max");
    } else if (curve.meta.A && *curve.meta.A > 0.0 && curve.meta.B > 0.0) {
        window = {10.0 * curve.meta.B / *curve.meta.A, curve.times.back()};
    } else {
        window = {curve.times.back() / 10.0, curve.times.back()};
    }
    const double slack = 1e-12 * window.second;
    std::vector<double> log_t, log_x, t_lin;
    for (std::size_t i = 0; i < curve.times.size(); ++i) {
        const double t = curve.times[i];
        if (t < window.first - slack || t > window.second + slack || !(t > 0.0)) continue;
        const double m = std::abs(curve.values[i]);
        if (!(m > 0.0)) continue;
        log_t.push_back(std::log(t));
        log_x.push_back(std::log(m));
        t_lin.push_back(t);
    }
    if (log_t.size() < 8)
        throw InsufficientSamplesError("fit_tail_exponent: " + std::to_string(log_t.size()) +
                                       " samples in the window, at least 8 required");

    const LineFit power = least_squares(log_t, log_x);
    const LineFit expo = least_squares(t_lin, log_x);
    TailFit fit;
    fit.exponent = power.slope;
    fit.intercept = power.intercept;
    fit.fit_window = {std::max(window.first, t_lin.front()), std::min(window.second, t_lin.back())};
    fit.residual = power.rms;
    fit.exponential_rate = -expo.slope;
    fit.exponential_residual = expo.rms;
    fit.samples = log_t.size();

    constexpr double kTiny = 1e-13;
    if (power.rms <= kTiny && expo.rms <= kTiny) {
        fit.classification = TailClass::power_law;  // constant modulus: exponent 0
    } else if (power.rms > 5.0 * expo.rms) {
        fit.classification = TailClass::exponential;
    } else if (power.rms < 0.05 && std::isfinite(power.slope)) {
        fit.classification = TailClass::power_law;
    } else {
        fit.classification = TailClass::undetermined;
    }
    return fit;
}

}  // namespace stochlim
