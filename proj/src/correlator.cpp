// correlator.cpp: vacuum correlators by recursive contraction

#include "stochlim/correlator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "stochlim/errors.hpp"

namespace stochlim {

namespace {

constexpr double kPi = std::numbers::pi;
using cd = std::complex<double>;

// q_λ(t_i - t_j, x)^power
struct QFactor {
    std::size_t i;
    std::size_t j;
    double x;
    int power;
};

struct RawTerm {
    Pairing pairing;
    std::vector<QFactor> factors;
    std::vector<double> shells;
    double inverse_volume{1.0};
};

double shell(const Dispersion& omega, const Vec3& k, const Vec3& p) { return resonance_energy(omega, k, p); }

double sigma(Eps e) { return e == Eps::annihilator ? 1.0 : -1.0; }

// particle momentum just left of word position `pos`
Vec3 momentum_before(const OperatorWord& w, std::size_t pos) {
    Vec3 p = w.particle_momentum;
    for (std::size_t l = 0; l < pos; ++l) p = p - sigma(w.symbols[l].eps) * w.momentum_table[w.symbols[l].label].k;
    return p;
}

std::vector<std::size_t> without(const std::vector<std::size_t>& alive, std::size_t a, std::size_t b) {
    std::vector<std::size_t> out;
    out.reserve(alive.size());
    for (std::size_t v : alive)
        if (v != a && v != b) out.push_back(v);
    return out;
}

void sweep(const OperatorWord& w, const Dispersion& omega, const std::vector<std::size_t>& alive, RawTerm acc,
           std::vector<RawTerm>& out) {
    if (alive.empty()) {
        out.push_back(std::move(acc));
        return;
    }
    const std::size_t first = alive.front();
    const OperatorSymbol& a = w.symbols[first];
    if (a.eps == Eps::creator) return;  // <Ψ| a† = 0
    const MomentumCell& cell = w.momentum_table[a.label];
    const Vec3& k = cell.k;
    Vec3 passed{};  // Σσk over the symbols the annihilator has moved past
    for (std::size_t pos = 1; pos < alive.size(); ++pos) {
        const std::size_t idx = alive[pos];
        const OperatorSymbol& s = w.symbols[idx];
        const Vec3& ks = w.momentum_table[s.label].k;
        if (s.eps == Eps::creator && s.label == a.label) {
            RawTerm c = acc;
            c.pairing.emplace_back(first, idx);
            c.factors.push_back({first, idx, shell(omega, k, w.particle_momentum - passed), 1});
            c.shells.push_back(shell(omega, k, momentum_before(w, first)));
            c.inverse_volume /= cell.volume;
            sweep(w, omega, without(alive, first, idx), std::move(c), out);
        }
        if (s.eps == Eps::annihilator) {
            acc.factors.push_back({first, idx, dot(k, ks), -1});
            passed = passed + ks;
        } else {
            acc.factors.push_back({first, idx, dot(k, ks), 1});
            passed = passed - ks;
        }
    }
    // the annihilator reached the vacuum
}

void recurrence(const OperatorWord& w, const Dispersion& omega, const std::vector<std::size_t>& alive, RawTerm acc,
                std::vector<RawTerm>& out) {
    if (alive.empty()) {
        out.push_back(std::move(acc));
        return;
    }
    const std::size_t tau = alive.front();
    const OperatorSymbol& a = w.symbols[tau];
    if (a.eps == Eps::creator) return;
    const MomentumCell& cell = w.momentum_table[a.label];
    const Vec3& k = cell.k;
    for (std::size_t pj = 1; pj < alive.size(); ++pj) {
        const std::size_t j = alive[pj];
        if (w.symbols[j].eps != Eps::creator || w.symbols[j].label != a.label) continue;
        RawTerm c = acc;
        c.pairing.emplace_back(tau, j);
        c.factors.push_back({tau, j, shell(omega, k, w.particle_momentum), 1});
        c.shells.push_back(shell(omega, k, momentum_before(w, tau)));
        c.inverse_volume /= cell.volume;
        for (std::size_t pm = 1; pm < alive.size(); ++pm) {
            if (pm == pj) continue;
            const std::size_t m = alive[pm];
            const OperatorSymbol& s = w.symbols[m];
            const double x = dot(k, w.momentum_table[s.label].k);
            const int power = s.eps == Eps::annihilator ? -1 : 1;
            // behind the contracted creator the phase runs on τ - t_j, in front of it on τ - t_m
            if (pm > pj)
                c.factors.push_back({tau, j, x, power});
            else
                c.factors.push_back({tau, m, x, power});
        }
        recurrence(w, omega, without(alive, tau, j), std::move(c), out);
    }
}

std::vector<RawTerm> expand(const OperatorWord& w, const Dispersion& omega, bool right_end) {
    std::vector<std::size_t> alive(w.symbols.size());
    for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;
    std::vector<RawTerm> out;
    if (right_end)
        recurrence(w, omega, alive, RawTerm{}, out);
    else
        sweep(w, omega, alive, RawTerm{}, out);
    return out;
}

cd phase_at(const OperatorWord& w, const RawTerm& t, double lambda) {
    cd phase{1.0, 0.0};
    for (const QFactor& f : t.factors) {
        const cd q = q_lambda(w.symbols[f.i].time - w.symbols[f.j].time, f.x, lambda);
        phase *= f.power > 0 ? q : std::conj(q);
    }
    return phase;
}

CorrelatorValue evaluate(const OperatorWord& w, const Dispersion& omega, double lambda, bool right_end) {
    w.validate();
    if (!(lambda > 0.0)) throw std::invalid_argument("correlator requires lambda > 0");
    if (!w.balanced()) return CorrelatorValue{{0.0, 0.0}, false};
    cd sum{};
    for (const RawTerm& t : expand(w, omega, right_end)) {
        const double weight = std::pow(lambda, -2.0 * static_cast<double>(t.pairing.size())) * t.inverse_volume;
        sum += weight * phase_at(w, t, lambda);
    }
    return CorrelatorValue{sum, true};
}

}  // namespace

// -------------------------------- Words --------------------------------------

void OperatorWord::validate() const {
    if (symbols.size() > kMaxWordLength) throw std::invalid_argument("operator words are limited to length 8");
    for (const auto& c : momentum_table)
        if (!(std::isfinite(c.volume) && c.volume > 0.0)) throw std::invalid_argument("cell volume must be > 0");
    for (const auto& s : symbols) {
        if (s.label >= momentum_table.size()) throw std::invalid_argument("momentum label outside the table");
        if (!std::isfinite(s.time)) throw std::invalid_argument("symbol time must be finite");
    }
}

bool OperatorWord::balanced() const noexcept {
    std::ptrdiff_t n = 0;
    for (const auto& s : symbols) n += s.eps == Eps::annihilator ? 1 : -1;
    return n == 0;
}

std::complex<double> shift_particle_function(std::span<const Vec3> prefix, const ParticleFunction& f, const Vec3& p) {
    Vec3 q = p;
    for (const Vec3& k : prefix) q = q - k;
    return f(q);
}

std::complex<double> shift_particle_function(std::span<const SignedMomentum> prefix, const ParticleFunction& f,
                                             const Vec3& p) {
    Vec3 q = p;
    for (const auto& s : prefix) q = q - sigma(s.eps) * s.k;
    return f(q);
}

// ------------------------------ Correlators ----------------------------------

std::vector<PairingTerm> pairing_terms(const OperatorWord& word, const Dispersion& omega, double lambda) {
    word.validate();
    if (!(lambda > 0.0)) throw std::invalid_argument("correlator requires lambda > 0");
    std::vector<PairingTerm> out;
    if (!word.balanced()) return out;
    for (const RawTerm& t : expand(word, omega, false)) {
        out.push_back(PairingTerm{t.pairing, phase_at(word, t, lambda),
                                  std::pow(lambda, -2.0 * static_cast<double>(t.pairing.size())) * t.inverse_volume});
    }
    return out;
}

std::vector<FrequencyTerm> pairing_expansion(const OperatorWord& word, const Dispersion& omega) {
    word.validate();
    std::vector<FrequencyTerm> out;
    if (!word.balanced()) return out;
    for (const RawTerm& t : expand(word, omega, false)) {
        FrequencyTerm ft{t.pairing, std::vector<double>(word.symbols.size(), 0.0), t.shells, t.inverse_volume};
        for (const QFactor& f : t.factors) {
            ft.frequencies[f.i] += f.power * f.x;
            ft.frequencies[f.j] -= f.power * f.x;
        }
        out.push_back(std::move(ft));
    }
    return out;
}

CorrelatorValue vacuum_correlator_finite_lambda(const OperatorWord& word, const Dispersion& omega, double lambda) {
    return evaluate(word, omega, lambda, false);
}

CorrelatorValue recurrence_formula_correlator(const OperatorWord& word, const Dispersion& omega, double lambda) {
    return evaluate(word, omega, lambda, true);
}

// ------------------------------ Smeared limit --------------------------------

namespace {

// log of ∫ d^n t exp(-tᵀMt + bᵀt + c) for real SPD M and complex b
cd log_gaussian_integral(const Eigen::MatrixXd& M, const Eigen::VectorXcd& b, double c) {
    const Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) throw std::runtime_error("smearing quadratic form is not positive definite");
    const Eigen::VectorXd re = llt.solve(b.real());
    const Eigen::VectorXd im = llt.solve(b.imag());
    const Eigen::VectorXcd x = re.cast<cd>() + cd(0.0, 1.0) * im.cast<cd>();
    double log_det = 0.0;
    const Eigen::MatrixXd L = llt.matrixL();
    for (Eigen::Index i = 0; i < L.rows(); ++i) log_det += 2.0 * std::log(L(i, i));
    const double n = static_cast<double>(M.rows());
    const cd quad_form = 0.25 * b.cwiseProduct(x).sum();  // bᵀ M⁻¹ b, no conjugation
    return 0.5 * n * std::log(kPi) - 0.5 * log_det + quad_form + c;
}

}  // namespace

ConvergenceReport master_correlator_smeared(const OperatorWord& word, const std::vector<TestFunction>& time_smearings,
                                            const TestFunction& chi, const Dispersion& omega,
                                            const std::vector<double>& lambdas) {
    word.validate();
    const std::size_t n = word.symbols.size();
    if (n != 2 && n != 4) throw UnsupportedError("master_correlator_smeared supports words of length 2 or 4");
    if (time_smearings.size() != n) throw std::invalid_argument("one time smearing per symbol is required");
    if (lambdas.empty()) throw std::invalid_argument("lambda sequence is empty");
    for (std::size_t i = 0; i < lambdas.size(); ++i)
        if (!(lambdas[i] > 0.0) || (i > 0 && !(lambdas[i] < lambdas[i - 1])))
            throw std::invalid_argument("lambdas must be positive and strictly decreasing");

    const auto terms = pairing_expansion(word, omega);
    auto shell_scale = [&](std::size_t label) {
        const Vec3& k = word.momentum_table[label].k;
        return 1.0 + std::abs(omega(norm(k))) + norm(k) * norm(word.particle_momentum) + 0.5 * dot(k, k);
    };
    auto on_shell = [&](const FrequencyTerm& t, std::size_t c) {
        return std::abs(t.shell_values[c]) <= 1e-12 * shell_scale(word.symbols[t.pairing[c].first].label);
    };

    ConvergenceReport report;
    report.lambdas = lambdas;
    report.limit_target = 0.0;
    for (const FrequencyTerm& t : terms) {
        cd contribution = t.inverse_volume;
        for (std::size_t c = 0; c < t.pairing.size() && contribution != 0.0; ++c) {
            const auto [ia, ic] = t.pairing[c];
            const double nu = t.frequencies[ia];
            const double scale = shell_scale(word.symbols[ia].label);
            if (!on_shell(t, c) || std::abs(nu + t.frequencies[ic]) > 1e-12 * scale) {
                contribution = 0.0;
                break;
            }
            const TestFunction& f = time_smearings[ia];
            const TestFunction& g = time_smearings[ic];
            // ∫ exp(-(t-a)²/u² - (t-b)²/v²) dt
            const double u2 = f.width() * f.width(), v2 = g.width() * g.width();
            const double overlap = std::sqrt(kPi * u2 * v2 / (u2 + v2)) *
                                   std::exp(-(f.center() - g.center()) * (f.center() - g.center()) / (u2 + v2));
            contribution *= 2.0 * kPi * chi(-nu) * overlap;
        }
        report.limit_target += contribution;
    }

    for (double lambda : lambdas) {
        const double l2 = lambda * lambda;
        std::vector<cd> logs;  // per-term complex logarithms, summed stably below
        for (const FrequencyTerm& t : terms) {
            Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
            Eigen::VectorXcd b(n);
            double c = 0.0;
            for (std::size_t m = 0; m < n; ++m) {
                const double w2 = time_smearings[m].width() * time_smearings[m].width();
                const double mu = time_smearings[m].center();
                M(m, m) = 1.0 / w2;
                b(m) = cd(2.0 * mu / w2, -t.frequencies[m] / l2);
                c -= mu * mu / w2;
            }
            double log_prefactor = std::log(t.inverse_volume) - static_cast<double>(t.pairing.size()) * std::log(l2);
            for (std::size_t p = 0; p < t.pairing.size(); ++p) {
                if (!on_shell(t, p)) continue;
                // ∫dξ χ(ξ) q_λ(Δ, D + ξ) = q_λ(Δ, D) χ̂(Δ/λ²)
                const auto [ia, ic] = t.pairing[p];
                const double kappa = chi.width() * chi.width() / (4.0 * l2 * l2);
                M(ia, ia) += kappa;
                M(ic, ic) += kappa;
                M(ia, ic) -= kappa;
                M(ic, ia) -= kappa;
                b(ia) -= cd(0.0, chi.center() / l2);
                b(ic) += cd(0.0, chi.center() / l2);
                log_prefactor += std::log(chi.integral());
            }
            logs.push_back(log_prefactor + log_gaussian_integral(M, b, c));
        }
        cd value{};
        double log_abs = -std::numeric_limits<double>::infinity();
        if (!logs.empty()) {
            double top = -std::numeric_limits<double>::infinity();
            for (const cd& l : logs) top = std::max(top, l.real());
            cd scaled{};
            for (const cd& l : logs) scaled += std::exp(l - top);
            value = std::exp(top) * scaled;
            log_abs = top + std::log(std::abs(scaled));
        }
        report.values.push_back(value);
        report.log_abs_values.push_back(log_abs);
        report.errors.push_back(std::abs(value - report.limit_target));
    }
    std::vector<double> log_err;
    for (double e : report.errors) log_err.push_back(std::log(e));
    report.fitted_order = fitted_order(report.lambdas, log_err);
    return report;
}

}  // namespace stochlim
