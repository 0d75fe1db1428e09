// runner.cpp: run modes and table writers

#include "stochlim/runner.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <functional>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/core.h>
#include <json.hpp>

#include "stochlim/correlator.hpp"
#include "stochlim/errors.hpp"
#include "stochlim/ggkernel.hpp"
#include "stochlim/kernels.hpp"

#ifndef STOCHLIM_VERSION
#define STOCHLIM_VERSION "0.0.0"
#endif

namespace stochlim {

const char* version() noexcept { return STOCHLIM_VERSION; }

namespace {

using cd = std::complex<double>;

// fn(i) for i in [0, n) on up to `threads` workers; the first failure in index
// order is rethrown so the error does not depend on scheduling.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    std::vector<std::exception_ptr> failures(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    const unsigned workers = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(threads, n)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    for (auto& e : failures)
        if (e) std::rethrow_exception(e);
}

std::string g17(double v) { return fmt::format("{:.17g}", v); }

std::string joined(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) out += (out.empty() ? "" : "; ") + p;
    return out;
}

void common_meta(Table& t, const RunConfig& c) {
    t.meta.emplace_back("program", "stochlim");
    t.meta.emplace_back("version", version());
    t.meta.emplace_back("mode", mode_name(c.mode));
    t.meta.emplace_back("config_hash", fmt::format("{:016x}", config_hash(c)));
    t.meta.emplace_back("isa", kernels::isa_name(kernels::active_isa()));
}

std::vector<double> curve_times(const RunConfig& c, const SmearingFunction& f) {
    switch (c.time_grid.kind) {
        case TimeGridSpec::Kind::log:
            return log_time_grid(c.time_grid.start, c.time_grid.stop, c.time_grid.count);
        case TimeGridSpec::Kind::list:
            return c.time_grid.values;
        case TimeGridSpec::Kind::automatic:
            break;
    }
    double A = 0.0;
    if (c.kernel == KernelKind::full) {
        if (!c.model.cutoff_sq.is_zero()) A = effective_curvature(c.model, c.quad);
    } else {
        A = small_p_model(c.model, c.quad).A;
    }
    return default_time_grid(A, f.B(), c.time_grid.count);
}

WindowRule window_rule(const RunConfig& c) {
    return c.fit_window ? WindowRule::explicit_range(c.fit_window->first, c.fit_window->second)
                        : WindowRule::automatic();
}

struct CurveRun {
    DecayCurve curve;
    std::optional<TailFit> fit;
    std::string fit_failure;
};

CurveRun run_curve(const RunConfig& c, unsigned threads) {
    const SmearingFunction f = c.smearing.make();
    CurveRun r{build_decay_curve(c.model, f, curve_times(c, f), c.quad, c.kernel, threads), std::nullopt, {}};
    try {
        r.fit = fit_tail_exponent(r.curve, window_rule(c));
    } catch (const InsufficientSamplesError& e) {
        r.fit_failure = e.what();
    }
    return r;
}

std::string opt(const std::optional<double>& v) { return v ? g17(*v) : std::string("none"); }

Table curve_table(const RunConfig& c, unsigned threads) {
    Table t;
    common_meta(t, c);
    const CurveRun r = run_curve(c, threads);
    const auto& m = r.curve.meta;
    t.meta.emplace_back("kernel", kernel_name(c.kernel));
    t.meta.emplace_back("A", opt(m.A));
    t.meta.emplace_back("A_model", opt(m.A_model));
    t.meta.emplace_back("B", g17(m.B));
    t.meta.emplace_back("phase_constant", g17(m.phase_constant));
    t.meta.emplace_back("max_error", g17(m.max_error));
    if (r.fit) {
        t.meta.emplace_back("fit_exponent", g17(r.fit->exponent));
        t.meta.emplace_back("fit_intercept", g17(r.fit->intercept));
        t.meta.emplace_back("fit_t_min", g17(r.fit->fit_window.first));
        t.meta.emplace_back("fit_t_max", g17(r.fit->fit_window.second));
        t.meta.emplace_back("fit_residual", g17(r.fit->residual));
        t.meta.emplace_back("fit_classification", tail_class_name(r.fit->classification));
        t.meta.emplace_back("fit_exponential_rate", g17(r.fit->exponential_rate));
        t.meta.emplace_back("fit_exponential_residual", g17(r.fit->exponential_residual));
        t.meta.emplace_back("fit_samples", std::to_string(r.fit->samples));
    } else {
        t.meta.emplace_back("fit_status", r.fit_failure);
    }
    if (!m.warnings.empty()) t.meta.emplace_back("warnings", joined(m.warnings));

    t.columns = {"t", "re", "im", "abs"};
    for (std::size_t i = 0; i < r.curve.times.size(); ++i) {
        const cd x = r.curve.values[i];
        t.rows.push_back({r.curve.times[i], x.real(), x.imag(), std::abs(x)});
    }
    return t;
}

Table rate_table(const RunConfig& c, unsigned threads) {
    Table t;
    common_meta(t, c);
    const std::vector<double> ps = c.momenta.points();
    std::vector<ComplexRate> rates(ps.size());
    parallel_for(ps.size(), threads, [&](std::size_t i) { rates[i] = gg_minus(c.model, ps[i], c.quad); });
    t.columns = {"p", "re", "im"};
    for (std::size_t i = 0; i < ps.size(); ++i) t.rows.push_back({ps[i], rates[i].re, rates[i].im});
    return t;
}

Table sweep_table(const RunConfig& c, unsigned threads) {
    Table t;
    common_meta(t, c);
    t.meta.emplace_back("kernel", kernel_name(c.kernel));
    t.meta.emplace_back("sweep_parameter", c.sweep.parameter);
    const auto& values = c.sweep.values;
    std::vector<CurveRun> runs(values.size());
    parallel_for(values.size(), threads, [&](std::size_t i) {
        runs[i] = run_curve(with_parameter(c, c.sweep.parameter, values[i]), 1);
    });
    t.columns = {"value",        "exponent",         "intercept",         "residual",
                 "classification", "exponential_rate", "exponential_residual", "samples",
                 "fit_t_min",    "fit_t_max",        "A",                 "max_error"};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::string> warnings;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const CurveRun& r = runs[i];
        const double A = r.curve.meta.A.value_or(nan);
        for (const auto& w : r.curve.meta.warnings) warnings.push_back(fmt::format("value {}: {}", g17(values[i]), w));
        if (r.fit) {
            const TailFit& f = *r.fit;
            t.rows.push_back({values[i], f.exponent, f.intercept, f.residual, std::string(tail_class_name(f.classification)),
                              f.exponential_rate, f.exponential_residual, static_cast<std::int64_t>(f.samples),
                              f.fit_window.first, f.fit_window.second, A, r.curve.meta.max_error});
        } else {
            t.rows.push_back({values[i], nan, nan, nan, std::string("insufficient_samples"), nan, nan,
                              std::int64_t{0}, nan, nan, A, r.curve.meta.max_error});
        }
    }
    if (!warnings.empty()) t.meta.emplace_back("warnings", joined(warnings));
    return t;
}

const std::vector<std::string> kReportColumns = {"check",  "lambda", "re",        "im",        "abs",
                                                 "log_abs", "error", "target_re", "target_im", "fitted_order"};

void append_report(Table& t, const std::string& check, const ConvergenceReport& r) {
    for (std::size_t i = 0; i < r.lambdas.size(); ++i) {
        const double err = i < r.errors.size() ? r.errors[i] : std::abs(r.values[i] - r.limit_target);
        t.rows.push_back({check, r.lambdas[i], r.values[i].real(), r.values[i].imag(), std::abs(r.values[i]),
                          r.log_abs_values[i], err, r.limit_target.real(), r.limit_target.imag(), r.fitted_order});
    }
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

Table qcheck_table(const RunConfig& c) {
    Table t;
    common_meta(t, c);
    const auto& q = c.qcheck;
    const ConvergenceReport ql = smeared_q_limit(q.phi, q.x, q.lambdas, c.quad);
    const ConvergenceReport dl = smeared_delta_limit(q.phi, q.psi, q.chi, q.lambdas, c.quad);
    t.meta.emplace_back("q_strictly_decreasing", strictly_decreasing(ql.log_abs_values) ? "true" : "false");
    t.meta.emplace_back("q_log_ratio_last_first", g17(ql.log_abs_values.back() - ql.log_abs_values.front()));
    t.meta.emplace_back("delta_target", g17(dl.limit_target.real()));
    t.meta.emplace_back("delta_fitted_order", g17(dl.fitted_order));
    t.columns = kReportColumns;
    append_report(t, "q_limit", ql);
    append_report(t, "delta_limit", dl);
    return t;
}

// Every balanced word of length 2 and 4 over the configured labels.
std::vector<OperatorWord> balanced_words(const CorrCheckSpec& cc) {
    std::vector<MomentumCell> table;
    for (const Vec3& k : cc.momenta) table.push_back({k, cc.volume});
    const std::size_t L = table.size();
    std::vector<OperatorWord> out;
    for (std::size_t n : {2u, 4u}) {
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            if (static_cast<std::size_t>(std::popcount(mask)) * 2 != n) continue;
            std::size_t combos = 1;
            for (std::size_t i = 0; i < n; ++i) combos *= L;
            for (std::size_t code = 0; code < combos; ++code) {
                OperatorWord w;
                w.momentum_table = table;
                w.particle_momentum = cc.particle_momentum;
                std::size_t rest = code;
                for (std::size_t j = 0; j < n; ++j) {
                    const Eps e = (mask >> j) & 1u ? Eps::creator : Eps::annihilator;
                    w.symbols.push_back({e, 0.37 * static_cast<double>(j) - 0.5, rest % L});
                    rest /= L;
                }
                out.push_back(std::move(w));
            }
        }
    }
    return out;
}

Table corrcheck_table(const RunConfig& c) {
    Table t;
    common_meta(t, c);
    const auto& cc = c.corrcheck;
    const Dispersion& omega = c.model.dispersion;

    const auto words = balanced_words(cc);
    double worst = 0.0;
    std::size_t nonzero = 0;
    for (const auto& w : words) {
        for (double lambda : cc.check_lambdas) {
            const cd a = vacuum_correlator_finite_lambda(w, omega, lambda).value;
            const cd b = recurrence_formula_correlator(w, omega, lambda).value;
            worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
            if (std::abs(a) > 0.0) ++nonzero;
        }
    }
    t.meta.emplace_back("recurrence_words", std::to_string(words.size()));
    t.meta.emplace_back("recurrence_nonzero", std::to_string(nonzero));
    t.meta.emplace_back("recurrence_max_discrepancy", g17(worst));

    const Vec3 k0 = cc.momenta.front();
    OperatorWord off;
    off.momentum_table = {{k0, cc.volume}};
    off.particle_momentum = cc.particle_momentum;
    off.symbols = {{Eps::annihilator, 0.0, 0}, {Eps::creator, 0.0, 0}};
    const ConvergenceReport r_off = master_correlator_smeared(off, cc.time_smearings, cc.chi, omega, cc.lambdas);

    // move the particle onto the shell along k0
    OperatorWord on = off;
    const double k = norm(k0);
    const double s = (omega(k) + 0.5 * k * k) / (k * k);
    on.particle_momentum = {s * k0[0], s * k0[1], s * k0[2]};
    const ConvergenceReport r_on = master_correlator_smeared(on, cc.time_smearings, cc.chi, omega, cc.lambdas);

    t.meta.emplace_back("off_shell_energy", g17(resonance_energy(omega, k0, off.particle_momentum)));
    t.meta.emplace_back("off_shell_log_abs_last", g17(r_off.log_abs_values.back()));
    t.meta.emplace_back("on_shell_fitted_order", g17(r_on.fitted_order));
    t.columns = kReportColumns;
    append_report(t, "off_shell", r_off);
    append_report(t, "on_shell", r_on);
    return t;
}

std::string csv_cell(const Table::Cell& cell) {
    if (const double* d = std::get_if<double>(&cell)) return g17(*d);
    if (const std::int64_t* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
    const std::string& s = std::get<std::string>(cell);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

std::string single_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

}  // namespace

Table execute(const RunConfig& config, unsigned threads) {
    threads = std::max(1u, threads);
    switch (config.mode) {
        case RunMode::rate: return rate_table(config, threads);
        case RunMode::curve: return curve_table(config, threads);
        case RunMode::sweep: return sweep_table(config, threads);
        case RunMode::qcheck: return qcheck_table(config);
        case RunMode::corrcheck: return corrcheck_table(config);
    }
    throw std::logic_error("unknown run mode");
}

void write_csv(const Table& table, std::ostream& out) {
    for (const auto& [k, v] : table.meta) out << "# " << k << ": " << single_line(v) << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
        out << '\n';
    }
}

void write_json(const Table& table, std::ostream& out) {
    nlohmann::ordered_json doc;
    doc["meta"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : table.meta) doc["meta"][k] = v;
    doc["columns"] = table.columns;
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        auto r = nlohmann::ordered_json::array();
        for (const auto& cell : row) std::visit([&](const auto& v) { r.push_back(v); }, cell);
        doc["rows"].push_back(std::move(r));
    }
    out << doc.dump(1) << '\n';
}

int exit_code_for(const std::exception_ptr& error) noexcept {
    try {
        std::rethrow_exception(error);
    } catch (const ConfigError&) {
        return kExitConfig;
    } catch (const IoError&) {
        return kExitIo;
    } catch (const NonConvergenceError&) {
        return kExitNonConvergence;
    } catch (const std::invalid_argument&) {  // DomainError is a domain_error, see below
        return kExitConfig;
    } catch (const std::domain_error&) {
        return kExitConfig;
    } catch (...) {
        return kExitOther;
    }
}

int run(const RunConfig& config, unsigned threads, std::ostream& fallback, std::ostream& err) {
    try {
        std::ostringstream buffer;
        const Table table = execute(config, threads);
        if (config.format == OutputFormat::csv)
            write_csv(table, buffer);
        else
            write_json(table, buffer);
        if (config.output.empty()) {
            fallback << buffer.str() << std::flush;
            if (!fallback) throw IoError("cannot write to standard output");
        } else {
            std::ofstream file(config.output, std::ios::binary | std::ios::trunc);
            if (!file) throw IoError("cannot open output file '" + config.output + "'");
            file << buffer.str();
            file.close();
            if (!file) throw IoError("error writing output file '" + config.output + "'");
        }
        return kExitOk;
    } catch (const std::exception& e) {
        err << "stochlim: " << mode_name(config.mode) << ": " << e.what() << '\n';
        return exit_code_for(std::current_exception());
    } catch (...) {
        err << "stochlim: " << mode_name(config.mode) << ": unknown error\n";
        return kExitOther;
    }
}

}  // namespace stochlim
