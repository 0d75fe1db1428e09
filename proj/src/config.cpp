// config.cpp: YAML run configuration

#include "stochlim/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <utility>

#include <fmt/core.h>

#include "stochlim/errors.hpp"

namespace stochlim {

// ---------------------------------- Names ------------------------------------

const char* mode_name(RunMode m) noexcept {
    switch (m) {
        case RunMode::rate: return "rate";
        case RunMode::curve: return "curve";
        case RunMode::sweep: return "sweep";
        case RunMode::qcheck: return "qcheck";
        case RunMode::corrcheck: return "corrcheck";
    }
    return "?";
}

std::optional<RunMode> parse_mode(std::string_view name) noexcept {
    for (RunMode m : {RunMode::rate, RunMode::curve, RunMode::sweep, RunMode::qcheck, RunMode::corrcheck})
        if (name == mode_name(m)) return m;
    return std::nullopt;
}

const char* format_name(OutputFormat f) noexcept { return f == OutputFormat::csv ? "csv" : "json"; }

std::optional<OutputFormat> parse_format(std::string_view name) noexcept {
    if (name == "csv") return OutputFormat::csv;
    if (name == "json") return OutputFormat::json;
    return std::nullopt;
}

SmearingFunction SmearingSpec::make() const {
    return normalization ? SmearingFunction::gaussian(B, *normalization) : SmearingFunction::normalized_gaussian(B);
}

std::vector<double> MomentumGridSpec::points() const {
    if (!values.empty()) return values;
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = count == 1 ? start : start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
    if (count > 1) out.back() = stop;
    return out;
}

// --------------------------------- Parsing -----------------------------------

namespace {

const char* kind_name(TimeGridSpec::Kind k) {
    switch (k) {
        case TimeGridSpec::Kind::automatic: return "auto";
        case TimeGridSpec::Kind::log: return "log";
        case TimeGridSpec::Kind::list: return "list";
    }
    return "?";
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Collects every problem in the document instead of stopping at the first.
class Reader {
public:
    std::vector<std::string> problems;

    void fail(const YAML::Node& node, const std::string& path, const std::string& message) {
        const auto mark = node.Mark();
        if (mark.line >= 0)
            problems.push_back(fmt::format("line {}: key '{}': {}", mark.line + 1, path, message));
        else
            problems.push_back(fmt::format("key '{}': {}", path, message));
    }

    // true if `node` is a map (or absent); flags keys outside `allowed`
    bool map(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> allowed) {
        if (!node || node.IsNull()) return false;
        if (!node.IsMap()) {
            fail(node, path, "expected a mapping");
            return false;
        }
        for (const auto& kv : node) {
            const std::string key = kv.first.as<std::string>();
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
                fail(kv.first, join(path, key), "unknown key");
        }
        return true;
    }

    template <class T>
    void scalar(const YAML::Node& parent, const char* key, const std::string& path, T& out) {
        const YAML::Node v = parent[key];
        if (!v) return;
        const std::string where = join(path, key);
        if (!v.IsScalar()) {
            fail(v, where, "expected a scalar");
            return;
        }
        try {
            out = v.as<T>();
        } catch (const YAML::Exception&) {
            fail(v, where, std::is_same_v<T, double> ? "expected a number" : "expected an integer");
        }
    }

    void count(const YAML::Node& parent, const char* key, const std::string& path, std::size_t& out) {
        long long raw = static_cast<long long>(out);
        scalar(parent, key, path, raw);
        if (raw < 0) {
            fail(parent[key], join(path, key), "must be >= 0");
            return;
        }
        out = static_cast<std::size_t>(raw);
    }

    void text(const YAML::Node& parent, const char* key, const std::string& path, std::string& out) {
        scalar(parent, key, path, out);
    }

    void numbers(const YAML::Node& parent, const char* key, const std::string& path, std::vector<double>& out) {
        const YAML::Node v = parent[key];
        if (!v) return;
        numbers_at(v, join(path, key), out);
    }

    void numbers_at(const YAML::Node& v, const std::string& where, std::vector<double>& out) {
        if (!v.IsSequence()) {
            fail(v, where, "expected a list of numbers");
            return;
        }
        std::vector<double> tmp;
        for (std::size_t i = 0; i < v.size(); ++i) {
            try {
                tmp.push_back(v[i].as<double>());
            } catch (const YAML::Exception&) {
                fail(v[i], fmt::format("{}[{}]", where, i), "expected a number");
                return;
            }
        }
        out = std::move(tmp);
    }

    void vec3_at(const YAML::Node& v, const std::string& where, Vec3& out) {
        std::vector<double> tmp;
        const std::size_t before = problems.size();
        numbers_at(v, where, tmp);
        if (problems.size() != before) return;
        if (tmp.size() != 3) {
            fail(v, where, "expected three components");
            return;
        }
        out = {tmp[0], tmp[1], tmp[2]};
    }

    // Runs a factory and records its complaint against `path`.
    template <class F>
    void build(const YAML::Node& node, const std::string& path, F&& f) {
        try {
            f();
        } catch (const std::invalid_argument& e) {
            fail(node, path, e.what());
        }
    }
};

RadialProfile read_profile(Reader& r, const YAML::Node& node, const std::string& path, const RadialProfile& fallback) {
    if (!node) return fallback;
    if (!node.IsMap()) {
        r.fail(node, path, "expected a mapping");
        return fallback;
    }
    std::string kind = "gaussian";
    r.text(node, "kind", path, kind);
    RadialProfile out = fallback;
    if (kind == "gaussian") {
        r.map(node, path, {"kind", "width", "amplitude", "center"});
        GaussianShape g;
        r.scalar(node, "width", path, g.width);
        r.scalar(node, "amplitude", path, g.amplitude);
        r.scalar(node, "center", path, g.center);
        r.build(node, path, [&] { out = RadialProfile::gaussian(g.width, g.amplitude, g.center); });
    } else if (kind == "compact_bump") {
        r.map(node, path, {"kind", "inner", "outer", "amplitude"});
        CompactBump b;
        r.scalar(node, "inner", path, b.inner);
        r.scalar(node, "outer", path, b.outer);
        r.scalar(node, "amplitude", path, b.amplitude);
        r.build(node, path, [&] { out = RadialProfile::compact_bump(b.inner, b.outer, b.amplitude); });
    } else if (kind == "zero") {
        r.map(node, path, {"kind"});
        out = RadialProfile::zero();
    } else {
        r.fail(node["kind"], join(path, "kind"), "expected gaussian, compact_bump or zero");
    }
    return out;
}

TestFunction read_test_function(Reader& r, const YAML::Node& node, const std::string& path, const TestFunction& fallback) {
    if (!r.map(node, path, {"center", "width"})) return fallback;
    double c = fallback.center(), w = fallback.width();
    r.scalar(node, "center", path, c);
    r.scalar(node, "width", path, w);
    TestFunction out = fallback;
    r.build(node, path, [&] { out = TestFunction::gaussian(c, w); });
    return out;
}

void read_model(Reader& r, const YAML::Node& node, ModelConfig& model) {
    if (!r.map(node, "model", {"dispersion", "cutoff", "vertex"})) return;
    if (const YAML::Node d = node["dispersion"]; r.map(d, "model.dispersion", {"kind", "omega0", "base", "profile"})) {
        std::string kind = "constant";
        r.text(d, "kind", "model.dispersion", kind);
        if (kind == "constant") {
            for (const char* k : {"base", "profile"})
                if (d[k]) r.fail(d[k], join("model.dispersion", k), "only valid for the radial dispersion");
            double w0 = 1.0;
            r.scalar(d, "omega0", "model.dispersion", w0);
            r.build(d, "model.dispersion.omega0", [&] { model.dispersion = Dispersion::constant(w0); });
        } else if (kind == "radial") {
            if (d["omega0"]) r.fail(d["omega0"], "model.dispersion.omega0", "only valid for the constant dispersion");
            double base = 1.0;
            r.scalar(d, "base", "model.dispersion", base);
            const RadialProfile prof = read_profile(r, d["profile"], "model.dispersion.profile", RadialProfile::zero());
            r.build(d, "model.dispersion", [&] { model.dispersion = Dispersion::radial(base, prof); });
        } else {
            r.fail(d["kind"], "model.dispersion.kind", "expected constant or radial");
        }
    }
    model.cutoff_sq = read_profile(r, node["cutoff"], "model.cutoff", model.cutoff_sq);
    std::string vertex = model.vertex == Vertex::dipole ? "dipole" : "scalar";
    r.text(node, "vertex", "model", vertex);
    if (vertex == "dipole")
        model.vertex = Vertex::dipole;
    else if (vertex == "scalar")
        model.vertex = Vertex::scalar;
    else
        r.fail(node["vertex"], "model.vertex", "expected dipole or scalar");
}

void read_smearing(Reader& r, const YAML::Node& node, SmearingSpec& s) {
    if (!r.map(node, "smearing", {"B", "normalization"})) return;
    r.scalar(node, "B", "smearing", s.B);
    if (const YAML::Node n = node["normalization"]) {
        if (n.IsScalar() && n.Scalar() == "auto") {
            s.normalization.reset();
        } else {
            double v = 1.0;
            r.scalar(node, "normalization", "smearing", v);
            s.normalization = v;
        }
    }
}

void read_quadrature(Reader& r, const YAML::Node& node, QuadratureSpec& q) {
    if (!r.map(node, "quadrature", {"rel_tol", "abs_tol", "max_subdivisions", "radial_cutoff_sigma", "pv_excision"}))
        return;
    r.scalar(node, "rel_tol", "quadrature", q.rel_tol);
    r.scalar(node, "abs_tol", "quadrature", q.abs_tol);
    r.scalar(node, "max_subdivisions", "quadrature", q.max_subdivisions);
    r.scalar(node, "radial_cutoff_sigma", "quadrature", q.radial_cutoff_sigma);
    r.scalar(node, "pv_excision", "quadrature", q.pv_excision);
}

void read_run(Reader& r, const YAML::Node& node, RunConfig& c) {
    if (!r.map(node, "run",
               {"mode", "kernel", "momenta", "time_grid", "fit_window", "sweep", "qcheck", "corrcheck", "output",
                "format"}))
        return;
    if (const YAML::Node m = node["mode"]) {
        std::string s;
        r.text(node, "mode", "run", s);
        if (auto mode = parse_mode(s))
            c.mode = *mode;
        else if (!s.empty() || m.IsScalar())
            r.fail(m, "run.mode", "expected rate, curve, sweep, qcheck or corrcheck");
    }
    if (const YAML::Node k = node["kernel"]) {
        std::string s;
        r.text(node, "kernel", "run", s);
        if (auto kind = parse_kernel(s))
            c.kernel = *kind;
        else
            r.fail(k, "run.kernel", "expected full, quadratic_model or closed_form");
    }
    if (const YAML::Node m = node["momenta"]) {
        if (m.IsSequence()) {
            r.numbers_at(m, "run.momenta", c.momenta.values);
        } else if (r.map(m, "run.momenta", {"start", "stop", "count"})) {
            r.scalar(m, "start", "run.momenta", c.momenta.start);
            r.scalar(m, "stop", "run.momenta", c.momenta.stop);
            r.count(m, "count", "run.momenta", c.momenta.count);
        }
    }
    if (const YAML::Node t = node["time_grid"]) {
        if (t.IsSequence()) {
            c.time_grid.kind = TimeGridSpec::Kind::list;
            r.numbers_at(t, "run.time_grid", c.time_grid.values);
        } else if (t.IsMap()) {
            std::string kind = "auto";
            r.text(t, "kind", "run.time_grid", kind);
            if (kind == "auto") {
                c.time_grid.kind = TimeGridSpec::Kind::automatic;
                r.map(t, "run.time_grid", {"kind", "count"});
                r.count(t, "count", "run.time_grid", c.time_grid.count);
            } else if (kind == "log") {
                c.time_grid.kind = TimeGridSpec::Kind::log;
                r.map(t, "run.time_grid", {"kind", "start", "stop", "count"});
                r.scalar(t, "start", "run.time_grid", c.time_grid.start);
                r.scalar(t, "stop", "run.time_grid", c.time_grid.stop);
                r.count(t, "count", "run.time_grid", c.time_grid.count);
            } else if (kind == "list") {
                c.time_grid.kind = TimeGridSpec::Kind::list;
                r.map(t, "run.time_grid", {"kind", "values"});
                r.numbers(t, "values", "run.time_grid", c.time_grid.values);
            } else {
                r.fail(t["kind"], "run.time_grid.kind", "expected auto, log or list");
            }
        } else {
            r.fail(t, "run.time_grid", "expected a mapping or a list of times");
        }
    }
    if (const YAML::Node w = node["fit_window"]) {
        if (w.IsScalar() && w.Scalar() == "auto") {
            c.fit_window.reset();
        } else {
            std::vector<double> v;
            const std::size_t before = r.problems.size();
            r.numbers_at(w, "run.fit_window", v);
            if (r.problems.size() == before) {
                if (v.size() == 2)
                    c.fit_window = std::make_pair(v[0], v[1]);
                else
                    r.fail(w, "run.fit_window", "expected auto or [t_min, t_max]");
            }
        }
    }
    if (const YAML::Node s = node["sweep"]; r.map(s, "run.sweep", {"parameter", "values"})) {
        r.text(s, "parameter", "run.sweep", c.sweep.parameter);
        r.numbers(s, "values", "run.sweep", c.sweep.values);
    }
    if (const YAML::Node q = node["qcheck"]; r.map(q, "run.qcheck", {"x", "lambdas", "phi", "psi", "chi"})) {
        r.scalar(q, "x", "run.qcheck", c.qcheck.x);
        r.numbers(q, "lambdas", "run.qcheck", c.qcheck.lambdas);
        c.qcheck.phi = read_test_function(r, q["phi"], "run.qcheck.phi", c.qcheck.phi);
        c.qcheck.psi = read_test_function(r, q["psi"], "run.qcheck.psi", c.qcheck.psi);
        c.qcheck.chi = read_test_function(r, q["chi"], "run.qcheck.chi", c.qcheck.chi);
    }
    if (const YAML::Node q = node["corrcheck"];
        r.map(q, "run.corrcheck",
              {"lambdas", "check_lambdas", "momenta", "volume", "particle_momentum", "time_smearings", "chi"})) {
        auto& cc = c.corrcheck;
        r.numbers(q, "lambdas", "run.corrcheck", cc.lambdas);
        r.numbers(q, "check_lambdas", "run.corrcheck", cc.check_lambdas);
        if (const YAML::Node m = q["momenta"]) {
            if (!m.IsSequence()) {
                r.fail(m, "run.corrcheck.momenta", "expected a list of 3-vectors");
            } else {
                cc.momenta.assign(m.size(), Vec3{});
                for (std::size_t i = 0; i < m.size(); ++i)
                    r.vec3_at(m[i], fmt::format("run.corrcheck.momenta[{}]", i), cc.momenta[i]);
            }
        }
        r.scalar(q, "volume", "run.corrcheck", cc.volume);
        if (const YAML::Node p = q["particle_momentum"]) r.vec3_at(p, "run.corrcheck.particle_momentum", cc.particle_momentum);
        if (const YAML::Node ts = q["time_smearings"]) {
            if (!ts.IsSequence()) {
                r.fail(ts, "run.corrcheck.time_smearings", "expected a list of {center, width}");
            } else {
                std::vector<TestFunction> fs;
                for (std::size_t i = 0; i < ts.size(); ++i)
                    fs.push_back(read_test_function(r, ts[i], fmt::format("run.corrcheck.time_smearings[{}]", i),
                                                    TestFunction::gaussian(0.0, 1.0)));
                cc.time_smearings = std::move(fs);
            }
        }
        cc.chi = read_test_function(r, q["chi"], "run.corrcheck.chi", cc.chi);
    }
    r.text(node, "output", "run", c.output);
    if (const YAML::Node f = node["format"]) {
        std::string s;
        r.text(node, "format", "run", s);
        if (auto fmt = parse_format(s))
            c.format = *fmt;
        else
            r.fail(f, "run.format", "expected csv or json");
    }
}

[[noreturn]] void throw_problems(const std::string& heading, const std::vector<std::string>& problems) {
    std::string msg = heading;
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
}

RunConfig parse_node(const YAML::Node& root, bool check_sweep);
std::string with_line(const YAML::Node& root, const std::string& msg);

// ------------------------------- Validation ----------------------------------

void check_lambda_sequence(std::vector<std::string>& out, const std::string& key, const std::vector<double>& l,
                           std::size_t min_size) {
    if (l.size() < min_size) out.push_back(fmt::format("key '{}': needs at least {} values", key, min_size));
    for (std::size_t i = 0; i < l.size(); ++i) {
        if (!(std::isfinite(l[i]) && l[i] > 0.0)) {
            out.push_back(fmt::format("key '{}': values must be > 0", key));
            return;
        }
        if (i > 0 && !(l[i] < l[i - 1])) {
            out.push_back(fmt::format("key '{}': values must be strictly decreasing", key));
            return;
        }
    }
}

std::vector<std::string> violations(const RunConfig& c, bool check_sweep) {
    std::vector<std::string> out;
    auto bad = [&](const std::string& key, const std::string& what) {
        out.push_back(fmt::format("key '{}': {}", key, what));
    };
    if (!(std::isfinite(c.smearing.B) && c.smearing.B > 0.0)) bad("smearing.B", "must be > 0");
    if (c.smearing.normalization && !(std::isfinite(*c.smearing.normalization) && *c.smearing.normalization > 0.0))
        bad("smearing.normalization", "must be > 0 or auto");
    try {
        c.quad.validate();
    } catch (const std::invalid_argument& e) {
        bad("quadrature", e.what());
    }

    const bool needs_smallp = c.kernel != KernelKind::full && (c.mode == RunMode::curve || c.mode == RunMode::sweep);
    if (needs_smallp) {
        if (c.model.vertex != Vertex::dipole) bad("run.kernel", "the small-p kernels need the dipole vertex");
        const auto w0 = c.model.dispersion.constant_value();
        if (!(w0 && *w0 == 1.0)) bad("run.kernel", "the small-p kernels need the constant dispersion omega0 = 1");
    }

    switch (c.mode) {
        case RunMode::rate: {
            const auto& m = c.momenta;
            if (m.values.empty()) {
                if (m.count < 1) bad("run.momenta.count", "must be >= 1");
                if (!(std::isfinite(m.start) && m.start >= 0.0)) bad("run.momenta.start", "must be >= 0");
                if (!(std::isfinite(m.stop) && m.stop >= m.start)) bad("run.momenta.stop", "must be >= start");
            }
            for (double p : m.values)
                if (!(std::isfinite(p) && p >= 0.0)) {
                    bad("run.momenta", "momenta must be >= 0");
                    break;
                }
            break;
        }
        case RunMode::curve:
        case RunMode::sweep: {
            const auto& t = c.time_grid;
            switch (t.kind) {
                case TimeGridSpec::Kind::automatic:
                    if (t.count < 2) bad("run.time_grid.count", "must be >= 2");
                    break;
                case TimeGridSpec::Kind::log:
                    if (t.count < 2) bad("run.time_grid.count", "must be >= 2");
                    if (!(std::isfinite(t.start) && t.start > 0.0)) bad("run.time_grid.start", "must be > 0");
                    if (!(std::isfinite(t.stop) && t.stop > t.start)) bad("run.time_grid.stop", "must be > start");
                    break;
                case TimeGridSpec::Kind::list:
                    if (t.values.empty()) bad("run.time_grid.values", "must not be empty");
                    for (std::size_t i = 0; i < t.values.size(); ++i)
                        if (!(std::isfinite(t.values[i]) && t.values[i] >= 0.0 && (i == 0 || t.values[i] > t.values[i - 1]))) {
                            bad("run.time_grid.values", "times must be >= 0 and strictly increasing");
                            break;
                        }
                    break;
            }
            if (c.fit_window && !(c.fit_window->first > 0.0 && c.fit_window->second > c.fit_window->first &&
                                  std::isfinite(c.fit_window->second)))
                bad("run.fit_window", "needs 0 < t_min < t_max");
            if (c.mode == RunMode::sweep) {
                if (c.sweep.parameter.empty()) bad("run.sweep.parameter", "required in sweep mode");
                if (c.sweep.values.empty()) bad("run.sweep.values", "must not be empty in sweep mode");
                if (check_sweep && !c.sweep.parameter.empty()) {
                    if (c.sweep.parameter.rfind("run.", 0) == 0) {
                        bad("run.sweep.parameter", "must name a model, smearing or quadrature key");
                    } else {
                        for (double v : c.sweep.values) {
                            try {
                                (void)with_parameter(c, c.sweep.parameter, v);
                            } catch (const ConfigError& e) {
                                bad("run.sweep", fmt::format("value {} : {}", v, e.what()));
                                break;
                            }
                        }
                    }
                }
            }
            break;
        }
        case RunMode::qcheck:
            if (!(std::isfinite(c.qcheck.x) && c.qcheck.x != 0.0)) bad("run.qcheck.x", "must be finite and nonzero");
            check_lambda_sequence(out, "run.qcheck.lambdas", c.qcheck.lambdas, 2);
            break;
        case RunMode::corrcheck: {
            const auto& cc = c.corrcheck;
            check_lambda_sequence(out, "run.corrcheck.lambdas", cc.lambdas, 2);
            for (double l : cc.check_lambdas)
                if (!(std::isfinite(l) && l > 0.0)) {
                    bad("run.corrcheck.check_lambdas", "values must be > 0");
                    break;
                }
            if (cc.check_lambdas.empty()) bad("run.corrcheck.check_lambdas", "must not be empty");
            if (cc.momenta.empty() || cc.momenta.size() > 4) bad("run.corrcheck.momenta", "needs 1 to 4 momenta");
            if (!cc.momenta.empty() && !(norm(cc.momenta[0]) > 0.0))
                bad("run.corrcheck.momenta", "the first momentum must be nonzero");
            if (!(std::isfinite(cc.volume) && cc.volume > 0.0)) bad("run.corrcheck.volume", "must be > 0");
            if (cc.time_smearings.size() != 2) bad("run.corrcheck.time_smearings", "needs exactly two entries");
            if (!cc.momenta.empty() && resonance_energy(c.model.dispersion, cc.momenta[0], cc.particle_momentum) == 0.0)
                bad("run.corrcheck.particle_momentum", "must be off the shell of the first momentum");
            break;
        }
    }
    return out;
}

RunConfig parse_node(const YAML::Node& root, bool check_sweep) {
    Reader r;
    RunConfig c;
    if (root && !root.IsNull()) {
        if (!root.IsMap()) {
            r.fail(root, "<document>", "expected a mapping with sections model, smearing, quadrature, run");
        } else {
            r.map(root, "", {"model", "smearing", "quadrature", "run"});
            read_model(r, root["model"], c.model);
            read_smearing(r, root["smearing"], c.smearing);
            read_quadrature(r, root["quadrature"], c.quad);
            read_run(r, root["run"], c);
        }
    }
    if (!r.problems.empty()) throw_problems("invalid configuration:", r.problems);
    auto v = violations(c, check_sweep);
    for (auto& msg : v) msg = with_line(root, msg);
    if (!v.empty()) throw_problems("configuration failed validation:", v);
    return c;
}

// "key 'a.b': ..." -> "line N: key 'a.b': ..." using the deepest node of the
// path that is present in the document
std::string with_line(const YAML::Node& root, const std::string& msg) {
    const std::string open = "key '";
    if (msg.rfind(open, 0) != 0 || !root || !root.IsMap()) return msg;
    const auto close = msg.find('\'', open.size());
    if (close == std::string::npos) return msg;
    const std::string path = msg.substr(open.size(), close - open.size());
    YAML::Node cur = root;
    int line = -1;
    std::size_t from = 0;
    while (from <= path.size() && cur.IsMap()) {
        const auto dot = path.find('.', from);
        const std::string key = path.substr(from, dot == std::string::npos ? std::string::npos : dot - from);
        const YAML::Node next = std::as_const(cur)[key];
        if (!next) break;
        line = next.Mark().line;
        cur.reset(next);
        if (dot == std::string::npos) break;
        from = dot + 1;
    }
    return line >= 0 ? fmt::format("line {}: {}", line + 1, msg) : msg;
}

YAML::Node load_yaml(std::string_view text) {
    try {
        return YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ConfigError(fmt::format("line {}, column {}: {}", e.mark.line + 1, e.mark.column + 1, e.msg));
    }
}

// ---------------------------------- Emission ---------------------------------

std::string num(double v) { return fmt::format("{}", v); }

void emit_profile(YAML::Emitter& e, const RadialProfile& p) {
    e << YAML::BeginMap;
    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, GaussianShape>) {
                e << YAML::Key << "kind" << YAML::Value << "gaussian";
                e << YAML::Key << "width" << YAML::Value << num(s.width);
                e << YAML::Key << "amplitude" << YAML::Value << num(s.amplitude);
                e << YAML::Key << "center" << YAML::Value << num(s.center);
            } else if constexpr (std::is_same_v<S, CompactBump>) {
                e << YAML::Key << "kind" << YAML::Value << "compact_bump";
                e << YAML::Key << "inner" << YAML::Value << num(s.inner);
                e << YAML::Key << "outer" << YAML::Value << num(s.outer);
                e << YAML::Key << "amplitude" << YAML::Value << num(s.amplitude);
            } else {
                e << YAML::Key << "kind" << YAML::Value << "zero";
            }
        },
        p.shape());
    e << YAML::EndMap;
}

void emit_numbers(YAML::Emitter& e, const std::vector<double>& v) {
    e << YAML::Flow << YAML::BeginSeq;
    for (double x : v) e << num(x);
    e << YAML::EndSeq;
}

void emit_vec3(YAML::Emitter& e, const Vec3& v) { emit_numbers(e, {v[0], v[1], v[2]}); }

void emit_test_function(YAML::Emitter& e, const TestFunction& f) {
    e << YAML::Flow << YAML::BeginMap;
    e << YAML::Key << "center" << YAML::Value << num(f.center());
    e << YAML::Key << "width" << YAML::Value << num(f.width());
    e << YAML::EndMap;
}

}  // namespace

void RunConfig::validate() const {
    const auto v = violations(*this, true);
    if (!v.empty()) throw_problems("configuration failed validation:", v);
}

RunConfig parse_config(std::string_view text) { return parse_node(load_yaml(text), true); }

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error reading config file '" + path + "'");
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string emit_config(const RunConfig& c) {
    YAML::Emitter e;
    e << YAML::BeginMap;

    e << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "dispersion" << YAML::Value << YAML::BeginMap;
    if (const auto* k = std::get_if<ConstantDispersion>(&c.model.dispersion.law())) {
        e << YAML::Key << "kind" << YAML::Value << "constant";
        e << YAML::Key << "omega0" << YAML::Value << num(k->omega0);
    } else {
        const auto& rd = std::get<RadialDispersion>(c.model.dispersion.law());
        e << YAML::Key << "kind" << YAML::Value << "radial";
        e << YAML::Key << "base" << YAML::Value << num(rd.base);
        e << YAML::Key << "profile" << YAML::Value;
        emit_profile(e, rd.profile);
    }
    e << YAML::EndMap;
    e << YAML::Key << "cutoff" << YAML::Value;
    emit_profile(e, c.model.cutoff_sq);
    e << YAML::Key << "vertex" << YAML::Value << (c.model.vertex == Vertex::dipole ? "dipole" : "scalar");
    e << YAML::EndMap;

    e << YAML::Key << "smearing" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "B" << YAML::Value << num(c.smearing.B);
    e << YAML::Key << "normalization" << YAML::Value
      << (c.smearing.normalization ? num(*c.smearing.normalization) : std::string("auto"));
    e << YAML::EndMap;

    e << YAML::Key << "quadrature" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "rel_tol" << YAML::Value << num(c.quad.rel_tol);
    e << YAML::Key << "abs_tol" << YAML::Value << num(c.quad.abs_tol);
    e << YAML::Key << "max_subdivisions" << YAML::Value << c.quad.max_subdivisions;
    e << YAML::Key << "radial_cutoff_sigma" << YAML::Value << num(c.quad.radial_cutoff_sigma);
    e << YAML::Key << "pv_excision" << YAML::Value << num(c.quad.pv_excision);
    e << YAML::EndMap;

    e << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "mode" << YAML::Value << mode_name(c.mode);
    e << YAML::Key << "kernel" << YAML::Value << kernel_name(c.kernel);
    e << YAML::Key << "momenta" << YAML::Value;
    if (!c.momenta.values.empty()) {
        emit_numbers(e, c.momenta.values);
    } else {
        e << YAML::Flow << YAML::BeginMap;
        e << YAML::Key << "start" << YAML::Value << num(c.momenta.start);
        e << YAML::Key << "stop" << YAML::Value << num(c.momenta.stop);
        e << YAML::Key << "count" << YAML::Value << c.momenta.count;
        e << YAML::EndMap;
    }
    e << YAML::Key << "time_grid" << YAML::Value << YAML::Flow << YAML::BeginMap;
    e << YAML::Key << "kind" << YAML::Value << kind_name(c.time_grid.kind);
    switch (c.time_grid.kind) {
        case TimeGridSpec::Kind::automatic:
            e << YAML::Key << "count" << YAML::Value << c.time_grid.count;
            break;
        case TimeGridSpec::Kind::log:
            e << YAML::Key << "start" << YAML::Value << num(c.time_grid.start);
            e << YAML::Key << "stop" << YAML::Value << num(c.time_grid.stop);
            e << YAML::Key << "count" << YAML::Value << c.time_grid.count;
            break;
        case TimeGridSpec::Kind::list:
            e << YAML::Key << "values" << YAML::Value;
            emit_numbers(e, c.time_grid.values);
            break;
    }
    e << YAML::EndMap;
    e << YAML::Key << "fit_window" << YAML::Value;
    if (c.fit_window)
        emit_numbers(e, {c.fit_window->first, c.fit_window->second});
    else
        e << "auto";

    e << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "parameter" << YAML::Value << YAML::DoubleQuoted << c.sweep.parameter;
    e << YAML::Key << "values" << YAML::Value;
    emit_numbers(e, c.sweep.values);
    e << YAML::EndMap;

    e << YAML::Key << "qcheck" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "x" << YAML::Value << num(c.qcheck.x);
    e << YAML::Key << "lambdas" << YAML::Value;
    emit_numbers(e, c.qcheck.lambdas);
    e << YAML::Key << "phi" << YAML::Value;
    emit_test_function(e, c.qcheck.phi);
    e << YAML::Key << "psi" << YAML::Value;
    emit_test_function(e, c.qcheck.psi);
    e << YAML::Key << "chi" << YAML::Value;
    emit_test_function(e, c.qcheck.chi);
    e << YAML::EndMap;

    const auto& cc = c.corrcheck;
    e << YAML::Key << "corrcheck" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "lambdas" << YAML::Value;
    emit_numbers(e, cc.lambdas);
    e << YAML::Key << "check_lambdas" << YAML::Value;
    emit_numbers(e, cc.check_lambdas);
    e << YAML::Key << "momenta" << YAML::Value << YAML::BeginSeq;
    for (const Vec3& k : cc.momenta) emit_vec3(e, k);
    e << YAML::EndSeq;
    e << YAML::Key << "volume" << YAML::Value << num(cc.volume);
    e << YAML::Key << "particle_momentum" << YAML::Value;
    emit_vec3(e, cc.particle_momentum);
    e << YAML::Key << "time_smearings" << YAML::Value << YAML::BeginSeq;
    for (const TestFunction& f : cc.time_smearings) emit_test_function(e, f);
    e << YAML::EndSeq;
    e << YAML::Key << "chi" << YAML::Value;
    emit_test_function(e, cc.chi);
    e << YAML::EndMap;

    e << YAML::Key << "output" << YAML::Value << YAML::DoubleQuoted << c.output;
    e << YAML::Key << "format" << YAML::Value << format_name(c.format);
    e << YAML::EndMap;

    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

std::uint64_t config_hash(const RunConfig& config) {
    // where the table goes does not change its contents
    RunConfig c = config;
    c.output.clear();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : emit_config(c)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

RunConfig with_parameter(const RunConfig& config, const std::string& dotted_path, double value) {
    YAML::Node root = YAML::Load(emit_config(config));
    YAML::Node cur = root;
    std::size_t pos = 0;
    while (true) {
        const std::size_t dot = dotted_path.find('.', pos);
        const std::string part = dotted_path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (part.empty() || !cur.IsMap() || !cur[part])
            throw ConfigError(fmt::format("sweep parameter '{}' does not name a config key", dotted_path));
        YAML::Node next = cur[part];
        cur.reset(next);
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    bool numeric = cur.IsScalar();
    if (numeric) {
        try {
            (void)cur.as<double>();
        } catch (const YAML::Exception&) {
            numeric = false;
        }
    }
    if (!numeric) throw ConfigError(fmt::format("sweep parameter '{}' is not a numeric key", dotted_path));
    cur = num(value);
    return parse_node(root, false);
}

}  // namespace stochlim
