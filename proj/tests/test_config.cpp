#include <doctest.h>

#include <random>
#include <string>

#include "stochlim/config.hpp"
#include "stochlim/errors.hpp"

using namespace stochlim;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("empty document gives the defaults") {
    const RunConfig c = parse_config("");
    CHECK(c == RunConfig{});
    CHECK(c.mode == RunMode::curve);
    CHECK(c.smearing.B == 25.0);
    CHECK(c.model.dispersion.constant_value() == 1.0);
    CHECK(c.kernel == KernelKind::full);
    CHECK_FALSE(c.fit_window.has_value());
}

TEST_CASE("parsed values land in the right fields") {
    const RunConfig c = parse_config(R"(
model:
  dispersion: {kind: constant, omega0: 1}
  cutoff: {kind: compact_bump, inner: 1, outer: 2, amplitude: 0.5}
smearing: {B: 100, normalization: 2.5}
quadrature: {rel_tol: 1e-10}
run:
  mode: rate
  momenta: [0, 0.5, 1.5]
  time_grid: {kind: log, start: 0.1, stop: 100, count: 7}
  fit_window: [10, 90]
  format: json
)");
    CHECK(c.mode == RunMode::rate);
    CHECK(c.model.cutoff_sq == RadialProfile::compact_bump(1.0, 2.0, 0.5));
    CHECK(c.smearing.B == 100.0);
    CHECK(c.smearing.normalization == 2.5);
    CHECK(c.quad.rel_tol == 1e-10);
    CHECK(c.momenta.points() == std::vector<double>{0.0, 0.5, 1.5});
    CHECK(c.time_grid.kind == TimeGridSpec::Kind::log);
    CHECK(c.time_grid.count == 7);
    CHECK(c.fit_window == std::pair{10.0, 90.0});
    CHECK(c.format == OutputFormat::json);
}

TEST_CASE("invalid values name the offending key and line") {
    const std::string e = error_of("smearing:\n  B: -1\n");
    CHECK(contains(e, "smearing.B"));
    CHECK(contains(e, "line 2"));
    CHECK(contains(error_of("model:\n  colour: red\n"), "model.colour"));
    CHECK(contains(error_of("run:\n  mode: dance\n"), "run.mode"));
    CHECK(contains(error_of("run: [1, 2"), "line"));
    // every problem is reported, not just the first
    const std::string both = error_of("smearing: {B: 0}\nquadrature: {rel_tol: -1}\n");
    CHECK(contains(both, "smearing.B"));
    CHECK(contains(both, "quadrature.rel_tol"));
}

TEST_CASE("small-p kernels need the polaron dispersion and vertex") {
    CHECK(contains(error_of("model: {vertex: scalar}\nrun: {kernel: quadratic_model}\n"), "vertex"));
    CHECK_NOTHROW(parse_config("model: {vertex: scalar}\nrun: {kernel: full}\n"));
}

TEST_CASE("sweep with three values") {
    const RunConfig c = parse_config("run:\n  mode: sweep\n  sweep: {parameter: smearing.B, values: [5, 25, 100]}\n");
    CHECK(c.sweep.parameter == "smearing.B");
    CHECK(c.sweep.values.size() == 3);
    CHECK(with_parameter(c, "smearing.B", 5.0).smearing.B == 5.0);
    CHECK(with_parameter(c, "model.cutoff.width", 0.5).model.cutoff_sq == RadialProfile::gaussian(0.5));
    CHECK_THROWS_AS(with_parameter(c, "smearing.nothing", 1.0), ConfigError);
    CHECK(contains(error_of("run:\n  mode: sweep\n  sweep: {parameter: smearing.B, values: [5, -1]}\n"), "smearing.B"));
    CHECK(contains(error_of("run:\n  mode: sweep\n  sweep: {parameter: run.format, values: [1]}\n"), "run.sweep"));
    CHECK(contains(error_of("run:\n  mode: sweep\n"), "run.sweep"));
}

TEST_CASE("canonical document round-trips") {
    RunConfig c;
    c.mode = RunMode::corrcheck;
    c.smearing.B = 0.1 + 0.2;  // needs 17 digits
    c.fit_window = {{1.0 / 3.0, 2e5}};
    c.time_grid.kind = TimeGridSpec::Kind::list;
    c.time_grid.values = {1e-3, 0.5, 7.25};
    c.output = "out dir/x.csv";
    const std::string doc = emit_config(c);
    const RunConfig back = parse_config(doc);
    CHECK(back == c);
    CHECK(emit_config(back) == doc);
    CHECK(config_hash(back) == config_hash(c));
}

TEST_CASE("property: parse(emit(c)) == c for random configurations") {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> u(0.05, 3.0);
    std::uniform_int_distribution<int> pick(0, 2);
    for (int i = 0; i < 200; ++i) {
        RunConfig c;
        c.mode = static_cast<RunMode>(std::uniform_int_distribution<int>(0, 4)(rng));
        if (c.mode == RunMode::sweep) c.sweep = {"smearing.B", {u(rng), u(rng)}};
        switch (pick(rng)) {
            case 0: c.model.cutoff_sq = RadialProfile::gaussian(u(rng), u(rng), u(rng)); break;
            case 1: c.model.cutoff_sq = RadialProfile::compact_bump(0.5, 0.5 + u(rng), u(rng)); break;
            default: c.model.cutoff_sq = RadialProfile::zero();
        }
        c.smearing.B = u(rng) * 50.0;
        if (pick(rng) == 0) c.smearing.normalization = u(rng);
        c.quad.rel_tol = u(rng) * 1e-9;
        c.momenta = {0.0, u(rng) + 0.1, static_cast<std::size_t>(2 + pick(rng)), {}};
        if (pick(rng) == 1) c.fit_window = {{u(rng), 10.0 + u(rng)}};
        c.qcheck.x = u(rng);
        c.corrcheck.volume = u(rng);
        c.format = pick(rng) == 0 ? OutputFormat::json : OutputFormat::csv;
        c.kernel = c.mode == RunMode::curve && pick(rng) == 0 ? KernelKind::quadratic_model : KernelKind::full;
        REQUIRE_NOTHROW(c.validate());
        const RunConfig back = parse_config(emit_config(c));
        CHECK(back == c);
    }
}

TEST_CASE("hash distinguishes configurations and is stable") {
    RunConfig a, b;
    b.smearing.B = 26.0;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash(a) == config_hash(RunConfig{}));
    b = a;
    b.output = "elsewhere.csv";
    CHECK(config_hash(a) == config_hash(b));
}

TEST_CASE("mode and format names") {
    for (RunMode m : {RunMode::rate, RunMode::curve, RunMode::sweep, RunMode::qcheck, RunMode::corrcheck})
        CHECK(parse_mode(mode_name(m)) == m);
    CHECK(parse_format("json") == OutputFormat::json);
    CHECK_FALSE(parse_format("xml").has_value());
}

TEST_CASE("missing file is an I/O error") {
    CHECK_THROWS_AS(load_config("/nonexistent/dir/config.yaml"), IoError);
}
