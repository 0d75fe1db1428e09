// config.hpp: run configuration: YAML document <-> RunConfig.
//
// The document has four top-level sections (model, smearing, quadrature, run);
// every key is optional and unknown keys are errors. See README.md for the
// schema.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stochlim/decay.hpp"
#include "stochlim/model.hpp"
#include "stochlim/qlimit.hpp"
#include "stochlim/vec3.hpp"

namespace stochlim {

enum class RunMode { rate, curve, sweep, qcheck, corrcheck };
enum class OutputFormat { csv, json };

const char* mode_name(RunMode m) noexcept;
std::optional<RunMode> parse_mode(std::string_view name) noexcept;
const char* format_name(OutputFormat f) noexcept;
std::optional<OutputFormat> parse_format(std::string_view name) noexcept;

struct SmearingSpec {
    double B{25.0};
    std::optional<double> normalization;  // empty: unit total mass

    SmearingFunction make() const;
    friend bool operator==(const SmearingSpec&, const SmearingSpec&) = default;
};

// Linear range or explicit list; a non-empty list wins.
struct MomentumGridSpec {
    double start{0.0};
    double stop{2.0};
    std::size_t count{21};
    std::vector<double> values;

    std::vector<double> points() const;
    friend bool operator==(const MomentumGridSpec&, const MomentumGridSpec&) = default;
};

struct TimeGridSpec {
    enum class Kind { automatic, log, list };
    Kind kind{Kind::automatic};
    double start{1e-2};  // log only
    double stop{1e4};
    std::size_t count{64};      // automatic and log
    std::vector<double> values;  // list only

    friend bool operator==(const TimeGridSpec&, const TimeGridSpec&) = default;
};

struct SweepSpec {
    std::string parameter;  // dotted path of a numeric config key, e.g. smearing.B
    std::vector<double> values;

    friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct QCheckSpec {
    double x{1.0};
    std::vector<double> lambdas{geometric_lambdas()};
    TestFunction phi{TestFunction::gaussian(0.0, 1.0)};
    TestFunction psi{TestFunction::gaussian(0.5, 1.0)};
    TestFunction chi{TestFunction::gaussian(0.5, 1.0)};

    friend bool operator==(const QCheckSpec&, const QCheckSpec&) = default;
};

struct CorrCheckSpec {
    std::vector<double> lambdas{geometric_lambdas()};  // smeared sequence
    std::vector<double> check_lambdas{1.0, 0.6, 0.35};  // finite-λ recurrence comparison
    std::vector<Vec3> momenta{{1.0, 0.2, 0.0}, {-0.3, 0.9, 0.4}};
    double volume{1.0};
    Vec3 particle_momentum{0.2, -0.1, 0.3};
    // one per symbol of the length-2 smeared words
    std::vector<TestFunction> time_smearings{TestFunction::gaussian(0.0, 1.0), TestFunction::gaussian(0.5, 1.0)};
    TestFunction chi{TestFunction::gaussian(0.5, 1.0)};

    friend bool operator==(const CorrCheckSpec&, const CorrCheckSpec&) = default;
};

struct RunConfig {
    RunMode mode{RunMode::curve};
    ModelConfig model{ModelConfig::polaron(RadialProfile::gaussian(1.0))};
    SmearingSpec smearing{};
    QuadratureSpec quad{};

    KernelKind kernel{KernelKind::full};
    MomentumGridSpec momenta{};
    TimeGridSpec time_grid{};
    std::optional<std::pair<double, double>> fit_window;  // empty: automatic
    SweepSpec sweep{};
    QCheckSpec qcheck{};
    CorrCheckSpec corrcheck{};

    std::string output;  // empty: standard output
    OutputFormat format{OutputFormat::csv};

    // throws ConfigError listing every violation
    void validate() const;
    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Throws ConfigError with line/key diagnostics.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);  // IoError if unreadable

// Canonical document: every field, fixed key order, shortest round-trip digits.
std::string emit_config(const RunConfig& config);

// FNV-1a over the canonical document, output path excluded
std::uint64_t config_hash(const RunConfig& config);

// Copy of `config` with the numeric key at `dotted_path` set to `value`.
RunConfig with_parameter(const RunConfig& config, const std::string& dotted_path, double value);

}  // namespace stochlim
