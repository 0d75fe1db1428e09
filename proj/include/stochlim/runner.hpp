// runner.hpp: executes a RunConfig and serializes the resulting table

#pragma once

#include <cstdint>
#include <exception>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "stochlim/config.hpp"

namespace stochlim {

struct Table {
    using Cell = std::variant<double, std::int64_t, std::string>;

    std::vector<std::pair<std::string, std::string>> meta;  // emitted in order
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

// Pure evaluation; `threads` workers for curve time points, rate momenta and
// sweep points. Rows come out in input order whatever the thread count.
Table execute(const RunConfig& config, unsigned threads);

// '#'-prefixed "key: value" metadata lines, a header row, one record per line.
// Doubles carry 17 significant digits.
void write_csv(const Table& table, std::ostream& out);
// {"meta": {...}, "columns": [...], "rows": [[...], ...]}
void write_json(const Table& table, std::ostream& out);

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNonConvergence = 3;
inline constexpr int kExitIo = 4;
inline constexpr int kExitOther = 1;

// exit status for an exception escaping execute() or the writers
int exit_code_for(const std::exception_ptr& error) noexcept;

// execute + write to config.output (or `fallback` when empty). Errors are
// reported on `err`; the return value is the process exit status.
int run(const RunConfig& config, unsigned threads, std::ostream& fallback, std::ostream& err);

const char* version() noexcept;

}  // namespace stochlim
