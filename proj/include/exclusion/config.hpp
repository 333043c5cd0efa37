#pragma once

// Line-oriented configuration files.
//
//   file    := line*
//   line    := [ key ws* '=' ws* value (ws+ value)* ] ws* [ '#' comment ] EOL
//   key     := one of a, b, horizon, seed, replicas, burn_in, initial_gaps, cap
//   value   := decimal literal (std::from_chars syntax; finite)
//   EOL     := LF or CRLF
//
// `a` and `b` are required and must have equal length.  Keys are
// case-sensitive and may appear at most once.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "exclusion/core.hpp"

namespace exclusion {

/// Parse or validation failure.  line and column are 1-based; 0 means the
/// error concerns the file as a whole.
class ConfigError : public ModelError {
public:
    ConfigError(const std::string& message, int line = 0, int column = 0);

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

struct ConfigFile {
    std::vector<double> a;
    std::vector<double> b;
    std::optional<double> horizon;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> replicas;
    std::optional<double> burn_in;
    std::optional<std::vector<long long>> initial_gaps;
    std::optional<int> cap;

    RateSystem rates() const { return RateSystem::validate(a, b); }

    friend bool operator==(const ConfigFile&, const ConfigFile&) = default;
};

ConfigFile parse_config(std::string_view text);

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ConfigFile& config);

/// Reads and parses a file; I/O failures raise ConfigError.
ConfigFile load_config(const std::string& path);

/// Shortest decimal that reads back to the same double.
std::string format_shortest(double value);

}  // namespace exclusion
