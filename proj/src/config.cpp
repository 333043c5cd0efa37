#include "exclusion/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace exclusion {

namespace {

std::string locate(const std::string& message, int line, int column) {
    if (line <= 0) return message;
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message;
}

constexpr std::array<std::string_view, 8> kKeys = {"a", "b", "horizon", "seed", "replicas", "burn_in", "initial_gaps", "cap"};

bool is_space(char c) { return c == ' ' || c == '\t'; }

struct Token {
    std::string_view text;
    int column;
};

template <class T>
T parse_number(const Token& tok, int line) {
    T value{};
    const char* first = tok.text.data();
    const char* last = first + tok.text.size();
    // from_chars rejects a leading '+', which is accepted here for convenience.
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec == std::errc::result_out_of_range) {
        throw ConfigError("value '" + std::string(tok.text) + "' is out of range", line, tok.column);
    }
    if (ec != std::errc() || ptr != last) {
        throw ConfigError("cannot parse '" + std::string(tok.text) + "' as a number", line, tok.column);
    }
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) {
            throw ConfigError("non-finite value '" + std::string(tok.text) + "'", line, tok.column);
        }
    }
    return value;
}

template <class T>
std::vector<T> parse_list(const std::vector<Token>& toks, int line) {
    std::vector<T> out;
    out.reserve(toks.size());
    for (const auto& t : toks) out.push_back(parse_number<T>(t, line));
    return out;
}

template <class T>
T parse_scalar(std::string_view key, const std::vector<Token>& toks, int line) {
    if (toks.size() != 1) {
        throw ConfigError("key '" + std::string(key) + "' takes exactly one value", line, toks.size() > 1 ? toks[1].column : 1);
    }
    return parse_number<T>(toks.front(), line);
}

template <class T>
void append_list(std::string& out, std::string_view key, const std::vector<T>& values) {
    out += key;
    out += " =";
    for (const auto& v : values) {
        out += ' ';
        if constexpr (std::is_floating_point_v<T>) {
            out += format_shortest(v);
        } else {
            out += std::to_string(v);
        }
    }
    out += '\n';
}

}  // namespace

ConfigError::ConfigError(const std::string& message, int line, int column)
    : ModelError(locate(message, line, column)), line_(line), column_(column) {}

std::string format_shortest(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc()) {
        throw ModelError("cannot format number");
    }
    return std::string(buf.data(), ptr);
}

ConfigFile parse_config(std::string_view text) {
    ConfigFile cfg;
    std::array<int, kKeys.size()> seen_on{};
    bool have_a = false, have_b = false;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        ++line_no;
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

        std::size_t i = 0;
        while (i < line.size() && is_space(line[i])) ++i;
        if (i == line.size()) continue;

        const std::size_t key_start = i;
        while (i < line.size() && !is_space(line[i]) && line[i] != '=') ++i;
        const std::string_view key = line.substr(key_start, i - key_start);
        const int key_column = static_cast<int>(key_start) + 1;
        if (key.empty()) {
            throw ConfigError("expected a key before '='", line_no, key_column);
        }
        while (i < line.size() && is_space(line[i])) ++i;
        if (i == line.size() || line[i] != '=') {
            throw ConfigError("expected '=' after key '" + std::string(key) + "'", line_no, static_cast<int>(i) + 1);
        }
        ++i;

        std::vector<Token> values;
        while (i < line.size()) {
            while (i < line.size() && is_space(line[i])) ++i;
            if (i == line.size()) break;
            const std::size_t start = i;
            while (i < line.size() && !is_space(line[i])) ++i;
            values.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
        }

        std::size_t k = 0;
        while (k < kKeys.size() && kKeys[k] != key) ++k;
        if (k == kKeys.size()) {
            throw ConfigError("unknown key \"" + std::string(key) + "\"", line_no, key_column);
        }
        if (seen_on[k] != 0) {
            throw ConfigError("duplicate key \"" + std::string(key) + "\" (first set on line " +
                                  std::to_string(seen_on[k]) + ")",
                              line_no, key_column);
        }
        seen_on[k] = line_no;
        if (values.empty()) {
            throw ConfigError("key \"" + std::string(key) + "\" has no value", line_no, static_cast<int>(line.size()) + 1);
        }

        if (key == "a") {
            cfg.a = parse_list<double>(values, line_no);
            have_a = true;
        } else if (key == "b") {
            cfg.b = parse_list<double>(values, line_no);
            have_b = true;
        } else if (key == "horizon") {
            cfg.horizon = parse_scalar<double>(key, values, line_no);
        } else if (key == "seed") {
            cfg.seed = parse_scalar<std::uint64_t>(key, values, line_no);
        } else if (key == "replicas") {
            cfg.replicas = parse_scalar<std::uint64_t>(key, values, line_no);
        } else if (key == "burn_in") {
            cfg.burn_in = parse_scalar<double>(key, values, line_no);
        } else if (key == "initial_gaps") {
            cfg.initial_gaps = parse_list<long long>(values, line_no);
        } else {
            cfg.cap = parse_scalar<int>(key, values, line_no);
        }
    }

    if (!have_a || !have_b) {
        throw ConfigError(std::string("missing required key \"") + (have_a ? "b" : "a") + "\"");
    }
    if (cfg.a.size() != cfg.b.size()) {
        throw ConfigError("length mismatch: a has " + std::to_string(cfg.a.size()) + " values, b has " +
                              std::to_string(cfg.b.size()),
                          seen_on[1], 1);
    }
    try {
        (void)cfg.rates();
    } catch (const ModelError& e) {
        throw ConfigError(e.what());
    }
    if (cfg.initial_gaps && cfg.initial_gaps->size() + 1 != cfg.a.size()) {
        throw ConfigError("initial_gaps needs one value per gap (" + std::to_string(cfg.a.size() - 1) + ")", seen_on[6], 1);
    }
    return cfg;
}

std::string serialize_config(const ConfigFile& config) {
    std::string out;
    append_list(out, "a", config.a);
    append_list(out, "b", config.b);
    if (config.horizon) out += "horizon = " + format_shortest(*config.horizon) + "\n";
    if (config.seed) out += "seed = " + std::to_string(*config.seed) + "\n";
    if (config.replicas) out += "replicas = " + std::to_string(*config.replicas) + "\n";
    if (config.burn_in) out += "burn_in = " + format_shortest(*config.burn_in) + "\n";
    if (config.initial_gaps) append_list(out, "initial_gaps", *config.initial_gaps);
    if (config.cap) out += "cap = " + std::to_string(*config.cap) + "\n";
    return out;
}

ConfigFile load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace exclusion
