#include <doctest.h>

#include <json.hpp>
#include <random>

#include "exclusion/config.hpp"
#include "exclusion/partition.hpp"
#include "exclusion/report_io.hpp"

using namespace exclusion;

namespace {

ConfigError parse_error(std::string_view text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("expected a ConfigError for: " << text);
    return ConfigError("unreachable");
}

}  // namespace

TEST_CASE("minimal config") {
    const auto c = parse_config("a = 0.2 1.0\nb = 1.0 1.0");
    CHECK(c.a == std::vector<double>{0.2, 1.0});
    CHECK(c.b == std::vector<double>{1.0, 1.0});
    CHECK_FALSE(c.horizon.has_value());
    CHECK(c.rates().particles() == 2);
}

TEST_CASE("all keys, comments, CRLF and blank lines") {
    const auto c = parse_config(
        "# header\r\n\r\na = 0 0 0   # trailing\r\nb=2 1 1.5\r\nhorizon = 1e5\r\nseed = 18446744073709551615\r\n"
        "replicas = 16\r\nburn_in = 250\r\ninitial_gaps = 3 0\r\ncap = 30\r\n");
    CHECK(c.a.size() == 3);
    CHECK(c.b[2] == 1.5);
    CHECK(*c.horizon == 1e5);
    CHECK(*c.seed == 18446744073709551615ULL);
    CHECK(*c.replicas == 16);
    CHECK(*c.burn_in == 250.0);
    CHECK(*c.initial_gaps == std::vector<long long>{3, 0});
    CHECK(*c.cap == 30);
}

TEST_CASE("config errors carry positions") {
    CHECK(std::string(parse_error("a = 0.2\nb = 1 1").what()).find("length") != std::string::npos);

    const auto unknown = parse_error("a = 0.2 1\nA = 3");
    CHECK(unknown.line() == 2);
    CHECK(std::string(unknown.what()).find("\"A\"") != std::string::npos);

    CHECK(parse_error("a = 1 2\na = 1 2\nb = 1 1").line() == 2);
    CHECK(parse_error("a = 1 2\n").line() == 0);  // missing b
    CHECK(parse_error("a = 1 nan\nb = 1 1").line() == 1);
    CHECK(parse_error("a = 1 inf\nb = 1 1").line() == 1);
    CHECK(parse_error("a = 1 2x\nb = 1 1").column() == 7);
    CHECK(parse_error("a 1 2\nb = 1 1").line() == 1);
    CHECK(parse_error("a = 1 2\nb = 1 1\nseed = 1 2").line() == 3);
    CHECK(parse_error("a = 1 2\nb = 1 1\nseed = -1").line() == 3);
    CHECK(parse_error("a = 1 2\nb = 1 1\ninitial_gaps = 1 2").line() == 3);
    CHECK(parse_error("a =\nb = 1 1").line() == 1);
}

TEST_CASE("serialization round-trips") {
    std::mt19937_64 gen(123);
    std::uniform_real_distribution<double> rate(0.0, 2.0);
    std::uniform_int_distribution<int> len(2, 9);
    for (int trial = 0; trial < 1000; ++trial) {
        ConfigFile c;
        const int n = len(gen);
        for (int i = 0; i < n; ++i) {
            c.a.push_back(trial % 7 == 0 ? 0.0 : rate(gen));
            c.b.push_back(rate(gen) + 1e-3);
        }
        if (trial % 2) c.horizon = rate(gen) * 1e5 + 1.0;
        if (trial % 3) c.seed = gen();
        if (trial % 5) c.replicas = gen() % 1000 + 1;
        if (trial % 4 == 1) c.burn_in = rate(gen);
        if (trial % 6 == 1) c.initial_gaps = std::vector<long long>(n - 1, trial);
        if (trial % 8 == 1) c.cap = 1 + trial % 50;
        const auto text = serialize_config(c);
        REQUIRE(parse_config(text) == c);
        REQUIRE(serialize_config(parse_config(text)) == text);
    }
}

TEST_CASE("shortest decimals") {
    CHECK(format_shortest(0.1) == "0.1");
    CHECK(format_shortest(1.0) == "1");
    CHECK(format_shortest(1e-300) == "1e-300");
    const double third = 1.0 / 3.0;
    CHECK(std::stod(format_shortest(third)) == third);
}

TEST_CASE("json report is canonical and complete") {
    for (const auto& cfg : {"a = 0.2 1 1 1 1\nb = 1 1 1 1 1", "a = 0 0 0\nb = 2 1 1.5", "a = 0.5 0.3 0.1\nb = 0.6 0.7 0.8",
                            "a = 0.5 0.5\nb = 1 1"}) {
        const auto report = analyze(parse_config(cfg).rates());
        const auto doc = report_to_json(report, {42});
        CHECK(canonical_json(doc) == doc);
        const auto j = nlohmann::json::parse(doc);
        for (const char* key : {"partition", "rho", "speeds", "cloud_speeds", "widths", "flags", "clt", "meta"}) {
            CHECK(j.contains(key));
        }
        CHECK(j["meta"]["seed"] == 42);
        CHECK(j["meta"]["rng"] == std::string(kRngName));
        CHECK(j["rho"].size() == report.rho.size());
        // Numbers read back exactly.
        for (std::size_t k = 0; k < report.rho.size(); ++k) CHECK(j["rho"][k].get<double>() == report.rho[k]);
    }
    const auto two = nlohmann::json::parse(report_to_json(analyze(parse_config("a = 0 0 0\nb = 2 1 1.5").rates()), {}));
    CHECK(two["partition"] == nlohmann::json::parse("[[1,2],[3,3]]"));
    CHECK(two["clt"].is_null());
}

TEST_CASE("human report") {
    const auto text = report_to_text(analyze(parse_config("a = 0.2 1\nb = 1 1").rates()));
    CHECK(text.find("partition: ({1,2})") != std::string::npos);
    CHECK(text.find("speed 0.4 ") != std::string::npos);
    CHECK(text.find("width 2.5") != std::string::npos);
    CHECK(text.find("rho: [0.6]") != std::string::npos);
    CHECK(format_12g(1.0 / 3.0) == "0.333333333333");

    const auto tie = report_to_text(analyze(parse_config("a = 0.5 0.5\nb = 1 1").rates()));
    CHECK(tie.find("critical tie") != std::string::npos);
}

TEST_CASE("csv snapshots") {
    const std::vector<Snapshot> snaps{{0, 0.0, {1, 2}}, {3, 12.3456789, {4, 9}}};
    CHECK(snapshots_to_csv(snaps, 2) == "replica,time,x_1,x_2\n0,0.000000,1,2\n3,12.345679,4,9\n");
}

TEST_CASE("missing file") {
    CHECK_THROWS_AS(load_config("/nonexistent/path.cfg"), ConfigError);
}
