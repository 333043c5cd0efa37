// Command-line front end: analyze, simulate, verify and trace.
//
// Exit codes: 0 ok, 1 verification failure, 2 usage or config error,
// 3 critical tie (the analysis is still printed).

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <string>

#include "exclusion/config.hpp"
#include "exclusion/jackson.hpp"
#include "exclusion/partition.hpp"
#include "exclusion/report_io.hpp"
#include "exclusion/simulate.hpp"
#include "exclusion/stats.hpp"
#include "exclusion/verify.hpp"

namespace {

using namespace exclusion;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCriticalTie = 3;

struct AnalyzeArgs {
    std::string config;
    bool json = false;
    bool trace_merges = false;
    std::string policy = "all";
    std::uint64_t policy_seed = 0;
};

struct SimulateArgs {
    std::string config;
    std::optional<double> horizon;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> replicas;
    std::optional<double> burn_in;
    std::optional<std::string> out_csv;
    std::size_t samples = 100;
    unsigned threads = 1;
};

struct VerifyArgs {
    std::string config;
    std::string budget = "standard";
    std::optional<double> horizon;
    std::optional<std::uint64_t> replicas;
    std::optional<std::uint64_t> seed;
    bool json = false;
    bool inject_fault = false;
    unsigned threads = 1;
};

struct TraceArgs {
    std::string config;
    std::optional<double> horizon;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_csv;
};

MergePolicy parse_policy(const std::string& name, std::uint64_t seed) {
    if (name == "leftmost") return MergePolicy::leftmost();
    if (name == "rightmost") return MergePolicy::rightmost();
    if (name == "random") return MergePolicy::random(seed);
    return MergePolicy::all();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

int cmd_analyze(const AnalyzeArgs& args) {
    const auto cfg = load_config(args.config);
    const auto report = analyze(cfg.rates(), parse_policy(args.policy, args.policy_seed));
    if (args.json) {
        std::cout << report_to_json(report, {cfg.seed.value_or(0)});
    } else {
        std::cout << report_to_text(report);
    }
    if (args.trace_merges) {
        std::cout << trace_to_text(report.trace);
    }
    return report.flags.critical_tie ? kExitCriticalTie : kExitOk;
}

int cmd_simulate(const SimulateArgs& args) {
    const auto file = load_config(args.config);
    const auto rates = file.rates();
    SimConfig cfg;
    cfg.horizon = args.horizon.value_or(file.horizon.value_or(1e4));
    cfg.seed = args.seed.value_or(file.seed.value_or(0));
    cfg.burn_in = args.burn_in ? args.burn_in : file.burn_in;
    if (file.initial_gaps) cfg.initial_gaps = *file.initial_gaps;
    if (file.cap) cfg.occupation_cap = *file.cap;
    if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) {
        throw ConfigError("horizon must be positive");
    }
    const std::size_t replicas = args.replicas.value_or(file.replicas.value_or(1));
    if (replicas == 0) throw ConfigError("replicas must be positive");
    if (args.out_csv) {
        for (std::size_t k = 0; k <= args.samples; ++k) {
            cfg.sample_times.push_back(cfg.horizon * static_cast<double>(k) / static_cast<double>(args.samples));
        }
    }

    const auto runs = simulate_replicas(rates, cfg, replicas, args.threads);
    SimStats pooled = runs.front();
    for (std::size_t r = 1; r < runs.size(); ++r) merge_stats(pooled, runs[r]);

    std::cout << "# seed " << cfg.seed << "  rng " << kRngName << "  version " << EXCLUSION_VERSION << "\n";
    std::cout << "horizon " << format_12g(cfg.horizon) << "  burn-in " << format_12g(cfg.effective_burn_in())
              << "  replicas " << replicas << "  events " << pooled.event_count << "\n";
    std::cout << "empirical speeds (mean +/- SE over replicas):\n";
    for (std::size_t i = 0; i < rates.particles(); ++i) {
        std::vector<double> v;
        for (const auto& s : runs) v.push_back(static_cast<double>(s.displacement[i]) / cfg.horizon);
        std::cout << "  x_" << i + 1 << "  " << format_12g(v.front());
        if (v.size() >= 2) {
            const auto sum = summarize(v);
            std::cout << "  mean " << format_12g(sum.mean) << " +/- " << format_12g(sum.se);
        }
        std::cout << "\n";
    }
    std::cout << "gap marginals (time fraction of eta = 0, 1, 2, 3; mean):\n";
    for (int g = 1; g <= static_cast<int>(rates.gaps()); ++g) {
        const int sel[] = {g};
        const auto law = empirical_gap_law(pooled, sel);
        const auto& m = law.marginals.front();
        double mean = 0.0;
        for (std::size_t v = 0; v < m.size(); ++v) mean += static_cast<double>(v) * m[v];
        std::cout << "  eta_" << g;
        for (std::size_t v = 0; v < 4; ++v) std::cout << "  " << format_12g(v < m.size() ? m[v] : 0.0);
        std::cout << "  mean " << format_12g(mean) << "\n";
    }
    if (args.out_csv) {
        write_file(*args.out_csv, snapshots_to_csv(pooled.snapshots, rates.particles()));
    }
    return kExitOk;
}

int cmd_verify(const VerifyArgs& args) {
    const auto file = load_config(args.config);
    SimBudget budget;
    if (args.budget == "quick") {
        budget.horizon = 1e4;
        budget.replicas = 8;
    } else if (args.budget == "full") {
        budget.horizon = 1e5;
        budget.replicas = 64;
    }
    budget.horizon = args.horizon.value_or(file.horizon.value_or(budget.horizon));
    budget.replicas = args.replicas.value_or(file.replicas.value_or(budget.replicas));
    budget.seed = args.seed.value_or(file.seed.value_or(budget.seed));
    budget.threads = args.threads;
    VerifyOptions options;
    if (args.inject_fault) {
        // Harness self-test: shift every speed target far outside the noise.
        options.speed_offset = 1.0;
    }
    const auto report = verify_instance(file.rates(), budget, options);
    if (args.json) {
        std::cout << verification_to_json(report, {budget.seed});
    } else {
        std::cout << verification_to_text(report);
    }
    if (!report.passed()) return kExitVerifyFailed;
    return report.critical_tie ? kExitCriticalTie : kExitOk;
}

int cmd_trace(const TraceArgs& args) {
    const auto file = load_config(args.config);
    const auto rates = file.rates();
    SimConfig cfg;
    cfg.horizon = args.horizon.value_or(file.horizon.value_or(100.0));
    cfg.seed = args.seed.value_or(file.seed.value_or(0));
    cfg.burn_in = 0.0;
    if (file.initial_gaps) cfg.initial_gaps = *file.initial_gaps;
    if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) {
        throw ConfigError("horizon must be positive");
    }

    std::vector<Snapshot> events;
    const auto stats = simulate(rates, cfg, [&](double t, std::span<const long long> x) {
        events.push_back({0, t, std::vector<long long>(x.begin(), x.end())});
    });
    events.insert(events.begin(), Snapshot{0, 0.0, stats.initial_positions});
    const auto csv = snapshots_to_csv(events, rates.particles());
    if (args.out_csv) {
        write_file(*args.out_csv, csv);
    } else {
        std::cout << csv;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stable clouds of finite exclusion processes: analysis, simulation and verification"};
    app.require_subcommand(1);

    AnalyzeArgs analyze_args;
    auto* analyze_cmd = app.add_subcommand("analyze", "Cloud partition, loads, speeds and stationary laws");
    analyze_cmd->add_option("config", analyze_args.config, "Config file")->required();
    analyze_cmd->add_flag("--json", analyze_args.json, "Machine-readable report");
    analyze_cmd->add_flag("--trace-merges", analyze_args.trace_merges, "Print every merge iteration");
    analyze_cmd->add_option("--policy", analyze_args.policy, "Merge policy")
        ->check(CLI::IsMember({"leftmost", "rightmost", "all", "random"}));
    analyze_cmd->add_option("--policy-seed", analyze_args.policy_seed, "Seed of the random merge policy");

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo simulation summary");
    sim_cmd->add_option("config", sim_args.config, "Config file")->required();
    sim_cmd->add_option("--horizon", sim_args.horizon, "Simulated time")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--seed", sim_args.seed, "Master seed");
    sim_cmd->add_option("--replicas", sim_args.replicas, "Independent replicas")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--burn-in", sim_args.burn_in, "Time discarded from occupation statistics")
        ->check(CLI::NonNegativeNumber);
    sim_cmd->add_option("--out-csv", sim_args.out_csv, "Write position snapshots as CSV");
    sim_cmd->add_option("--samples", sim_args.samples, "Snapshot intervals over the horizon")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--threads", sim_args.threads, "Worker threads for replicas")->check(CLI::PositiveNumber);

    VerifyArgs verify_args;
    auto* verify_cmd = app.add_subcommand("verify", "Compare analysis against oracles and simulation");
    verify_cmd->add_option("config", verify_args.config, "Config file")->required();
    verify_cmd->add_option("--budget", verify_args.budget, "Simulation budget preset")
        ->check(CLI::IsMember({"quick", "standard", "full"}));
    verify_cmd->add_option("--horizon", verify_args.horizon, "Override horizon")->check(CLI::PositiveNumber);
    verify_cmd->add_option("--replicas", verify_args.replicas, "Override replica count")->check(CLI::Range(2, 1 << 20));
    verify_cmd->add_option("--seed", verify_args.seed, "Master seed");
    verify_cmd->add_flag("--json", verify_args.json, "Machine-readable report");
    verify_cmd->add_flag("--inject-fault", verify_args.inject_fault, "Corrupt the speed targets (harness self-test)");
    verify_cmd->add_option("--threads", verify_args.threads, "Worker threads for replicas")->check(CLI::PositiveNumber);

    TraceArgs trace_args;
    auto* trace_cmd = app.add_subcommand("trace", "Per-event position trace as CSV");
    trace_cmd->add_option("config", trace_args.config, "Config file")->required();
    trace_cmd->add_option("--horizon", trace_args.horizon, "Simulated time")->check(CLI::PositiveNumber);
    trace_cmd->add_option("--seed", trace_args.seed, "Master seed");
    trace_cmd->add_option("--out-csv", trace_args.out_csv, "Output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*analyze_cmd) return cmd_analyze(analyze_args);
        if (*sim_cmd) return cmd_simulate(sim_args);
        if (*verify_cmd) return cmd_verify(verify_args);
        if (*trace_cmd) return cmd_trace(trace_args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
