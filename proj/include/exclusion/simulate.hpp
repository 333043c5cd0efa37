#pragma once

// Exact continuous-time simulation of the particle system X(t) and of its gap
// process eta_i = X_{i+1} - X_i - 1, with occupation-time accounting and
// extraction of excursions away from the packed (all-gaps-zero) state.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "exclusion/core.hpp"

namespace exclusion {

/// Identifier recorded in output metadata.  Replica r of master seed s draws
/// from mt19937_64 seeded with splitmix64(s ^ splitmix64(r + 1)).
inline constexpr std::string_view kRngName = "mt19937_64/splitmix64-stream/v1";

std::uint64_t splitmix64(std::uint64_t x);

/// Per-replica random stream with platform-independent uniform and
/// exponential variates.
class ReplicaRng {
public:
    ReplicaRng(std::uint64_t seed, std::uint64_t replica);

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// Exponential with the given rate.
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

private:
    std::mt19937_64 engine_;
};

struct SimConfig {
    double horizon = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t replica = 0;
    std::vector<long long> initial_gaps;  // empty means packed: X_i(0) = i
    std::optional<double> burn_in;        // defaults to 10% of the horizon
    std::vector<double> sample_times;     // position snapshots, any order
    bool record_excursions = false;
    /// Joint and pair occupation coordinates are lumped at this value.
    int occupation_cap = 64;
    /// Full joint occupation is kept only up to this many gaps.
    std::size_t joint_max_gaps = 6;

    double effective_burn_in() const { return burn_in.value_or(0.1 * horizon); }
};

struct Excursion {
    long long displacement = 0;  // Y: leftmost-particle displacement over the excursion
    double duration = 0.0;       // kappa
};

struct Snapshot {
    std::uint64_t replica = 0;
    double time = 0.0;
    std::vector<long long> positions;
};

/// Occupation times over the window [burn_in, horizon].
struct Occupation {
    int cap = 64;
    double window = 0.0;
    std::vector<std::vector<double>> marginal;  // [gap - 1][value], uncapped
    /// Adjacent gap pairs (g, g+1): key = min(eta_g, cap) * (cap + 1) + min(eta_{g+1}, cap).
    std::vector<std::unordered_map<std::uint64_t, double>> adjacent_pairs;
    /// Full state, mixed radix (cap + 1) with gap 1 least significant.  Empty
    /// when the system has more gaps than the joint limit.
    std::unordered_map<std::uint64_t, double> joint;
    bool has_joint = false;
};

struct SimStats {
    std::size_t particles = 0;
    double horizon = 0.0;
    double burn_in = 0.0;
    std::vector<long long> initial_positions;
    std::vector<long long> final_positions;
    std::vector<long long> displacement;
    long long event_count = 0;
    Occupation occupation;
    std::vector<Excursion> excursions;
    std::vector<Snapshot> snapshots;
};

/// Called after every executed jump with the current time and positions.
using EventObserver = std::function<void(double, std::span<const long long>)>;

SimStats simulate(const RateSystem& rates, const SimConfig& cfg, const EventObserver& observer = {});

/// Runs replicas 0..count-1 of `cfg` (its replica field is overwritten).
/// Replicas are independent; `threads` > 1 runs them concurrently.
std::vector<SimStats> simulate_replicas(const RateSystem& rates, SimConfig cfg, std::size_t count,
                                        unsigned threads = 1);

/// Adds the occupation times, event counts and excursions of `from` into
/// `into`.  Both must come from the same system and cap.
void merge_stats(SimStats& into, const SimStats& from);

std::vector<double> empirical_speeds(const SimStats& stats, double horizon);

/// Normalized occupation law over a set of gaps.
struct EmpiricalLaw {
    std::vector<int> gaps;  // 1-based labels
    int cap = 0;            // joint coordinates >= cap are lumped at cap (0: uncapped marginal)
    std::vector<std::pair<std::vector<long long>, double>> joint;  // sorted by state
    std::vector<std::vector<double>> marginals;                     // per selected gap, uncapped when single
    double total_time = 0.0;

    double probability(std::span<const long long> state) const;
};

/// Single gaps use the uncapped marginal; adjacent pairs and (for small
/// systems) arbitrary subsets use the capped joint tables.
EmpiricalLaw empirical_gap_law(const SimStats& stats, std::span<const int> gaps);

/// Decodes a joint occupation key into capped gap values.
std::vector<long long> decode_joint_key(std::uint64_t key, std::size_t gaps, int cap);

/// Excursions of eta away from the packed state.  Refuses systems that are
/// not a single stable cloud, where excursion lengths have infinite mean.
std::vector<Excursion> extract_excursions(const RateSystem& rates, SimConfig cfg);

struct ExcursionSummary {
    std::size_t count = 0;
    double mean_duration = 0.0, se_duration = 0.0;
    double mean_displacement = 0.0, se_displacement = 0.0;
    double mean_centered = 0.0, se_centered = 0.0;  // Z = Y - speed * kappa
    double centered_variance = 0.0;
};

ExcursionSummary summarize_excursions(std::span<const Excursion> excursions, double speed);

/// Excursion estimator of the CLT variance: excursion_rate * Var(Y - speed * kappa).
double estimate_sigma2(std::span<const Excursion> excursions, const RateSystem& rates);

}  // namespace exclusion
