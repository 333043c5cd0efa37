#pragma once

// Brute-force oracles and the statistical harness that compares analysis,
// oracles and simulation on one rate system.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "exclusion/core.hpp"
#include "exclusion/partition.hpp"

namespace exclusion {

enum class TruncatedSolver {
    automatic,  // direct up to kDirectSolveStates states, iterative beyond
    direct,     // sparse LU in nested-dissection order
    iterative,  // Jacobi-preconditioned BiCGSTAB
};

/// Largest state count solved directly under TruncatedSolver::automatic.
inline constexpr std::size_t kDirectSolveStates = 20'000;
/// Both solvers must reach this relative residual or the solve throws.
inline constexpr double kTruncatedResidualTolerance = 1e-12;

struct TruncatedChainSpec {
    RateSystem rates;
    int cap = 40;  // per-gap maximum
    TruncatedSolver solver = TruncatedSolver::automatic;
};

/// Stationary law of the gap chain restricted to {0..cap}^N, indexed in mixed
/// radix (cap + 1) with gap 1 least significant.
struct TruncatedLaw {
    std::size_t gaps = 0;
    int cap = 0;
    std::vector<double> pi;
    double relative_residual = 0.0;  // of the pinned balance system
    bool direct = true;

    double probability(std::span<const long long> state) const;
    /// Marginal of gap `gap` (1-based) over 0..cap.
    std::vector<double> marginal(int gap) const;
    double total_mass() const;
    /// sup over the box of |pi(z) - target(z)|.
    double sup_distance(const GeometricProductLaw& target) const;
};

inline constexpr std::size_t kTruncatedStateBudget = 10'000'000;

/// Solves pi Q = 0, sum pi = 1 for the gap chain with jumps leaving the box
/// suppressed.  pi_0 is pinned to 1, its balance equation dropped, and the
/// result normalized.
/// Throws ModelError when the state count exceeds `max_states` or the system is singular.
TruncatedLaw truncated_stationary(const TruncatedChainSpec& spec, std::size_t max_states = kTruncatedStateBudget);

/// Cuts the particle line at every gap whose general-traffic load is >= 1 - tol.
/// Throws ConvergenceError when the fixed-point solve fails.
OrderedPartition partition_oracle(const RateSystem& rates, double tol = 1e-9);

struct SimBudget {
    double horizon = 1e5;
    std::size_t replicas = 16;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

struct VerifyOptions {
    double se_multiplier = 3.0;        // speed and excursion-mean checks
    double tv_threshold = 0.02;        // interior-gap marginal vs geometric
    double independence_threshold = 0.03;
    double variance_tolerance = 0.10;  // N=1 replica variance vs sigma^2
    double excursion_tolerance = 0.15; // excursion estimator vs replica variance
    double variance_z = 4.0;           // widens variance tolerances for small replica counts
    int escape_bound = 10;             // boundary gap occupation of {eta <= B}
    std::size_t truncated_state_budget = 200'000;
    int truncated_cap = 40;
    /// Added to every analytical speed target (harness self-test only).
    double speed_offset = 0.0;
};

enum class CheckStatus { pass, fail, not_applicable, skipped };

std::string to_string(CheckStatus status);

struct CheckResult {
    std::string name;
    CheckStatus status = CheckStatus::not_applicable;
    std::string metric;
    double analytical = 0.0;
    double observed = 0.0;
    double discrepancy = 0.0;
    double threshold = 0.0;
    std::string note;
};

struct VerificationReport {
    std::vector<CheckResult> checks;  // sorted by name
    bool critical_tie = false;
    SimBudget budget;

    bool passed() const;
};

VerificationReport verify_instance(const RateSystem& rates, const SimBudget& budget, const VerifyOptions& options = {});

struct GoldenInstance {
    std::string name;
    RateSystem rates;
};

/// Shipped reference systems with known closed-form behaviour.
std::vector<GoldenInstance> golden_instances();

}  // namespace exclusion
