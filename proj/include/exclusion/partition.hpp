#pragma once

// Cloud partition by speed-comparison merging, and the assembled analytical
// report: loads, particle speeds, stationary laws, widths and flags.

#include <cstdint>
#include <optional>
#include <vector>

#include "exclusion/clt.hpp"
#include "exclusion/core.hpp"

namespace exclusion {

/// Which violating adjacency (or adjacencies) to merge each iteration.
struct MergePolicy {
    enum class Kind { leftmost, rightmost, all, random };
    Kind kind = Kind::all;
    std::uint64_t seed = 0;  // used by Kind::random only

    static MergePolicy leftmost() { return {Kind::leftmost, 0}; }
    static MergePolicy rightmost() { return {Kind::rightmost, 0}; }
    static MergePolicy all() { return {Kind::all, 0}; }
    static MergePolicy random(std::uint64_t seed) { return {Kind::random, seed}; }
};

struct MergeStep {
    int iteration = 0;
    OrderedPartition partition;      // snapshot before merging
    std::vector<double> part_speeds; // hv of each part in the snapshot
    std::vector<int> merged;         // 1-based part indices j merged with j+1; empty means STOP
};

struct MergeTrace {
    std::vector<MergeStep> steps;
    bool near_tie = false;  // some comparison fell inside the tie band
};

/// Relative band inside which two speeds count as equal.
inline constexpr double kSpeedTieTolerance = 1e-12;

/// Loads within this distance of 1 make the analysis a critical tie.
inline constexpr double kCriticalLoadTolerance = 1e-9;

/// True when x > y by more than the tie band (scaled by max(|x|, |y|, scale)).
bool strictly_faster(double x, double y, double scale);
/// True when |x - y| lies inside the tie band.
bool speeds_tied(double x, double y, double scale);

struct PartitionResult {
    OrderedPartition partition;
    MergeTrace trace;
};

/// Starts from singletons and merges adjacent parts whose left speed strictly
/// exceeds the right one, until part speeds are non-decreasing.
PartitionResult cloud_partition(const RateSystem& rates, MergePolicy policy = MergePolicy::all());

/// Loads of all N gaps for a given cloud partition: interior gaps from the
/// cloud formula, boundary gaps from the locally clamped balance equation.
/// Throws ModelError if a boundary load falls below 1 - tol.
std::vector<double> full_loads(const RateSystem& rates, const OrderedPartition& partition, double tol = 1e-9);

/// v_i = (1 ^ rho_i) b_i - (1 ^ rho_{i-1}) a_i with rho_0 = rho_{N+1} = 1.
/// Throws ModelError if the result is not non-decreasing (within tol * scale).
std::vector<double> particle_speeds(const RateSystem& rates, const std::vector<double>& loads,
                                    double tol = 1e-9);

/// Prefix-product criterion: all speeds positive iff prod_{i<=k} a_i < prod_{i<=k} b_i for every k.
bool all_speeds_positive_criterion(const RateSystem& rates);

/// Singleton criterion: b_1 - a_1 <= b_2 - a_2 <= ... <= b_{N+1} - a_{N+1}.
bool singleton_criterion(const RateSystem& rates);

struct CloudFlags {
    bool all_singletons = false;
    bool single_cloud = false;
    bool all_speeds_positive = false;
    bool critical_tie = false;  // tied adjacent cloud speeds or some load within tolerance of 1
};

struct CloudReport {
    OrderedPartition partition;
    std::vector<double> rho;          // per gap
    std::vector<double> speeds;       // per particle
    std::vector<double> cloud_speeds; // per part
    std::vector<GeometricProductLaw> stationary;  // per non-singleton part, left to right
    std::vector<double> expected_widths;          // per non-singleton part
    CloudFlags flags;
    /// Adjacent part pairs (1-based j, j+1) whose speeds are equal within the
    /// tie band; their long-run behaviour is left unresolved.
    std::vector<int> equal_speed_adjacencies;
    std::optional<CltConstants> clt;
    /// Excursion rate of the packed state, single-cloud systems only.
    std::optional<double> excursion_rate;
    MergeTrace trace;
};

CloudReport analyze(const RateSystem& rates, MergePolicy policy = MergePolicy::all());

/// True iff every part is a candidate stable cloud (reduced loads < 1 on its
/// interior gaps) and every boundary load is >= 1.
bool check_partition(const RateSystem& rates, const OrderedPartition& candidate);

}  // namespace exclusion
