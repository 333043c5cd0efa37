#pragma once

// Domain types and closed-form quantities for a finite exclusion process of
// N+1 particles on Z with per-particle left/right jump rates (a_i, b_i).
//
// Labels are 1-based throughout the public interface: particles 1..N+1 and
// gaps 1..N, where gap i sits between particles i and i+1.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace exclusion {

/// Thrown for inputs that violate a documented precondition.
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Jump rates of the N+1 particles.
///
/// Instances built by `validate` satisfy the standing assumption
/// 0 <= a_i < inf, 0 < b_i < inf.  `reflect` may produce a system where some
/// b_i vanish; such a system only satisfies the mirrored assumption (all a_i
/// positive) and is flagged through `satisfies_assumption_a()`.
class RateSystem {
public:
    static RateSystem validate(std::vector<double> a, std::vector<double> b);

    std::size_t particles() const { return a_.size(); }
    std::size_t gaps() const { return a_.size() - 1; }

    // 1-based accessors.
    double a(std::size_t label) const { return a_.at(label - 1); }
    double b(std::size_t label) const { return b_.at(label - 1); }

    const std::vector<double>& left_rates() const { return a_; }
    const std::vector<double>& right_rates() const { return b_; }

    bool satisfies_assumption_a() const { return assumption_a_; }

    /// Largest rate, used as the absolute scale for speed tie bands.
    double rate_scale() const;

    friend bool operator==(const RateSystem&, const RateSystem&) = default;

private:
    RateSystem(std::vector<double> a, std::vector<double> b, bool assumption_a)
        : a_(std::move(a)), b_(std::move(b)), assumption_a_(assumption_a) {}

    std::vector<double> a_;
    std::vector<double> b_;
    bool assumption_a_ = true;

    friend RateSystem reflect(const RateSystem& rates);
};

/// Mirror image x -> -x: particle i becomes particle N+2-i and the roles of
/// left and right rates swap.  Involutive.
RateSystem reflect(const RateSystem& rates);

/// The discrete interval [first; length] = {first, ..., first+length-1}.
struct DiscreteInterval {
    int first = 1;
    int length = 1;

    int last() const { return first + length - 1; }
    bool contains(int label) const { return label >= first && label <= last(); }

    friend bool operator==(const DiscreteInterval&, const DiscreteInterval&) = default;
};

/// Throws ModelError unless `interval` lies inside [1; particles].
void check_interval(const RateSystem& rates, const DiscreteInterval& interval);

/// Contiguous, ordered decomposition of {1, ..., N+1} into discrete intervals.
class OrderedPartition {
public:
    OrderedPartition() = default;

    /// Validates disjointness, contiguity and coverage of [1; particles].
    static OrderedPartition from_parts(std::vector<DiscreteInterval> parts, std::size_t particles);

    /// Parts from a list of part lengths, left to right.
    static OrderedPartition from_lengths(std::span<const int> lengths);

    static OrderedPartition singletons(std::size_t particles);
    static OrderedPartition whole(std::size_t particles);

    const std::vector<DiscreteInterval>& parts() const { return parts_; }
    std::size_t size() const { return parts_.size(); }
    std::size_t particles() const;

    /// Index (0-based) of the part holding particle `label`.
    std::size_t part_of(int label) const;

    /// True when gap `gap` separates two parts.
    bool is_boundary_gap(int gap) const;

    /// Mirror image under particle reversal.
    OrderedPartition reversed() const;

    friend bool operator==(const OrderedPartition&, const OrderedPartition&) = default;

private:
    explicit OrderedPartition(std::vector<DiscreteInterval> parts) : parts_(std::move(parts)) {}

    std::vector<DiscreteInterval> parts_;
};

std::string to_string(const DiscreteInterval& interval);
std::string to_string(const OrderedPartition& partition);

/// Independent geometric laws on Z_+^k with parameters rho_j in (0,1).
class GeometricProductLaw {
public:
    GeometricProductLaw() = default;
    explicit GeometricProductLaw(std::vector<double> rhos);

    const std::vector<double>& rhos() const { return rhos_; }
    std::size_t dimension() const { return rhos_.size(); }

    friend bool operator==(const GeometricProductLaw&, const GeometricProductLaw&) = default;

private:
    std::vector<double> rhos_;
};

// Closed-form interval quantities.  All take 1-based intervals.

/// prod_{u in I} a_u / b_u.
double alpha(const RateSystem& rates, const DiscreteInterval& interval);

/// 1/b_last * sum_{v=0}^{m-1} prod_{u=1}^{v} a_{last+1-u} / b_{last-u},
/// evaluated by the recurrence beta(l;m) = 1/b_{l+m-1} + (a_{l+m-1}/b_{l+m-1}) beta(l;m-1).
double beta(const RateSystem& rates, const DiscreteInterval& interval);

/// Intrinsic speed (1 - alpha(I)) / beta(I) of I as an isolated block.
double hv(const RateSystem& rates, const DiscreteInterval& interval);

/// Load of interior gap j of I when I travels as one stable cloud:
/// alpha(l; j+1-l) + beta(l; j+1-l) hv(I).  Requires |I| >= 2 and l <= j < last(I).
double hrho(const RateSystem& rates, const DiscreteInterval& interval, int gap);

/// All interior loads of I, gaps first(I) .. last(I)-1.
std::vector<double> hrho_all(const RateSystem& rates, const DiscreteInterval& interval);

/// prod_j rho_j^{z_j} (1 - rho_j).
double product_geometric_pmf(const GeometricProductLaw& law, std::span<const long long> z);

/// Mass of the box {0..K}^k: prod_j (1 - rho_j^{K+1}).
double product_geometric_box_mass(const GeometricProductLaw& law, int cap);

/// Long-run expected span max - min of a stable cloud: sum_j 1/(1 - rho_j).
double expected_cloud_width(const GeometricProductLaw& law);

}  // namespace exclusion
