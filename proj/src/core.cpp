#include "exclusion/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace exclusion {

namespace {

// |sum log(a_u/b_u)| over any interval must stay below this so that alpha
// neither overflows nor underflows to a spurious zero.
constexpr double kMaxLogRatioSpan = 600.0;

void check_log_ratio_span(const std::vector<double>& a, const std::vector<double>& b) {
    // Within each run of positive a_u, the extreme partial sums bound every
    // interval sum in that run.  A zero a_u makes alpha exactly zero.
    double prefix = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t u = 0; u < a.size(); ++u) {
        if (a[u] == 0.0) {
            prefix = lo = hi = 0.0;
            continue;
        }
        prefix += std::log(a[u] / b[u]);
        lo = std::min(lo, prefix);
        hi = std::max(hi, prefix);
        if (hi - lo > kMaxLogRatioSpan) {
            throw ModelError("rates too disparate: |sum log(a/b)| over an interval exceeds 600");
        }
    }
}

}  // namespace

RateSystem RateSystem::validate(std::vector<double> a, std::vector<double> b) {
    if (a.size() != b.size()) {
        throw ModelError("length mismatch: " + std::to_string(a.size()) + " left rates vs " +
                         std::to_string(b.size()) + " right rates");
    }
    if (a.size() < 2) {
        throw ModelError("need at least two particles (N >= 1), got " + std::to_string(a.size()));
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto label = std::to_string(i + 1);
        if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
            throw ModelError("non-finite rate at particle " + label);
        }
        if (a[i] < 0.0) {
            throw ModelError("negative left rate a_" + label);
        }
        if (b[i] <= 0.0) {
            throw ModelError("right rate b_" + label + " must be positive");
        }
    }
    check_log_ratio_span(a, b);
    return RateSystem(std::move(a), std::move(b), true);
}

double RateSystem::rate_scale() const {
    double scale = 0.0;
    for (std::size_t i = 0; i < a_.size(); ++i) {
        scale = std::max({scale, a_[i], b_[i]});
    }
    return scale;
}

RateSystem reflect(const RateSystem& rates) {
    std::vector<double> a(rates.a_.rbegin(), rates.a_.rend());
    std::vector<double> b(rates.b_.rbegin(), rates.b_.rend());
    const bool positive_new_b = std::all_of(a.begin(), a.end(), [](double x) { return x > 0.0; });
    // Swapping roles: new a = old b reversed, new b = old a reversed.
    return RateSystem(std::move(b), std::move(a), positive_new_b);
}

void check_interval(const RateSystem& rates, const DiscreteInterval& interval) {
    if (interval.length < 1 || interval.first < 1 ||
        interval.last() > static_cast<int>(rates.particles())) {
        throw ModelError("interval " + to_string(interval) + " is not inside [1; " +
                         std::to_string(rates.particles()) + "]");
    }
}

// --- OrderedPartition -------------------------------------------------------

OrderedPartition OrderedPartition::from_parts(std::vector<DiscreteInterval> parts,
                                              std::size_t particles) {
    int next = 1;
    for (const auto& part : parts) {
        if (part.length < 1 || part.first != next) {
            throw ModelError("parts must be non-empty, contiguous and ordered; bad part " +
                             to_string(part));
        }
        next = part.last() + 1;
    }
    if (next != static_cast<int>(particles) + 1) {
        throw ModelError("parts do not cover [1; " + std::to_string(particles) + "]");
    }
    return OrderedPartition(std::move(parts));
}

OrderedPartition OrderedPartition::from_lengths(std::span<const int> lengths) {
    std::vector<DiscreteInterval> parts;
    int first = 1;
    for (int len : lengths) {
        if (len < 1) {
            throw ModelError("part lengths must be positive");
        }
        parts.push_back({first, len});
        first += len;
    }
    return OrderedPartition(std::move(parts));
}

OrderedPartition OrderedPartition::singletons(std::size_t particles) {
    std::vector<DiscreteInterval> parts;
    for (std::size_t i = 1; i <= particles; ++i) {
        parts.push_back({static_cast<int>(i), 1});
    }
    return OrderedPartition(std::move(parts));
}

OrderedPartition OrderedPartition::whole(std::size_t particles) {
    return OrderedPartition({{1, static_cast<int>(particles)}});
}

std::size_t OrderedPartition::particles() const {
    return parts_.empty() ? 0 : static_cast<std::size_t>(parts_.back().last());
}

std::size_t OrderedPartition::part_of(int label) const {
    for (std::size_t k = 0; k < parts_.size(); ++k) {
        if (parts_[k].contains(label)) {
            return k;
        }
    }
    throw ModelError("label " + std::to_string(label) + " not covered by partition");
}

bool OrderedPartition::is_boundary_gap(int gap) const {
    for (std::size_t k = 0; k + 1 < parts_.size(); ++k) {
        if (parts_[k].last() == gap) {
            return true;
        }
    }
    return false;
}

OrderedPartition OrderedPartition::reversed() const {
    const int n = static_cast<int>(particles());
    std::vector<DiscreteInterval> parts;
    for (auto it = parts_.rbegin(); it != parts_.rend(); ++it) {
        parts.push_back({n + 1 - it->last(), it->length});
    }
    return OrderedPartition(std::move(parts));
}

std::string to_string(const DiscreteInterval& interval) {
    std::ostringstream os;
    os << '[' << interval.first << ';' << interval.length << ']';
    return os.str();
}

std::string to_string(const OrderedPartition& partition) {
    std::ostringstream os;
    os << '(';
    for (std::size_t k = 0; k < partition.size(); ++k) {
        const auto& p = partition.parts()[k];
        if (k > 0) {
            os << ", ";
        }
        os << '{';
        for (int i = p.first; i <= p.last(); ++i) {
            os << (i == p.first ? "" : ",") << i;
        }
        os << '}';
    }
    os << ')';
    return os.str();
}

// --- GeometricProductLaw ------------------------------------------------------

GeometricProductLaw::GeometricProductLaw(std::vector<double> rhos) : rhos_(std::move(rhos)) {
    for (double r : rhos_) {
        if (!(r > 0.0 && r < 1.0)) {
            throw ModelError("geometric parameter outside (0,1): " + std::to_string(r));
        }
    }
}

// --- closed forms ---------------------------------------------------------------

double alpha(const RateSystem& rates, const DiscreteInterval& interval) {
    check_interval(rates, interval);
    double product = 1.0;
    for (int u = interval.first; u <= interval.last(); ++u) {
        product *= rates.a(u) / rates.b(u);
    }
    return product;
}

double beta(const RateSystem& rates, const DiscreteInterval& interval) {
    check_interval(rates, interval);
    double value = 1.0 / rates.b(interval.first);
    for (int last = interval.first + 1; last <= interval.last(); ++last) {
        value = 1.0 / rates.b(last) + rates.a(last) / rates.b(last) * value;
    }
    if (!std::isfinite(value)) {
        throw ModelError("beta overflow on interval " + to_string(interval));
    }
    return value;
}

double hv(const RateSystem& rates, const DiscreteInterval& interval) {
    return (1.0 - alpha(rates, interval)) / beta(rates, interval);
}

double hrho(const RateSystem& rates, const DiscreteInterval& interval, int gap) {
    check_interval(rates, interval);
    if (interval.length < 2) {
        throw ModelError("interior loads need an interval with at least two particles");
    }
    if (gap < interval.first || gap >= interval.last()) {
        throw ModelError("gap " + std::to_string(gap) + " is not interior to " +
                         to_string(interval));
    }
    const DiscreteInterval prefix{interval.first, gap + 1 - interval.first};
    return alpha(rates, prefix) + beta(rates, prefix) * hv(rates, interval);
}

std::vector<double> hrho_all(const RateSystem& rates, const DiscreteInterval& interval) {
    check_interval(rates, interval);
    if (interval.length < 2) {
        throw ModelError("interior loads need an interval with at least two particles");
    }
    const double speed = hv(rates, interval);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(interval.length - 1));
    // Running alpha/beta over growing prefixes: one pass instead of O(m^2).
    double a_prefix = 1.0;
    double b_prefix = 0.0;
    for (int j = interval.first; j < interval.last(); ++j) {
        const double ratio = rates.a(j) / rates.b(j);
        a_prefix *= ratio;
        b_prefix = 1.0 / rates.b(j) + ratio * b_prefix;
        out.push_back(a_prefix + b_prefix * speed);
    }
    return out;
}

double product_geometric_pmf(const GeometricProductLaw& law, std::span<const long long> z) {
    if (z.size() != law.dimension()) {
        throw ModelError("state dimension " + std::to_string(z.size()) + " does not match law dimension " +
                         std::to_string(law.dimension()));
    }
    double p = 1.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
        if (z[j] < 0) {
            return 0.0;
        }
        const double r = law.rhos()[j];
        p *= std::pow(r, static_cast<double>(z[j])) * (1.0 - r);
    }
    return p;
}

double product_geometric_box_mass(const GeometricProductLaw& law, int cap) {
    double mass = 1.0;
    for (double r : law.rhos()) {
        mass *= 1.0 - std::pow(r, cap + 1);
    }
    return mass;
}

double expected_cloud_width(const GeometricProductLaw& law) {
    double width = 0.0;
    for (double r : law.rhos()) {
        width += 1.0 / (1.0 - r);
    }
    return width;
}

}  // namespace exclusion
