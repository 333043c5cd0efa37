#include "exclusion/partition.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "exclusion/jackson.hpp"

namespace exclusion {

namespace {

double band(double x, double y, double scale) {
    return kSpeedTieTolerance * std::max({std::abs(x), std::abs(y), scale});
}

std::vector<double> part_speeds(const RateSystem& rates, const std::vector<DiscreteInterval>& parts) {
    std::vector<double> out;
    out.reserve(parts.size());
    for (const auto& p : parts) {
        out.push_back(hv(rates, p));
    }
    return out;
}

}  // namespace

bool strictly_faster(double x, double y, double scale) {
    return x - y > band(x, y, scale);
}

bool speeds_tied(double x, double y, double scale) {
    return std::abs(x - y) <= band(x, y, scale);
}

PartitionResult cloud_partition(const RateSystem& rates, MergePolicy policy) {
    if (!rates.satisfies_assumption_a()) {
        throw ModelError("cloud partition requires positive right rates");
    }
    const double scale = rates.rate_scale();
    std::mt19937_64 rng(policy.seed);
    auto parts = OrderedPartition::singletons(rates.particles()).parts();

    PartitionResult result;
    for (int iteration = 0;; ++iteration) {
        MergeStep step;
        step.iteration = iteration;
        step.partition = OrderedPartition::from_parts(parts, rates.particles());
        step.part_speeds = part_speeds(rates, parts);

        const auto& v = step.part_speeds;
        std::vector<int> violating;  // 0-based j with v_j > v_{j+1}
        for (std::size_t j = 0; j + 1 < v.size(); ++j) {
            if (strictly_faster(v[j], v[j + 1], scale)) {
                violating.push_back(static_cast<int>(j));
            } else if (speeds_tied(v[j], v[j + 1], scale)) {
                result.trace.near_tie = true;
            }
        }
        if (violating.empty()) {
            result.trace.steps.push_back(std::move(step));
            break;
        }

        std::vector<int> chosen;
        switch (policy.kind) {
            case MergePolicy::Kind::leftmost:
                chosen = {violating.front()};
                break;
            case MergePolicy::Kind::rightmost:
                chosen = {violating.back()};
                break;
            case MergePolicy::Kind::random:
                chosen = {violating[rng() % violating.size()]};
                break;
            case MergePolicy::Kind::all:
                chosen = violating;
                break;
        }

        // Merging at several j at once chains runs of consecutive indices.
        std::vector<DiscreteInterval> merged;
        for (std::size_t j = 0; j < parts.size(); ++j) {
            const bool joins_previous =
                j > 0 && std::binary_search(chosen.begin(), chosen.end(), static_cast<int>(j) - 1);
            if (joins_previous) {
                merged.back().length += parts[j].length;
            } else {
                merged.push_back(parts[j]);
            }
        }
        for (int j : chosen) {
            step.merged.push_back(j + 1);
        }
        result.trace.steps.push_back(std::move(step));
        parts = std::move(merged);
    }
    result.partition = OrderedPartition::from_parts(parts, rates.particles());
    return result;
}

std::vector<double> full_loads(const RateSystem& rates, const OrderedPartition& partition, double tol) {
    if (partition.particles() != rates.particles()) {
        throw ModelError("partition does not match the number of particles");
    }
    const std::size_t n_gaps = rates.gaps();
    std::vector<double> rho(n_gaps, 0.0);
    const auto& parts = partition.parts();

    for (const auto& part : parts) {
        if (part.length >= 2) {
            const auto interior = hrho_all(rates, part);
            std::copy(interior.begin(), interior.end(), rho.begin() + (part.first - 1));
        }
    }
    // A boundary gap's neighbours are either interior gaps of the adjacent
    // clouds (load < 1, known) or other boundary gaps (clamped to 1), so each
    // boundary equation is explicit.
    for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
        const int j = parts[k].last();
        const double left = parts[k].length >= 2 ? std::min(1.0, rho[j - 2]) : 1.0;
        const double right = parts[k + 1].length >= 2 ? std::min(1.0, rho[j]) : 1.0;
        const double load = (left * rates.a(j) + right * rates.b(j + 1)) / (rates.b(j) + rates.a(j + 1));
        if (load < 1.0 - tol) {
            throw ModelError("boundary gap " + std::to_string(j) + " has load " + std::to_string(load) +
                             " < 1; " + to_string(partition) + " is not the cloud partition");
        }
        rho[j - 1] = load;
    }
    return rho;
}

std::vector<double> particle_speeds(const RateSystem& rates, const std::vector<double>& loads, double tol) {
    const std::size_t n = rates.particles();
    if (loads.size() != rates.gaps()) {
        throw ModelError("expected one load per gap");
    }
    auto clamped = [&](std::size_t gap) { return gap == 0 || gap == n ? 1.0 : std::min(1.0, loads[gap - 1]); };
    std::vector<double> v(n);
    for (std::size_t i = 1; i <= n; ++i) {
        v[i - 1] = clamped(i) * rates.b(i) - clamped(i - 1) * rates.a(i);
    }
    const double slack = tol * std::max(1.0, rates.rate_scale());
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (v[i + 1] < v[i] - slack) {
            throw ModelError("particle speeds decrease between particles " + std::to_string(i + 1) + " and " +
                             std::to_string(i + 2));
        }
    }
    return v;
}

bool all_speeds_positive_criterion(const RateSystem& rates) {
    double ratio = 1.0;  // prod a / prod b over the prefix
    for (std::size_t k = 1; k <= rates.particles(); ++k) {
        ratio *= rates.a(k) / rates.b(k);
        if (!(ratio < 1.0)) {
            return false;
        }
    }
    return true;
}

bool singleton_criterion(const RateSystem& rates) {
    for (std::size_t i = 1; i < rates.particles(); ++i) {
        if (rates.b(i) - rates.a(i) > rates.b(i + 1) - rates.a(i + 1)) {
            return false;
        }
    }
    return true;
}

CloudReport analyze(const RateSystem& rates, MergePolicy policy) {
    auto [partition, trace] = cloud_partition(rates, policy);

    CloudReport report;
    report.partition = partition;
    report.rho = full_loads(rates, partition);
    report.speeds = particle_speeds(rates, report.rho);
    report.trace = std::move(trace);

    const double scale = rates.rate_scale();
    const auto& parts = partition.parts();
    for (std::size_t k = 0; k < parts.size(); ++k) {
        report.cloud_speeds.push_back(hv(rates, parts[k]));
        if (parts[k].length >= 2) {
            GeometricProductLaw law(hrho_all(rates, parts[k]));
            report.expected_widths.push_back(expected_cloud_width(law));
            report.stationary.push_back(std::move(law));
        }
    }
    for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
        if (speeds_tied(report.cloud_speeds[k], report.cloud_speeds[k + 1], scale)) {
            report.equal_speed_adjacencies.push_back(static_cast<int>(k) + 1);
        }
    }

    report.flags.all_singletons = partition.size() == rates.particles();
    report.flags.single_cloud = partition.size() == 1;
    report.flags.all_speeds_positive = all_speeds_positive_criterion(rates);
    // Intermediate ties in the trace do not matter once merged; only the final
    // partition and its loads decide whether the dichotomy is resolved.
    const bool load_at_one = std::any_of(report.rho.begin(), report.rho.end(),
                                         [](double r) { return std::abs(r - 1.0) <= kCriticalLoadTolerance; });
    report.flags.critical_tie = load_at_one || !report.equal_speed_adjacencies.empty();

    if (report.flags.single_cloud) {
        report.excursion_rate = excursion_rate(rates);
        if (rates.gaps() == 1) {
            report.clt = clt_constants_two_particle(rates);
        }
    }
    return report;
}

bool check_partition(const RateSystem& rates, const OrderedPartition& candidate) {
    if (candidate.particles() != rates.particles()) {
        return false;
    }
    try {
        for (const auto& part : candidate.parts()) {
            if (part.length < 2) {
                continue;
            }
            const auto params = reduced_params(rates, part);
            const auto sol = solve_general_traffic(params);
            if (sol.stable_set.size() != params.size()) {
                return false;
            }
        }
        // Throws when some boundary load is below 1.
        (void)full_loads(rates, candidate);
    } catch (const ModelError&) {
        return false;
    } catch (const ConvergenceError&) {
        return false;
    }
    return true;
}

}  // namespace exclusion
