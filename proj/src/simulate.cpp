#include "exclusion/simulate.hpp"

#include <algorithm>
#include <cassert>
#include <exception>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <thread>

#include "exclusion/clt.hpp"

namespace exclusion {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

ReplicaRng::ReplicaRng(std::uint64_t seed, std::uint64_t replica)
    : engine_(splitmix64(seed ^ splitmix64(replica + 1))) {}

namespace {

void check_config(const RateSystem& rates, const SimConfig& cfg) {
    if (!std::isfinite(cfg.horizon) || cfg.horizon <= 0.0) {
        throw ModelError("horizon must be positive and finite");
    }
    const double burn = cfg.effective_burn_in();
    if (!std::isfinite(burn) || burn < 0.0 || burn >= cfg.horizon) {
        throw ModelError("burn-in must lie in [0, horizon)");
    }
    if (!cfg.initial_gaps.empty() && cfg.initial_gaps.size() != rates.gaps()) {
        throw ModelError("expected " + std::to_string(rates.gaps()) + " initial gaps, got " +
                         std::to_string(cfg.initial_gaps.size()));
    }
    for (long long g : cfg.initial_gaps) {
        if (g < 0) {
            throw ModelError("initial gaps must be non-negative");
        }
    }
    for (double s : cfg.sample_times) {
        if (!std::isfinite(s) || s < 0.0) {
            throw ModelError("sample times must be non-negative and finite");
        }
    }
    if (cfg.occupation_cap < 1 || cfg.occupation_cap > 4096) {
        throw ModelError("occupation cap must lie in [1, 4096]");
    }
}

// Occupation accounting where each table is charged lazily, only when one of
// its coordinates changes.
class OccupationRecorder {
public:
    OccupationRecorder(const std::vector<long long>& gaps, const SimConfig& cfg, double window_start)
        : gaps_(gaps), cap_(cfg.occupation_cap), start_(window_start) {
        const std::size_t n = gaps.size();
        occ_.cap = cap_;
        occ_.marginal.resize(n);
        occ_.adjacent_pairs.resize(n > 0 ? n - 1 : 0);
        occ_.has_joint = n <= cfg.joint_max_gaps;
        gap_since_.assign(n, 0.0);
        pair_since_.assign(occ_.adjacent_pairs.size(), 0.0);
        if (occ_.has_joint) {
            radix_.resize(n);
            std::uint64_t r = 1;
            for (std::size_t g = 0; g < n; ++g) {
                radix_[g] = r;
                r *= static_cast<std::uint64_t>(cap_) + 1;
            }
            joint_key_ = encode_joint();
        }
    }

    // Charges everything touching gap g (0-based) up to time t.  Call before
    // the gap changes.
    void flush_gap(std::size_t g, double t) {
        charge_marginal(g, t);
        if (g > 0) charge_pair(g - 1, t);
        if (g + 1 < gaps_.size()) charge_pair(g, t);
    }

    // Charges the joint table up to time t.  Call before any change.
    void flush_joint(double t) {
        if (!occ_.has_joint) return;
        const double dt = overlap(joint_since_, t);
        if (dt > 0.0) occ_.joint[joint_key_] += dt;
        joint_since_ = t;
    }

    // Call after gaps changed.
    void refresh_joint() {
        if (occ_.has_joint) joint_key_ = encode_joint();
    }

    Occupation finish(double horizon) {
        for (std::size_t g = 0; g < gaps_.size(); ++g) {
            charge_marginal(g, horizon);
        }
        for (std::size_t p = 0; p < pair_since_.size(); ++p) {
            charge_pair(p, horizon);
        }
        flush_joint(horizon);
        occ_.window = horizon - start_;
        return std::move(occ_);
    }

private:
    double overlap(double since, double t) const { return t - std::max(since, start_); }

    std::uint64_t capped(std::size_t g) const {
        return static_cast<std::uint64_t>(std::min<long long>(gaps_[g], cap_));
    }

    std::uint64_t encode_joint() const {
        std::uint64_t key = 0;
        for (std::size_t g = 0; g < gaps_.size(); ++g) key += capped(g) * radix_[g];
        return key;
    }

    void charge_marginal(std::size_t g, double t) {
        const double dt = overlap(gap_since_[g], t);
        if (dt > 0.0) {
            auto& row = occ_.marginal[g];
            const auto value = static_cast<std::size_t>(gaps_[g]);
            if (row.size() <= value) row.resize(value + 1, 0.0);
            row[value] += dt;
        }
        gap_since_[g] = t;
    }

    void charge_pair(std::size_t p, double t) {
        const double dt = overlap(pair_since_[p], t);
        if (dt > 0.0) {
            occ_.adjacent_pairs[p][capped(p) * (static_cast<std::uint64_t>(cap_) + 1) + capped(p + 1)] += dt;
        }
        pair_since_[p] = t;
    }

    const std::vector<long long>& gaps_;
    int cap_;
    double start_;
    Occupation occ_;
    std::vector<double> gap_since_;
    std::vector<double> pair_since_;
    double joint_since_ = 0.0;
    std::vector<std::uint64_t> radix_;
    std::uint64_t joint_key_ = 0;
};

}  // namespace

SimStats simulate(const RateSystem& rates, const SimConfig& cfg, const EventObserver& observer) {
    check_config(rates, cfg);
    const std::size_t n = rates.particles();
    const auto& a = rates.left_rates();
    const auto& b = rates.right_rates();

    std::vector<long long> gaps = cfg.initial_gaps.empty() ? std::vector<long long>(n - 1, 0) : cfg.initial_gaps;
    std::vector<long long> x(n);
    x[0] = 1;
    for (std::size_t i = 0; i + 1 < n; ++i) x[i + 1] = x[i] + 1 + gaps[i];

    SimStats stats;
    stats.particles = n;
    stats.horizon = cfg.horizon;
    stats.burn_in = cfg.effective_burn_in();
    stats.initial_positions = x;

    std::vector<double> samples = cfg.sample_times;
    std::sort(samples.begin(), samples.end());
    std::size_t next_sample = 0;
    auto take_samples_before = [&](double until, bool inclusive) {
        while (next_sample < samples.size() && samples[next_sample] <= cfg.horizon &&
               (samples[next_sample] < until || (inclusive && samples[next_sample] <= until))) {
            stats.snapshots.push_back({cfg.replica, samples[next_sample], x});
            ++next_sample;
        }
    };

    OccupationRecorder recorder(gaps, cfg, stats.burn_in);
    ReplicaRng rng(cfg.seed, cfg.replica);

    // Number of positive gaps; zero means the packed state.
    std::size_t positive = static_cast<std::size_t>(std::count_if(gaps.begin(), gaps.end(), [](long long g) { return g > 0; }));
    std::optional<double> last_return;
    long long x1_at_return = 0;
    if (cfg.record_excursions && positive == 0) {
        last_return = 0.0;
        x1_at_return = x[0];
    }

    std::vector<double> rate(2 * n);  // [2i] left move of particle i, [2i+1] right move
    double t = 0.0;
    for (;;) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            rate[2 * i] = (i == 0 || gaps[i - 1] > 0) ? a[i] : 0.0;
            rate[2 * i + 1] = (i + 1 == n || gaps[i] > 0) ? b[i] : 0.0;
            total += rate[2 * i] + rate[2 * i + 1];
        }
        if (!(total > 0.0)) {
            throw ModelError("no particle can move");
        }
        const double next = t + rng.exponential(total);
        if (next > cfg.horizon) break;
        take_samples_before(next, false);
        t = next;

        double u = rng.uniform() * total;
        std::size_t move = 0;
        for (; move + 1 < rate.size(); ++move) {
            if (u < rate[move]) break;
            u -= rate[move];
        }
        // Guard against rounding landing on a disabled slot.
        while (rate[move] == 0.0) --move;

        const std::size_t i = move / 2;
        const bool right = (move % 2) == 1;
        recorder.flush_joint(t);
        if (i > 0) recorder.flush_gap(i - 1, t);
        if (i + 1 < n) recorder.flush_gap(i, t);

        const long long before_left = i > 0 ? gaps[i - 1] : 0;
        const long long before_right = i + 1 < n ? gaps[i] : 0;
        if (right) {
            ++x[i];
            if (i > 0) ++gaps[i - 1];
            if (i + 1 < n) --gaps[i];
        } else {
            --x[i];
            if (i > 0) --gaps[i - 1];
            if (i + 1 < n) ++gaps[i];
        }
        if (i > 0) positive += (gaps[i - 1] > 0) - (before_left > 0);
        if (i + 1 < n) positive += (gaps[i] > 0) - (before_right > 0);
        assert((i == 0 || gaps[i - 1] >= 0) && (i + 1 == n || gaps[i] >= 0));
        recorder.refresh_joint();
        ++stats.event_count;

        if (cfg.record_excursions && positive == 0) {
            if (last_return) {
                stats.excursions.push_back({x[0] - x1_at_return, t - *last_return});
            }
            last_return = t;
            x1_at_return = x[0];
        }
        if (observer) observer(t, x);
    }
    take_samples_before(cfg.horizon, true);

    stats.occupation = recorder.finish(cfg.horizon);
    stats.final_positions = x;
    stats.displacement.resize(n);
    for (std::size_t i = 0; i < n; ++i) stats.displacement[i] = x[i] - stats.initial_positions[i];
    return stats;
}

std::vector<SimStats> simulate_replicas(const RateSystem& rates, SimConfig cfg, std::size_t count, unsigned threads) {
    std::vector<SimStats> out(count);
    auto run = [&](std::size_t r) {
        SimConfig local = cfg;
        local.replica = r;
        out[r] = simulate(rates, local);
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (threads == 1) {
        for (std::size_t r = 0; r < count; ++r) run(r);
        return out;
    }
    // Static striping keeps results independent of scheduling.
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t r = w; r < count; r += threads) run(r);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

void merge_stats(SimStats& into, const SimStats& from) {
    if (into.particles != from.particles || into.occupation.cap != from.occupation.cap ||
        into.occupation.has_joint != from.occupation.has_joint) {
        throw ModelError("cannot merge statistics from different systems or caps");
    }
    auto& dst = into.occupation;
    const auto& src = from.occupation;
    dst.window += src.window;
    for (std::size_t g = 0; g < src.marginal.size(); ++g) {
        auto& row = dst.marginal[g];
        if (row.size() < src.marginal[g].size()) row.resize(src.marginal[g].size(), 0.0);
        for (std::size_t v = 0; v < src.marginal[g].size(); ++v) row[v] += src.marginal[g][v];
    }
    for (std::size_t p = 0; p < src.adjacent_pairs.size(); ++p) {
        for (const auto& [k, w] : src.adjacent_pairs[p]) dst.adjacent_pairs[p][k] += w;
    }
    for (const auto& [k, w] : src.joint) dst.joint[k] += w;
    into.event_count += from.event_count;
    into.excursions.insert(into.excursions.end(), from.excursions.begin(), from.excursions.end());
    into.snapshots.insert(into.snapshots.end(), from.snapshots.begin(), from.snapshots.end());
}

std::vector<double> empirical_speeds(const SimStats& stats, double horizon) {
    if (!(horizon > 0.0)) {
        throw ModelError("horizon must be positive");
    }
    std::vector<double> v(stats.displacement.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(stats.displacement[i]) / horizon;
    return v;
}

std::vector<long long> decode_joint_key(std::uint64_t key, std::size_t gaps, int cap) {
    const auto radix = static_cast<std::uint64_t>(cap) + 1;
    std::vector<long long> out(gaps);
    for (std::size_t g = 0; g < gaps; ++g) {
        out[g] = static_cast<long long>(key % radix);
        key /= radix;
    }
    return out;
}

double EmpiricalLaw::probability(std::span<const long long> state) const {
    std::vector<long long> s(state.begin(), state.end());
    auto it = std::lower_bound(joint.begin(), joint.end(), s,
                               [](const auto& entry, const auto& value) { return entry.first < value; });
    return it != joint.end() && it->first == s ? it->second : 0.0;
}

EmpiricalLaw empirical_gap_law(const SimStats& stats, std::span<const int> gaps) {
    const auto& occ = stats.occupation;
    const std::size_t n_gaps = occ.marginal.size();
    if (gaps.empty()) {
        throw ModelError("select at least one gap");
    }
    for (std::size_t k = 0; k < gaps.size(); ++k) {
        if (gaps[k] < 1 || static_cast<std::size_t>(gaps[k]) > n_gaps) {
            throw ModelError("gap label " + std::to_string(gaps[k]) + " out of range");
        }
        if (k > 0 && gaps[k] <= gaps[k - 1]) {
            throw ModelError("gap labels must be strictly increasing");
        }
    }
    if (!(occ.window > 0.0)) {
        throw ModelError("empty observation window");
    }

    EmpiricalLaw law;
    law.gaps.assign(gaps.begin(), gaps.end());
    law.total_time = occ.window;
    std::map<std::vector<long long>, double> table;

    if (gaps.size() == 1) {
        law.cap = 0;
        const auto& row = occ.marginal[gaps[0] - 1];
        for (std::size_t v = 0; v < row.size(); ++v) {
            if (row[v] > 0.0) table[{static_cast<long long>(v)}] += row[v];
        }
    } else if (gaps.size() == 2 && gaps[1] == gaps[0] + 1) {
        law.cap = occ.cap;
        for (const auto& [key, w] : occ.adjacent_pairs[gaps[0] - 1]) table[decode_joint_key(key, 2, occ.cap)] += w;
    } else if (occ.has_joint) {
        law.cap = occ.cap;
        for (const auto& [key, w] : occ.joint) {
            const auto full = decode_joint_key(key, n_gaps, occ.cap);
            std::vector<long long> sub;
            for (int g : gaps) sub.push_back(full[g - 1]);
            table[sub] += w;
        }
    } else {
        throw ModelError("joint occupation of non-adjacent gaps is only kept for small systems");
    }

    law.marginals.assign(gaps.size(), {});
    for (auto& [state, w] : table) {
        const double p = w / occ.window;
        law.joint.emplace_back(state, p);
        for (std::size_t k = 0; k < state.size(); ++k) {
            auto& m = law.marginals[k];
            const auto v = static_cast<std::size_t>(state[k]);
            if (m.size() <= v) m.resize(v + 1, 0.0);
            m[v] += p;
        }
    }
    return law;
}

std::vector<Excursion> extract_excursions(const RateSystem& rates, SimConfig cfg) {
    if (rates.gaps() == 0 || !is_single_cloud(rates)) {
        throw ModelError("excursions need a single stable cloud; excursion lengths would have infinite mean");
    }
    cfg.record_excursions = true;
    return simulate(rates, cfg).excursions;
}

ExcursionSummary summarize_excursions(std::span<const Excursion> excursions, double speed) {
    ExcursionSummary s;
    s.count = excursions.size();
    if (s.count < 2) {
        throw ModelError("need at least two excursions");
    }
    const double n = static_cast<double>(s.count);
    auto moments = [&](auto f, double& mean, double& se, double* var_out) {
        double m = 0.0, m2 = 0.0;
        std::size_t k = 0;
        // Welford update.
        for (const auto& e : excursions) {
            const double v = f(e);
            ++k;
            const double d = v - m;
            m += d / static_cast<double>(k);
            m2 += d * (v - m);
        }
        const double var = m2 / (n - 1.0);
        mean = m;
        se = std::sqrt(var / n);
        if (var_out) *var_out = var;
    };
    moments([](const Excursion& e) { return e.duration; }, s.mean_duration, s.se_duration, nullptr);
    moments([](const Excursion& e) { return static_cast<double>(e.displacement); }, s.mean_displacement,
            s.se_displacement, nullptr);
    moments([speed](const Excursion& e) { return static_cast<double>(e.displacement) - speed * e.duration; },
            s.mean_centered, s.se_centered, &s.centered_variance);
    return s;
}

double estimate_sigma2(std::span<const Excursion> excursions, const RateSystem& rates) {
    const double speed = hv(rates, {1, static_cast<int>(rates.particles())});
    const double rate = excursion_rate(rates);
    return rate * summarize_excursions(excursions, speed).centered_variance;
}

}  // namespace exclusion
