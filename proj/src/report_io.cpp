#include "exclusion/report_io.hpp"

#include <cstdio>
#include <json.hpp>
#include <sstream>

namespace exclusion {

using nlohmann::json;

namespace {

constexpr int kJsonIndent = 2;

json partition_json(const OrderedPartition& partition) {
    json parts = json::array();
    for (const auto& p : partition.parts()) parts.push_back({p.first, p.last()});
    return parts;
}

json meta_json(const ReportMeta& meta) {
    return {{"seed", meta.seed}, {"rng", meta.rng}, {"version", meta.version}};
}

std::string join_12g(const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) out += ", ";
        out += format_12g(v[i]);
    }
    return out + "]";
}

}  // namespace

std::string format_12g(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

std::string report_to_json(const CloudReport& report, const ReportMeta& meta) {
    json doc;
    doc["partition"] = partition_json(report.partition);
    doc["rho"] = report.rho;
    doc["speeds"] = report.speeds;
    doc["cloud_speeds"] = report.cloud_speeds;
    doc["widths"] = report.expected_widths;
    json stationary = json::array();
    for (const auto& law : report.stationary) stationary.push_back(law.rhos());
    doc["stationary"] = stationary;
    doc["flags"] = {{"all_singletons", report.flags.all_singletons},
                    {"single_cloud", report.flags.single_cloud},
                    {"all_speeds_positive", report.flags.all_speeds_positive},
                    {"critical_tie", report.flags.critical_tie}};
    doc["equal_speed_adjacencies"] = report.equal_speed_adjacencies;
    doc["clt"] = report.clt ? json{{"speed", report.clt->speed}, {"sigma2", report.clt->sigma2}} : json(nullptr);
    doc["excursion_rate"] = report.excursion_rate ? json(*report.excursion_rate) : json(nullptr);
    doc["meta"] = meta_json(meta);
    return doc.dump(kJsonIndent) + "\n";
}

std::string canonical_json(const std::string& text) {
    return json::parse(text).dump(kJsonIndent) + "\n";
}

std::string report_to_text(const CloudReport& report) {
    std::ostringstream out;
    out << "partition: " << to_string(report.partition) << "\n";
    out << "clouds:\n";
    const auto& parts = report.partition.parts();
    std::size_t law_index = 0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        out << "  " << to_string(parts[k]) << "  speed " << format_12g(report.cloud_speeds[k]);
        if (parts[k].length >= 2) {
            out << "  width " << format_12g(report.expected_widths[law_index]) << "  rho "
                << join_12g(report.stationary[law_index].rhos());
            ++law_index;
        }
        out << "\n";
    }
    out << "rho: " << join_12g(report.rho) << "\n";
    out << "speeds: " << join_12g(report.speeds) << "\n";
    out << "flags: all_singletons=" << report.flags.all_singletons << " single_cloud=" << report.flags.single_cloud
        << " all_speeds_positive=" << report.flags.all_speeds_positive << "\n";
    if (report.clt) {
        out << "clt: speed " << format_12g(report.clt->speed) << "  sigma2 " << format_12g(report.clt->sigma2) << "\n";
    }
    if (report.excursion_rate) {
        out << "excursion rate: " << format_12g(*report.excursion_rate) << "\n";
    }
    if (report.flags.critical_tie) {
        out << "critical tie: ";
        if (!report.equal_speed_adjacencies.empty()) {
            out << "equal-speed (behavior unresolved) between parts";
            for (int j : report.equal_speed_adjacencies) out << " " << j << "/" << j + 1;
        } else {
            out << "some load is numerically indistinguishable from 1";
        }
        out << "\n";
    }
    return out.str();
}

std::string trace_to_text(const MergeTrace& trace) {
    std::ostringstream out;
    for (const auto& step : trace.steps) {
        out << "iteration " << step.iteration << ": " << to_string(step.partition) << "  speeds "
            << join_12g(step.part_speeds) << "  ";
        if (step.merged.empty()) {
            out << "STOP";
        } else {
            out << "merge";
            for (int j : step.merged) out << " " << j << "+" << j + 1;
        }
        out << "\n";
    }
    if (trace.near_tie) out << "note: some comparison fell inside the tie band\n";
    return out.str();
}

std::string verification_to_text(const VerificationReport& report) {
    std::ostringstream out;
    out << "budget: horizon " << format_12g(report.budget.horizon) << ", replicas " << report.budget.replicas
        << ", seed " << report.budget.seed << "\n";
    if (report.critical_tie) out << "critical tie: statistical checks skipped\n";
    for (const auto& c : report.checks) {
        out << to_string(c.status) << "  " << c.name;
        if (c.status == CheckStatus::pass || c.status == CheckStatus::fail) {
            out << "  " << c.metric << " = " << format_12g(c.discrepancy) << " (threshold " << format_12g(c.threshold)
                << "; analytical " << format_12g(c.analytical) << ", observed " << format_12g(c.observed) << ")";
        }
        if (!c.note.empty()) out << "  [" << c.note << "]";
        out << "\n";
    }
    out << (report.passed() ? "all checks passed" : "some checks FAILED") << "\n";
    return out.str();
}

std::string verification_to_json(const VerificationReport& report, const ReportMeta& meta) {
    json checks = json::array();
    for (const auto& c : report.checks) {
        checks.push_back({{"name", c.name},
                          {"status", to_string(c.status)},
                          {"metric", c.metric},
                          {"analytical", c.analytical},
                          {"observed", c.observed},
                          {"discrepancy", c.discrepancy},
                          {"threshold", c.threshold},
                          {"note", c.note}});
    }
    json doc = {{"checks", checks},
                {"critical_tie", report.critical_tie},
                {"passed", report.passed()},
                {"budget", {{"horizon", report.budget.horizon}, {"replicas", report.budget.replicas}, {"seed", report.budget.seed}}},
                {"meta", meta_json(meta)}};
    return doc.dump(kJsonIndent) + "\n";
}

std::string snapshots_to_csv(std::span<const Snapshot> snapshots, std::size_t particles) {
    std::string out = "replica,time";
    for (std::size_t i = 1; i <= particles; ++i) out += ",x_" + std::to_string(i);
    out += "\n";
    char buf[64];
    for (const auto& s : snapshots) {
        std::snprintf(buf, sizeof buf, "%.6f", s.time);
        out += std::to_string(s.replica) + "," + buf;
        for (long long x : s.positions) out += "," + std::to_string(x);
        out += "\n";
    }
    return out;
}

}  // namespace exclusion
