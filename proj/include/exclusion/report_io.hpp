#pragma once

// Text, JSON and CSV renderings of analysis, simulation and verification
// results.  JSON keys are sorted and numbers use shortest round-trip
// decimals, so a document re-parsed and re-dumped is byte-identical.

#include <cstdint>
#include <span>
#include <string>

#include "exclusion/partition.hpp"
#include "exclusion/simulate.hpp"
#include "exclusion/verify.hpp"

namespace exclusion {

struct ReportMeta {
    std::uint64_t seed = 0;
    std::string rng = std::string(kRngName);
    std::string version = EXCLUSION_VERSION;
};

std::string report_to_json(const CloudReport& report, const ReportMeta& meta);

/// Human-readable report, 12 significant digits.
std::string report_to_text(const CloudReport& report);

std::string trace_to_text(const MergeTrace& trace);

std::string verification_to_text(const VerificationReport& report);
std::string verification_to_json(const VerificationReport& report, const ReportMeta& meta);

/// Header `replica,time,x_1,...,x_{N+1}`, times with six decimals.
std::string snapshots_to_csv(std::span<const Snapshot> snapshots, std::size_t particles);

/// Round-trips a JSON document through the parser and canonical dump.
std::string canonical_json(const std::string& text);

/// Fixed 12-significant-digit rendering used in human output.
std::string format_12g(double value);

}  // namespace exclusion
