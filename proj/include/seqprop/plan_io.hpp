// Plan files: a versioned JSON document carrying the design parameters,
// the materialized schedule and continuation sets, and provenance (tool
// version, tuning trace, verification verdict). Serialization is stable:
// loading a file and saving it again reproduces the bytes.
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "seqprop/rules.hpp"

namespace seqprop {

struct TuningRecord {
    double zeta_star = 0.0;
    double rel_tol = 0.0;
    std::uint64_t trace_hash = 0;  // FNV-1a of the probe sequence
};

struct VerificationRecord {
    std::string verdict;
    std::string method;
    double eta = 0.0;
    std::string note;
};

struct Provenance {
    std::string tool;
    std::optional<TuningRecord> tuning;
    std::optional<VerificationRecord> verification;
};

// Current tool identifier written into new files.
std::string tool_id();

struct LoadedPlan {
    SamplingPlan plan;
    Provenance provenance;
};

std::string serialize_plan(const SamplingPlan& plan, const Provenance& prov);
LoadedPlan parse_plan(const std::string& json_text);

LoadedPlan load_plan(const std::string& path);

// Writes atomically enough for cooperating processes: the file is held
// under an exclusive advisory lock while its contents are replaced.
void save_plan(const std::string& path, const SamplingPlan& plan, const Provenance& prov);

}  // namespace seqprop
