#pragma once

// Experiment configuration: a JSON tree that round-trips losslessly and whose
// canonical dump is hashed into every artifact.

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "rwre/environment.hpp"
#include "rwre/lattice.hpp"

namespace rwre {

/// {"name": ..., law fields}. Names: uniform_drift, expl, trap_sym,
/// trap_transient, dirichlet, table_mixture; "uniform" and "table" are
/// accepted on input.
nlohmann::json law_to_json(const SiteLaw& law);
SiteLaw law_from_json(const nlohmann::json& j);

/// Direction used when ell is "auto": (1,..,1)/sqrt(d) for expl, the drift
/// axis for uniform_drift, the last axis for trap_transient, e_1 otherwise.
RealVec default_direction(const SiteLaw& law);

struct ExperimentConfig {
    std::string experiment;
    nlohmann::json law = nlohmann::json::object();
    std::optional<RealVec> ell;  // empty means auto
    std::uint64_t seed = 0;
    nlohmann::json params = nlohmann::json::object();
    std::string output;  // file or directory; empty writes to stdout

    SiteLaw site_law() const { return law_from_json(law); }
    RealVec direction() const;

    nlohmann::json to_json() const;
    /// Throws ParameterError when the seed is missing or a field is malformed.
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::string& path);

    /// 16 hex digits of FNV-1a over the canonical JSON dump, output path excluded.
    std::string hash() const;
};

/// "# rwre 1.0.0 schema=1 config=<hash>" for CSV files.
std::string csv_banner(const ExperimentConfig& cfg);

/// Report wrapper carrying tool version, config hash and the config itself.
nlohmann::json stamped(const ExperimentConfig& cfg, nlohmann::json body);

}  // namespace rwre
