#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "urnkit/branching.hpp"
#include "urnkit/harness.hpp"
#include "urnkit/policy.hpp"
#include "urnkit/spectral.hpp"
#include "urnkit/urn.hpp"

namespace urnkit {

using json = nlohmann::json;

// Double formatted with 17 significant digits (CSV convention).
std::string fmt17(double x);

// --- policies ---------------------------------------------------------
// {"kind": ..., "d": ..., kind-specific fields}. Violations are appended
// to `errors` with field names; returns nullptr if any were found.
PolicyPtr policy_from_json(const json& j, std::vector<std::string>& errors);
PolicyPtr policy_from_json(const json& j);  // throws ConfigError
json policy_to_json(const ReplacementPolicy& policy);

Matrix matrix_from_json(const json& j, const std::string& field, std::vector<std::string>& errors);
json matrix_to_json(const Matrix& m);

// --- spectral ---------------------------------------------------------
json profile_to_json(const SpectralProfile& p);

// --- experiments ------------------------------------------------------
// Parsed experiment document: the harness config plus the normalized echo
// of the input (defaults filled), ready to re-emit.
struct ExperimentDoc {
  ExperimentConfig config;
  json normalized;
};

// Parses and validates an experiment config, filling defaults
// (fallback_p uniform, checkpoints geometric, master_seed 0). Collects
// every violated invariant into ConfigError. The spectral profile is
// computed from the policy's limiting mean.
ExperimentDoc parse_experiment_config(const json& j);

json summary_to_json(const EnsembleSummary& s);
std::string summary_to_csv(const EnsembleSummary& s);

std::string trajectory_to_csv(const std::vector<TrajectorySnapshot>& snaps, int d,
                              bool with_diagnostics);

json embedding_report_to_json(const EmbeddingTestReport& r);
json atom_report_to_json(const AtomTestReport& r);
json rate_fit_to_json(const RateFit& f);
json divergence_report_to_json(const DivergenceReport& r);
json drift_verdict_to_json(const DriftVerdict& v);

}  // namespace urnkit
