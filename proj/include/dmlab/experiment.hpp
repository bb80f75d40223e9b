#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmlab/common.hpp"

namespace dmlab {

enum class ExperimentKind {
  kBohmEquivalence,
  kGrwEquivalence,
  kMeasurementDemo,
  kTypicality,
  kLindbladDivergence,
  kEquivariance,
};

const char* kindName(ExperimentKind kind);
std::optional<ExperimentKind> kindFromName(const std::string& name);
std::vector<ExperimentKind> allExperimentKinds();

// Each experiment kind states the claim it checks; the manifest test asserts
// the map is total.
const std::map<ExperimentKind, std::string>& experimentClaims();

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::kEquivariance;
  nlohmann::json scenario;  // preset name and overrides, kind-specific
  std::uint64_t seed = 0;
  std::string outPath;      // empty: no file written
  std::string format = "csv";
  bool strict = false;
  int threads = 0;          // 0 = auto (results invariant to the setting)

  // Parses a spec document; "kind" and "seed" are mandatory (no wall-clock
  // seeding), unknown kinds and presets are configuration errors.
  static ExperimentSpec fromJson(const nlohmann::json& doc);
  nlohmann::json toJson() const;
};

enum class Cmp { kLe, kGe };

struct ResultRow {
  double time = 0.0;
  std::string statistic;
  double value = 0.0;
  std::int64_t n = 0;
  // Acceptance-tagged rows carry tolerance + direction; informational rows
  // carry neither.
  std::optional<double> tolerance;
  Cmp cmp = Cmp::kLe;
  std::optional<bool> pass;
};

struct ResultTable {
  std::string experiment;
  std::string specHash;
  std::uint64_t seed = 0;
  std::string version;
  std::vector<ResultRow> rows;
  nlohmann::json auxiliary;  // kind-specific side payload (may be null)

  void addInfo(double time, const std::string& stat, double value,
               std::int64_t n);
  void addGated(double time, const std::string& stat, double value,
                std::int64_t n, double tolerance, Cmp cmp);
  bool allPass() const;

  std::string toCsv() const;        // fixed column order, 17 significant digits
  nlohmann::json toJson() const;
};

// Deterministic 64-bit FNV-1a hash of the canonical spec serialization.
std::string specHash(const ExperimentSpec& spec);

// Runs the experiment; deterministic given (spec, seed). Does not write
// files.
ResultTable runExperiment(const ExperimentSpec& spec);

// Writes the result (and kind-specific side files) to spec.outPath in the
// requested format. Returns the list of paths written.
std::vector<std::string> writeResult(const ResultTable& table,
                                     const ExperimentSpec& spec);

}  // namespace dmlab
