#include "dmlab/experiment.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "dmlab/everett.hpp"
#include "dmlab/presets.hpp"
#include "dmlab/rng.hpp"
#include "dmlab/threads.hpp"
#include "dmlab/typicality.hpp"

namespace dmlab {

using nlohmann::json;

const char* kindName(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kBohmEquivalence: return "bohm-equivalence";
    case ExperimentKind::kGrwEquivalence: return "grw-equivalence";
    case ExperimentKind::kMeasurementDemo: return "measurement-demo";
    case ExperimentKind::kTypicality: return "typicality";
    case ExperimentKind::kLindbladDivergence: return "lindblad-divergence";
    case ExperimentKind::kEquivariance: return "equivariance";
  }
  return "unknown";
}

std::optional<ExperimentKind> kindFromName(const std::string& name) {
  for (ExperimentKind k : allExperimentKinds())
    if (name == kindName(k)) return k;
  return std::nullopt;
}

std::vector<ExperimentKind> allExperimentKinds() {
  return {ExperimentKind::kBohmEquivalence, ExperimentKind::kGrwEquivalence,
          ExperimentKind::kMeasurementDemo, ExperimentKind::kTypicality,
          ExperimentKind::kLindbladDivergence, ExperimentKind::kEquivariance};
}

const std::map<ExperimentKind, std::string>& experimentClaims() {
  static const std::map<ExperimentKind, std::string> claims = {
      {ExperimentKind::kBohmEquivalence,
       "kernel-guided trajectories and branch-sampled pure-state trajectories "
       "share position statistics at all times"},
      {ExperimentKind::kGrwEquivalence,
       "collapse histories started from a mixture and from branch draws of "
       "the same mixture share mass-density and flash statistics"},
      {ExperimentKind::kMeasurementDemo,
       "a measurement drives the conditional subsystem state from mixed to "
       "pure with the Born frequencies, while the pure-state account keeps a "
       "pure conditional state and the same outcome statistics"},
      {ExperimentKind::kTypicality,
       "reduced states of typical constrained pure states are locally "
       "indistinguishable from the reduction of the normalized projection"},
      {ExperimentKind::kLindbladDivergence,
       "open-system (dephasing) kernel dynamics shifts the position "
       "statistics away from the closed-dynamics prediction"},
      {ExperimentKind::kEquivariance,
       "the trajectory flow transports the kernel-diagonal distribution into "
       "itself"},
  };
  return claims;
}

ExperimentSpec ExperimentSpec::fromJson(const json& doc) {
  ExperimentSpec spec;
  if (!doc.is_object()) throw ConfigError("spec: document must be an object");
  if (!doc.contains("kind") || !doc["kind"].is_string())
    throw ConfigError("spec: missing experiment kind");
  auto kind = kindFromName(doc["kind"].get<std::string>());
  if (!kind)
    throw ConfigError("spec: unknown experiment kind '" +
                      doc["kind"].get<std::string>() + "'");
  spec.kind = *kind;
  if (!doc.contains("seed") || !doc["seed"].is_number_integer() ||
      (doc["seed"].is_number_integer() && !doc["seed"].is_number_unsigned() &&
       doc["seed"].get<std::int64_t>() < 0))
    throw ConfigError("spec: a nonnegative seed is mandatory (no wall-clock "
                      "seeding)");
  spec.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("scenario")) {
    if (!doc["scenario"].is_object())
      throw ConfigError("spec: scenario must be an object");
    spec.scenario = doc["scenario"];
  } else {
    spec.scenario = json::object();
  }
  if (doc.contains("out")) spec.outPath = doc["out"].get<std::string>();
  if (doc.contains("format")) {
    spec.format = doc["format"].get<std::string>();
    if (spec.format != "csv" && spec.format != "json")
      throw ConfigError("spec: format must be csv or json");
  }
  if (doc.contains("strict")) spec.strict = doc["strict"].get<bool>();
  if (doc.contains("threads")) spec.threads = doc["threads"].get<int>();
  return spec;
}

json ExperimentSpec::toJson() const {
  return json{{"kind", kindName(kind)}, {"scenario", scenario},
              {"seed", seed},           {"out", outPath},
              {"format", format},       {"strict", strict},
              {"threads", threads}};
}

void ResultTable::addInfo(double time, const std::string& stat, double value,
                          std::int64_t n) {
  rows.push_back({time, stat, value, n, std::nullopt, Cmp::kLe, std::nullopt});
}

void ResultTable::addGated(double time, const std::string& stat, double value,
                           std::int64_t n, double tolerance, Cmp cmp) {
  bool pass = cmp == Cmp::kLe ? value <= tolerance : value >= tolerance;
  rows.push_back({time, stat, value, n, tolerance, cmp, pass});
}

bool ResultTable::allPass() const {
  for (const auto& r : rows)
    if (r.pass.has_value() && !*r.pass) return false;
  return true;
}

static std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string ResultTable::toCsv() const {
  std::string out;
  out += "# dmlab-result-v1\n";
  out += "# experiment=" + experiment + "\n";
  out += "# spec_hash=" + specHash + "\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%" PRIu64, seed);
  out += std::string("# seed=") + buf + "\n";
  out += "# version=" + version + "\n";
  out += "time,statistic,value,n,tolerance,pass\n";
  for (const auto& r : rows) {
    out += fmt17(r.time) + "," + r.statistic + "," + fmt17(r.value) + ",";
    std::snprintf(buf, sizeof(buf), "%" PRId64, r.n);
    out += buf;
    out += ",";
    if (r.tolerance) out += fmt17(*r.tolerance);
    out += ",";
    if (r.pass) out += *r.pass ? "1" : "0";
    out += "\n";
  }
  return out;
}

json ResultTable::toJson() const {
  json rowsJson = json::array();
  for (const auto& r : rows) {
    json row{{"time", r.time},
             {"statistic", r.statistic},
             {"value", r.value},
             {"n", r.n}};
    if (r.tolerance) {
      row["tolerance"] = *r.tolerance;
      row["cmp"] = r.cmp == Cmp::kLe ? "le" : "ge";
    }
    if (r.pass) row["pass"] = *r.pass;
    rowsJson.push_back(row);
  }
  json doc{{"experiment", experiment},
           {"spec_hash", specHash},
           {"seed", seed},
           {"version", version},
           {"rows", rowsJson},
           {"all_pass", allPass()}};
  if (!auxiliary.is_null()) doc["auxiliary"] = auxiliary;
  return doc;
}

std::string specHash(const ExperimentSpec& spec) {
  // Only the experiment-identifying fields enter the hash; execution knobs
  // (threads, output path, format) must not change the result bytes.
  json canonicalDoc{{"kind", kindName(spec.kind)},
                    {"scenario", spec.scenario},
                    {"seed", spec.seed}};
  std::string canonical = canonicalDoc.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

// ---------------------------------------------------------------------------

namespace {

std::int64_t scenarioInt(const json& scenario, const char* key,
                         std::int64_t fallback) {
  if (!scenario.contains(key)) return fallback;
  return scenario[key].get<std::int64_t>();
}

double scenarioDouble(const json& scenario, const char* key, double fallback) {
  if (!scenario.contains(key)) return fallback;
  return scenario[key].get<double>();
}

std::string scenarioString(const json& scenario, const char* key,
                           const std::string& fallback) {
  if (!scenario.contains(key)) return fallback;
  return scenario[key].get<std::string>();
}

BohmScenario resolveBohmScenario(const std::string& preset) {
  if (preset == "free-packet") return makeFreePacketScenario();
  if (preset == "double-well") return makeDoubleWellScenario();
  if (preset == "sec52-momentum-mixture") return makeSec52Scenario().bohm;
  throw ConfigError("unknown scenario preset '" + preset + "'");
}

void runEquivariance(const ExperimentSpec& spec, ResultTable& table) {
  std::string preset =
      scenarioString(spec.scenario, "preset", "free-packet");
  BohmScenario sc = resolveBohmScenario(preset);
  std::int64_t n = scenarioInt(spec.scenario, "n", 10000);
  double tol = scenarioDouble(spec.scenario, "tolerance", 0.05);

  MixtureFieldProvider provider(*sc.space, sc.metric, sc.truthBranches, 0.0,
                                sc.dt / 8.0);
  TrajectoryEnsemble ensemble = sampleInitial(
      provider.cellProbabilities(0), *sc.space, n, deriveSeed(spec.seed, 1));

  IntegrateOptions opt;
  opt.strict = spec.strict;
  opt.threads = spec.threads;
  IntegrationReport rep;
  long prev = 0;
  for (double t : sc.sampleTimes) {
    long target = std::lround(t / sc.dt);
    ensemble = advanceEnsemble(ensemble, provider, target - prev, opt, &rep);
    prev = target;
    double tv = equivarianceCheck(
        ensemble, provider.cellProbabilities(8 * target), *sc.space,
        sc.binning);
    table.addGated(ensemble.time, "tv", tv, n, tol, Cmp::kLe);
  }
  double flagged =
      static_cast<double>(n - ensemble.activeCount()) / static_cast<double>(n);
  table.addGated(ensemble.time, "flagged_fraction", flagged, n, 0.01, Cmp::kLe);
}

void runBohmEquivalence(const ExperimentSpec& spec, ResultTable& table) {
  Sec52Scenario sc = makeSec52Scenario();
  std::int64_t n = scenarioInt(spec.scenario, "n", 10000);
  double tvTol = scenarioDouble(spec.scenario, "tv_tolerance", 0.05);
  double ksTol = scenarioDouble(spec.scenario, "ks_p_threshold", 0.01);
  IntegrateOptions opt;
  opt.strict = spec.strict;
  opt.threads = spec.threads;

  EquivalenceReport rep = equivalenceExperiment(
      *sc.bohm.space, sc.bohm.metric, sc.bohm.truthBranches,
      sc.bohm.sampledBranches, sc.bohm.branchWeights, sc.bohm.sampleTimes,
      sc.bohm.dt, n, deriveSeed(spec.seed, 2), sc.bohm.binning, opt);
  for (std::size_t j = 0; j < rep.times.size(); ++j) {
    table.addGated(rep.times[j], "tv_between_theories", rep.tvBetweenArms[j], n,
                   tvTol, Cmp::kLe);
    table.addGated(rep.times[j], "ks_p", rep.ks[j].pValue, n, ksTol, Cmp::kGe);
    table.addInfo(rep.times[j], "tv_kernel_vs_exact", rep.tvKernelArm[j], n);
    table.addInfo(rep.times[j], "tv_branches_vs_exact", rep.tvEnsembleArm[j],
                  n);
  }
  table.addGated(rep.times.back(), "flagged_fraction",
                 std::max(rep.flaggedFractionA, rep.flaggedFractionB), n, 0.01,
                 Cmp::kLe);

  // Negative control: branch arm guided by the wrong mixture weights.
  EquivalenceReport control = equivalenceExperiment(
      *sc.bohm.space, sc.bohm.metric, sc.bohm.truthBranches,
      sc.bohm.sampledBranches, {0.9, 0.1}, {sc.bohm.sampleTimes.back()},
      sc.bohm.dt, n, deriveSeed(spec.seed, 3), sc.bohm.binning, opt);
  table.addGated(control.times.back(), "wrong_mixture_tv",
                 control.tvBetweenArms.back(), n, 0.2, Cmp::kGe);
}

void runMeasurementDemo(const ExperimentSpec& spec, ResultTable& table) {
  DemoParams params;
  params.runs = scenarioInt(spec.scenario, "n", 1000);
  params.seed = spec.seed;
  params.threads = spec.threads;
  DemoReport rep = measurementDemo(params);
  double t2 = params.measurementTime;
  std::int64_t n = params.runs;

  table.addGated(t2, "freq_minus_dev", std::abs(rep.kernelFreqMinus - 0.5), n,
                 0.05, Cmp::kLe);
  table.addGated(0.0, "pre_purity_dev", rep.maxPreDeviation, n, 1e-6, Cmp::kLe);
  table.addGated(t2, "min_post_purity", rep.minPostPurity, n, 0.99, Cmp::kGe);
  table.addGated(t2, "theory_freq_gap",
                 std::abs(rep.kernelFreqMinus - rep.pureFreqMinus), n,
                 2.0 / std::sqrt(static_cast<double>(n)), Cmp::kLe);
  table.addGated(t2, "flagged_fraction",
                 static_cast<double>(rep.flaggedCount) / n, n, 0.01, Cmp::kLe);
  table.addInfo(t2, "pointer_overlap_mass", rep.pointerOverlapMass, n);
  table.addInfo(t2, "mean_jitter_sensitivity", rep.meanJitterSensitivity, n);

  json runs = json::array();
  for (const auto& r : rep.kernelRuns)
    runs.push_back(json{{"pre_purity", r.prePurity},
                        {"post_purity", r.postPurity},
                        {"outcome", r.outcome},
                        {"flagged", r.flagged}});
  json pureRuns = json::array();
  for (const auto& r : rep.pureRuns)
    pureRuns.push_back(json{{"pre_purity", r.prePurity},
                            {"post_purity", r.postPurity},
                            {"outcome", r.outcome},
                            {"flagged", r.flagged}});
  table.auxiliary =
      json{{"kernel_runs", runs},
           {"pure_runs", pureRuns},
           {"aggregates",
            json{{"kernel_freq_minus", rep.kernelFreqMinus},
                 {"pure_freq_minus", rep.pureFreqMinus},
                 {"min_post_purity", rep.minPostPurity},
                 {"max_pre_deviation", rep.maxPreDeviation},
                 {"flagged", rep.flaggedCount},
                 {"pointer_overlap_mass", rep.pointerOverlapMass}}}};
}

void runTypicality(const ExperimentSpec& spec, ResultTable& table) {
  std::int64_t dimS = scenarioInt(spec.scenario, "dim_s", 4);
  std::vector<std::int64_t> dimEs;
  if (spec.scenario.contains("dim_es"))
    for (const auto& v : spec.scenario["dim_es"])
      dimEs.push_back(v.get<std::int64_t>());
  else
    dimEs = {16, 64, 256};
  std::int64_t samples = scenarioInt(spec.scenario, "samples", 200);
  std::string ruleName = scenarioString(spec.scenario, "rule", "full");
  SubspaceRule rule = SubspaceRule::kFullSpace;
  if (ruleName == "random") rule = SubspaceRule::kRandomSubspace;
  else if (ruleName == "energy-shell") rule = SubspaceRule::kEnergyShell;
  else if (ruleName != "full")
    throw ConfigError("typicality: unknown subspace rule '" + ruleName + "'");

  auto rows = typicalityExperiment(dimS, dimEs, rule, samples,
                                   deriveSeed(spec.seed, 4), spec.threads);
  bool monotone = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    table.addInfo(0.0, "mean_D[d_E=" + std::to_string(rows[i].dimE) + "]",
                  rows[i].meanD, samples);
    if (i > 0 && rows[i].meanD >= rows[i - 1].meanD) monotone = false;
  }
  table.addGated(0.0, "mean_D_strictly_decreasing", monotone ? 1.0 : 0.0,
                 samples, 1.0, Cmp::kGe);

  // Monte Carlo convergence of the Haar average toward the normalized
  // projection: log-log slope against -1/2.
  std::int64_t slopeDim = scenarioInt(spec.scenario, "slope_subspace_dim", 8);
  std::vector<std::int64_t> counts = {50, 200, 800, 3200, 12800};
  SubspaceConstraint slopeConstraint =
      SubspaceConstraint::fullSpace(slopeDim, 1);
  std::vector<double> distances =
      haarAverageConvergence(slopeConstraint, counts, deriveSeed(spec.seed, 5));
  std::vector<double> xs(counts.begin(), counts.end());
  double slope = fitLogLogSlope(xs, distances);
  table.addGated(0.0, "haar_average_slope_dev", std::abs(slope + 0.5),
                 counts.back(), 0.15, Cmp::kLe);
  table.addInfo(0.0, "haar_average_slope", slope, counts.back());

  table.auxiliary = json{{"table_csv", typicalityCsv(rows)}};
}

void runLindbladDivergence(const ExperimentSpec& spec, ResultTable& table) {
  double gamma = scenarioDouble(spec.scenario, "gamma", 1.0);
  std::int64_t n = scenarioInt(spec.scenario, "n", 10000);
  double threshold = scenarioDouble(spec.scenario, "threshold",
                                    kLindbladDivergenceThreshold);
  LindbladScenario open = makeLindbladDephasingScenario(gamma);
  LindbladScenario closed = makeLindbladDephasingScenario(0.0);
  const LatticeSpace& space = *open.space;
  IntegrateOptions opt;
  opt.strict = spec.strict;
  opt.threads = spec.threads;

  long steps = std::lround(open.tFinal / open.dt);
  double dtMicro = open.dt / 8.0;

  // Closed arm: unitary dynamics of the same packet.
  MixtureFieldProvider closedProvider(
      space, KineticMetric::standard(space),
      {{1.0,
        [ev = EvolvingPure(*closed.prop, closed.packet.amplitudes())](
            double t) { return ev.at(t); }}},
      0.0, dtMicro);
  TrajectoryEnsemble closedEnsemble =
      sampleInitial(closed.packet, space, n, deriveSeed(spec.seed, 6));
  closedEnsemble =
      advanceEnsemble(closedEnsemble, closedProvider, steps, opt, nullptr);

  // Open arm: GKLS-evolved kernel, same initial equilibrium ensemble law.
  LindbladFieldProvider openProvider(
      space, KineticMetric::standard(space), pureToDensity(open.packet),
      open.hamiltonian.matrix, open.spec, 0.0, dtMicro, 8 * steps);
  TrajectoryEnsemble openEnsemble =
      sampleInitial(open.packet, space, n, deriveSeed(spec.seed, 6));
  openEnsemble =
      advanceEnsemble(openEnsemble, openProvider, steps, opt, nullptr);

  RVec histClosed = binnedHistogram(closedEnsemble, space, closed.binning);
  RVec histOpen = binnedHistogram(openEnsemble, space, open.binning);
  double tv = totalVariation(histClosed, histOpen);
  table.addGated(open.tFinal, "divergence_tv", tv, n, threshold, Cmp::kGe);
  table.addInfo(open.tFinal, "tv_open_vs_kernel_diag",
                totalVariation(histOpen,
                               binCellProbabilities(
                                   openProvider.cellProbabilities(8 * steps),
                                   space, open.binning)),
                n);
  table.addInfo(open.tFinal, "tv_closed_vs_kernel_diag",
                totalVariation(histClosed,
                               binCellProbabilities(
                                   closedProvider.cellProbabilities(8 * steps),
                                   space, closed.binning)),
                n);
}

void runGrwEquivalence(const ExperimentSpec& spec, ResultTable& table) {
  GrwScenario sc = makeGrwDiagramScenario();
  std::int64_t histories = scenarioInt(spec.scenario, "n", 1000);
  double tol = scenarioDouble(spec.scenario, "tolerance", 0.05);
  const LatticeSpace& space = *sc.space;
  int m = space.pointsPerAxis();
  std::size_t nTimes = sc.sampleTimes.size();
  int threads = resolveThreadCount(spec.threads);

  struct HistoryStats {
    std::vector<RVec> fields;  // normalized mass density per sample time
    std::vector<double> centers;
    std::int64_t eventCount = 0;
  };

  auto runArm = [&](bool kernelArm, std::uint64_t armSeed) {
    std::vector<HistoryStats> stats(histories);
    parallelFor(histories, threads, [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t h = lo; h < hi; ++h) {
        std::uint64_t s = deriveSeed(armSeed, h);
        GrwHistory hist = [&] {
          if (kernelArm)
            return runGrwHistory(sc.mixture, *sc.prop, space, sc.params,
                                 sc.tFinal, sc.sampleTimes, s);
          std::mt19937_64 g(deriveSeed(s, 0xFF));
          RVec w(sc.decomposition.size());
          for (std::size_t b = 0; b < sc.decomposition.size(); ++b)
            w[b] = sc.decomposition[b].first;
          auto b = discreteSample(g, w);
          return runGrwHistory(sc.decomposition[b].second, *sc.prop, space,
                               sc.params, sc.tFinal, sc.sampleTimes, s);
        }();
        HistoryStats hs;
        double total = 0.0;
        for (int p = 0; p < space.particles(); ++p) total += space.mass(p);
        for (const auto& f : hist.series)
          hs.fields.push_back(f.values * f.spacing / total);
        for (const auto& ev : hist.events) hs.centers.push_back(ev.center);
        hs.eventCount = static_cast<std::int64_t>(hist.events.size());
        stats[h] = std::move(hs);
      }
    });
    return stats;
  };

  auto kernelStats = runArm(true, deriveSeed(spec.seed, 7));
  auto branchStats = runArm(false, deriveSeed(spec.seed, 8));

  auto meanField = [&](const std::vector<HistoryStats>& stats, std::size_t t) {
    RVec mean = RVec::Zero(m);
    for (const auto& hs : stats) mean += hs.fields[t];
    return RVec(mean / static_cast<double>(stats.size()));
  };
  // Flash centers are compared on a coarse 8-bin histogram: the event count
  // is N*lambda*T per history, far below the history count, so native cells
  // would be dominated by sampling noise.
  const int flashBins = 8;
  double flashWidth = space.length() / flashBins;
  auto centerHistogram = [&](const std::vector<HistoryStats>& stats) {
    RVec hist = RVec::Zero(flashBins);
    double count = 0.0;
    for (const auto& hs : stats)
      for (double c : hs.centers) {
        hist[std::min<int>(flashBins - 1,
                           static_cast<int>(space.wrap(c) / flashWidth))] +=
            1.0;
        count += 1.0;
      }
    if (count > 0.0) hist /= count;
    return hist;
  };

  for (std::size_t t = 0; t < nTimes; ++t) {
    double tv = totalVariation(meanField(kernelStats, t),
                               meanField(branchStats, t));
    table.addGated(sc.sampleTimes[t], "mass_density_tv", tv, histories, tol,
                   Cmp::kLe);
  }
  double flashTv =
      totalVariation(centerHistogram(kernelStats), centerHistogram(branchStats));
  table.addGated(sc.tFinal, "flash_tv", flashTv, histories, tol, Cmp::kLe);

  double meanKernel = 0.0, meanBranch = 0.0;
  for (const auto& hs : kernelStats) meanKernel += hs.eventCount;
  for (const auto& hs : branchStats) meanBranch += hs.eventCount;
  table.addInfo(sc.tFinal, "mean_events_kernel", meanKernel / histories,
                histories);
  table.addInfo(sc.tFinal, "mean_events_branch", meanBranch / histories,
                histories);
}

}  // namespace

ResultTable runExperiment(const ExperimentSpec& spec) {
  ResultTable table;
  table.experiment = kindName(spec.kind);
  table.specHash = specHash(spec);
  table.seed = spec.seed;
  table.version = kVersion;

  switch (spec.kind) {
    case ExperimentKind::kEquivariance:
      runEquivariance(spec, table);
      break;
    case ExperimentKind::kBohmEquivalence:
      runBohmEquivalence(spec, table);
      break;
    case ExperimentKind::kMeasurementDemo:
      runMeasurementDemo(spec, table);
      break;
    case ExperimentKind::kTypicality:
      runTypicality(spec, table);
      break;
    case ExperimentKind::kLindbladDivergence:
      runLindbladDivergence(spec, table);
      break;
    case ExperimentKind::kGrwEquivalence:
      runGrwEquivalence(spec, table);
      break;
  }
  return table;
}

std::vector<std::string> writeResult(const ResultTable& table,
                                     const ExperimentSpec& spec) {
  std::vector<std::string> written;
  if (spec.outPath.empty()) return written;
  if (spec.format == "json") {
    std::ofstream out(spec.outPath, std::ios::binary);
    if (!out) throw ConfigError("cannot open output path " + spec.outPath);
    out << table.toJson().dump(2) << "\n";
    written.push_back(spec.outPath);
  } else {
    std::ofstream out(spec.outPath, std::ios::binary);
    if (!out) throw ConfigError("cannot open output path " + spec.outPath);
    out << table.toCsv();
    written.push_back(spec.outPath);
    // The typicality auxiliary is exactly the statistics table written below.
    if (!table.auxiliary.is_null() &&
        spec.kind != ExperimentKind::kTypicality) {
      std::string auxPath = spec.outPath + ".aux.json";
      std::ofstream aux(auxPath, std::ios::binary);
      aux << table.auxiliary.dump(2) << "\n";
      written.push_back(auxPath);
    }
  }
  // The typicality statistics table ships in its own fixed schema.
  if (spec.kind == ExperimentKind::kTypicality &&
      table.auxiliary.contains("table_csv")) {
    std::string tablePath = spec.outPath + ".table.csv";
    std::ofstream t(tablePath, std::ios::binary);
    t << table.auxiliary["table_csv"].get<std::string>();
    written.push_back(tablePath);
  }
  return written;
}

}  // namespace dmlab
