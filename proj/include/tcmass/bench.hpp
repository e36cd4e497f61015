#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tcmass/checks.hpp"
#include "tcmass/geometry.hpp"
#include "tcmass/mma.hpp"
#include "tcmass/response.hpp"

namespace tcmass {

enum class Distribution { uniform, clustered };

std::string_view to_string(Distribution d);
Distribution parse_distribution(std::string_view text);

struct RunConfig {
  int dim = 3;
  IntVec dims{16, 16, 16};
  RealVec spacing{1.0, 1.0, 1.0};
  int order = 1;
  CoefficientKind kind = CoefficientKind::scalar;
  int ppc = 128;
  TileProfile profile = TileProfile::default_for_order(1);
  std::uint64_t seed = 1;
  int repeats = 1;
  int threads = 1;
  Distribution distribution = Distribution::uniform;
  SpeciesParams species;

  /// Throws std::invalid_argument when the configuration cannot run.
  void validate() const;
  Grid grid() const;
  double sigma() const { return species.sigma(grid().cell_volume()); }
};

/// Exactly `ppc` particles per cell, cell-major in linear cell order.
///
/// Cell c draws from CounterRng(seed, c): per particle, d fractional
/// coordinates, then the charge in [0.5, 1.5), then (tensorial only) omega
/// in [-1, 1]^3. `clustered` maps each fractional coordinate u to u/2 with
/// probability 3/4 (one extra draw per axis), piling particles into the
/// lower-left support group.
ParticleSet synth(const RunConfig& config);

struct Timing {
  std::vector<double> samples_ms;
  double min_ms = 0.0;
  double median_ms = 0.0;
};

struct InvariantCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct RunReport {
  RunConfig config;
  std::size_t particles = 0;
  double sigma = 0.0;
  double sort_ms = 0.0;
  Timing naive;
  Timing tiled;
  std::optional<double> speedup;  ///< only when every check passed
  ErrorMetrics tiled_error;       ///< tiled vs the FP64 oracle
  ErrorMetrics naive_error;       ///< naive (profile arithmetic) vs the FP64 oracle
  std::vector<InvariantCheck> checks;
  bool checks_passed = false;
  std::string failure;  ///< set when the run itself threw
};

/// Synthesizes, sorts, times naive and tiled assembly, and checks invariants.
/// Throws std::invalid_argument for an infeasible configuration.
RunReport run(const RunConfig& config);

struct SweepRow {
  std::string axis;
  RunReport report;
};

/// One run per ppc value; failures become rows with `failure` set.
std::vector<SweepRow> sweep_ppc(const RunConfig& base, const std::vector<int>& ppcs);
/// One run per grid shape (entries beyond base.dim are ignored).
std::vector<SweepRow> sweep_grid(const RunConfig& base, const std::vector<IntVec>& grids);

inline constexpr std::string_view kCsvHeader =
    "axis,naive_ms,tiled_ms,speedup,max_rel_err,checks_passed";

std::string to_csv(const std::vector<SweepRow>& rows);
nlohmann::json to_json(const RunConfig& config);
nlohmann::json to_json(const RunReport& report);
nlohmann::json to_json(const std::vector<SweepRow>& rows);

bool all_checks_passed(const std::vector<SweepRow>& rows);

/// "16x16x16" or "16,16,16" -> (dim, dims).
std::pair<int, IntVec> parse_dims(std::string_view text);
std::string format_dims(int dim, const IntVec& dims);

}  // namespace tcmass
