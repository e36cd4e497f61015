#include "tcmass/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "tcmass/assembler.hpp"
#include "tcmass/oracle.hpp"
#include "tcmass/rng.hpp"
#include "tcmass/shape.hpp"

namespace tcmass {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

Timing summarize(std::vector<double> samples) {
  Timing t;
  t.samples_ms = samples;
  std::sort(samples.begin(), samples.end());
  t.min_ms = samples.front();
  const std::size_t mid = samples.size() / 2;
  t.median_ms = samples.size() % 2 ? samples[mid] : 0.5 * (samples[mid - 1] + samples[mid]);
  return t;
}

InvariantCheck at_most(std::string name, double value, double threshold) {
  return {std::move(name), value, threshold, value <= threshold};
}

InvariantCheck at_least(std::string name, double value, double threshold) {
  return {std::move(name), value, threshold, value >= threshold};
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string_view to_string(Distribution d) {
  return d == Distribution::uniform ? "uniform" : "clustered";
}

Distribution parse_distribution(std::string_view text) {
  if (text == "uniform") return Distribution::uniform;
  if (text == "clustered") return Distribution::clustered;
  throw std::invalid_argument("unknown distribution: " + std::string(text));
}

void RunConfig::validate() const {
  if (ppc < 0) throw std::invalid_argument("ppc must be non-negative");
  if (repeats < 1) throw std::invalid_argument("repeats must be at least 1");
  if (threads < 1) throw std::invalid_argument("threads must be at least 1");
  const Interpolation interp(order, dim);
  grid().require_order(order);
  (void)interp;
}

Grid RunConfig::grid() const { return Grid(dim, dims, spacing); }

ParticleSet synth(const RunConfig& config) {
  config.validate();
  const Grid grid = config.grid();
  ParticleSet set;
  set.sigma = config.sigma();
  const auto total = static_cast<std::size_t>(grid.num_cells()) * config.ppc;
  set.positions.reserve(total);
  set.charges.reserve(total);
  if (config.kind == CoefficientKind::tensorial) set.omegas.reserve(total);

  for (std::int64_t c = 0; c < grid.num_cells(); ++c) {
    const IntVec cell = grid.unravel(c);
    CounterRng rng(config.seed, static_cast<std::uint64_t>(c));
    for (int k = 0; k < config.ppc; ++k) {
      RealVec x{0.0, 0.0, 0.0};
      for (int mu = 0; mu < grid.dim(); ++mu) {
        double u = rng.uniform();
        if (config.distribution == Distribution::clustered && rng.uniform() < 0.75) u *= 0.5;
        double pos = (cell[mu] + u) * grid.spacing()[mu];
        // Keep the particle in its cell despite rounding of (cell + u) * dx.
        while (std::floor(pos / grid.spacing()[mu]) > cell[mu]) pos = std::nextafter(pos, 0.0);
        x[mu] = pos;
      }
      set.positions.push_back(x);
      set.charges.push_back(rng.uniform(0.5, 1.5));
      if (config.kind == CoefficientKind::tensorial) {
        set.omegas.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                              rng.uniform(-1.0, 1.0)});
      }
    }
  }
  return set;
}

RunReport run(const RunConfig& config) {
  config.validate();
  RunReport report;
  report.config = config;

  const Grid grid = config.grid();
  const Interpolation interp(config.order, config.dim);
  const ParticleSet set = synth(config);
  report.particles = set.size();
  report.sigma = set.sigma;

  auto start = Clock::now();
  const SortedParticles sorted = sort_by_cell(set, grid);
  report.sort_ms = elapsed_ms(start);

  const bool fp64 = config.profile.policy.accumulate() == AccumulateFormat::fp64;
  const Arithmetic arithmetic = fp64 ? Arithmetic::fp64 : Arithmetic::fp32;

  std::vector<double> naive_ms;
  std::optional<StencilMatrix> naive;
  for (int r = 0; r < config.repeats; ++r) {
    start = Clock::now();
    naive.emplace(assemble_naive(grid, sorted.particles, interp, config.kind, set.sigma,
                                 arithmetic));
    naive_ms.push_back(elapsed_ms(start));
  }
  report.naive = summarize(naive_ms);

  AssemblyOptions options;
  options.profile = config.profile;
  options.threads = config.threads;
  std::vector<double> tiled_ms;
  std::optional<StencilMatrix> tiled;
  for (int r = 0; r < config.repeats; ++r) {
    start = Clock::now();
    tiled.emplace(assemble(grid, sorted, interp, config.kind, options));
    tiled_ms.push_back(elapsed_ms(start));
  }
  report.tiled = summarize(tiled_ms);

  const StencilMatrix oracle =
      fp64 ? *naive
           : assemble_naive(grid, sorted.particles, interp, config.kind, set.sigma);
  const StencilMatrix magnitude =
      assemble_magnitude(grid, sorted.particles, interp, config.kind, set.sigma);
  report.tiled_error = compare(*tiled, oracle, &magnitude);
  report.naive_error = compare(*naive, oracle, &magnitude);

  const PartitionOfUnity pou = check_partition_of_unity(grid, sorted.particles, interp, 1000);
  report.checks.push_back(at_most("partition_of_unity", pou.max_sum_defect, 1e-14));
  report.checks.push_back(at_least("min_weight", pou.min_weight, 0.0));
  const std::int64_t stride = std::max<std::int64_t>(1, grid.num_nodes() / 4096);
  report.checks.push_back(at_most("symmetry", spatial_symmetry_defect(*tiled, stride), 0.0));
  report.checks.push_back(at_most(
      "conservation", conservation_defect(*tiled, sorted.particles, config.kind, set.sigma),
      fp64 ? 1e-12 : 5e-4));
  if (fp64) {
    report.checks.push_back(at_most("oracle_max_rel", report.tiled_error.max_rel, 1e-13));
  } else {
    report.checks.push_back(
        at_most("oracle_frobenius_rel", report.tiled_error.frobenius_rel, 5e-4));
  }

  report.checks_passed = std::all_of(report.checks.begin(), report.checks.end(),
                                     [](const InvariantCheck& c) { return c.passed; });
  if (report.checks_passed && report.tiled.median_ms > 0.0) {
    report.speedup = report.naive.median_ms / report.tiled.median_ms;
  }
  return report;
}

namespace {

SweepRow run_row(std::string axis, const RunConfig& config) {
  SweepRow row;
  row.axis = std::move(axis);
  try {
    row.report = run(config);
  } catch (const std::exception& e) {
    row.report = RunReport{};
    row.report.config = config;
    row.report.failure = e.what();
  }
  return row;
}

}  // namespace

std::vector<SweepRow> sweep_ppc(const RunConfig& base, const std::vector<int>& ppcs) {
  if (ppcs.empty()) throw std::invalid_argument("sweep axis is empty");
  std::vector<SweepRow> rows;
  for (int ppc : ppcs) {
    RunConfig c = base;
    c.ppc = ppc;
    rows.push_back(run_row(std::to_string(ppc), c));
  }
  return rows;
}

std::vector<SweepRow> sweep_grid(const RunConfig& base, const std::vector<IntVec>& grids) {
  if (grids.empty()) throw std::invalid_argument("sweep axis is empty");
  std::vector<SweepRow> rows;
  for (const IntVec& dims : grids) {
    RunConfig c = base;
    c.dims = dims;
    rows.push_back(run_row(format_dims(c.dim, dims), c));
  }
  return rows;
}

std::string to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& row : rows) {
    const RunReport& r = row.report;
    out << row.axis << ',';
    if (!r.failure.empty()) {
      out << ",,,,false\n";
      continue;
    }
    out << format_double(r.naive.median_ms) << ',' << format_double(r.tiled.median_ms) << ','
        << (r.speedup ? format_double(*r.speedup) : std::string()) << ','
        << format_double(r.tiled_error.max_rel) << ',' << (r.checks_passed ? "true" : "false")
        << '\n';
  }
  return out.str();
}

nlohmann::json to_json(const RunConfig& c) {
  return {{"dims", std::vector<int>(c.dims.begin(), c.dims.begin() + c.dim)},
          {"spacing", std::vector<double>(c.spacing.begin(), c.spacing.begin() + c.dim)},
          {"order", c.order},
          {"kind", std::string(to_string(c.kind))},
          {"ppc", c.ppc},
          {"profile", c.profile.name()},
          {"seed", c.seed},
          {"repeats", c.repeats},
          {"threads", c.threads},
          {"distribution", std::string(to_string(c.distribution))}};
}

nlohmann::json to_json(const RunReport& r) {
  nlohmann::json j;
  j["config"] = to_json(r.config);
  if (!r.failure.empty()) {
    j["failure"] = r.failure;
    j["checks_passed"] = false;
    return j;
  }
  auto timing = [](const Timing& t) {
    return nlohmann::json{{"samples_ms", t.samples_ms}, {"min_ms", t.min_ms},
                          {"median_ms", t.median_ms}};
  };
  auto errors = [](const ErrorMetrics& e) {
    return nlohmann::json{{"max_rel", e.max_rel}, {"frobenius_rel", e.frobenius_rel},
                          {"max_abs", e.max_abs}};
  };
  j["particles"] = r.particles;
  j["sigma"] = r.sigma;
  j["sort_ms"] = r.sort_ms;
  j["naive"] = timing(r.naive);
  j["tiled"] = timing(r.tiled);
  j["speedup"] = r.speedup ? nlohmann::json(*r.speedup) : nlohmann::json(nullptr);
  j["tiled_error"] = errors(r.tiled_error);
  j["naive_error"] = errors(r.naive_error);
  auto checks = nlohmann::json::array();
  for (const auto& c : r.checks) {
    checks.push_back(
        {{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"passed", c.passed}});
  }
  j["checks"] = checks;
  j["checks_passed"] = r.checks_passed;
  return j;
}

nlohmann::json to_json(const std::vector<SweepRow>& rows) {
  auto out = nlohmann::json::array();
  for (const auto& row : rows) {
    auto j = to_json(row.report);
    j["axis"] = row.axis;
    out.push_back(std::move(j));
  }
  return out;
}

bool all_checks_passed(const std::vector<SweepRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) {
    return r.report.failure.empty() && r.report.checks_passed;
  });
}

std::pair<int, IntVec> parse_dims(std::string_view text) {
  IntVec dims{1, 1, 1};
  int dim = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto next = text.find_first_of("x,", pos);
    const auto part = text.substr(pos, next == std::string_view::npos ? text.npos : next - pos);
    if (part.empty() || dim == kMaxDim) {
      throw std::invalid_argument("grid dims must look like 16x16x16");
    }
    int v = 0;
    for (char ch : part) {
      if (ch < '0' || ch > '9') throw std::invalid_argument("grid dims must be integers");
      v = v * 10 + (ch - '0');
    }
    dims[dim++] = v;
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return {dim, dims};
}

std::string format_dims(int dim, const IntVec& dims) {
  std::string s;
  for (int mu = 0; mu < dim; ++mu) {
    if (mu) s += 'x';
    s += std::to_string(dims[mu]);
  }
  return s;
}

}  // namespace tcmass
