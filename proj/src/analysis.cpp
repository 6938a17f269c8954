#include "parrondo/analysis.hpp"

#include "parrondo/errors.hpp"
#include "parrondo/reduction.hpp"
#include "parrondo/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace parrondo {

namespace {

struct PatternColumn {
  int r;
  int s;
};

// Columns 2..5 of the table.
constexpr PatternColumn kPatternColumns[] = {{1, 1}, {1, 2}, {2, 1}, {2, 2}};

SymmetryGroup table_group(const CoinProbabilities& p) {
  return p[1] == p[2] ? SymmetryGroup::dihedral : SymmetryGroup::cyclic;
}

double combined_mean(const ChainTriple& a, const ChainTriple& b,
                     const SweepSchedule& schedule, const SolverOptions& opts) {
  if (schedule.kind == SweepSchedule::Kind::mixture) {
    return moments(mix(schedule.gamma, a, b), false, opts).mu;
  }
  return pattern_mean(a, b, schedule.r, schedule.s, opts);
}

// Orbits of distinct closed classes can merge in the quotient, so an
// irreducible reduced chain does not imply an irreducible full one.
void require_full_space_structure(const SpatialParams& params, Game a_game,
                                  const SweepSchedule& schedule) {
  const ChainTriple a = build_game(a_game, params);
  const ChainTriple b = build_game(Game::B, params);
  const auto rb = ergodicity_check(b);
  if (rb.closed_classes != 1) {
    throw StructuralError("game B has " + std::to_string(rb.closed_classes) +
                          " closed classes on the full state space");
  }
  if (schedule.kind == SweepSchedule::Kind::mixture) {
    const auto rm = ergodicity_check(mix(schedule.gamma, a, b));
    if (rm.closed_classes != 1) {
      throw StructuralError("mixture has " + std::to_string(rm.closed_classes) +
                            " closed classes on the full state space");
    }
    return;
  }
  std::vector<const SparseMatrix*> factors;
  for (int i = 0; i < schedule.r; ++i) factors.push_back(&a.p());
  for (int i = 0; i < schedule.s; ++i) factors.push_back(&b.p());
  if (!ergodicity_check(factors).ergodic()) {
    throw StructuralError("pattern product is not ergodic on the full state space");
  }
}

}  // namespace

std::string to_string(Family f) { return f == Family::toral ? "toral" : "xie"; }

Family parse_family(const std::string& name) {
  if (name == "toral") return Family::toral;
  if (name == "xie") return Family::xie;
  throw UsageError("unknown family '" + name + "' (expected toral or xie)");
}

Game a_side_game(Family f) { return f == Family::toral ? Game::A : Game::A_prime; }

unsigned worker_count(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PARRONDO_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  unsigned workers) {
  const unsigned w = static_cast<unsigned>(
      std::min<std::size_t>(worker_count(workers), std::max<std::size_t>(count, 1)));
  if (w <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        stop.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (unsigned t = 0; t < w; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string format_sig6(double value) {
  if (!std::isfinite(value)) return value != value ? "nan" : (value > 0 ? "inf" : "-inf");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.5e", value);
  // buf = [-]d.ddddde[+-]xx
  std::string s(buf);
  const bool negative = s[0] == '-';
  if (negative) s.erase(0, 1);
  const auto epos = s.find('e');
  const int exponent = std::stoi(s.substr(epos + 1));
  std::string digits = s.substr(0, 1) + s.substr(2, epos - 2);  // six digits
  if (digits == "000000") return "0.00000";
  std::string out;
  if (exponent < 0) {
    out = "0." + std::string(static_cast<std::size_t>(-exponent - 1), '0') + digits;
  } else if (exponent >= 5) {
    out = digits + std::string(static_cast<std::size_t>(exponent - 5), '0');
  } else {
    out = digits.substr(0, static_cast<std::size_t>(exponent) + 1) + "." +
          digits.substr(static_cast<std::size_t>(exponent) + 1);
    if (out.back() == '.') out.pop_back();
  }
  return negative ? "-" + out : out;
}

ErgReport erg_condition(const CoinProbabilities& p, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw UsageError("mixing weight must lie in [0,1]");
  }
  const double g = gamma / 2.0;
  const double h = 1.0 - gamma;
  auto term = [&](double a, double b) { return std::abs(g + h * (a - b)); };
  ErgReport out;
  out.lhs = std::max(term(p[0], p[1]), term(p[2], p[3])) +
            std::max(term(p[0], p[2]), term(p[1], p[3]));
  out.holds = out.lhs < 1.0;
  return out;
}

VolumeEstimate condition_volume(double gamma, VolumeDims dims,
                                std::uint64_t samples, std::uint64_t seed) {
  if (samples < 100'000) throw UsageError("volume estimates need >= 10^5 samples");
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw UsageError("mixing weight must lie in [0,1]");
  }
  TrajectoryRng rng(seed, 0);
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    CoinProbabilities p{};
    if (dims == VolumeDims::four_param) {
      for (double& v : p) v = rng.uniform();
    } else {
      p[0] = rng.uniform();
      p[1] = p[2] = rng.uniform();
      p[3] = rng.uniform();
    }
    if (erg_condition(p, gamma).holds) ++hits;
  }
  VolumeEstimate out;
  out.samples = samples;
  out.seed = seed;
  out.volume = static_cast<double>(hits) / static_cast<double>(samples);
  out.ci95 = 1.96 * std::sqrt(out.volume * (1.0 - out.volume) /
                              static_cast<double>(samples));
  return out;
}

std::vector<std::string> table_columns(Family f) {
  if (f == Family::toral) return {"B", "1/2(A+B)", "AB", "ABB", "AAB", "AABB"};
  return {"B", "1/2(A'+B)", "A'B", "A'BB", "A'A'B", "A'A'BB"};
}

ConvergenceTable convergence_table(const CoinProbabilities& p,
                                   std::span<const int> players, Family family,
                                   const TableOptions& opts) {
  ConvergenceTable table;
  table.family = family;
  table.p = p;
  table.columns = table_columns(family);
  const std::size_t ncols = table.columns.size();
  table.rows.resize(players.size());
  for (std::size_t i = 0; i < players.size(); ++i) {
    table.rows[i].players = players[i];
    table.rows[i].cells.resize(ncols);
  }

  for (std::size_t i = 0; i < players.size(); ++i) {
    ConvergenceRow& row = table.rows[i];
    std::optional<ChainTriple> a, b;
    try {
      const SpatialParams params{players[i], p};
      params.validate();
      const QuotientMap& q = cached_orbits(players[i], table_group(p));
      a.emplace(build_game_lumped(a_side_game(family), params, q));
      b.emplace(build_game_lumped(Game::B, params, q));
    } catch (const std::exception& e) {
      for (auto& cell : row.cells) cell.error = e.what();
      continue;
    }
    parallel_for(
        ncols,
        [&](std::size_t c) {
          TableCell& cell = row.cells[c];
          try {
            if (c == 0) {
              cell.value = moments(*b, false, opts.solver).mu;
            } else if (c == 1) {
              cell.value = moments(mix(0.5, *a, *b), false, opts.solver).mu;
            } else {
              const PatternColumn pc = kPatternColumns[c - 2];
              cell.value = pattern_mean(*a, *b, pc.r, pc.s, opts.solver);
            }
          } catch (const std::exception& e) {
            cell.value.reset();
            cell.error = e.what();
          }
        },
        opts.workers);
  }
  return table;
}

StabilizationReport stabilization_report(
    std::span<const std::pair<int, double>> series) {
  std::vector<std::pair<int, double>> sorted(series.begin(), series.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<int> ns;
  for (const auto& [n, v] : sorted) {
    if (ns.empty() || ns.back() != n) ns.push_back(n);
  }
  if (ns.size() < 3) {
    throw UsageError("stabilization needs values for at least three N");
  }
  const double prev = sorted[sorted.size() - 2].second;
  const double last = sorted.back().second;
  StabilizationReport out;
  out.last_delta = last - prev;
  out.last_value = format_sig6(last);
  out.stabilized = format_sig6(prev) == out.last_value;
  return out;
}

StabilizationReport stabilization_report(const ConvergenceTable& table,
                                         const std::string& column) {
  const auto it = std::find(table.columns.begin(), table.columns.end(), column);
  if (it == table.columns.end()) {
    throw UsageError("no column '" + column + "' in the table");
  }
  const auto c = static_cast<std::size_t>(it - table.columns.begin());
  std::vector<std::pair<int, double>> series;
  for (const auto& row : table.rows) {
    if (row.cells[c].value) series.emplace_back(row.players, *row.cells[c].value);
  }
  return stabilization_report(series);
}

std::string to_string(RegionClass c) {
  switch (c) {
    case RegionClass::parrondo:
      return "parrondo";
    case RegionClass::anti_parrondo:
      return "anti_parrondo";
    case RegionClass::neither:
      return "neither";
  }
  return "neither";
}

RegionClass classify(double mu_b, double mu_combined, double zero_tol) {
  if (mu_b <= zero_tol && mu_combined > zero_tol) return RegionClass::parrondo;
  if (mu_b >= -zero_tol && mu_combined < -zero_tol) return RegionClass::anti_parrondo;
  return RegionClass::neither;
}

RegionPoint evaluate_region_node(int players, double p0, double p1, double p2,
                                 const SweepSchedule& schedule,
                                 const SweepOptions& opts) {
  RegionPoint pt;
  pt.p0 = p0;
  pt.p1 = p1;
  pt.p2 = p2;
  const SpatialParams params{players, {p0, p1, p1, p2}};
  params.validate();
  if (schedule.kind == SweepSchedule::Kind::pattern && (schedule.r < 1 || schedule.s < 1)) {
    throw UsageError("pattern lengths r, s must be >= 1");
  }
  const Game a_game = a_side_game(opts.family);
  try {
    if (!opts.full_space) require_full_space_structure(params, a_game, schedule);
    ChainTriple a = opts.full_space
                        ? build_game(a_game, params)
                        : build_game_lumped(a_game, params,
                                            cached_orbits(players, SymmetryGroup::dihedral));
    ChainTriple b = opts.full_space
                        ? build_game(Game::B, params)
                        : build_game_lumped(Game::B, params,
                                            cached_orbits(players, SymmetryGroup::dihedral));
    pt.mu_b = moments(b, false, opts.solver).mu;
    pt.mu_combined = combined_mean(a, b, schedule, opts.solver);
    pt.classification = classify(pt.mu_b, pt.mu_combined, opts.zero_tol);
  } catch (const StructuralError& e) {
    pt.flagged = true;
    pt.diagnostic = e.what();
  } catch (const SolverError& e) {
    pt.flagged = true;
    pt.diagnostic = e.what();
  }
  if (pt.flagged) {
    pt.mu_b = std::nan("");
    pt.mu_combined = std::nan("");
    pt.classification = RegionClass::neither;
  }
  return pt;
}

std::vector<RegionPoint> parrondo_region_sweep(int players, double grid_step,
                                               const SweepSchedule& schedule,
                                               const SweepOptions& opts) {
  if (!(grid_step > 0.0 && grid_step <= 1.0)) {
    throw UsageError("grid step must lie in (0,1]");
  }
  const double steps = std::round(1.0 / grid_step);
  if (std::abs(steps * grid_step - 1.0) > 1e-9) {
    throw UsageError("grid step must divide 1");
  }
  const auto k = static_cast<std::size_t>(steps);
  const std::size_t side = k + 1;
  std::vector<RegionPoint> out(side * side * side);
  // Warm the orbit cache before fanning out.
  if (!opts.full_space) (void)cached_orbits(players, SymmetryGroup::dihedral);
  auto coord = [&](std::size_t i) { return static_cast<double>(i) / steps; };
  parallel_for(
      out.size(),
      [&](std::size_t idx) {
        const std::size_t i0 = idx / (side * side);
        const std::size_t i2 = (idx / side) % side;
        const std::size_t i1 = idx % side;
        out[idx] = evaluate_region_node(players, coord(i0), coord(i1), coord(i2),
                                        schedule, opts);
      },
      opts.workers);
  return out;
}

std::string region_csv(std::span<const RegionPoint> points) {
  std::ostringstream os;
  os << "p0,p1,p2,mu_B,mu_combined,class\n";
  char buf[256];
  for (const auto& pt : points) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.17g,%.17g,%s\n", pt.p0,
                  pt.p1, pt.p2, pt.mu_b, pt.mu_combined,
                  to_string(pt.classification).c_str());
    os << buf;
  }
  return os.str();
}

}  // namespace parrondo
