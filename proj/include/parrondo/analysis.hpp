#pragma once

// Studies built on the chain solvers: the sufficient convergence condition
// and its volume, the table of equilibrium means for growing N, and
// Parrondo-region sweeps over (p0, p1, p1, p2).

#include "parrondo/chain_core.hpp"
#include "parrondo/spatial_games.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace parrondo {

/// Toral's games use A; Xie et al.'s use A'.
enum class Family { toral, xie };

std::string to_string(Family f);
Family parse_family(const std::string& name);
Game a_side_game(Family f);

/// Worker count: `requested` if nonzero, else PARRONDO_WORKERS, else the
/// hardware concurrency.
unsigned worker_count(unsigned requested = 0);

/// Runs fn(i) for i in [0, count) on up to `workers` threads. The first
/// exception thrown by any item is rethrown after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  unsigned workers = 0);

/// Six significant digits, round-half-even, fixed notation
/// (e.g. -0.0909091, 0.00678336).
std::string format_sig6(double value);

struct ErgReport {
  bool holds = false;
  double lhs = 0.0;
};

/// max(|g/2+h(p0-p1)|, |g/2+h(p2-p3)|) + max(|g/2+h(p0-p2)|, |g/2+h(p1-p3)|)
/// with g = gamma, h = 1 - gamma; holds iff lhs < 1.
ErgReport erg_condition(const CoinProbabilities& p, double gamma);

enum class VolumeDims { four_param, three_param };

struct VolumeEstimate {
  double volume = 0.0;
  double ci95 = 0.0;  // half-width, 1.96 sqrt(v(1-v)/samples)
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

/// Monte Carlo volume of {p : erg_condition holds} in [0,1]^4, or in
/// [0,1]^3 for p = (p0, p1, p1, p2). Requires samples >= 10^5.
VolumeEstimate condition_volume(double gamma, VolumeDims dims,
                                std::uint64_t samples, std::uint64_t seed);

/// Column labels of the table for a family: B, 1/2(A+B), AB, ABB, AAB, AABB
/// (primed for Xie et al.).
std::vector<std::string> table_columns(Family f);

struct TableCell {
  std::optional<double> value;
  std::string error;
};

struct ConvergenceRow {
  int players = 0;
  std::vector<TableCell> cells;
};

struct ConvergenceTable {
  Family family = Family::toral;
  CoinProbabilities p{};
  std::vector<std::string> columns;
  std::vector<ConvergenceRow> rows;
};

/// Solver settings for the table. The iterative tolerance is tighter than
/// the general default: at N = 18 a residual of 1e-10 leaves errors in the
/// sixth significant digit.
inline SolverOptions table_solver_options() {
  SolverOptions o;
  o.iterative_tol = 1e-14;
  return o;
}

struct TableOptions {
  SolverOptions solver = table_solver_options();
  unsigned workers = 0;
};

/// Mean profit per turn for every N and column, on chains reduced by the
/// dihedral classes when p1 = p2 and by the cyclic classes otherwise.
/// Failures are recorded per cell.
ConvergenceTable convergence_table(const CoinProbabilities& p,
                                   std::span<const int> players, Family family,
                                   const TableOptions& opts = {});

struct StabilizationReport {
  bool stabilized = false;
  double last_delta = 0.0;
  std::string last_value;  // six significant digits
};

/// Compares the last two (N, value) entries at six significant digits.
/// Requires at least three distinct N. Says nothing about the N -> infinity
/// limit itself.
StabilizationReport stabilization_report(
    std::span<const std::pair<int, double>> series);
StabilizationReport stabilization_report(const ConvergenceTable& table,
                                         const std::string& column);

enum class RegionClass { parrondo, anti_parrondo, neither };

std::string to_string(RegionClass c);

/// parrondo iff mu_B <= 0 and mu_combined > 0; anti_parrondo iff mu_B >= 0
/// and mu_combined < 0. Values within `zero_tol` of zero count as zero.
RegionClass classify(double mu_b, double mu_combined, double zero_tol = 1e-12);

struct SweepSchedule {
  enum class Kind { mixture, pattern };
  Kind kind = Kind::mixture;
  double gamma = 0.5;
  int r = 1;
  int s = 1;
};

struct RegionPoint {
  double p0 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double mu_b = 0.0;
  double mu_combined = 0.0;
  RegionClass classification = RegionClass::neither;
  // Set when a solve failed; the node is then classified neither.
  bool flagged = false;
  std::string diagnostic;
};

struct SweepOptions {
  Family family = Family::xie;
  // Solve on {0,1}^N instead of the dihedral classes.
  bool full_space = false;
  SolverOptions solver;
  unsigned workers = 0;
  double zero_tol = 1e-12;
};

/// One node with coin probabilities (p0, p1, p1, p2).
RegionPoint evaluate_region_node(int players, double p0, double p1, double p2,
                                 const SweepSchedule& schedule,
                                 const SweepOptions& opts = {});

/// All nodes k * grid_step in [0,1]^3, sorted by (p0, p2, p1). grid_step
/// must divide 1.
std::vector<RegionPoint> parrondo_region_sweep(int players, double grid_step,
                                               const SweepSchedule& schedule,
                                               const SweepOptions& opts = {});

/// CSV with header p0,p1,p2,mu_B,mu_combined,class.
std::string region_csv(std::span<const RegionPoint> points);

}  // namespace parrondo
