#pragma once

// Direct Monte Carlo play of the games, turn by turn, as an independent
// check on the Markov chain computations.

#include "parrondo/spatial_games.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace parrondo {

/// Which game is played at each turn.
struct Schedule {
  enum class Kind { pure, mixture, pattern };

  Kind kind = Kind::pure;
  // Game for Kind::pure; the A-side game (A or A') for mixtures and patterns.
  Game game = Game::B;
  double gamma = 0.5;
  int r = 1;
  int s = 1;
  // Single-player capital-dependent games (capital mod 3) instead of the
  // spatial games; `params` is ignored then.
  bool capital = false;
  SpatialParams params;

  static Schedule pure(Game game, const SpatialParams& params);
  static Schedule mixture(double gamma, Game a_side, const SpatialParams& params);
  static Schedule pattern(int r, int s, Game a_side, const SpatialParams& params);
  static Schedule capital_pure(Game game);
  static Schedule capital_mixture(double gamma);
  static Schedule capital_pattern(int r, int s);

  /// Throws UsageError on r, s < 1, gamma outside [0,1], game A' with the
  /// capital-dependent games, or invalid spatial parameters.
  void validate() const;
  std::string describe() const;
};

/// Pseudo-random source for one trajectory: mt19937_64 seeded through
/// seed_seq{seed, stream}, so each (seed, stream) pair is an independent,
/// reproducible stream. Uniform variates are built from the top 53 bits to
/// stay identical across standard libraries.
class TrajectoryRng {
 public:
  TrajectoryRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t bits() { return engine_(); }
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on {0, ..., n-1}.
  std::uint32_t below(std::uint32_t n);
  bool coin(double p_heads) { return uniform() < p_heads; }

 private:
  std::mt19937_64 engine_;
};

struct TrajectorySummary {
  std::uint64_t n = 0;
  std::int64_t total = 0;  // S_n
  double running_mean = 0.0;
  std::uint64_t batch_size = 0;
  std::vector<double> batch_means;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Batch length used by play(): the divisor of n closest to sqrt(n).
std::uint64_t batch_size_for(std::uint64_t n);

/// Plays n turns from a uniformly drawn initial configuration (or capital
/// residue). Deterministic in (schedule, n, seed, stream).
TrajectorySummary play(const Schedule& schedule, std::uint64_t n,
                       std::uint64_t seed, std::uint64_t stream = 0);

struct EmpiricalMoments {
  double mean_hat = 0.0;
  double sigma2_hat = 0.0;
  double stderr_hat = 0.0;
};

/// Batch-means estimates. Throws UsageError for n < 10^4 or when the batch
/// length is not within a factor 2 of sqrt(n).
EmpiricalMoments empirical_moments(const TrajectorySummary& t);

struct BatchShape {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

/// Sample skewness and excess kurtosis of the batch means.
BatchShape batch_shape(const TrajectorySummary& t);

}  // namespace parrondo
