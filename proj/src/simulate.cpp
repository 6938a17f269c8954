#include "parrondo/simulate.hpp"

#include "parrondo/errors.hpp"

#include <cmath>
#include <numeric>

namespace parrondo {

namespace {

std::string game_name(Game g) {
  switch (g) {
    case Game::A:
      return "A";
    case Game::A_prime:
      return "A'";
    case Game::B:
      return "B";
  }
  return "?";
}

// Index of the game played at turn t within a pattern.
bool pattern_plays_a(const Schedule& s, std::uint64_t t) {
  return t % static_cast<std::uint64_t>(s.r + s.s) < static_cast<std::uint64_t>(s.r);
}

class SpatialPlayer {
 public:
  SpatialPlayer(const SpatialParams& params, TrajectoryRng& rng)
      : params_(params), rng_(rng) {
    const std::uint32_t mask = (1U << params.players) - 1U;
    eta_ = BitConfig{static_cast<std::uint32_t>(rng_.bits()) & mask};
  }

  int turn(Game game) {
    const int n = params_.players;
    const int x = static_cast<int>(rng_.below(static_cast<std::uint32_t>(n))) + 1;
    switch (game) {
      case Game::A: {
        const bool win = rng_.coin(0.5);
        eta_ = with_status(eta_, x, n, win);
        return win ? 1 : -1;
      }
      case Game::A_prime: {
        const bool go_left = rng_.coin(0.5);
        const int y = go_left ? (x == 1 ? n : x - 1) : (x == n ? 1 : x + 1);
        const bool win = rng_.coin(0.5);
        eta_ = with_status(eta_, x, n, win);
        eta_ = with_status(eta_, y, n, !win);
        // One unit changes hands; the collective is unaffected.
        return 0;
      }
      case Game::B: {
        const int m = neighborhood_index(eta_, x, n);
        const bool win = rng_.coin(params_.p[static_cast<std::size_t>(m)]);
        eta_ = with_status(eta_, x, n, win);
        return win ? 1 : -1;
      }
    }
    return 0;
  }

 private:
  const SpatialParams& params_;
  TrajectoryRng& rng_;
  BitConfig eta_;
};

class CapitalPlayer {
 public:
  explicit CapitalPlayer(TrajectoryRng& rng)
      : rng_(rng), capital_(static_cast<std::int64_t>(rng.below(3))) {}

  int turn(Game game) {
    double p_win = 0.5;
    if (game == Game::B) p_win = capital_ % 3 == 0 ? 0.1 : 0.75;
    const int step = rng_.coin(p_win) ? 1 : -1;
    capital_ += step;
    return step;
  }

 private:
  TrajectoryRng& rng_;
  std::int64_t capital_;
};

template <class Player>
TrajectorySummary run(const Schedule& schedule, Player& player,
                      TrajectoryRng& rng, std::uint64_t n) {
  TrajectorySummary out;
  out.n = n;
  out.batch_size = batch_size_for(n);
  out.batch_means.reserve(static_cast<std::size_t>(n / out.batch_size));
  std::int64_t batch_sum = 0;
  std::uint64_t in_batch = 0;
  const Game a_side = schedule.game;
  for (std::uint64_t t = 0; t < n; ++t) {
    Game g = schedule.game;
    if (schedule.kind == Schedule::Kind::mixture) {
      g = rng.coin(schedule.gamma) ? a_side : Game::B;
    } else if (schedule.kind == Schedule::Kind::pattern) {
      g = pattern_plays_a(schedule, t) ? a_side : Game::B;
    }
    const int pay = player.turn(g);
    out.total += pay;
    batch_sum += pay;
    if (++in_batch == out.batch_size) {
      out.batch_means.push_back(static_cast<double>(batch_sum) /
                                static_cast<double>(out.batch_size));
      batch_sum = 0;
      in_batch = 0;
    }
  }
  out.running_mean = static_cast<double>(out.total) / static_cast<double>(n);
  return out;
}

}  // namespace

Schedule Schedule::pure(Game game, const SpatialParams& params) {
  Schedule s;
  s.kind = Kind::pure;
  s.game = game;
  s.params = params;
  return s;
}

Schedule Schedule::mixture(double gamma, Game a_side, const SpatialParams& params) {
  Schedule s;
  s.kind = Kind::mixture;
  s.game = a_side;
  s.gamma = gamma;
  s.params = params;
  return s;
}

Schedule Schedule::pattern(int r, int s_len, Game a_side,
                           const SpatialParams& params) {
  Schedule s;
  s.kind = Kind::pattern;
  s.game = a_side;
  s.r = r;
  s.s = s_len;
  s.params = params;
  return s;
}

Schedule Schedule::capital_pure(Game game) {
  Schedule s;
  s.kind = Kind::pure;
  s.game = game;
  s.capital = true;
  return s;
}

Schedule Schedule::capital_mixture(double gamma) {
  Schedule s = capital_pure(Game::A);
  s.kind = Kind::mixture;
  s.gamma = gamma;
  return s;
}

Schedule Schedule::capital_pattern(int r, int s_len) {
  Schedule s = capital_pure(Game::A);
  s.kind = Kind::pattern;
  s.r = r;
  s.s = s_len;
  return s;
}

void Schedule::validate() const {
  if (r < 1 || s < 1) throw UsageError("pattern lengths r, s must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw UsageError("mixing weight must lie in [0,1]");
  }
  if (capital) {
    if (game == Game::A_prime) {
      throw UsageError("game A' has no capital-dependent version");
    }
  } else {
    params.validate();
  }
  if (kind != Kind::pure && game == Game::B) {
    throw UsageError("the A side of a mixture or pattern must be A or A'");
  }
}

std::string Schedule::describe() const {
  std::string out = capital ? "capital:" : "spatial:";
  switch (kind) {
    case Kind::pure:
      return out + game_name(game);
    case Kind::mixture:
      return out + "mix(" + std::to_string(gamma) + "," + game_name(game) + ",B)";
    case Kind::pattern:
      return out + "pattern(" + std::to_string(r) + "," + std::to_string(s) + "," +
             game_name(game) + ",B)";
  }
  return out;
}

TrajectoryRng::TrajectoryRng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

std::uint32_t TrajectoryRng::below(std::uint32_t n) {
  // Multiply-shift; the bias is at most n / 2^64.
  const unsigned __int128 wide =
      static_cast<unsigned __int128>(engine_()) * static_cast<unsigned __int128>(n);
  return static_cast<std::uint32_t>(wide >> 64);
}

std::uint64_t batch_size_for(std::uint64_t n) {
  if (n == 0) throw UsageError("cannot batch an empty trajectory");
  const double root = std::sqrt(static_cast<double>(n));
  std::uint64_t best = 1;
  double best_gap = std::abs(1.0 - root);
  for (std::uint64_t d = 1; d * d <= n; ++d) {
    if (n % d != 0) continue;
    for (std::uint64_t c : {d, n / d}) {
      const double gap = std::abs(static_cast<double>(c) - root);
      if (gap < best_gap || (gap == best_gap && c < best)) {
        best = c;
        best_gap = gap;
      }
    }
  }
  return best;
}

TrajectorySummary play(const Schedule& schedule, std::uint64_t n,
                       std::uint64_t seed, std::uint64_t stream) {
  schedule.validate();
  if (n < 1) throw UsageError("number of turns must be >= 1");
  TrajectoryRng rng(seed, stream);
  TrajectorySummary out;
  if (schedule.capital) {
    CapitalPlayer player(rng);
    out = run(schedule, player, rng, n);
  } else {
    SpatialPlayer player(schedule.params, rng);
    out = run(schedule, player, rng, n);
  }
  out.seed = seed;
  out.stream = stream;
  return out;
}

EmpiricalMoments empirical_moments(const TrajectorySummary& t) {
  if (t.n < 10'000) {
    throw UsageError("at least 10^4 turns are needed for batch-means estimates");
  }
  const double root = std::sqrt(static_cast<double>(t.n));
  const auto b = static_cast<double>(t.batch_size);
  if (b < root / 2 || b > 2 * root || t.batch_means.size() < 2) {
    throw UsageError("turn count " + std::to_string(t.n) +
                     " has no divisor near its square root; pick a composite n");
  }
  const auto k = static_cast<double>(t.batch_means.size());
  const double mean =
      std::accumulate(t.batch_means.begin(), t.batch_means.end(), 0.0) / k;
  double ss = 0.0;
  for (double m : t.batch_means) ss += (m - mean) * (m - mean);
  EmpiricalMoments out;
  out.mean_hat = static_cast<double>(t.total) / static_cast<double>(t.n);
  out.sigma2_hat = b * ss / (k - 1.0);
  out.stderr_hat = std::sqrt(out.sigma2_hat / static_cast<double>(t.n));
  return out;
}

BatchShape batch_shape(const TrajectorySummary& t) {
  const auto k = static_cast<double>(t.batch_means.size());
  if (k < 4) throw UsageError("need at least four batches");
  const double mean =
      std::accumulate(t.batch_means.begin(), t.batch_means.end(), 0.0) / k;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : t.batch_means) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= k;
  m3 /= k;
  m4 /= k;
  BatchShape out;
  out.skewness = m3 / std::pow(m2, 1.5);
  out.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  return out;
}

}  // namespace parrondo
