#pragma once

// Games A (Toral), A' (Xie et al.) and B for N players on a circle, built as
// ChainTriples over {0,1}^N, plus the profit-augmented chains.
//
// State encoding: a configuration eta is an N-bit integer written as the
// string eta(1) eta(2) ... eta(N), so player 1 is the most significant bit
// and, for N = 4, state 8 = 1000 means that only player 1 is a winner.

#include "parrondo/chain_core.hpp"

#include <array>
#include <cstdint>

namespace parrondo {

class QuotientMap;

using CoinProbabilities = std::array<double, 4>;

inline constexpr int kMaxPlayers = 24;

struct SpatialParams {
  int players = 3;
  CoinProbabilities p{0.5, 0.5, 0.5, 0.5};

  /// Throws UsageError unless 3 <= players <= max_players and p in [0,1]^4.
  void validate(int max_players = kMaxPlayers) const;
  double q(int m) const { return 1.0 - p[static_cast<std::size_t>(m)]; }
};

/// Win/loss status of every player.
struct BitConfig {
  std::uint32_t bits = 0;

  friend bool operator==(BitConfig, BitConfig) = default;
};

/// Status of player x in {1..N}.
bool status(BitConfig eta, int x, int players);

/// Same configuration with player x set to `winner`.
BitConfig with_status(BitConfig eta, int x, int players, bool winner);

/// eta_x: player x's status flipped.
BitConfig flip(BitConfig eta, int x, int players);

/// m_x(eta) = 2 eta(x-1) + eta(x+1) with wrap-around; throws UsageError when
/// x is outside 1..N.
int neighborhood_index(BitConfig eta, int x, int players);

/// eta^{x,y,t}: player x played neighbor y and won (t = +1) or lost (t = -1).
BitConfig duel(BitConfig eta, int x, int y, int t, int players);

enum class Game { A, A_prime, B };

/// One elementary outcome of a turn: chosen player, coin, and (for A')
/// opponent collapse into a target configuration, a probability, and the
/// profit to the N players as a whole.
struct GameEvent {
  BitConfig target;
  double prob;
  int payoff;
};

/// Calls fn(GameEvent) for every elementary event of one turn from `eta`.
template <class Fn>
void for_each_event(Game game, const SpatialParams& params, BitConfig eta,
                    Fn&& fn) {
  const int n = params.players;
  const double pick = 1.0 / n;
  for (int x = 1; x <= n; ++x) {
    switch (game) {
      case Game::A:
        fn(GameEvent{with_status(eta, x, n, true), 0.5 * pick, +1});
        fn(GameEvent{with_status(eta, x, n, false), 0.5 * pick, -1});
        break;
      case Game::A_prime: {
        const double w = 0.25 * pick;
        const int left = x == 1 ? n : x - 1;
        const int right = x == n ? 1 : x + 1;
        fn(GameEvent{duel(eta, x, left, -1, n), w, 0});
        fn(GameEvent{duel(eta, x, left, +1, n), w, 0});
        fn(GameEvent{duel(eta, x, right, -1, n), w, 0});
        fn(GameEvent{duel(eta, x, right, +1, n), w, 0});
        break;
      }
      case Game::B: {
        const int m = neighborhood_index(eta, x, n);
        fn(GameEvent{with_status(eta, x, n, true), params.p[m] * pick, +1});
        fn(GameEvent{with_status(eta, x, n, false), params.q(m) * pick, -1});
        break;
      }
    }
  }
}

/// Full 2^N-state chain; Pdot and Pddot accumulate event by event.
ChainTriple build_game(Game game, const SpatialParams& params);
ChainTriple build_game_B(const SpatialParams& params);
ChainTriple build_game_A(const SpatialParams& params);
ChainTriple build_game_A_prime(const SpatialParams& params);

/// Chain on the symmetry classes of `quotient`, built from class
/// representatives only. Throws StructuralError for dihedral classes of game
/// B when p1 != p2 (the rules are not reflection invariant then).
ChainTriple build_game_lumped(Game game, const SpatialParams& params,
                              const QuotientMap& quotient);

/// gamma * a + (1 - gamma) * b on every channel.
ChainTriple mix(double gamma, const ChainTriple& a, const ChainTriple& b);

/// Profit alphabets of the augmented chains.
enum class ProfitAlphabet {
  pm_one,       // {-1, +1}: pure game B
  with_zero,    // {-1, 0, +1}: mixtures and patterns with A'
};

/// Index of (eta, profit) in the augmented state space; states are ordered
/// by configuration, then by profit ascending.
Index augmented_index(BitConfig eta, int profit, ProfitAlphabet alphabet);

/// Augmented chain on {0,1}^N x alphabet for gamma A' + (1 - gamma) B; the
/// payoff of a transition is the profit component of its destination.
/// gamma = 0 over pm_one is pure B; gamma = 1 over with_zero is A' alone.
ChainTriple build_augmented(double gamma, const SpatialParams& params,
                            ProfitAlphabet alphabet);

}  // namespace parrondo
