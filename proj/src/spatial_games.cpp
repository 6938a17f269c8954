#include "parrondo/spatial_games.hpp"

#include "parrondo/errors.hpp"
#include "parrondo/reduction.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace parrondo {

namespace {

int bit_position(int x, int players) { return players - x; }

using Triplets = std::vector<Eigen::Triplet<double>>;

struct ChannelTriplets {
  Triplets p, pdot, pddot;

  void add(Index row, Index col, double prob, int payoff) {
    if (prob == 0.0) return;
    p.emplace_back(row, col, prob);
    if (payoff != 0) {
      pdot.emplace_back(row, col, prob * payoff);
      pddot.emplace_back(row, col, prob * payoff * payoff);
    }
  }

  ChainTriple finish(Index dim) {
    SparseMatrix mp(dim, dim), md(dim, dim), mdd(dim, dim);
    mp.setFromTriplets(p.begin(), p.end());
    md.setFromTriplets(pdot.begin(), pdot.end());
    mdd.setFromTriplets(pddot.begin(), pddot.end());
    return ChainTriple(std::move(mp), std::move(md), std::move(mdd));
  }
};

Index state_count(int players) { return Index{1} << players; }

}  // namespace

void SpatialParams::validate(int max_players) const {
  if (players < 3 || players > max_players) {
    throw UsageError("number of players must be in [3, " +
                     std::to_string(max_players) + "], got " +
                     std::to_string(players));
  }
  for (std::size_t m = 0; m < p.size(); ++m) {
    if (!(p[m] >= 0.0 && p[m] <= 1.0)) {
      throw UsageError("p" + std::to_string(m) + " must lie in [0,1]");
    }
  }
}

bool status(BitConfig eta, int x, int players) {
  return (eta.bits >> bit_position(x, players)) & 1U;
}

BitConfig with_status(BitConfig eta, int x, int players, bool winner) {
  const std::uint32_t mask = 1U << bit_position(x, players);
  return BitConfig{winner ? (eta.bits | mask) : (eta.bits & ~mask)};
}

BitConfig flip(BitConfig eta, int x, int players) {
  return BitConfig{eta.bits ^ (1U << bit_position(x, players))};
}

int neighborhood_index(BitConfig eta, int x, int players) {
  if (x < 1 || x > players) {
    throw UsageError("player index " + std::to_string(x) + " outside 1.." +
                     std::to_string(players));
  }
  const int left = x == 1 ? players : x - 1;
  const int right = x == players ? 1 : x + 1;
  return 2 * static_cast<int>(status(eta, left, players)) +
         static_cast<int>(status(eta, right, players));
}

BitConfig duel(BitConfig eta, int x, int y, int t, int players) {
  const BitConfig after = with_status(eta, x, players, t > 0);
  return with_status(after, y, players, t < 0);
}

ChainTriple build_game(Game game, const SpatialParams& params) {
  params.validate();
  const Index dim = state_count(params.players);
  ChannelTriplets t;
  t.p.reserve(static_cast<std::size_t>(dim) * 4 * params.players);
  for (Index s = 0; s < dim; ++s) {
    for_each_event(game, params, BitConfig{static_cast<std::uint32_t>(s)},
                   [&](const GameEvent& e) {
                     t.add(s, e.target.bits, e.prob, e.payoff);
                   });
  }
  return t.finish(dim);
}

ChainTriple build_game_B(const SpatialParams& params) {
  return build_game(Game::B, params);
}
ChainTriple build_game_A(const SpatialParams& params) {
  return build_game(Game::A, params);
}
ChainTriple build_game_A_prime(const SpatialParams& params) {
  return build_game(Game::A_prime, params);
}

ChainTriple build_game_lumped(Game game, const SpatialParams& params,
                              const QuotientMap& quotient) {
  params.validate();
  if (quotient.players() != params.players) {
    throw UsageError("quotient map is for a different number of players");
  }
  if (game == Game::B && quotient.group() == SymmetryGroup::dihedral &&
      params.p[1] != params.p[2]) {
    throw StructuralError(
        "game B is reflection invariant only when p1 = p2; use cyclic classes");
  }
  const Index dim = static_cast<Index>(quotient.classes());
  ChannelTriplets t;
  for (Index c = 0; c < dim; ++c) {
    const BitConfig rep{quotient.representative(static_cast<std::uint32_t>(c))};
    for_each_event(game, params, rep, [&](const GameEvent& e) {
      t.add(c, quotient.class_of(e.target.bits), e.prob, e.payoff);
    });
  }
  return t.finish(dim);
}

ChainTriple mix(double gamma, const ChainTriple& a, const ChainTriple& b) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw UsageError("mixing weight must lie in [0,1]");
  }
  if (a.dim() != b.dim()) {
    throw UsageError("cannot mix chains of dimension " + std::to_string(a.dim()) +
                     " and " + std::to_string(b.dim()));
  }
  if (gamma == 0.0) return b;
  if (gamma == 1.0) return a;
  const double g = gamma;
  const double h = 1.0 - gamma;
  return ChainTriple(SparseMatrix(g * a.p() + h * b.p()),
                     SparseMatrix(g * a.pdot() + h * b.pdot()),
                     SparseMatrix(g * a.pddot() + h * b.pddot()));
}

Index augmented_index(BitConfig eta, int profit, ProfitAlphabet alphabet) {
  if (alphabet == ProfitAlphabet::pm_one) {
    if (profit != 1 && profit != -1) {
      throw UsageError("profit must be -1 or +1 in the pure-B alphabet");
    }
    return 2 * Index{eta.bits} + (profit > 0 ? 1 : 0);
  }
  if (profit < -1 || profit > 1) throw UsageError("profit must be -1, 0 or +1");
  return 3 * Index{eta.bits} + (profit + 1);
}

ChainTriple build_augmented(double gamma, const SpatialParams& params,
                            ProfitAlphabet alphabet) {
  params.validate();
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw UsageError("mixing weight must lie in [0,1]");
  }
  if (alphabet == ProfitAlphabet::pm_one && gamma != 0.0) {
    throw UsageError("mixtures with A' need the {-1,0,+1} profit alphabet");
  }
  const std::uint32_t configs = 1U << params.players;
  const std::vector<int> profits = alphabet == ProfitAlphabet::pm_one
                                       ? std::vector<int>{-1, 1}
                                       : std::vector<int>{-1, 0, 1};
  const Index dim = static_cast<Index>(configs * profits.size());
  ChannelTriplets t;
  for (std::uint32_t bits = 0; bits < configs; ++bits) {
    const BitConfig eta{bits};
    for (int s : profits) {
      const Index row = augmented_index(eta, s, alphabet);
      // The last profit s never influences the next turn.
      if (gamma < 1.0) {
        for_each_event(Game::B, params, eta, [&](const GameEvent& e) {
          const Index col = augmented_index(e.target, e.payoff, alphabet);
          t.add(row, col, (1.0 - gamma) * e.prob, e.payoff);
        });
      }
      if (gamma > 0.0) {
        for_each_event(Game::A_prime, params, eta, [&](const GameEvent& e) {
          const Index col = augmented_index(e.target, 0, alphabet);
          t.add(row, col, gamma * e.prob, 0);
        });
      }
    }
  }
  return t.finish(dim);
}

}  // namespace parrondo
