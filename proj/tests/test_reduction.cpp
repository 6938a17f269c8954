#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "parrondo/errors.hpp"
#include "parrondo/reduction.hpp"
#include "parrondo/spatial_games.hpp"

#include <random>
#include <set>

using namespace parrondo;

namespace {

const CoinProbabilities kToral{1, 0.16, 0.16, 0.7};

}  // namespace

TEST_CASE("rotation and reflection") {
  CHECK(rotate(BitConfig{0b1000}, 4).bits == 0b0001);
  CHECK(rotate(BitConfig{0b0110}, 4).bits == 0b1100);
  CHECK(reflect(BitConfig{0b1100}, 4).bits == 0b0011);
  CHECK(reflect(BitConfig{0b100}, 3).bits == 0b001);
  for (std::uint32_t s = 0; s < 32; ++s) {
    BitConfig x{s};
    for (int k = 0; k < 5; ++k) x = rotate(x, 5);
    CHECK(x.bits == s);
    CHECK(reflect(reflect(BitConfig{s}, 5), 5).bits == s);
  }
}

TEST_CASE("N = 4 classes in the documented order") {
  const QuotientMap q = orbits(4, SymmetryGroup::cyclic);
  REQUIRE(q.classes() == 6);
  const std::vector<std::uint32_t> reps{0, 1, 3, 5, 7, 15};
  const std::vector<std::uint32_t> sizes{1, 4, 4, 2, 4, 1};
  for (std::uint32_t c = 0; c < 6; ++c) {
    CHECK(q.representative(c) == reps[c]);
    CHECK(q.class_size(c) == sizes[c]);
  }
  for (std::uint32_t s : {1U, 2U, 4U, 8U}) CHECK(q.class_of(s) == 1);
  for (std::uint32_t s : {3U, 6U, 9U, 12U}) CHECK(q.class_of(s) == 2);
  for (std::uint32_t s : {7U, 11U, 13U, 14U}) CHECK(q.class_of(s) == 4);
  // Reflections add nothing for N = 4.
  CHECK(orbits(4, SymmetryGroup::dihedral).classes() == 6);
}

TEST_CASE("orbit counts against string enumeration and known sequences") {
  CHECK(orbits(5, SymmetryGroup::cyclic).classes() == 8);
  CHECK(orbits(6, SymmetryGroup::cyclic).classes() == 14);
  for (int n = 3; n <= 12; ++n) {
    CHECK(orbits(n, SymmetryGroup::cyclic).classes() == oracle::orbit_count(n, false));
    CHECK(orbits(n, SymmetryGroup::dihedral).classes() == oracle::orbit_count(n, true));
  }
  const std::uint64_t necklaces[] = {4, 6, 8, 14, 20, 36, 60, 108, 188, 352, 632, 1182, 2192};
  for (int n = 3; n <= 15; ++n) {
    CHECK(necklace_count(n, SymmetryGroup::cyclic) == necklaces[n - 3]);
  }
  CHECK(necklace_count(18, SymmetryGroup::cyclic) == 14602);
  CHECK(necklace_count(18, SymmetryGroup::dihedral) == 7685);
  CHECK(necklace_count(15, SymmetryGroup::dihedral) == 1224);
  CHECK(necklace_count(6, SymmetryGroup::trivial) == 64);
  for (int n = 3; n <= 16; ++n) {
    CHECK(necklace_count(n, SymmetryGroup::cyclic) == orbits(n, SymmetryGroup::cyclic).classes());
    CHECK(necklace_count(n, SymmetryGroup::dihedral) ==
          orbits(n, SymmetryGroup::dihedral).classes());
  }
  CHECK_THROWS_AS((void)necklace_count(2, SymmetryGroup::cyclic), UsageError);
}

TEST_CASE("classes are closed under the group and sizes add up") {
  for (int n : {5, 6, 7}) {
    const QuotientMap q = orbits(n, SymmetryGroup::dihedral);
    std::uint64_t total = 0;
    for (std::uint32_t c = 0; c < q.classes(); ++c) total += q.class_size(c);
    CHECK(total == q.states());
    for (std::uint32_t s = 0; s < q.states(); ++s) {
      CHECK(q.class_of(rotate(BitConfig{s}, n).bits) == q.class_of(s));
      CHECK(q.class_of(reflect(BitConfig{s}, n).bits) == q.class_of(s));
    }
  }
}

TEST_CASE("reduced N = 4 matrices equal the printed ones") {
  const QuotientMap q = orbits(4, SymmetryGroup::cyclic);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = trial == 0 ? kToral : oracle::random_probabilities(rng, false);
    const SpatialParams params{4, p};
    const auto b = oracle::to_dense(lump(build_game_B(params), q));
    CHECK(oracle::max_abs_diff(b.p, oracle::printed_reduced_b(p)) <= 1e-14);
  }
  const auto ap = oracle::to_dense(lump(build_game_A_prime(SpatialParams{4, kToral}), q));
  CHECK(oracle::max_abs_diff(ap.p, oracle::printed_reduced_a_prime()) <= 1e-14);
}

TEST_CASE("lumpability and invariance checks") {
  const SpatialParams sym{6, kToral};
  const SpatialParams asym{6, {0.3, 0.6, 0.2, 0.9}};
  const QuotientMap& cyc = cached_orbits(6, SymmetryGroup::cyclic);
  const QuotientMap& dih = cached_orbits(6, SymmetryGroup::dihedral);
  CHECK(check_lumpability(build_game_B(asym), cyc));
  CHECK(check_g_invariance(build_game_B(asym), cyc));
  CHECK(check_g_invariance(build_game_B(sym), dih));
  CHECK(check_lumpability(build_game_B(sym), dih));
  CHECK_FALSE(check_g_invariance(build_game_B(asym), dih));
  CHECK_FALSE(check_lumpability(build_game_B(asym), dih));
  CHECK_THROWS_AS((void)lump(build_game_B(asym), dih), StructuralError);
  CHECK(check_g_invariance(build_game_A_prime(asym), dih));
  CHECK_THROWS_AS((void)check_lumpability(build_game_B(SpatialParams{4, kToral}), cyc),
                  UsageError);
}

TEST_CASE("for N <= 5, game B with p1 != p2 is still lumpable under reflections") {
  // Invariance fails, but every reflected pair of flips lands in one class.
  const CoinProbabilities p{0.3, 0.6, 0.2, 0.9};
  for (int n = 3; n <= 5; ++n) {
    const ChainTriple b = build_game_B(SpatialParams{n, p});
    const QuotientMap& dih = cached_orbits(n, SymmetryGroup::dihedral);
    CHECK_FALSE(check_g_invariance(b, dih));
    CHECK(check_lumpability(b, dih));
    CHECK(std::abs(moments(lump(b, dih)).mu - moments(b).mu) <= 1e-12);
  }
}

TEST_CASE("lifting the quotient stationary distribution") {
  const SpatialParams params{6, kToral};
  const QuotientMap& q = cached_orbits(6, SymmetryGroup::dihedral);
  const ChainTriple full = build_game_B(params);
  const auto pi_bar = stationary_distribution(build_game_lumped(Game::B, params, q));
  const auto lifted = lift_stationary(pi_bar, q);
  const auto direct = stationary_distribution(full);
  CHECK((lifted.pi - direct.pi).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK(lifted.residual == pi_bar.residual);
  CHECK_THROWS_AS((void)lift_stationary(direct, q), UsageError);
}

TEST_CASE("quotient means and variances equal the full-space ones") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 6; ++trial) {
    const bool refl = trial % 2 == 0;
    const auto p = oracle::random_probabilities(rng, refl);
    const int n = 4 + trial % 3;
    const SpatialParams params{n, p};
    const QuotientMap& q =
        cached_orbits(n, refl ? SymmetryGroup::dihedral : SymmetryGroup::cyclic);
    const ChainTriple b = build_game_B(params);
    const ChainTriple ap = build_game_A_prime(params);
    const auto full_b = moments(b);
    const auto red_b = moments(build_game_lumped(Game::B, params, q));
    CHECK(std::abs(full_b.mu - red_b.mu) <= 1e-12);
    CHECK(std::abs(full_b.sigma2 - red_b.sigma2) <= 1e-10);
    const auto full_p = pattern_moments(ap, b, 2, 1);
    const auto red_p = pattern_moments(build_game_lumped(Game::A_prime, params, q),
                                       build_game_lumped(Game::B, params, q), 2, 1);
    CHECK(std::abs(full_p.mu - red_p.mu) <= 1e-12);
    CHECK(std::abs(full_p.sigma2 - red_p.sigma2) <= 1e-10);
  }
}

TEST_CASE("trivial quotient and constructor validation") {
  const QuotientMap t = QuotientMap::trivial(5);
  CHECK(t.classes() == 5);
  CHECK(t.players() == -1);
  const QuotientMap o = orbits(3, SymmetryGroup::trivial);
  CHECK(o.classes() == 8);
  CHECK_THROWS_AS(QuotientMap(SymmetryGroup::cyclic, 3, {0, 0}, {1}, {0}), UsageError);
  CHECK_THROWS_AS(QuotientMap(SymmetryGroup::cyclic, 3, {0, 1}, {1, 1}, {1, 0}), UsageError);
}
