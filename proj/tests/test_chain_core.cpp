#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "parrondo/chain_core.hpp"
#include "parrondo/errors.hpp"
#include "parrondo/spatial_games.hpp"

#include <array>
#include <random>

using namespace parrondo;

namespace {

constexpr double kGolden = 1e-12;

ChainTriple dense_chain(const oracle::Dense3& d) {
  return ChainTriple(d.p.sparseView(), d.pdot.sparseView(), d.pddot.sparseView());
}

ChainTriple game(CapitalGame g) { return capital_dependent_fixture(g); }

void check_vector(const Vector& got, std::initializer_list<double> want, double tol) {
  REQUIRE(got.size() == static_cast<Index>(want.size()));
  Index i = 0;
  for (double w : want) CHECK(std::abs(got[i++] - w) <= tol);
}

void check_close(const Vector& got, const Vector& want, double tol) {
  REQUIRE(got.size() == want.size());
  CHECK((got - want).cwiseAbs().maxCoeff() <= tol);
}

}  // namespace

TEST_CASE("fixtures agree with the rules of the capital-dependent games") {
  const auto a = oracle::to_dense(game(CapitalGame::A));
  const auto b = oracle::to_dense(game(CapitalGame::B));
  const auto c = oracle::to_dense(game(CapitalGame::C_half));
  const auto ra = oracle::capital_a();
  const auto rb = oracle::capital_b();
  const auto rc = oracle::mix(0.5, ra, rb);
  CHECK(oracle::max_abs_diff(a.p, ra.p) == 0.0);
  CHECK(oracle::max_abs_diff(a.pdot, ra.pdot) == 0.0);
  CHECK(oracle::max_abs_diff(b.p, rb.p) == 0.0);
  CHECK(oracle::max_abs_diff(b.pdot, rb.pdot) == 0.0);
  CHECK(oracle::max_abs_diff(b.pddot, rb.pddot) == 0.0);
  CHECK(oracle::max_abs_diff(c.p, rc.p) < 1e-15);
  CHECK(oracle::max_abs_diff(c.pdot, rc.pdot) < 1e-15);
}

TEST_CASE("stationary distributions of the capital-dependent games") {
  const Vector pi_b = stationary_distribution(game(CapitalGame::B)).pi;
  CHECK((pi_b - Vector{{5.0 / 13, 2.0 / 13, 6.0 / 13}}).cwiseAbs().maxCoeff() <= kGolden);

  const auto pi_c = stationary_distribution(game(CapitalGame::C_half));
  CHECK((pi_c.pi - Vector{{245.0 / 709, 180.0 / 709, 284.0 / 709}}).cwiseAbs().maxCoeff() <=
        kGolden);
  CHECK(pi_c.residual <= 1e-12);
  CHECK(pi_c.method == SolveMethod::dense_lu);

  // Doubly stochastic: uniform.
  const Vector pi_a = stationary_distribution(game(CapitalGame::A)).pi;
  CHECK((pi_a - Vector::Constant(3, 1.0 / 3)).cwiseAbs().maxCoeff() <= kGolden);
}

TEST_CASE("power iteration agrees with the dense solve") {
  SolverOptions opts;
  opts.dense_cap = 0;
  opts.iterative_tol = 1e-14;
  const auto pi = stationary_distribution(game(CapitalGame::C_half), opts);
  CHECK(pi.method == SolveMethod::power_iteration);
  CHECK(pi.residual <= 1e-14);
  CHECK((pi.pi - Vector{{245.0 / 709, 180.0 / 709, 284.0 / 709}}).cwiseAbs().maxCoeff() <=
        1e-12);

  const SpatialParams params{5, {1, 0.16, 0.16, 0.7}};
  const ChainTriple b = build_game_B(params);
  const auto dense = stationary_distribution(b);
  const auto iter = stationary_distribution(b, opts);
  check_close(iter.pi, dense.pi, 1e-12);
}

TEST_CASE("power iteration reports non-convergence with its last residual") {
  SolverOptions opts;
  opts.dense_cap = 0;
  opts.max_iterations = 2;
  opts.iterative_tol = 1e-15;
  const ChainTriple b = build_game_B(SpatialParams{6, {1, 0.16, 0.16, 0.7}});
  try {
    (void)stationary_distribution(b, opts);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.last_residual() > 1e-15);
  }
}

TEST_CASE("fundamental matrices of the capital-dependent games") {
  const ChainTriple a = game(CapitalGame::A);
  const DenseMatrix za = fundamental_matrix(a, stationary_distribution(a));
  DenseMatrix want_a(3, 3);
  want_a << 7, 1, 1, 1, 7, 1, 1, 1, 7;
  CHECK(oracle::max_abs_diff(za, want_a / 9.0) <= kGolden);

  const ChainTriple b = game(CapitalGame::B);
  const DenseMatrix zb = fundamental_matrix(b, stationary_distribution(b));
  DenseMatrix want_b(3, 3);
  want_b << 1725, -38, 510, -95, 1938, 354, 425, 118, 1654;
  CHECK(oracle::max_abs_diff(zb, want_b / 2197.0) <= kGolden);

  SolverOptions small;
  small.dense_cap = 2;
  CHECK_THROWS_AS((void)fundamental_matrix(b, stationary_distribution(b), small), UsageError);
}

TEST_CASE("means and variances of the capital-dependent games") {
  const auto a = moments(game(CapitalGame::A));
  const auto b = moments(game(CapitalGame::B));
  const auto c = moments(game(CapitalGame::C_half));
  CHECK(std::abs(a.mu) <= kGolden);
  CHECK(std::abs(a.sigma2 - 1.0) <= kGolden);
  CHECK(std::abs(b.mu) <= kGolden);
  CHECK(std::abs(b.sigma2 - 81.0 / 169) <= kGolden);
  CHECK(std::abs(c.mu - 18.0 / 709) <= kGolden);
  CHECK(std::abs(c.sigma2 - 311313105.0 / 356400829) <= kGolden);
  CHECK(c.reduced_dim == 3);
  CHECK(c.method == MomentMethod::dense_inverse);
}

TEST_CASE("periodic pattern [2,2] of the capital-dependent games") {
  const ChainTriple a = game(CapitalGame::A);
  const ChainTriple b = game(CapitalGame::B);
  const DenseMatrix prod = pattern_product(a, b, 2, 2);
  DenseMatrix want(3, 3);
  want << 162, 59, 99, 151, 58, 111, 111, 47, 162;
  CHECK(oracle::max_abs_diff(prod, want / 320.0) <= kGolden);

  std::array<const SparseMatrix*, 4> factors{&a.p(), &a.p(), &b.p(), &b.p()};
  const auto pi = stationary_distribution(std::span<const SparseMatrix* const>(factors));
  CHECK((pi.pi - Vector{{2783.0 / 6357, 1075.0 / 6357, 2499.0 / 6357}}).cwiseAbs().maxCoeff() <=
        kGolden);

  const DenseMatrix z = fundamental_matrix(prod, pi.pi);
  DenseMatrix want_z(3, 3);
  want_z << 569627023, 10027235, -54305421, 22416463, 532826915, -29894541, -58953137,
      -14383645, 598685619;
  CHECK(oracle::max_abs_diff(z, want_z / 525348837.0) <= kGolden);

  CHECK(std::abs(pattern_mean(a, b, 2, 2) - 4.0 / 163) <= kGolden);
  CHECK(std::abs(pattern_variance(a, b, 2, 2) - 1923037543.0 / 2195688729) <= kGolden);
  const auto m = pattern_moments(a, b, 2, 2);
  CHECK(std::abs(m.mu - 4.0 / 163) <= kGolden);
  CHECK(std::abs(m.sigma2 - 1923037543.0 / 2195688729) <= kGolden);
}

TEST_CASE("two fair coins in any pattern have variance one") {
  const ChainTriple a = game(CapitalGame::A);
  for (int r = 1; r <= 3; ++r) {
    for (int s = 1; s <= 3; ++s) {
      CHECK(std::abs(pattern_mean(a, a, r, s)) <= kGolden);
      CHECK(std::abs(pattern_variance(a, a, r, s) - 1.0) <= kGolden);
    }
  }
}

TEST_CASE("pattern formulas match the phase-expanded chain") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 6; ++trial) {
    const auto p = oracle::random_probabilities(rng, false);
    const int n = 3 + trial % 2;
    const SpatialParams params{n, p};
    for (Game ag : {Game::A, Game::A_prime}) {
      const ChainTriple a = build_game(ag, params);
      const ChainTriple b = build_game_B(params);
      const auto da = oracle::to_dense(a);
      const auto db = oracle::to_dense(b);
      for (auto [r, s] : {std::pair{1, 1}, {1, 2}, {2, 1}, {2, 3}}) {
        const auto want = oracle::pattern_moments(oracle::pattern_factors(da, db, r, s));
        const auto got = pattern_moments(a, b, r, s);
        CHECK(std::abs(got.mu - want.mu) <= 1e-12);
        CHECK(std::abs(got.sigma2 - want.sigma2) <= 1e-10);
        CHECK(std::abs(pattern_variance(a, b, r, s) - want.sigma2) <= 1e-10);
      }
    }
  }
}

TEST_CASE("short variance form applies to A' against B and agrees with the full one") {
  const SpatialParams params{4, {1, 0.16, 0.16, 0.7}};
  const ChainTriple ap = build_game_A_prime(params);
  const ChainTriple a = build_game_A(params);
  const ChainTriple b = build_game_B(params);
  CHECK(zero_payoff_a_applies(ap, b));
  CHECK_FALSE(zero_payoff_a_applies(a, b));
  CHECK_THROWS_AS((void)pattern_variance_zero_payoff_a(a, b, 1, 1), UsageError);
  for (auto [r, s] : {std::pair{1, 1}, {1, 2}, {2, 2}, {3, 1}}) {
    CHECK(std::abs(pattern_variance_zero_payoff_a(ap, b, r, s) -
                   pattern_variance(ap, b, r, s)) <= 1e-12);
  }
}

TEST_CASE("moments of single chains match the explicit fundamental-matrix oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 8; ++trial) {
    const auto p = oracle::random_probabilities(rng, trial % 2 == 0);
    const SpatialParams params{3 + trial % 3, p};
    const ChainTriple b = build_game_B(params);
    const auto want = oracle::moments(oracle::to_dense(b));
    const auto got = moments(b);
    CHECK(std::abs(got.mu - want.mu) <= 1e-12);
    CHECK(std::abs(got.sigma2 - want.sigma2) <= 1e-10);
  }
}

TEST_CASE("dense-inverse and linear-solve variance paths agree") {
  std::mt19937_64 rng(3);
  SolverOptions dense;
  dense.moment_method = MomentMethod::dense_inverse;
  SolverOptions linear;
  linear.moment_method = MomentMethod::linear_solve;
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = oracle::random_probabilities(rng, false);
    const SpatialParams params{4 + trial % 3, p};
    const ChainTriple b = build_game_B(params);
    const ChainTriple ap = build_game_A_prime(params);
    const ChainTriple c = mix(0.5, ap, b);
    const auto d1 = moments(c, true, dense);
    const auto l1 = moments(c, true, linear);
    CHECK(l1.method == MomentMethod::linear_solve);
    CHECK(std::abs(d1.sigma2 - l1.sigma2) <= 1e-9);
    const auto d2 = pattern_moments(ap, b, 2, 3, true, dense);
    const auto l2 = pattern_moments(ap, b, 2, 3, true, linear);
    CHECK(std::abs(d2.sigma2 - l2.sigma2) <= 1e-9);
    const ChainTriple a = build_game_A(params);
    CHECK(std::abs(pattern_variance(a, b, 1, 2, dense) - pattern_variance(a, b, 1, 2, linear)) <=
          1e-9);
  }
}

TEST_CASE("ergodicity report") {
  SparseMatrix swap(2, 2);
  swap.insert(0, 1) = 1.0;
  swap.insert(1, 0) = 1.0;
  const ChainTriple periodic(swap, SparseMatrix(2, 2), SparseMatrix(2, 2));
  const auto rep = ergodicity_check(periodic);
  CHECK(rep.irreducible);
  CHECK_FALSE(rep.aperiodic);
  CHECK(rep.period == 2);
  CHECK_FALSE(rep.ergodic());

  // The product swap * swap is the identity: two closed classes.
  std::array<const SparseMatrix*, 2> f{&swap, &swap};
  const auto prod = ergodicity_check(std::span<const SparseMatrix* const>(f));
  CHECK(prod.closed_classes == 2);
  CHECK_THROWS_AS((void)pattern_mean(periodic, periodic, 1, 1), StructuralError);

  SparseMatrix ident(2, 2);
  ident.insert(0, 0) = 1.0;
  ident.insert(1, 1) = 1.0;
  const ChainTriple split(ident, SparseMatrix(2, 2), SparseMatrix(2, 2));
  CHECK(ergodicity_check(split).closed_classes == 2);
  CHECK_THROWS_AS((void)stationary_distribution(split), StructuralError);

  // Transient state 0 feeding an aperiodic closed class {1, 2}.
  DenseMatrix t(3, 3);
  t << 0, 0.5, 0.5, 0, 0.5, 0.5, 0, 0.5, 0.5;
  const ChainTriple absorbed(t.sparseView(), SparseMatrix(3, 3), SparseMatrix(3, 3));
  const auto r3 = ergodicity_check(absorbed);
  CHECK(r3.ergodic());
  CHECK_FALSE(r3.irreducible);
  CHECK(r3.transient_states == std::vector<Index>{0});

  CHECK(ergodicity_check(game(CapitalGame::B)).ergodic());
}

TEST_CASE("chain validation") {
  DenseMatrix p(2, 2);
  p << 0.5, 0.4, 0.5, 0.5;
  const SparseMatrix zero(2, 2);
  CHECK_THROWS_AS(ChainTriple(p.sparseView(), zero, zero), UsageError);

  DenseMatrix ok(2, 2);
  ok << 0.5, 0.5, 0.5, 0.5;
  DenseMatrix pdot(2, 2);
  pdot << 0.5, 0, 0, 0;
  // |Pdot| <= Pddot fails when Pddot is zero.
  CHECK_THROWS_AS(ChainTriple(ok.sparseView(), pdot.sparseView(), zero), UsageError);
  CHECK_THROWS_AS(ChainTriple(ok.sparseView(), SparseMatrix(3, 3), zero), UsageError);

  DenseMatrix w(2, 2);
  w << 1, -1, -1, 1;
  const ChainTriple c = ChainTriple::from_payoff_matrix(ok, w);
  CHECK(c.expected_payoff().cwiseAbs().maxCoeff() == 0.0);
  CHECK((c.expected_square_payoff() - Vector::Ones(2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mean of a dense chain equals the oracle") {
  const auto d = oracle::mix(0.5, oracle::capital_a(), oracle::capital_b());
  const ChainTriple c = dense_chain(d);
  const auto pi = stationary_distribution(c);
  CHECK(std::abs(mean_mu(c, pi) - oracle::moments(d).mu) <= 1e-14);
  CHECK(std::abs(variance_sigma2(c, pi) - oracle::moments(d).sigma2) <= 1e-12);
  check_vector(pi.pi, {245.0 / 709, 180.0 / 709, 284.0 / 709}, 1e-12);
}
