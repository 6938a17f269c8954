#pragma once

// Finite Markov chains with a per-transition payoff: stationary
// distributions, fundamental matrices, and the mean / variance parameters
// of the strong law and central limit theorem for cumulative profit, both
// for a single chain and for periodic patterns P_A^r P_B^s.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace parrondo {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Transition matrix P together with its payoff channels
/// Pdot(i,j) = sum over events of prob * payoff and
/// Pddot(i,j) = sum over events of prob * payoff^2.
///
/// Aggregating by event (rather than storing a payoff matrix W) lets a single
/// transition i -> j carry a mix of wins and losses, which is what happens on
/// the diagonal of the spatial game B. Immutable after construction.
class ChainTriple {
 public:
  /// Validates the invariants: square and equal shapes, rows of P summing to
  /// one within 1e-12, P entries in [0,1], |Pdot| <= Pddot <= P entrywise,
  /// and payoff support inside the support of P. Throws UsageError.
  ChainTriple(SparseMatrix p, SparseMatrix pdot, SparseMatrix pddot);

  /// Chain with payoff matrix W, so Pdot = P o W and Pddot = P o W o W.
  static ChainTriple from_payoff_matrix(const DenseMatrix& p,
                                        const DenseMatrix& w);

  Index dim() const noexcept { return p_.rows(); }
  const SparseMatrix& p() const noexcept { return p_; }
  const SparseMatrix& pdot() const noexcept { return pdot_; }
  const SparseMatrix& pddot() const noexcept { return pddot_; }

  /// Pdot * 1 and Pddot * 1.
  Vector expected_payoff() const;
  Vector expected_square_payoff() const;

 private:
  SparseMatrix p_;
  SparseMatrix pdot_;
  SparseMatrix pddot_;
};

enum class SolveMethod { dense_lu, power_iteration };
enum class MomentMethod { dense_inverse, linear_solve };

std::string to_string(SolveMethod m);
std::string to_string(MomentMethod m);

struct SolverOptions {
  // Chains up to this many states are handled with dense factorizations.
  Index dense_cap = 4096;
  double dense_tol = 1e-12;
  double iterative_tol = 1e-10;
  std::size_t max_iterations = 5'000'000;
  // Overrides the automatic choice of how (Z - Pi) is applied.
  std::optional<MomentMethod> moment_method;
};

struct StationaryDistribution {
  Vector pi;
  double residual = 0.0;  // max-norm of pi (P - I)
  SolveMethod method = SolveMethod::dense_lu;
  std::size_t iterations = 0;
};

struct MomentResult {
  double mu = 0.0;
  double sigma2 = 0.0;
  MomentMethod method = MomentMethod::dense_inverse;
  Index reduced_dim = 0;
  double residual = 0.0;  // stationary-solve residual
};

struct ErgodicityReport {
  bool irreducible = false;
  bool aperiodic = false;
  int closed_classes = 0;
  // Period of the (first) closed class; 1 means aperiodic.
  Index period = 0;
  // States outside every closed class.
  std::vector<Index> transient_states;

  bool ergodic() const noexcept { return closed_classes == 1 && aperiodic; }
};

/// Strongly connected components of the positive-entry digraph of P.
ErgodicityReport ergodicity_check(const ChainTriple& chain);

/// Same report for the product F_0 F_1 ... F_{k-1} without forming it. The
/// product and all of its cyclic permutations share the closed-class count
/// and the period, so a single report covers every rotation.
ErgodicityReport ergodicity_check(std::span<const SparseMatrix* const> factors);

/// pi P = pi, sum(pi) = 1. Dense LU when dim <= dense_cap, damped power
/// iteration x <- (x + xP)/2 otherwise. Throws StructuralError when P has
/// more than one closed class and SolverError on non-convergence.
StationaryDistribution stationary_distribution(const ChainTriple& chain,
                                               const SolverOptions& opts = {});
StationaryDistribution stationary_distribution(
    std::span<const SparseMatrix* const> factors,
    const SolverOptions& opts = {});

/// Z = (I - (P - Pi))^{-1}. Dense only; throws UsageError above the cap and
/// StructuralError when the system is singular.
DenseMatrix fundamental_matrix(const ChainTriple& chain,
                               const StationaryDistribution& pi,
                               const SolverOptions& opts = {});
DenseMatrix fundamental_matrix(const DenseMatrix& p, const Vector& pi);

double mean_mu(const ChainTriple& chain, const StationaryDistribution& pi);

/// pi Pddot 1 - (pi Pdot 1)^2 + 2 pi Pdot (Z - Pi) Pdot 1.
double variance_sigma2(const ChainTriple& chain,
                       const StationaryDistribution& pi,
                       const SolverOptions& opts = {});

/// Stationary solve followed by mu and (optionally) sigma^2.
MomentResult moments(const ChainTriple& chain, bool with_variance = true,
                     const SolverOptions& opts = {});

/// P_A^r P_B^s as a dense matrix (small chains and tests only).
DenseMatrix pattern_product(const ChainTriple& a, const ChainTriple& b, int r,
                            int s);

/// Mean profit per turn for the periodic pattern of r plays of `a` followed
/// by s plays of `b`. Throws StructuralError if the cyclic product is not
/// ergodic.
double pattern_mean(const ChainTriple& a, const ChainTriple& b, int r, int s,
                    const SolverOptions& opts = {});

/// Full variance parameter of the periodic pattern.
double pattern_variance(const ChainTriple& a, const ChainTriple& b, int r,
                        int s, const SolverOptions& opts = {});

/// The shorter form valid when `a` pays nothing (Pdot_A = Pddot_A = 0) and
/// every `b` transition pays +-1 (Pddot_B 1 = 1), e.g. game A' against B.
/// Throws UsageError when those conditions do not hold.
double pattern_variance_zero_payoff_a(const ChainTriple& a,
                                      const ChainTriple& b, int r, int s,
                                      const SolverOptions& opts = {});

/// True when the shorter form above applies to (a, b).
bool zero_payoff_a_applies(const ChainTriple& a, const ChainTriple& b);

MomentResult pattern_moments(const ChainTriple& a, const ChainTriple& b, int r,
                             int s, bool with_variance = true,
                             const SolverOptions& opts = {});

/// The capital-dependent single-player games on capital mod 3.
enum class CapitalGame { A, B, C_half };

ChainTriple capital_dependent_fixture(CapitalGame kind);

}  // namespace parrondo
