#include "parrondo/chain_core.hpp"

#include "parrondo/errors.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

namespace parrondo {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kEntryTol = 1e-12;

std::string dims(Index r, Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

void check_channels(const SparseMatrix& p, const SparseMatrix& pdot,
                    const SparseMatrix& pddot) {
  if (p.rows() != p.cols() || p.rows() == 0) {
    throw UsageError("transition matrix must be square and non-empty, got " +
                     dims(p.rows(), p.cols()));
  }
  if (pdot.rows() != p.rows() || pdot.cols() != p.cols() ||
      pddot.rows() != p.rows() || pddot.cols() != p.cols()) {
    throw UsageError("payoff channels must match P (" + dims(p.rows(), p.cols()) +
                     ")");
  }
  for (Index i = 0; i < p.outerSize(); ++i) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(p, i); it; ++it) {
      if (!(it.value() >= 0.0) || it.value() > 1.0 + kEntryTol) {
        throw UsageError("P(" + std::to_string(i) + "," +
                         std::to_string(it.col()) + ") is not a probability");
      }
      sum += it.value();
    }
    if (std::abs(sum - 1.0) > kRowSumTol) {
      throw UsageError("row " + std::to_string(i) + " of P sums to " +
                       std::to_string(sum));
    }
    for (SparseMatrix::InnerIterator it(pddot, i); it; ++it) {
      const double pij = p.coeff(i, it.col());
      if (it.value() < -kEntryTol || it.value() > pij + kEntryTol) {
        throw UsageError("Pddot exceeds P at (" + std::to_string(i) + "," +
                         std::to_string(it.col()) + ")");
      }
    }
    for (SparseMatrix::InnerIterator it(pdot, i); it; ++it) {
      const double bound = pddot.coeff(i, it.col());
      if (std::abs(it.value()) > bound + kEntryTol) {
        throw UsageError("|Pdot| exceeds Pddot at (" + std::to_string(i) + "," +
                         std::to_string(it.col()) + ")");
      }
    }
  }
}

// Row vector times the product of factors: x F_0 F_1 ... F_{k-1}.
Vector left_apply(std::span<const SparseMatrix* const> factors, Vector x) {
  for (const SparseMatrix* f : factors) x = f->transpose() * x;
  return x;
}

// Product of factors times a column vector.
Vector right_apply(std::span<const SparseMatrix* const> factors, Vector v) {
  for (auto it = factors.rbegin(); it != factors.rend(); ++it) v = **it * v;
  return v;
}

DenseMatrix dense_product(std::span<const SparseMatrix* const> factors) {
  DenseMatrix m = DenseMatrix(*factors.front());
  for (std::size_t i = 1; i < factors.size(); ++i) m = m * *factors[i];
  return m;
}

void check_factors(std::span<const SparseMatrix* const> factors) {
  if (factors.empty()) throw UsageError("empty product of transition matrices");
  const Index n = factors.front()->rows();
  for (const SparseMatrix* f : factors) {
    if (f->rows() != n || f->cols() != n) {
      throw UsageError("factor dimensions disagree");
    }
  }
}

// Clip round-off negatives and renormalize.
void clean_distribution(Vector& pi, double tol) {
  for (Index i = 0; i < pi.size(); ++i) {
    if (pi[i] < 0.0) {
      if (pi[i] < -std::max(tol, 1e-12)) {
        throw SolverError("stationary vector has a negative entry " +
                              std::to_string(pi[i]),
                          -pi[i]);
      }
      pi[i] = 0.0;
    }
  }
  pi /= pi.sum();
}

StationaryDistribution solve_dense(std::span<const SparseMatrix* const> factors,
                                   const SolverOptions& opts) {
  const DenseMatrix m = dense_product(factors);
  const Index n = m.rows();
  // pi (M - I) = 0 transposed, with one redundant equation replaced by the
  // normalization sum(pi) = 1.
  DenseMatrix a = (m - DenseMatrix::Identity(n, n)).transpose();
  a.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs[n - 1] = 1.0;
  Eigen::PartialPivLU<DenseMatrix> lu(a);
  StationaryDistribution out;
  out.pi = lu.solve(rhs);
  clean_distribution(out.pi, opts.dense_tol);
  out.residual = (m.transpose() * out.pi - out.pi).lpNorm<Eigen::Infinity>();
  out.method = SolveMethod::dense_lu;
  if (!(out.residual <= opts.dense_tol)) {
    throw SolverError("dense stationary solve residual above tolerance",
                      out.residual);
  }
  return out;
}

StationaryDistribution solve_power(std::span<const SparseMatrix* const> factors,
                                   const SolverOptions& opts) {
  const Index n = factors.front()->rows();
  Vector x = Vector::Constant(n, 1.0 / static_cast<double>(n));
  double residual = 0.0;
  for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
    Vector y = left_apply(factors, x);
    residual = (y - x).lpNorm<Eigen::Infinity>();
    if (residual <= opts.iterative_tol) {
      StationaryDistribution out;
      out.pi = std::move(x);
      clean_distribution(out.pi, opts.iterative_tol);
      out.residual = residual;
      out.method = SolveMethod::power_iteration;
      out.iterations = it;
      return out;
    }
    x = 0.5 * (x + y);
    if (it % 64 == 0) x /= x.sum();
  }
  throw SolverError("power iteration did not converge", residual);
}

// Applies (Z - Pi) to column vectors for M = F_0 ... F_{k-1}.
class CenteredFundamental {
 public:
  CenteredFundamental(std::span<const SparseMatrix* const> factors,
                      const Vector& pi, const SolverOptions& opts)
      : factors_(factors), pi_(pi) {
    const Index n = pi.size();
    method_ = opts.moment_method.value_or(n <= opts.dense_cap
                                              ? MomentMethod::dense_inverse
                                              : MomentMethod::linear_solve);
    if (method_ == MomentMethod::dense_inverse) {
      if (n > opts.dense_cap) {
        throw UsageError("dense fundamental matrix requested above the cap (" +
                         std::to_string(n) + " states)");
      }
      z_ = fundamental_matrix(dense_product(factors), pi);
    } else if (factors.size() == 1) {
      // (I - P + 1 e_j^T) y = b' has y_j = 0 and (I - P) y = b' whenever
      // pi b' = 0; it is non-singular for a single closed class.
      const SparseMatrix& p = *factors.front();
      Index j = 0;
      pi.maxCoeff(&j);
      Eigen::SparseMatrix<double> a(n, n);
      std::vector<Eigen::Triplet<double>> t;
      t.reserve(static_cast<std::size_t>(p.nonZeros() + 2 * n));
      for (Index i = 0; i < n; ++i) {
        t.emplace_back(i, i, 1.0);
        t.emplace_back(i, j, 1.0);
        for (SparseMatrix::InnerIterator it(p, i); it; ++it) {
          t.emplace_back(i, it.col(), -it.value());
        }
      }
      a.setFromTriplets(t.begin(), t.end());
      a.makeCompressed();
      lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
      lu_->compute(a);
      if (lu_->info() != Eigen::Success) {
        throw StructuralError("sparse factorization of I - P + 1e_j failed");
      }
    }
  }

  MomentMethod method() const { return method_; }

  Vector apply(const Vector& v) const {
    const double center = pi_.dot(v);
    if (method_ == MomentMethod::dense_inverse) {
      return z_ * v - Vector::Constant(v.size(), center);
    }
    const Vector b = v - Vector::Constant(v.size(), center);
    if (lu_) {
      Vector y = lu_->solve(b);
      return y - Vector::Constant(y.size(), pi_.dot(y));
    }
    // Neumann series: (Z - Pi) v = sum_{n>=0} M^n (v - Pi v).
    const double scale = std::max(1.0, b.lpNorm<Eigen::Infinity>());
    Vector sum = Vector::Zero(v.size());
    Vector term = b;
    double size = term.lpNorm<Eigen::Infinity>();
    for (std::size_t it = 0; it < 10'000'000; ++it) {
      sum += term;
      if (size <= 1e-16 * scale) return sum;
      term = right_apply(factors_, std::move(term));
      // Drift away from pi-centered due to round-off is removed each step.
      term -= Vector::Constant(term.size(), pi_.dot(term));
      size = term.lpNorm<Eigen::Infinity>();
    }
    throw SolverError("Neumann series for (Z - Pi) v did not converge", size);
  }

 private:
  std::span<const SparseMatrix* const> factors_;
  Vector pi_;
  MomentMethod method_;
  DenseMatrix z_;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

void require_matching(const ChainTriple& chain, const StationaryDistribution& pi) {
  if (pi.pi.size() != chain.dim()) {
    throw UsageError("stationary vector has " + std::to_string(pi.pi.size()) +
                     " entries, chain has " + std::to_string(chain.dim()));
  }
}

std::vector<const SparseMatrix*> pattern_factors(const ChainTriple& a,
                                                 const ChainTriple& b, int r,
                                                 int s) {
  if (r < 1 || s < 1) throw UsageError("pattern lengths r, s must be >= 1");
  if (a.dim() != b.dim()) throw UsageError("pattern chains differ in dimension");
  std::vector<const SparseMatrix*> f;
  f.insert(f.end(), static_cast<std::size_t>(r), &a.p());
  f.insert(f.end(), static_cast<std::size_t>(s), &b.p());
  return f;
}

StationaryDistribution pattern_stationary(
    std::span<const SparseMatrix* const> factors, int r, int s,
    const SolverOptions& opts) {
  const ErgodicityReport rep = ergodicity_check(factors);
  if (!rep.ergodic()) {
    throw StructuralError(
        "P_A^" + std::to_string(r) + " P_B^" + std::to_string(s) +
        " is not ergodic (closed classes: " + std::to_string(rep.closed_classes) +
        ", period: " + std::to_string(rep.period) +
        "); every cyclic permutation fails with it");
  }
  return stationary_distribution(factors, opts);
}

// pi P_A^u for u = 0..r and pi P_A^r P_B^v for v = 0..s.
struct PatternRows {
  std::vector<Vector> alpha;
  std::vector<Vector> beta;
};

PatternRows pattern_rows(const ChainTriple& a, const ChainTriple& b, int r,
                         int s, const Vector& pi) {
  PatternRows rows;
  rows.alpha.push_back(pi);
  for (int u = 1; u <= r; ++u) {
    rows.alpha.push_back(a.p().transpose() * rows.alpha.back());
  }
  rows.beta.push_back(rows.alpha.back());
  for (int v = 1; v <= s; ++v) {
    rows.beta.push_back(b.p().transpose() * rows.beta.back());
  }
  return rows;
}

bool all_zero(const SparseMatrix& m) {
  for (Index k = 0; k < m.nonZeros(); ++k) {
    if (m.valuePtr()[k] != 0.0) return false;
  }
  return true;
}

}  // namespace

ChainTriple::ChainTriple(SparseMatrix p, SparseMatrix pdot, SparseMatrix pddot)
    : p_(std::move(p)), pdot_(std::move(pdot)), pddot_(std::move(pddot)) {
  p_.makeCompressed();
  pdot_.makeCompressed();
  pddot_.makeCompressed();
  check_channels(p_, pdot_, pddot_);
}

ChainTriple ChainTriple::from_payoff_matrix(const DenseMatrix& p,
                                            const DenseMatrix& w) {
  if (p.rows() != w.rows() || p.cols() != w.cols()) {
    throw UsageError("payoff matrix shape differs from P");
  }
  const DenseMatrix pdot = p.cwiseProduct(w);
  const DenseMatrix pddot = pdot.cwiseProduct(w);
  return ChainTriple(p.sparseView(), pdot.sparseView(), pddot.sparseView());
}

Vector ChainTriple::expected_payoff() const {
  return pdot_ * Vector::Ones(dim());
}

Vector ChainTriple::expected_square_payoff() const {
  return pddot_ * Vector::Ones(dim());
}

std::string to_string(SolveMethod m) {
  return m == SolveMethod::dense_lu ? "dense-lu" : "power-iteration";
}

std::string to_string(MomentMethod m) {
  return m == MomentMethod::dense_inverse ? "dense-inverse" : "linear-solve";
}

ErgodicityReport ergodicity_check(const ChainTriple& chain) {
  const SparseMatrix* f[] = {&chain.p()};
  return ergodicity_check(std::span<const SparseMatrix* const>(f));
}

ErgodicityReport ergodicity_check(std::span<const SparseMatrix* const> factors) {
  check_factors(factors);
  // Tarjan on the layered graph: node (l, i) -> (l+1 mod k, j) when
  // F_l(i, j) > 0. Layer-0 strongly connected pieces are exactly those of
  // the product, and every cycle length is a multiple of k.
  const Index n = factors.front()->rows();
  const Index k = static_cast<Index>(factors.size());
  const Index total = n * k;
  auto row_begin = [&](Index node) {
    const SparseMatrix& f = *factors[static_cast<std::size_t>(node / n)];
    return f.outerIndexPtr()[node % n];
  };
  auto row_end = [&](Index node) {
    const SparseMatrix& f = *factors[static_cast<std::size_t>(node / n)];
    return f.outerIndexPtr()[node % n + 1];
  };
  auto target = [&](Index node, Index pos) -> Index {
    const Index layer = node / n;
    const SparseMatrix& f = *factors[static_cast<std::size_t>(layer)];
    if (!(f.valuePtr()[pos] > 0.0)) return -1;
    return ((layer + 1) % k) * n + f.innerIndexPtr()[pos];
  };

  constexpr Index kUnvisited = -1;
  std::vector<Index> index(static_cast<std::size_t>(total), kUnvisited);
  std::vector<Index> low(static_cast<std::size_t>(total), 0);
  std::vector<Index> comp(static_cast<std::size_t>(total), -1);
  std::vector<char> on_stack(static_cast<std::size_t>(total), 0);
  std::vector<Index> scc_stack;
  std::vector<std::pair<Index, Index>> call;  // (node, next edge position)
  Index counter = 0;
  Index n_comp = 0;

  for (Index root = 0; root < total; ++root) {
    if (index[root] != kUnvisited) continue;
    call.emplace_back(root, row_begin(root));
    index[root] = low[root] = counter++;
    scc_stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, pos] = call.back();
      if (pos < row_end(v)) {
        const Index w = target(v, pos++);
        if (w < 0) continue;
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          scc_stack.push_back(w);
          on_stack[w] = 1;
          call.emplace_back(w, row_begin(w));
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const Index done = v;
      call.pop_back();
      if (!call.empty()) {
        const Index parent = call.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
      if (low[done] == index[done]) {
        Index w;
        do {
          w = scc_stack.back();
          scc_stack.pop_back();
          on_stack[w] = 0;
          comp[w] = n_comp;
        } while (w != done);
        ++n_comp;
      }
    }
  }

  std::vector<char> closed(static_cast<std::size_t>(n_comp), 1);
  for (Index v = 0; v < total; ++v) {
    for (Index pos = row_begin(v); pos < row_end(v); ++pos) {
      const Index w = target(v, pos);
      if (w >= 0 && comp[w] != comp[v]) closed[comp[v]] = 0;
    }
  }

  ErgodicityReport rep;
  rep.closed_classes = static_cast<int>(std::count(closed.begin(), closed.end(), 1));
  rep.irreducible = true;
  for (Index i = 0; i < n; ++i) {
    if (comp[i] != comp[0]) rep.irreducible = false;
    if (!closed[comp[i]]) rep.transient_states.push_back(i);
  }

  // Period of each closed class: gcd of level differences along in-class
  // edges of a BFS tree, divided by the number of layers.
  rep.aperiodic = rep.closed_classes > 0;
  std::vector<Index> level(static_cast<std::size_t>(total), -1);
  std::vector<char> seen_comp(static_cast<std::size_t>(n_comp), 0);
  for (Index start = 0; start < n; ++start) {
    const Index c = comp[start];
    if (!closed[c] || seen_comp[c]) continue;
    seen_comp[c] = 1;
    std::vector<Index> queue{start};
    level[start] = 0;
    Index g = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const Index v = queue[head];
      for (Index pos = row_begin(v); pos < row_end(v); ++pos) {
        const Index w = target(v, pos);
        if (w < 0 || comp[w] != c) continue;
        if (level[w] < 0) {
          level[w] = level[v] + 1;
          queue.push_back(w);
        } else {
          g = std::gcd(g, std::abs(level[v] + 1 - level[w]));
        }
      }
    }
    const Index period = g / k;
    if (rep.period == 0) rep.period = period;
    if (period != 1) rep.aperiodic = false;
  }
  return rep;
}

StationaryDistribution stationary_distribution(const ChainTriple& chain,
                                               const SolverOptions& opts) {
  const SparseMatrix* f[] = {&chain.p()};
  return stationary_distribution(std::span<const SparseMatrix* const>(f), opts);
}

StationaryDistribution stationary_distribution(
    std::span<const SparseMatrix* const> factors, const SolverOptions& opts) {
  check_factors(factors);
  const ErgodicityReport rep = ergodicity_check(factors);
  if (rep.closed_classes != 1) {
    throw StructuralError("chain has " + std::to_string(rep.closed_classes) +
                          " closed classes; the stationary distribution is "
                          "not unique");
  }
  if (factors.front()->rows() <= opts.dense_cap) return solve_dense(factors, opts);
  return solve_power(factors, opts);
}

DenseMatrix fundamental_matrix(const DenseMatrix& p, const Vector& pi) {
  const Index n = p.rows();
  if (p.cols() != n || pi.size() != n) {
    throw UsageError("fundamental_matrix: shape mismatch");
  }
  const DenseMatrix a = DenseMatrix::Identity(n, n) - p +
                        Vector::Ones(n) * pi.transpose();
  Eigen::PartialPivLU<DenseMatrix> lu(a);
  if (!(lu.rcond() > 1e-13)) {
    throw StructuralError("I - P + Pi is singular; chain is not ergodic");
  }
  return lu.inverse();
}

DenseMatrix fundamental_matrix(const ChainTriple& chain,
                               const StationaryDistribution& pi,
                               const SolverOptions& opts) {
  require_matching(chain, pi);
  if (chain.dim() > opts.dense_cap) {
    throw UsageError("fundamental matrix requested for " +
                     std::to_string(chain.dim()) +
                     " states, above the dense cap");
  }
  return fundamental_matrix(DenseMatrix(chain.p()), pi.pi);
}

double mean_mu(const ChainTriple& chain, const StationaryDistribution& pi) {
  require_matching(chain, pi);
  return pi.pi.dot(chain.expected_payoff());
}

double variance_sigma2(const ChainTriple& chain,
                       const StationaryDistribution& pi,
                       const SolverOptions& opts) {
  require_matching(chain, pi);
  const SparseMatrix* f[] = {&chain.p()};
  const CenteredFundamental zc(std::span<const SparseMatrix* const>(f), pi.pi,
                               opts);
  const Vector a = chain.expected_payoff();
  const double mu = pi.pi.dot(a);
  const Vector row = chain.pdot().transpose() * pi.pi;
  return pi.pi.dot(chain.expected_square_payoff()) - mu * mu +
         2.0 * row.dot(zc.apply(a));
}

MomentResult moments(const ChainTriple& chain, bool with_variance,
                     const SolverOptions& opts) {
  const StationaryDistribution pi = stationary_distribution(chain, opts);
  MomentResult out;
  out.mu = mean_mu(chain, pi);
  out.reduced_dim = chain.dim();
  out.residual = pi.residual;
  out.method = opts.moment_method.value_or(chain.dim() <= opts.dense_cap
                                               ? MomentMethod::dense_inverse
                                               : MomentMethod::linear_solve);
  if (with_variance) out.sigma2 = variance_sigma2(chain, pi, opts);
  return out;
}

DenseMatrix pattern_product(const ChainTriple& a, const ChainTriple& b, int r,
                            int s) {
  const auto f = pattern_factors(a, b, r, s);
  return dense_product(f);
}

double pattern_mean(const ChainTriple& a, const ChainTriple& b, int r, int s,
                    const SolverOptions& opts) {
  const auto f = pattern_factors(a, b, r, s);
  const StationaryDistribution pi = pattern_stationary(f, r, s, opts);
  const PatternRows rows = pattern_rows(a, b, r, s, pi.pi);
  const Vector pay_a = a.expected_payoff();
  const Vector pay_b = b.expected_payoff();
  double total = 0.0;
  for (int u = 0; u < r; ++u) total += rows.alpha[u].dot(pay_a);
  for (int v = 0; v < s; ++v) total += rows.beta[v].dot(pay_b);
  return total / (r + s);
}

double pattern_variance(const ChainTriple& a, const ChainTriple& b, int r,
                        int s, const SolverOptions& opts) {
  const auto f = pattern_factors(a, b, r, s);
  const StationaryDistribution pi = pattern_stationary(f, r, s, opts);
  const PatternRows rows = pattern_rows(a, b, r, s, pi.pi);
  const auto& alpha = rows.alpha;
  const auto& beta = rows.beta;
  const Vector pay_a = a.expected_payoff();
  const Vector sq_a = a.expected_square_payoff();
  const Vector pay_b = b.expected_payoff();
  const Vector sq_b = b.expected_square_payoff();
  const SparseMatrix at = a.p().transpose();
  const SparseMatrix bt = b.p().transpose();

  double diag = 0.0;
  for (int u = 0; u < r; ++u) {
    const double m = alpha[u].dot(pay_a);
    diag += alpha[u].dot(sq_a) - m * m;
  }
  for (int v = 0; v < s; ++v) {
    const double m = beta[v].dot(pay_b);
    diag += beta[v].dot(sq_b) - m * m;
  }

  double cross = 0.0;
  // Pairs of A turns inside one period.
  for (int u = 0; u < r; ++u) {
    const Vector g = a.pdot().transpose() * alpha[u];
    const double gsum = alpha[u].dot(pay_a);
    Vector h = g;
    for (int v = u + 1; v < r; ++v) {
      cross += h.dot(pay_a) - gsum * alpha[v].dot(pay_a);
      h = at * h;
    }
  }
  // An A turn followed by a B turn.
  for (int u = 0; u < r; ++u) {
    const Vector g = a.pdot().transpose() * alpha[u];
    const double gsum = alpha[u].dot(pay_a);
    Vector h = g;
    for (int i = 0; i < r - u - 1; ++i) h = at * h;
    for (int v = 0; v < s; ++v) {
      cross += h.dot(pay_b) - gsum * beta[v].dot(pay_b);
      h = bt * h;
    }
  }
  // Pairs of B turns.
  for (int u = 0; u < s; ++u) {
    const Vector g = b.pdot().transpose() * beta[u];
    const double gsum = beta[u].dot(pay_b);
    Vector h = g;
    for (int v = u + 1; v < s; ++v) {
      cross += h.dot(pay_b) - gsum * beta[v].dot(pay_b);
      h = bt * h;
    }
  }

  // Turns in different periods: left * (Z - Pi) * right, where the four
  // double sums factor through the sums of the row and column vectors.
  Vector left = a.pdot().transpose() * alpha[0];
  for (int u = 1; u < r; ++u) left = at * left + a.pdot().transpose() * alpha[u];
  for (int v = 0; v < s; ++v) left = bt * left;
  Vector left_b = b.pdot().transpose() * beta[0];
  for (int u = 1; u < s; ++u) left_b = bt * left_b + b.pdot().transpose() * beta[u];
  left += left_b;

  Vector right = pay_a;
  for (int v = 1; v < r; ++v) right = a.p() * right + pay_a;
  Vector right_b = pay_b;
  for (int v = 1; v < s; ++v) right_b = b.p() * right_b + pay_b;
  for (int i = 0; i < r; ++i) right_b = a.p() * right_b;
  right += right_b;

  const CenteredFundamental zc(f, pi.pi, opts);
  const double between = left.dot(zc.apply(right));
  return (diag + 2.0 * cross + 2.0 * between) / (r + s);
}

bool zero_payoff_a_applies(const ChainTriple& a, const ChainTriple& b) {
  if (!all_zero(a.pdot()) || !all_zero(a.pddot())) return false;
  return (b.expected_square_payoff() - Vector::Ones(b.dim()))
             .lpNorm<Eigen::Infinity>() <= 1e-12;
}

double pattern_variance_zero_payoff_a(const ChainTriple& a,
                                      const ChainTriple& b, int r, int s,
                                      const SolverOptions& opts) {
  if (!zero_payoff_a_applies(a, b)) {
    throw UsageError("short pattern variance needs a payoff-free A and B "
                     "payoffs of +-1");
  }
  const auto f = pattern_factors(a, b, r, s);
  const StationaryDistribution pi = pattern_stationary(f, r, s, opts);
  const PatternRows rows = pattern_rows(a, b, r, s, pi.pi);
  const auto& beta = rows.beta;
  const Vector pay_b = b.expected_payoff();
  const SparseMatrix bt = b.p().transpose();

  double total = s;
  for (int v = 0; v < s; ++v) {
    const double m = beta[v].dot(pay_b);
    total -= m * m;
  }
  double bracket = 0.0;
  for (int u = 0; u < s; ++u) {
    Vector h = b.pdot().transpose() * beta[u];
    const double gsum = beta[u].dot(pay_b);
    for (int v = u + 1; v < s; ++v) {
      bracket += h.dot(pay_b) - gsum * beta[v].dot(pay_b);
      h = bt * h;
    }
  }
  Vector left = b.pdot().transpose() * beta[0];
  for (int u = 1; u < s; ++u) left = bt * left + b.pdot().transpose() * beta[u];
  Vector right = pay_b;
  for (int v = 1; v < s; ++v) right = b.p() * right + pay_b;
  for (int i = 0; i < r; ++i) right = a.p() * right;
  const CenteredFundamental zc(f, pi.pi, opts);
  bracket += left.dot(zc.apply(right));
  return (total + 2.0 * bracket) / (r + s);
}

MomentResult pattern_moments(const ChainTriple& a, const ChainTriple& b, int r,
                             int s, bool with_variance,
                             const SolverOptions& opts) {
  MomentResult out;
  out.mu = pattern_mean(a, b, r, s, opts);
  out.reduced_dim = a.dim();
  out.method = opts.moment_method.value_or(a.dim() <= opts.dense_cap
                                               ? MomentMethod::dense_inverse
                                               : MomentMethod::linear_solve);
  if (with_variance) {
    out.sigma2 = zero_payoff_a_applies(a, b)
                     ? pattern_variance_zero_payoff_a(a, b, r, s, opts)
                     : pattern_variance(a, b, r, s, opts);
  }
  return out;
}

ChainTriple capital_dependent_fixture(CapitalGame kind) {
  DenseMatrix pa(3, 3);
  pa << 0, 0.5, 0.5, 0.5, 0, 0.5, 0.5, 0.5, 0;
  DenseMatrix pb(3, 3);
  pb << 0, 0.1, 0.9, 0.25, 0, 0.75, 0.75, 0.25, 0;
  DenseMatrix w(3, 3);
  w << 0, 1, -1, -1, 0, 1, 1, -1, 0;
  switch (kind) {
    case CapitalGame::A:
      return ChainTriple::from_payoff_matrix(pa, w);
    case CapitalGame::B:
      return ChainTriple::from_payoff_matrix(pb, w);
    case CapitalGame::C_half:
      return ChainTriple::from_payoff_matrix(0.5 * (pa + pb), w);
  }
  throw UsageError("unknown capital-dependent game");
}

}  // namespace parrondo
