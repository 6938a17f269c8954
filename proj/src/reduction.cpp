#include "parrondo/reduction.hpp"

#include "parrondo/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <utility>

namespace parrondo {

namespace {

constexpr std::uint32_t kUnassigned = 0xFFFFFFFFu;

using ClassSums = std::vector<std::pair<std::uint32_t, double>>;

ClassSums class_sums(const SparseMatrix& m, Index row, const QuotientMap& q) {
  ClassSums out;
  for (SparseMatrix::InnerIterator it(m, row); it; ++it) {
    out.emplace_back(q.class_of(static_cast<std::uint32_t>(it.col())),
                     it.value());
  }
  std::sort(out.begin(), out.end());
  ClassSums merged;
  for (const auto& [c, v] : out) {
    if (!merged.empty() && merged.back().first == c) {
      merged.back().second += v;
    } else {
      merged.emplace_back(c, v);
    }
  }
  return merged;
}

bool sums_agree(const ClassSums& a, const ClassSums& b, double tol) {
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      if (std::abs(a[i++].second) > tol) return false;
    } else if (i == a.size() || b[j].first < a[i].first) {
      if (std::abs(b[j++].second) > tol) return false;
    } else {
      if (std::abs(a[i++].second - b[j++].second) > tol) return false;
    }
  }
  return true;
}

bool channel_lumpable(const SparseMatrix& m, const QuotientMap& q, double tol) {
  std::vector<ClassSums> reference(q.classes());
  for (std::uint32_t c = 0; c < q.classes(); ++c) {
    reference[c] = class_sums(m, q.representative(c), q);
  }
  for (std::uint32_t x = 0; x < q.states(); ++x) {
    const std::uint32_t c = q.class_of(x);
    if (q.representative(c) == x) continue;
    if (!sums_agree(class_sums(m, x, q), reference[c], tol)) return false;
  }
  return true;
}

SparseMatrix lump_channel(const SparseMatrix& m, const QuotientMap& q) {
  const Index dim = static_cast<Index>(q.classes());
  std::vector<Eigen::Triplet<double>> t;
  for (std::uint32_t c = 0; c < q.classes(); ++c) {
    for (const auto& [col, v] : class_sums(m, q.representative(c), q)) {
      t.emplace_back(c, col, v);
    }
  }
  SparseMatrix out(dim, dim);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

bool channel_invariant(const SparseMatrix& m, int players, bool use_reflection) {
  for (Index i = 0; i < m.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) {
      const BitConfig from{static_cast<std::uint32_t>(i)};
      const BitConfig to{static_cast<std::uint32_t>(it.col())};
      const Index ri = rotate(from, players).bits;
      const Index rj = rotate(to, players).bits;
      if (std::abs(m.coeff(ri, rj) - it.value()) > 1e-12) return false;
      if (use_reflection) {
        const Index fi = reflect(from, players).bits;
        const Index fj = reflect(to, players).bits;
        if (std::abs(m.coeff(fi, fj) - it.value()) > 1e-12) return false;
      }
    }
  }
  return true;
}

void require_spin_space(const ChainTriple& chain, const QuotientMap& q) {
  if (static_cast<std::size_t>(chain.dim()) != q.states()) {
    throw UsageError("chain has " + std::to_string(chain.dim()) +
                     " states but the quotient map covers " +
                     std::to_string(q.states()));
  }
}

std::uint64_t euler_phi(std::uint64_t n) {
  std::uint64_t result = n;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      while (n % p == 0) n /= p;
      result -= result / p;
    }
  }
  if (n > 1) result -= result / n;
  return result;
}

void check_players(int players) {
  if (players < 3 || players > kMaxPlayers) {
    throw UsageError("number of players must be in [3, " +
                     std::to_string(kMaxPlayers) + "]");
  }
}

}  // namespace

std::string to_string(SymmetryGroup g) {
  switch (g) {
    case SymmetryGroup::cyclic:
      return "cyclic";
    case SymmetryGroup::dihedral:
      return "dihedral";
    case SymmetryGroup::trivial:
      return "trivial";
  }
  return "unknown";
}

BitConfig rotate(BitConfig eta, int players) {
  const std::uint32_t mask = (1U << players) - 1U;
  return BitConfig{((eta.bits << 1) | (eta.bits >> (players - 1))) & mask};
}

BitConfig reflect(BitConfig eta, int players) {
  std::uint32_t out = 0;
  for (int i = 0; i < players; ++i) {
    out |= ((eta.bits >> i) & 1U) << (players - 1 - i);
  }
  return BitConfig{out};
}

QuotientMap::QuotientMap(SymmetryGroup group, int players,
                         std::vector<std::uint32_t> class_of,
                         std::vector<std::uint32_t> class_size,
                         std::vector<std::uint32_t> representative)
    : group_(group),
      players_(players),
      class_of_(std::move(class_of)),
      class_size_(std::move(class_size)),
      representative_(std::move(representative)) {
  if (class_size_.size() != representative_.size()) {
    throw UsageError("class sizes and representatives disagree in length");
  }
  const std::uint64_t total =
      std::accumulate(class_size_.begin(), class_size_.end(), std::uint64_t{0});
  if (total != class_of_.size()) {
    throw UsageError("class sizes do not add up to the number of states");
  }
  for (std::size_t c = 0; c < representative_.size(); ++c) {
    if (class_of_.at(representative_[c]) != c) {
      throw UsageError("representative outside its class");
    }
  }
}

QuotientMap QuotientMap::trivial(std::size_t states) {
  std::vector<std::uint32_t> ids(states);
  std::iota(ids.begin(), ids.end(), 0U);
  return QuotientMap(SymmetryGroup::trivial, -1, ids,
                     std::vector<std::uint32_t>(states, 1U), ids);
}

QuotientMap orbits(int players, SymmetryGroup group) {
  check_players(players);
  const std::uint32_t states = 1U << players;
  if (group == SymmetryGroup::trivial) {
    std::vector<std::uint32_t> ids(states);
    std::iota(ids.begin(), ids.end(), 0U);
    return QuotientMap(group, players, ids, std::vector<std::uint32_t>(states, 1U),
                       ids);
  }

  // Scanning in increasing order makes each new state the minimum of its
  // orbit.
  std::vector<std::uint32_t> class_of(states, kUnassigned);
  std::vector<std::uint32_t> reps;
  std::vector<std::uint32_t> sizes;
  for (std::uint32_t s = 0; s < states; ++s) {
    if (class_of[s] != kUnassigned) continue;
    const auto id = static_cast<std::uint32_t>(reps.size());
    std::uint32_t size = 0;
    auto visit_rotations = [&](BitConfig start) {
      BitConfig x = start;
      for (int i = 0; i < players; ++i) {
        if (class_of[x.bits] == kUnassigned) {
          class_of[x.bits] = id;
          ++size;
        }
        x = rotate(x, players);
      }
    };
    visit_rotations(BitConfig{s});
    if (group == SymmetryGroup::dihedral) visit_rotations(reflect(BitConfig{s}, players));
    reps.push_back(s);
    sizes.push_back(size);
  }

  std::vector<std::uint32_t> order(reps.size());
  std::iota(order.begin(), order.end(), 0U);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return std::popcount(reps[a]) < std::popcount(reps[b]);
  });
  std::vector<std::uint32_t> new_id(reps.size());
  std::vector<std::uint32_t> sorted_reps(reps.size());
  std::vector<std::uint32_t> sorted_sizes(reps.size());
  for (std::uint32_t k = 0; k < order.size(); ++k) {
    new_id[order[k]] = k;
    sorted_reps[k] = reps[order[k]];
    sorted_sizes[k] = sizes[order[k]];
  }
  for (auto& c : class_of) c = new_id[c];
  return QuotientMap(group, players, std::move(class_of), std::move(sorted_sizes),
                     std::move(sorted_reps));
}

const QuotientMap& cached_orbits(int players, SymmetryGroup group) {
  static std::mutex mutex;
  static std::map<std::pair<int, SymmetryGroup>, std::unique_ptr<QuotientMap>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{players, group}];
  if (!slot) slot = std::make_unique<QuotientMap>(orbits(players, group));
  return *slot;
}

std::uint64_t necklace_count(int players, SymmetryGroup group) {
  check_players(players);
  const auto n = static_cast<std::uint64_t>(players);
  if (group == SymmetryGroup::trivial) return std::uint64_t{1} << n;
  std::uint64_t sum = 0;
  for (std::uint64_t d = 1; d <= n; ++d) {
    if (n % d == 0) sum += euler_phi(d) * (std::uint64_t{1} << (n / d));
  }
  const std::uint64_t necklaces = sum / n;
  if (group == SymmetryGroup::cyclic) return necklaces;
  if (n % 2 == 1) return (necklaces + (std::uint64_t{1} << ((n + 1) / 2))) / 2;
  return (necklaces + 3 * (std::uint64_t{1} << (n / 2 - 1))) / 2;
}

bool check_lumpability(const ChainTriple& chain, const QuotientMap& q,
                       double tol) {
  require_spin_space(chain, q);
  return channel_lumpable(chain.p(), q, tol);
}

bool check_g_invariance(const ChainTriple& chain, const QuotientMap& q) {
  require_spin_space(chain, q);
  if (q.group() == SymmetryGroup::trivial) return true;
  const bool refl = q.group() == SymmetryGroup::dihedral;
  return channel_invariant(chain.p(), q.players(), refl) &&
         channel_invariant(chain.pdot(), q.players(), refl) &&
         channel_invariant(chain.pddot(), q.players(), refl);
}

ChainTriple lump(const ChainTriple& chain, const QuotientMap& q) {
  require_spin_space(chain, q);
  constexpr double tol = 1e-12;
  if (!channel_lumpable(chain.p(), q, tol) ||
      !channel_lumpable(chain.pdot(), q, tol) ||
      !channel_lumpable(chain.pddot(), q, tol)) {
    throw StructuralError("chain is not lumpable with respect to the " +
                          to_string(q.group()) + " classes");
  }
  return ChainTriple(lump_channel(chain.p(), q), lump_channel(chain.pdot(), q),
                     lump_channel(chain.pddot(), q));
}

StationaryDistribution lift_stationary(const StationaryDistribution& pi_bar,
                                       const QuotientMap& q) {
  if (static_cast<std::size_t>(pi_bar.pi.size()) != q.classes()) {
    throw UsageError("quotient distribution has the wrong length");
  }
  StationaryDistribution out = pi_bar;
  out.pi.resize(static_cast<Index>(q.states()));
  for (std::uint32_t x = 0; x < q.states(); ++x) {
    const std::uint32_t c = q.class_of(x);
    out.pi[x] = pi_bar.pi[c] / q.class_size(c);
  }
  return out;
}

}  // namespace parrondo
