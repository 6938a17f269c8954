#pragma once

// Symmetry reduction of chains on {0,1}^N: necklace (rotation) and bracelet
// (rotation + reflection) classes, lumpability checks, quotient chains, and
// lifting a quotient stationary distribution back to {0,1}^N.

#include "parrondo/chain_core.hpp"
#include "parrondo/spatial_games.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace parrondo {

enum class SymmetryGroup { cyclic, dihedral, trivial };

std::string to_string(SymmetryGroup g);

/// Rotation eta -> (eta(2), ..., eta(N), eta(1)).
BitConfig rotate(BitConfig eta, int players);
/// Reflection eta -> (eta(N), ..., eta(1)).
BitConfig reflect(BitConfig eta, int players);

/// Partition of {0,1}^N into orbits. Classes are ordered by the number of
/// winners in the representative, then by representative value, which for
/// N = 4 gives {0}, {1,2,4,8}, {3,6,9,12}, {5,10}, {7,11,13,14}, {15}.
class QuotientMap {
 public:
  QuotientMap(SymmetryGroup group, int players,
              std::vector<std::uint32_t> class_of,
              std::vector<std::uint32_t> class_size,
              std::vector<std::uint32_t> representative);

  /// Every state in its own class (players = -1 when not a spin space).
  static QuotientMap trivial(std::size_t states);

  SymmetryGroup group() const noexcept { return group_; }
  int players() const noexcept { return players_; }
  std::size_t states() const noexcept { return class_of_.size(); }
  std::size_t classes() const noexcept { return representative_.size(); }

  std::uint32_t class_of(std::uint32_t state) const { return class_of_[state]; }
  std::uint32_t class_size(std::uint32_t c) const { return class_size_[c]; }
  std::uint32_t representative(std::uint32_t c) const {
    return representative_[c];
  }
  const std::vector<std::uint32_t>& class_sizes() const noexcept {
    return class_size_;
  }

 private:
  SymmetryGroup group_;
  int players_;
  std::vector<std::uint32_t> class_of_;
  std::vector<std::uint32_t> class_size_;
  std::vector<std::uint32_t> representative_;
};

/// Orbits of {0,1}^N under rotations (and reflections for dihedral).
QuotientMap orbits(int players, SymmetryGroup group);

/// Memoized orbits; the returned reference stays valid for the process.
const QuotientMap& cached_orbits(int players, SymmetryGroup group);

/// Necklace / bracelet counts by Burnside's lemma.
std::uint64_t necklace_count(int players, SymmetryGroup group);

/// Block row sums of P agree within `tol` for every pair of equivalent rows.
bool check_lumpability(const ChainTriple& chain, const QuotientMap& q,
                       double tol = 1e-12);

/// P(eta_s, zeta_s) = P(eta, zeta) on every channel for the group
/// generators (one rotation, plus one reflection for dihedral).
bool check_g_invariance(const ChainTriple& chain, const QuotientMap& q);

/// Quotient chain: Pbar([x],[y]) = sum_{y' in [y]} P(x, y'), and the same
/// rule on Pdot and Pddot. Throws StructuralError if any channel is not
/// lumpable.
ChainTriple lump(const ChainTriple& chain, const QuotientMap& q);

/// pi(eta) = pibar([eta]) / |[eta]|.
StationaryDistribution lift_stationary(const StationaryDistribution& pi_bar,
                                       const QuotientMap& q);

}  // namespace parrondo
