#pragma once

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace cohstat {

/// Exact nonnegative integer for combinatorial counts. Factorial ratios
/// overflow 64-bit quickly, so every count in this module is arbitrary
/// precision and no floating point is used.
using BigCount = boost::multiprecision::cpp_int;

/// Binomial coefficient C(n,k) = n!/((n-k)! k!), exact. Returns 0 for k > n.
BigCount binomial(std::uint64_t n, std::uint64_t k);

/// Binomial coefficient with arbitrary-precision top argument, exact.
BigCount binomial(const BigCount& n, std::uint64_t k);

/// Number of effective states of a level with g sublevels when a particle
/// may occupy any nonempty subset of the sublevels as one coherent state:
/// G(g) = sum_{k=1..g} C(g,k) = 2^g - 1.
/// Throws std::invalid_argument for g = 0.
BigCount coherent_degeneracy(unsigned g);

/// Excess degeneracy L(g) = G(g) - g = sum_{k=2..g} C(g,k). Zero iff g = 1.
BigCount excess_degeneracy(unsigned g);

/// Number of distinct placements of n indistinguishable particles over G
/// states: (G + n - 1)! / ((G - 1)! n!). Throws std::invalid_argument for
/// G < 1.
BigCount microstate_count(const BigCount& G, std::uint64_t n);

/// Placements of n distinguishable particles over G states: G^n. Included
/// for completeness as the standard labeled-particle counterpart of
/// microstate_count; throws std::invalid_argument for G < 1.
BigCount distinguishable_count(const BigCount& G, std::uint64_t n);

/// One energy level: g sublevels holding `occupancy` particles.
struct LevelSpec {
  unsigned g;              ///< sublevel count, >= 1
  std::uint64_t occupancy; ///< particles in this level

  LevelSpec(unsigned g_, std::uint64_t occupancy_);

  BigCount coherent_degeneracy() const;
  BigCount excess_degeneracy() const;
};

/// One macrostate: an ordered, nonempty list of levels with fixed occupancies.
struct MacrostateSpec {
  std::vector<LevelSpec> levels;

  explicit MacrostateSpec(std::vector<LevelSpec> levels_);

  std::uint64_t total_occupancy() const;
};

/// Number of microstates compatible with a macrostate:
/// prod_j microstate_count(G(g_j), N_j). Invariant under level permutation.
BigCount macrostate_weight(const MacrostateSpec& m);

/// Total microstate count over all ways to distribute n_total particles
/// across the given levels (degeneracies g_j, occupancies free):
/// Omega = sum over compositions (N_1,...,N_m), sum N_j = n_total, of the
/// macrostate weight. Computed by explicit composition enumeration; equals
/// microstate_count(sum_j G(g_j), n_total) by the stars-and-bars identity,
/// which tests use as an independent cross-check.
/// Throws std::invalid_argument for an empty level list.
BigCount total_omega(const std::vector<unsigned>& degeneracies,
                     std::uint64_t n_total);

/// Canonical list of the 2^g - 1 nonempty sublevel subsets of {0,...,g-1},
/// ordered by size then lexicographically. This fixes the column order of
/// occupation maps.
std::vector<std::vector<unsigned>> coherent_subsets(unsigned g);

/// Per-subset particle counts, aligned with coherent_subsets(g).
using OccupationMap = std::vector<std::uint64_t>;

/// Brute-force enumeration of every distinct way to place n indistinguishable
/// particles on the coherent subsets of a g-sublevel system. Each entry
/// records, per subset, how many particles coherently occupy exactly that
/// subset. Output order is deterministic: counts are assigned to subsets in
/// canonical order, largest-first recursion.
///
/// Practical bound: the enumeration refuses to emit more than ~8M counters
/// in total (maps x subsets, kMaxEnumerationCells), which comfortably covers
/// g <= 4, n <= 6 (at most 38760 maps). Throws std::invalid_argument for
/// g = 0 and std::length_error beyond the bound.
std::vector<OccupationMap> enumerate_coherent_sequences(unsigned g,
                                                        std::uint64_t n);

/// Enumeration size guard for enumerate_coherent_sequences.
inline constexpr std::uint64_t kMaxEnumerationCells = 8u << 20;

} // namespace cohstat
