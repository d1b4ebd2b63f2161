#include "cohstat/counting.hpp"

#include <stdexcept>
#include <utility>

namespace cohstat {

BigCount binomial(const BigCount& n, std::uint64_t k) {
  if (n < 0) throw std::invalid_argument("binomial: negative n");
  if (k > n) return 0;
  // Multiplicative form; each partial product of j consecutive integers is
  // divisible by j!, so the running division stays exact.
  const BigCount base = n - k;
  BigCount result = 1;
  for (std::uint64_t j = 1; j <= k; ++j) {
    result *= base + j;
    result /= j;
  }
  return result;
}

BigCount binomial(std::uint64_t n, std::uint64_t k) {
  return binomial(BigCount(n), k);
}

BigCount coherent_degeneracy(unsigned g) {
  if (g == 0) throw std::invalid_argument("coherent_degeneracy: g must be >= 1");
  return (BigCount(1) << g) - 1;
}

BigCount excess_degeneracy(unsigned g) {
  return coherent_degeneracy(g) - g;
}

BigCount microstate_count(const BigCount& G, std::uint64_t n) {
  if (G < 1) throw std::invalid_argument("microstate_count: G must be >= 1");
  // (G + n - 1)! / ((G - 1)! n!) = C(G + n - 1, n)
  return binomial(BigCount(G + n - 1), n);
}

BigCount distinguishable_count(const BigCount& G, std::uint64_t n) {
  if (G < 1) throw std::invalid_argument("distinguishable_count: G must be >= 1");
  BigCount result = 1;
  BigCount base = G;
  std::uint64_t e = n;
  while (e > 0) {
    if (e & 1) result *= base;
    e >>= 1;
    if (e > 0) base *= base;
  }
  return result;
}

LevelSpec::LevelSpec(unsigned g_, std::uint64_t occupancy_)
    : g(g_), occupancy(occupancy_) {
  if (g == 0) throw std::invalid_argument("LevelSpec: g must be >= 1");
}

BigCount LevelSpec::coherent_degeneracy() const {
  return cohstat::coherent_degeneracy(g);
}

BigCount LevelSpec::excess_degeneracy() const {
  return cohstat::excess_degeneracy(g);
}

MacrostateSpec::MacrostateSpec(std::vector<LevelSpec> levels_)
    : levels(std::move(levels_)) {
  if (levels.empty())
    throw std::invalid_argument("MacrostateSpec: needs at least one level");
}

std::uint64_t MacrostateSpec::total_occupancy() const {
  std::uint64_t total = 0;
  for (const auto& level : levels) total += level.occupancy;
  return total;
}

BigCount macrostate_weight(const MacrostateSpec& m) {
  BigCount weight = 1;
  for (const auto& level : m.levels)
    weight *= microstate_count(level.coherent_degeneracy(), level.occupancy);
  return weight;
}

namespace {

// Sums macrostate weights over all occupancy compositions of the remaining
// particles onto levels[index..].
BigCount omega_over_compositions(const std::vector<BigCount>& degeneracies,
                                 std::size_t index, std::uint64_t remaining) {
  if (index + 1 == degeneracies.size())
    return microstate_count(degeneracies[index], remaining);
  BigCount total = 0;
  for (std::uint64_t here = 0; here <= remaining; ++here) {
    total += microstate_count(degeneracies[index], here) *
             omega_over_compositions(degeneracies, index + 1, remaining - here);
  }
  return total;
}

} // namespace

BigCount total_omega(const std::vector<unsigned>& degeneracies,
                     std::uint64_t n_total) {
  if (degeneracies.empty())
    throw std::invalid_argument("total_omega: needs at least one level");
  std::vector<BigCount> G;
  G.reserve(degeneracies.size());
  for (unsigned g : degeneracies) G.push_back(coherent_degeneracy(g));
  return omega_over_compositions(G, 0, n_total);
}

std::vector<std::vector<unsigned>> coherent_subsets(unsigned g) {
  if (g == 0) throw std::invalid_argument("coherent_subsets: g must be >= 1");
  if (g > 23)
    throw std::length_error("coherent_subsets: 2^g - 1 subsets is beyond the enumeration bound");
  std::vector<std::vector<unsigned>> subsets;
  subsets.reserve((std::size_t(1) << g) - 1);
  // Size-major order; within one size, lexicographic combinations.
  for (unsigned size = 1; size <= g; ++size) {
    std::vector<unsigned> combo(size);
    for (unsigned i = 0; i < size; ++i) combo[i] = i;
    while (true) {
      subsets.push_back(combo);
      // next lexicographic combination of `size` out of g
      int pos = static_cast<int>(size) - 1;
      while (pos >= 0 && combo[pos] == g - size + pos) --pos;
      if (pos < 0) break;
      ++combo[pos];
      for (unsigned i = pos + 1; i < size; ++i) combo[i] = combo[i - 1] + 1;
    }
  }
  return subsets;
}

std::vector<OccupationMap> enumerate_coherent_sequences(unsigned g,
                                                        std::uint64_t n) {
  if (g == 0)
    throw std::invalid_argument("enumerate_coherent_sequences: g must be >= 1");
  const BigCount count = coherent_degeneracy(g);
  if (microstate_count(count, n) * count > kMaxEnumerationCells)
    throw std::length_error(
        "enumerate_coherent_sequences: enumeration exceeds the documented bound");
  const std::size_t m = static_cast<std::size_t>(count);

  // Walk the compositions of n into m parts in reverse-lexicographic order,
  // starting from all mass on the first subset. The successor step moves one
  // particle off the last nonzero interior slot and restacks the tail.
  std::vector<OccupationMap> out;
  OccupationMap current(m, 0);
  current[0] = n;
  out.push_back(current);
  while (m > 1 && current[m - 1] != n) {
    const std::uint64_t tail = current[m - 1];
    std::size_t j = m - 2;
    while (current[j] == 0) --j;
    --current[j];
    current[m - 1] = 0;
    current[j + 1] += tail + 1;
    out.push_back(current);
  }
  return out;
}

} // namespace cohstat
