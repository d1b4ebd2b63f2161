#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace cohstat {

template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// Exponent of the generalized Boltzmann weight, as a polynomial in the
/// dimensionless eps = beta*E:
///
///   eps_star(eps) = eps + alpha_1 eps^2 + ... + alpha_m eps^{m+1}.
///
/// The constant term is zero and the linear coefficient is one, so the
/// series reduces to the equilibrium exponent beta*E when every alpha
/// vanishes. beta = 1/kT carries units of 1/energy; the alphas are
/// dimensionless.
template <typename Scalar = double>
struct ExponentSeries {
  Scalar beta;
  ArrayX<Scalar> alphas; ///< alpha_1..alpha_m, coefficients of eps^2..eps^{m+1}

  explicit ExponentSeries(Scalar beta_, ArrayX<Scalar> alphas_ = {})
      : beta(beta_), alphas(std::move(alphas_)) {
    if (!(beta > Scalar(0)))
      throw std::invalid_argument("ExponentSeries: beta must be > 0");
  }

  static ExponentSeries equilibrium(Scalar beta_) {
    return ExponentSeries(beta_);
  }

  /// Highest power of beta*E appearing in the exponent.
  Eigen::Index order() const { return alphas.size() + 1; }
};

/// Finite energy spectrum with a normalized probability on it.
/// Invariants checked on construction: equal lengths >= 1, p_j >= 0,
/// sum p_j = 1 within 1e-12.
template <typename Scalar = double>
class DiscreteDistribution {
 public:
  DiscreteDistribution(ArrayX<Scalar> energies, ArrayX<Scalar> probabilities)
      : energies_(std::move(energies)), probabilities_(std::move(probabilities)) {
    if (energies_.size() == 0)
      throw std::invalid_argument("DiscreteDistribution: empty spectrum");
    if (energies_.size() != probabilities_.size())
      throw std::invalid_argument("DiscreteDistribution: length mismatch");
    if ((probabilities_ < Scalar(0)).any())
      throw std::invalid_argument("DiscreteDistribution: negative probability");
    if (std::abs(probabilities_.sum() - Scalar(1)) > normalization_tolerance())
      throw std::invalid_argument("DiscreteDistribution: probabilities must sum to 1");
  }

  static constexpr Scalar normalization_tolerance() { return Scalar(1e-12); }

  const ArrayX<Scalar>& energies() const { return energies_; }
  const ArrayX<Scalar>& probabilities() const { return probabilities_; }
  Eigen::Index size() const { return energies_.size(); }

 private:
  ArrayX<Scalar> energies_;
  ArrayX<Scalar> probabilities_;
};

/// Evaluates eps_star(eps) = eps + alpha_1 eps^2 + ... by Horner's rule.
template <typename Scalar>
Scalar epsilon_star(Scalar eps, const ExponentSeries<Scalar>& series) {
  Scalar acc = Scalar(0);
  for (Eigen::Index i = series.alphas.size() - 1; i >= 0; --i)
    acc = series.alphas[i] + acc * eps;
  return eps + acc * eps * eps;
}

/// Mean occupation per coherent state, N/G = 1/(exp(eps_star) - 1).
/// Requires eps_star > 0; at or below zero the occupation diverges or turns
/// negative, so such input is rejected as unphysical.
template <typename Scalar>
Scalar modified_bose_einstein(Scalar eps_star) {
  if (!(eps_star > Scalar(0)))
    throw std::domain_error("modified_bose_einstein: requires eps_star > 0");
  return Scalar(1) / (std::exp(eps_star) - Scalar(1));
}

/// Unnormalized generalized Boltzmann weight
///
///   w(E) = exp(-beta*E - alpha_1 (beta*E)^2 - alpha_2 (beta*E)^3 - ...),
///
/// i.e. exp(-eps_star(beta*E)). Evaluated by explicit term-by-term power
/// accumulation, which gives an independent route against
/// exp(-epsilon_star(...)). A diverging exponent (weight overflowing to
/// infinity) is reported as std::range_error; underflow to zero is allowed.
template <typename Scalar>
Scalar modified_boltzmann_weight(Scalar energy, const ExponentSeries<Scalar>& series) {
  const Scalar eps = series.beta * energy;
  Scalar exponent = eps;
  Scalar power = eps;
  for (Eigen::Index i = 0; i < series.alphas.size(); ++i) {
    power *= eps;
    exponent += series.alphas[i] * power;
  }
  if (!(exponent > -Scalar(709)))
    throw std::range_error("modified_boltzmann_weight: exponent overflow");
  return std::exp(-exponent);
}

/// Partition sum Z = sum_j w(E_j) over a finite spectrum. Strictly positive;
/// an empty spectrum or a sum that underflows to zero is rejected.
template <typename Derived>
typename Derived::Scalar partition_function(
    const Eigen::ArrayBase<Derived>& energies,
    const ExponentSeries<typename Derived::Scalar>& series) {
  using Scalar = typename Derived::Scalar;
  if (energies.size() == 0)
    throw std::invalid_argument("partition_function: empty spectrum");
  Scalar z = Scalar(0);
  for (Eigen::Index j = 0; j < energies.size(); ++j)
    z += modified_boltzmann_weight(energies[j], series);
  if (!(z > Scalar(0)) || !std::isfinite(z))
    throw std::range_error("partition_function: sum is not a positive finite number");
  return z;
}

/// Probability p_j = w(E_j) / Z on the given spectrum.
template <typename Derived>
DiscreteDistribution<typename Derived::Scalar> normalize(
    const Eigen::ArrayBase<Derived>& energies,
    const ExponentSeries<typename Derived::Scalar>& series) {
  using Scalar = typename Derived::Scalar;
  const Scalar z = partition_function(energies, series);
  ArrayX<Scalar> p(energies.size());
  for (Eigen::Index j = 0; j < energies.size(); ++j)
    p[j] = modified_boltzmann_weight(energies[j], series) / z;
  return DiscreteDistribution<Scalar>(energies.derived(), std::move(p));
}

/// |w(EA+EB) - w(EA) w(EB)| for the unnormalized weight. Exactly zero (to
/// rounding) at equilibrium, where the weight is a pure exponential and
/// factorizes over independent subsystems; generically nonzero once any
/// alpha correction is present, since the factorization then survives only
/// in the eps_star variable, not in the energy.
template <typename Scalar>
Scalar factorization_residual(Scalar energy_a, Scalar energy_b,
                              const ExponentSeries<Scalar>& series) {
  const Scalar joint = modified_boltzmann_weight(energy_a + energy_b, series);
  const Scalar split = modified_boltzmann_weight(energy_a, series) *
                       modified_boltzmann_weight(energy_b, series);
  return std::abs(joint - split);
}

} // namespace cohstat
