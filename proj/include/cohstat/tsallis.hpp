#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "cohstat/distributions.hpp"

namespace cohstat {

/// Entropic index q with the temperature scale beta = 1/kT and the entropy
/// unit constant k. q = 1 is served by dedicated limit branches of every
/// q-formula; q <= 0 is out of the supported regime.
template <typename Scalar = double>
struct QParams {
  Scalar q;
  Scalar beta;
  Scalar k;

  explicit QParams(Scalar q_, Scalar beta_, Scalar k_ = Scalar(1))
      : q(q_), beta(beta_), k(k_) {
    if (!(q > Scalar(0)))
      throw std::invalid_argument("QParams: q must be > 0");
    if (!(beta > Scalar(0)))
      throw std::invalid_argument("QParams: beta must be > 0");
    if (!(k > Scalar(0)))
      throw std::invalid_argument("QParams: k must be > 0");
  }
};

/// Coefficient c_n of (beta*E)^n in the exponent -sum_n c_n (beta*E)^n of the
/// q-exponential's log expansion: c_1 = 1 and c_n = (1-q)^{n-1} / n, from
/// ln(1-x) = -x - x^2/2 - x^3/3 - ... with x = (1-q) beta E.
template <typename Scalar>
Scalar q_series_coefficient(int n, Scalar q) {
  if (n < 1) throw std::invalid_argument("q_series_coefficient: n must be >= 1");
  if (n == 1) return Scalar(1);
  return std::pow(Scalar(1) - q, n - 1) / Scalar(n);
}

/// Unnormalized q-exponential weight [1 - (1-q) beta E]^{1/(1-q)}; exactly
/// exp(-beta E) at q = 1. Outside the support 1 - (1-q) beta E > 0 the weight
/// is undefined (the q-distribution cutoff) and a domain error is thrown
/// rather than clamping to zero.
template <typename Scalar>
Scalar q_exponential_weight(Scalar energy, const QParams<Scalar>& params) {
  const Scalar x = params.beta * energy;
  if (params.q == Scalar(1)) return std::exp(-x);
  const Scalar support = Scalar(1) - (Scalar(1) - params.q) * x;
  if (!(support > Scalar(0)))
    throw std::domain_error("q_exponential_weight: outside the support cutoff");
  return std::pow(support, Scalar(1) / (Scalar(1) - params.q));
}

/// |exp(-sum_{n=1..order} c_n(q) (beta E)^n) - q_exponential_weight|. The
/// truncation error vanishes geometrically like |(1-q) beta E|^{order+1};
/// requires |(1-q) beta E| < 1 so the log expansion converges.
template <typename Scalar>
Scalar series_vs_q_residual(Scalar energy, const QParams<Scalar>& params,
                            int order) {
  if (order < 1)
    throw std::invalid_argument("series_vs_q_residual: order must be >= 1");
  const Scalar eps = params.beta * energy;
  if (!(std::abs((Scalar(1) - params.q) * eps) < Scalar(1)))
    throw std::domain_error(
        "series_vs_q_residual: requires |(1-q) beta E| < 1");
  Scalar exponent = Scalar(0);
  Scalar power = Scalar(1);
  for (int n = 1; n <= order; ++n) {
    power *= eps;
    exponent += q_series_coefficient(n, params.q) * power;
  }
  return std::abs(std::exp(-exponent) - q_exponential_weight(energy, params));
}

/// Tsallis entropy S_q = k (1 - sum_j p_j^q) / (q - 1); the q = 1 branch is
/// the Boltzmann-Gibbs form -k sum_j p_j ln p_j with 0 ln 0 = 0.
template <typename Scalar>
Scalar tsallis_entropy(const DiscreteDistribution<Scalar>& dist,
                       const QParams<Scalar>& params) {
  const auto& p = dist.probabilities();
  if (params.q == Scalar(1)) {
    Scalar s = Scalar(0);
    for (Eigen::Index j = 0; j < p.size(); ++j)
      if (p[j] > Scalar(0)) s -= p[j] * std::log(p[j]);
    return params.k * s;
  }
  Scalar sum_pq = Scalar(0);
  for (Eigen::Index j = 0; j < p.size(); ++j)
    sum_pq += std::pow(p[j], params.q);
  return params.k * (Scalar(1) - sum_pq) / (params.q - Scalar(1));
}

/// Escort expectation <E>_q = sum_j p_j^q E_j / sum_j p_j^q; the ordinary
/// mean at q = 1.
template <typename Scalar>
Scalar q_expectation(const DiscreteDistribution<Scalar>& dist,
                     const QParams<Scalar>& params) {
  const auto& p = dist.probabilities();
  const auto& energies = dist.energies();
  if (params.q == Scalar(1)) return (p * energies).sum();
  Scalar num = Scalar(0);
  Scalar den = Scalar(0);
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const Scalar pq = std::pow(p[j], params.q);
    num += pq * energies[j];
    den += pq;
  }
  return num / den;
}

/// Joint distribution of two independent subsystems: probabilities multiply
/// and energies add, flattened with the first argument's index varying
/// slowest.
template <typename Scalar>
DiscreteDistribution<Scalar> product_distribution(
    const DiscreteDistribution<Scalar>& a, const DiscreteDistribution<Scalar>& b) {
  const Eigen::Index na = a.size();
  const Eigen::Index nb = b.size();
  ArrayX<Scalar> energies(na * nb);
  ArrayX<Scalar> probabilities(na * nb);
  for (Eigen::Index i = 0; i < na; ++i) {
    for (Eigen::Index j = 0; j < nb; ++j) {
      energies[i * nb + j] = a.energies()[i] + b.energies()[j];
      probabilities[i * nb + j] = a.probabilities()[i] * b.probabilities()[j];
    }
  }
  return DiscreteDistribution<Scalar>(std::move(energies), std::move(probabilities));
}

/// S_q(A x B) - S_q(A) - S_q(B) for independent subsystems. Analytically
/// equal to (1-q) S_q(A) S_q(B) / k, and zero at q = 1 where the entropy is
/// additive.
template <typename Scalar>
Scalar nonadditivity_gap(const DiscreteDistribution<Scalar>& a,
                         const DiscreteDistribution<Scalar>& b,
                         const QParams<Scalar>& params) {
  return tsallis_entropy(product_distribution(a, b), params) -
         tsallis_entropy(a, params) - tsallis_entropy(b, params);
}

} // namespace cohstat
