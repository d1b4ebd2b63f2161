#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "cohstat/distributions.hpp"

namespace cohstat {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Target raw moments <E^n>, n = 1..m, to be matched on a finite energy grid.
/// Needs more grid points than constraints (otherwise the multipliers are not
/// identifiable). Whether the targets are attainable is checked at solve time.
template <typename Scalar = double>
struct MomentConstraints {
  ArrayX<Scalar> targets; ///< <E^n> for n = 1..m, units energy^n
  ArrayX<Scalar> grid;    ///< energies E_j

  MomentConstraints(ArrayX<Scalar> targets_, ArrayX<Scalar> grid_)
      : targets(std::move(targets_)), grid(std::move(grid_)) {
    if (targets.size() < 1)
      throw std::invalid_argument("MomentConstraints: needs at least one moment");
    if (grid.size() <= targets.size())
      throw std::invalid_argument(
          "MomentConstraints: grid must have more points than constraints");
  }

  Eigen::Index order() const { return targets.size(); }
};

/// Raised when a target moment lies outside [min E^n, max E^n] on the grid,
/// i.e. outside the attainable moment set.
class InfeasibleMomentsError : public std::domain_error {
 public:
  InfeasibleMomentsError(int order_, double target_, double lower_, double upper_)
      : std::domain_error(describe(order_, target_, lower_, upper_)),
        order(order_), target(target_), lower(lower_), upper(upper_) {}

  int order;
  double target;
  double lower, upper;

 private:
  static std::string describe(int n, double t, double lo, double hi) {
    std::ostringstream os;
    os << "infeasible moment <E^" << n << "> = " << t
       << ": attainable interval is (" << lo << ", " << hi << ")";
    return os.str();
  }
};

/// Raised when the Newton iteration fails to reach the tolerance; carries the
/// last residual and the number of iterations performed.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(double residual_, int iterations_)
      : std::runtime_error(describe(residual_, iterations_)),
        residual(residual_), iterations(iterations_) {}

  double residual;
  int iterations;

 private:
  static std::string describe(double r, int it) {
    std::ostringstream os;
    os << "moment solve did not converge: residual " << r << " after " << it
       << " iterations";
    return os.str();
  }
};

/// Converged multipliers beta_1..beta_m with the induced distribution
/// p_j proportional to exp(-sum_n beta_n E_j^n) on the grid.
template <typename Scalar = double>
struct MultiplierSolution {
  VectorX<Scalar> betas;
  DiscreteDistribution<Scalar> distribution;
  Scalar residual;               ///< final max-norm moment mismatch
  int iterations;                ///< Newton steps taken
  std::vector<Scalar> trace;     ///< residual before each step plus final
};

/// Raw moments <E^n> = sum_j p_j E_j^n for n = 1..m.
template <typename Scalar>
ArrayX<Scalar> moments(const DiscreteDistribution<Scalar>& dist, int m) {
  if (m < 1) throw std::invalid_argument("moments: m must be >= 1");
  ArrayX<Scalar> result(m);
  ArrayX<Scalar> power = ArrayX<Scalar>::Ones(dist.size());
  for (int n = 1; n <= m; ++n) {
    power *= dist.energies();
    result[n - 1] = (dist.probabilities() * power).sum();
  }
  return result;
}

/// Central moments <(E - <E>)^n> for n = 1..m; derived helper (the solver and
/// its constraints work in raw moments).
template <typename Scalar>
ArrayX<Scalar> central_moments(const DiscreteDistribution<Scalar>& dist, int m) {
  if (m < 1) throw std::invalid_argument("central_moments: m must be >= 1");
  const Scalar mean = (dist.probabilities() * dist.energies()).sum();
  ArrayX<Scalar> result(m);
  ArrayX<Scalar> power = ArrayX<Scalar>::Ones(dist.size());
  for (int n = 1; n <= m; ++n) {
    power *= dist.energies() - mean;
    result[n - 1] = (dist.probabilities() * power).sum();
  }
  return result;
}

/// Power matrix P with P(j, n-1) = E_j^n for n = 1..m.
template <typename Scalar>
MatrixX<Scalar> moment_power_matrix(const ArrayX<Scalar>& grid, Eigen::Index m) {
  MatrixX<Scalar> powers(grid.size(), m);
  ArrayX<Scalar> power = ArrayX<Scalar>::Ones(grid.size());
  for (Eigen::Index n = 0; n < m; ++n) {
    power *= grid;
    powers.col(n) = power.matrix();
  }
  return powers;
}

/// Probabilities p_j proportional to exp(-sum_n beta_n E_j^n), evaluated with
/// a max-shift so large exponents cannot overflow.
template <typename Scalar>
ArrayX<Scalar> multiplier_distribution(const ArrayX<Scalar>& grid,
                                       const VectorX<Scalar>& betas) {
  const MatrixX<Scalar> powers = moment_power_matrix(grid, betas.size());
  ArrayX<Scalar> log_w = (-(powers * betas)).array();
  log_w -= log_w.maxCoeff();
  ArrayX<Scalar> p = log_w.exp();
  return p / p.sum();
}

/// Jacobian of the moment map, d<E^n>/d(beta_k) = -Cov(E^n, E^k), at the
/// distribution induced by `betas`. This is the matrix the Newton solver
/// factorizes; tests check it against central finite differences.
template <typename Scalar>
MatrixX<Scalar> moment_jacobian(const ArrayX<Scalar>& grid,
                                const VectorX<Scalar>& betas) {
  const Eigen::Index m = betas.size();
  const MatrixX<Scalar> powers = moment_power_matrix(grid, m);
  const ArrayX<Scalar> p = multiplier_distribution(grid, betas);
  const VectorX<Scalar> mean = powers.transpose() * p.matrix();
  const MatrixX<Scalar> second =
      powers.transpose() * p.matrix().asDiagonal() * powers;
  return -(second - mean * mean.transpose());
}

/// Solves for the multipliers beta_1..beta_m such that the distribution
/// p_j proportional to exp(-sum_n beta_n E_j^n) reproduces the target raw
/// moments within `tol` (max norm).
///
/// Damped Newton on the moment-match residual: the analytic Jacobian is the
/// negative covariance matrix of the powers E^n, the step is halved while the
/// residual fails to decrease, and the start is beta = 0 (uniform
/// distribution, an interior point). Deterministic: identical inputs produce
/// bit-identical iteration traces.
///
/// Throws InfeasibleMomentsError when a target lies outside the attainable
/// interval, ConvergenceError when `max_iter` steps do not reach `tol`.
template <typename Scalar>
MultiplierSolution<Scalar> solve_multipliers(const MomentConstraints<Scalar>& constraints,
                                             Scalar tol = Scalar(1e-10),
                                             int max_iter = 200) {
  if (!(tol > Scalar(0)))
    throw std::invalid_argument("solve_multipliers: tol must be > 0");
  if (max_iter < 1)
    throw std::invalid_argument("solve_multipliers: max_iter must be >= 1");

  const ArrayX<Scalar>& grid = constraints.grid;
  const Eigen::Index m = constraints.order();
  const MatrixX<Scalar> powers = moment_power_matrix(grid, m);

  // Vertex bounds of the attainable moment set: each <E^n> ranges over the
  // convex hull of {E_j^n}, so targets must lie strictly inside.
  for (Eigen::Index n = 0; n < m; ++n) {
    const Scalar lo = powers.col(n).minCoeff();
    const Scalar hi = powers.col(n).maxCoeff();
    const Scalar t = constraints.targets[n];
    if (!(t > lo) || !(t < hi))
      throw InfeasibleMomentsError(static_cast<int>(n) + 1, double(t), double(lo),
                                   double(hi));
  }

  const auto residual_at = [&](const VectorX<Scalar>& betas,
                               ArrayX<Scalar>& p) -> VectorX<Scalar> {
    p = multiplier_distribution(grid, betas);
    return powers.transpose() * p.matrix() -
           constraints.targets.matrix().eval();
  };

  VectorX<Scalar> betas = VectorX<Scalar>::Zero(m);
  ArrayX<Scalar> p;
  VectorX<Scalar> r = residual_at(betas, p);
  Scalar res = r.template lpNorm<Eigen::Infinity>();
  std::vector<Scalar> trace{res};

  for (int iter = 0; iter < max_iter; ++iter) {
    if (res <= tol) {
      return MultiplierSolution<Scalar>{betas,
                                        DiscreteDistribution<Scalar>(grid, p),
                                        res, iter, std::move(trace)};
    }

    const MatrixX<Scalar> jac = moment_jacobian(grid, betas);
    Eigen::LDLT<MatrixX<Scalar>> ldlt(-jac); // covariance, positive definite
    const VectorX<Scalar> step = ldlt.solve(r);
    if (ldlt.info() != Eigen::Success || !step.allFinite())
      throw ConvergenceError(double(res), iter);

    // Step halving until the residual decreases.
    Scalar lambda = Scalar(1);
    VectorX<Scalar> next_betas;
    VectorX<Scalar> next_r;
    ArrayX<Scalar> next_p;
    Scalar next_res = std::numeric_limits<Scalar>::infinity();
    for (int halving = 0; halving < 60; ++halving) {
      next_betas = betas + lambda * step;
      next_r = residual_at(next_betas, next_p);
      next_res = next_r.template lpNorm<Eigen::Infinity>();
      if (next_res < res) break;
      lambda /= Scalar(2);
    }
    if (!(next_res < res)) throw ConvergenceError(double(res), iter);

    betas.swap(next_betas);
    r.swap(next_r);
    p.swap(next_p);
    res = next_res;
    trace.push_back(res);
  }

  if (res <= tol) {
    return MultiplierSolution<Scalar>{betas,
                                      DiscreteDistribution<Scalar>(grid, p),
                                      res, max_iter, std::move(trace)};
  }
  throw ConvergenceError(double(res), max_iter);
}

/// Rewrites multipliers beta_1..beta_m as an exponent series in beta*E:
/// beta = beta_1 and alpha_{n-1} = beta_n / beta^n for n >= 2, so that
/// exp(-sum_n beta_n E^n) and the series weight agree identically.
template <typename Scalar>
ExponentSeries<Scalar> series_from_multipliers(const VectorX<Scalar>& betas) {
  if (betas.size() < 1)
    throw std::invalid_argument("series_from_multipliers: needs beta_1");
  const Scalar beta = betas[0];
  if (!(beta > Scalar(0)))
    throw std::invalid_argument("series_from_multipliers: beta_1 must be > 0");
  ArrayX<Scalar> alphas(betas.size() - 1);
  Scalar beta_power = beta;
  for (Eigen::Index n = 2; n <= betas.size(); ++n) {
    beta_power *= beta;
    alphas[n - 2] = betas[n - 1] / beta_power;
  }
  return ExponentSeries<Scalar>(beta, std::move(alphas));
}

/// Max pointwise difference between the solved multiplier distribution and
/// the series-form distribution on the same grid. Zero (to rounding) when the
/// series was produced by the exact mapping beta_n = alpha_{n-1} beta^n.
/// Orders must agree: m multipliers versus a series of highest power m.
template <typename Scalar>
Scalar crosscheck_series(const MultiplierSolution<Scalar>& solution,
                         const ExponentSeries<Scalar>& series) {
  if (series.order() != solution.betas.size())
    throw std::invalid_argument("crosscheck_series: incompatible orders");
  const DiscreteDistribution<Scalar> series_dist =
      normalize(solution.distribution.energies(), series);
  return (solution.distribution.probabilities() - series_dist.probabilities())
      .abs()
      .maxCoeff();
}

} // namespace cohstat
