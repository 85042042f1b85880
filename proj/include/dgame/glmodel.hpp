#pragma once

// Ginzburg-Landau style utilities for the free-profit expansion in the order
// parameter o:  F(o) = C + a o + alpha o^2 + b o^3 + (beta/2) o^4.
//
// Sign convention: stationary points are returned without classification.
// For the free profit the ordered states are maxima; the empirical landscape
// fitted by fit_landscape is -log(density), whose minima are the likely states.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dgame/errors.hpp"

namespace dgame {

struct GLPolynomial {
  double C = 0.0;
  double a = 0.0;
  double alpha = 0.0;
  double b = 0.0;
  double beta = 0.0;

  double operator()(double o) const noexcept {
    const double o2 = o * o;
    return C + a * o + alpha * o2 + b * o2 * o + 0.5 * beta * o2 * o2;
  }

  bool symmetric() const noexcept { return a == 0.0 && b == 0.0; }

  friend bool operator==(const GLPolynomial&, const GLPolynomial&) = default;
};

inline double evaluate(const GLPolynomial& poly, double o) noexcept { return poly(o); }

/// Real roots of o (alpha + beta o^2) = 0, ascending.
inline std::vector<double> stationary_points(double alpha, double beta) {
  if (beta == 0.0) throw ParameterError("degenerate polynomial: beta = 0");
  const double ratio = alpha / beta;
  if (ratio >= 0.0) return {0.0};
  const double r = std::sqrt(-ratio);
  return {-r, 0.0, r};
}

/// |o*| = sqrt((T_c - T)/beta) below T_c, 0 at and above it.
inline std::vector<double> order_parameter_curve(std::span<const double> temperatures, double critical,
                                                 double beta) {
  if (!(beta > 0.0)) throw ParameterError("order_parameter_curve needs beta > 0");
  std::vector<double> out;
  out.reserve(temperatures.size());
  for (double t : temperatures) out.push_back(t < critical ? std::sqrt((critical - t) / beta) : 0.0);
  return out;
}

struct LandscapeFit {
  GLPolynomial polynomial;         // a = b = 0
  std::vector<double> centers;     // bin centers on [-1, 1]
  std::vector<double> landscape;   // -log(symmetrized density + eps)
  std::size_t nonempty_bins = 0;
};

/// Histograms the samples on [-1, 1], symmetrizes the density (the model has
/// no odd terms), forms L = -log(density + eps) with eps = 1/(2n), and fits
/// C + alpha o^2 + (beta/2) o^4 to L by least squares over all bins.
inline LandscapeFit fit_landscape(std::span<const double> samples, int bins) {
  if (samples.size() < 100) throw ParameterError("fit_landscape needs at least 100 samples");
  if (bins < 8) throw ParameterError("fit_landscape needs at least 8 bins");
  const auto nb = static_cast<std::size_t>(bins);

  // Mirror-equivariant binning: o and -o land in mirrored bins.
  auto positive_bin = [&](double x) {
    const auto b = static_cast<std::size_t>(std::floor((x + 1.0) * 0.5 * bins));
    return std::min(b, nb - 1);
  };
  std::vector<double> counts(nb, 0.0);
  for (double o : samples) {
    if (!(o >= -1.0 && o <= 1.0)) throw ParameterError("order-parameter sample outside [-1, 1]");
    const std::size_t b = o >= 0.0 ? positive_bin(o) : nb - 1 - positive_bin(-o);
    counts[b] += 1.0;
  }

  const double n = static_cast<double>(samples.size());
  const double width = 2.0 / bins;
  const double eps = 1.0 / (2.0 * n);
  LandscapeFit fit;
  fit.centers.resize(nb);
  fit.landscape.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const double sym = counts[b] + counts[nb - 1 - b];
    if (sym > 0.0) ++fit.nonempty_bins;
    const double density = sym / (2.0 * n * width);
    fit.centers[b] = -1.0 + (static_cast<double>(b) + 0.5) * width;
    fit.landscape[b] = -std::log(density + eps);
  }
  if (fit.nonempty_bins < 3) throw FitError("underdetermined landscape fit: fewer than 3 non-empty bins");

  Eigen::MatrixXd design(bins, 3);
  Eigen::VectorXd target(bins);
  for (std::size_t b = 0; b < nb; ++b) {
    const double c2 = fit.centers[b] * fit.centers[b];
    design(static_cast<Eigen::Index>(b), 0) = 1.0;
    design(static_cast<Eigen::Index>(b), 1) = c2;
    design(static_cast<Eigen::Index>(b), 2) = 0.5 * c2 * c2;
    target(static_cast<Eigen::Index>(b)) = fit.landscape[b];
  }
  const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(target);
  fit.polynomial = GLPolynomial{coef(0), 0.0, coef(1), 0.0, coef(2)};
  return fit;
}

struct ExponentFit {
  double critical = 0.0;   // T_c
  double exponent = 0.0;
  double amplitude = 0.0;  // A in |o| = A (T_c - T)^exponent
  int iterations = 0;
  double cost = 0.0;       // half sum of squared log residuals
};

/// Levenberg-Marquardt fit of |o| = A (T_c - T)^exponent to the pairs with
/// |o| > 0. Residuals are taken on log |o|, which matches multiplicative noise.
/// T_c is kept above the largest fitted temperature.
inline ExponentFit exponent_fit(std::span<const std::pair<double, double>> pairs, double critical_guess,
                                int max_iterations = 500) {
  std::vector<double> ts;
  std::vector<double> logy;
  for (const auto& [t, y] : pairs) {
    if (y > 0.0 && std::isfinite(y) && std::isfinite(t)) {
      ts.push_back(t);
      logy.push_back(std::log(y));
    }
  }
  if (ts.size() < 4) throw FitError("exponent fit needs at least 4 pairs with |o| > 0, got " +
                                    std::to_string(ts.size()));
  const auto [tmin_it, tmax_it] = std::minmax_element(ts.begin(), ts.end());
  const double tmin = *tmin_it;
  const double tmax = *tmax_it;
  const double span_t = tmax > tmin ? tmax - tmin : 1.0;
  const Eigen::Index n = static_cast<Eigen::Index>(ts.size());

  double tc = critical_guess > tmax ? critical_guess : tmax + 0.1 * span_t;

  auto residuals = [&](const Eigen::Vector3d& p, Eigen::VectorXd& r) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto i = static_cast<std::size_t>(k);
      r(k) = logy[i] - p(0) - p(1) * std::log(p(2) - ts[i]);
    }
    return 0.5 * r.squaredNorm();
  };

  // Start from the log-linear regression at the initial T_c.
  Eigen::Vector3d p;
  {
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto i = static_cast<std::size_t>(k);
      x(k, 0) = 1.0;
      x(k, 1) = std::log(tc - ts[i]);
      y(k) = logy[i];
    }
    const Eigen::Vector2d c = x.colPivHouseholderQr().solve(y);
    p << c(0), c(1), tc;
  }

  Eigen::VectorXd r(n);
  Eigen::VectorXd r_trial(n);
  Eigen::MatrixXd jac(n, 3);
  double cost = residuals(p, r);
  double damping = 1e-3;
  int it = 0;
  bool converged = false;
  for (; it < max_iterations; ++it) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double gap = p(2) - ts[static_cast<std::size_t>(k)];
      jac(k, 0) = -1.0;
      jac(k, 1) = -std::log(gap);
      jac(k, 2) = -p(1) / gap;
    }
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d grad = jac.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + cost) || cost <= 1e-30) {
      converged = true;
      break;
    }
    bool accepted = false;
    while (damping < 1e16) {
      Eigen::Matrix3d a = jtj;
      a.diagonal() += damping * jtj.diagonal().cwiseMax(1e-12);
      const Eigen::Vector3d step = a.ldlt().solve(-grad);
      Eigen::Vector3d trial = p + step;
      if (!(trial(2) > tmax) || !trial.allFinite()) {
        damping *= 10.0;
        continue;
      }
      const double trial_cost = residuals(trial, r_trial);
      if (trial_cost < cost) {
        const double drop = cost - trial_cost;
        const double rel_step = step.cwiseAbs().maxCoeff() / (1.0 + p.cwiseAbs().maxCoeff());
        p = trial;
        r = r_trial;
        cost = trial_cost;
        damping = std::max(damping * 0.3, 1e-12);
        accepted = true;
        if (drop <= 1e-15 * cost || rel_step < 1e-14) converged = true;
        break;
      }
      damping *= 10.0;
    }
    if (!accepted) {
      // No descent direction left at machine precision.
      converged = true;
      break;
    }
    if (converged) {
      ++it;
      break;
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "exponent fit did not converge after " << it << " iterations (cost " << cost << ", T_c " << p(2)
        << ", exponent " << p(1) << ")";
    throw FitError(msg.str());
  }
  return ExponentFit{p(2), p(1), std::exp(p(0)), it, cost};
}

}  // namespace dgame
