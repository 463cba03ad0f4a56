/*
 * Copyright 2026 The ppbo Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "ppbo/errors.hpp"
#include "ppbo/rng.hpp"

/// Gaussian-process regression with an ARD RBF kernel and a per-row noise
/// diagonal: prior (synthetic) rows carry their own variance plus a sim-to-real
/// term, real rows a shared homoscedastic noise.
namespace ppbo::gp {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// RBF hyperparameters, stored in log space.
template <typename Scalar>
struct KernelHyper {
  Vector<Scalar> log_lengthscales;
  Scalar log_signal_variance = Scalar(0);

  static KernelHyper from(const Vector<Scalar>& lengthscales, Scalar signal_variance) {
    if (!(lengthscales.array() > Scalar(0)).all() || !(signal_variance > Scalar(0)))
      throw InvalidInput("KernelHyper: hyperparameters must be strictly positive");
    return {lengthscales.array().log().matrix(), std::log(signal_variance)};
  }

  [[nodiscard]] Vector<Scalar> lengthscales() const { return log_lengthscales.array().exp().matrix(); }
  [[nodiscard]] Scalar signal_variance() const { return std::exp(log_signal_variance); }
  [[nodiscard]] Eigen::Index dims() const { return log_lengthscales.size(); }

  /// Packed as [log l_1 .. log l_d, log sf2].
  [[nodiscard]] Vector<Scalar> pack() const {
    Vector<Scalar> p(dims() + 1);
    p << log_lengthscales, log_signal_variance;
    return p;
  }
  static KernelHyper unpack(const Vector<Scalar>& p) {
    return {p.head(p.size() - 1), p(p.size() - 1)};
  }
};

/// Prior rows (x, y, var) followed by real rows (x, y). Rows of the x matrices are points.
template <typename Scalar>
struct ObservationSet {
  Matrix<Scalar> prior_x;
  Vector<Scalar> prior_y;
  Vector<Scalar> prior_var;
  Matrix<Scalar> real_x;
  Vector<Scalar> real_y;
  Scalar real_noise_var = Scalar(1e-4);
  Scalar sim2real = Scalar(0.01);

  explicit ObservationSet(Eigen::Index dims = 0)
      : prior_x(0, dims), prior_y(0), prior_var(0), real_x(0, dims), real_y(0) {}

  [[nodiscard]] Eigen::Index dims() const { return prior_x.cols(); }
  [[nodiscard]] Eigen::Index num_prior() const { return prior_x.rows(); }
  [[nodiscard]] Eigen::Index num_real() const { return real_x.rows(); }
  [[nodiscard]] Eigen::Index size() const { return num_prior() + num_real(); }

  template <typename Derived>
  void add_prior(const Eigen::MatrixBase<Derived>& x, Scalar y, Scalar var) {
    check_dims(x, "add_prior");
    if (!std::isfinite(var) || var < Scalar(0)) throw InvalidInput("add_prior: variance must be finite and >= 0");
    const auto n = num_prior();
    prior_x.conservativeResize(n + 1, dims());
    prior_x.row(n) = x.transpose();
    prior_y.conservativeResize(n + 1);
    prior_y(n) = y;
    prior_var.conservativeResize(n + 1);
    prior_var(n) = var;
  }

  template <typename Derived>
  void add_real(const Eigen::MatrixBase<Derived>& x, Scalar y) {
    check_dims(x, "add_real");
    const auto n = num_real();
    real_x.conservativeResize(n + 1, dims());
    real_x.row(n) = x.transpose();
    real_y.conservativeResize(n + 1);
    real_y(n) = y;
  }

  /// All inputs, prior rows first.
  [[nodiscard]] Matrix<Scalar> inputs() const {
    Matrix<Scalar> x(size(), dims());
    x << prior_x, real_x;
    return x;
  }
  [[nodiscard]] Vector<Scalar> targets() const {
    Vector<Scalar> y(size());
    y << prior_y, real_y;
    return y;
  }
  /// Diagonal additions, prior rows first: var_i + sim2real, then real_noise_var.
  [[nodiscard]] Vector<Scalar> noise() const {
    Vector<Scalar> n(size());
    n << (prior_var.array() + sim2real).matrix(), Vector<Scalar>::Constant(num_real(), real_noise_var);
    return n;
  }

 private:
  template <typename Derived>
  void check_dims(const Eigen::MatrixBase<Derived>& x, const char* who) const {
    if (x.size() != dims()) throw InvalidInput(std::string(who) + ": dimension mismatch");
    if (!x.allFinite()) throw InvalidInput(std::string(who) + ": non-finite input");
  }
};

/// sf2 * exp(-0.5 * sum_d ((x_d - x'_d) / l_d)^2)
template <typename Scalar, typename DerivedA, typename DerivedB>
Scalar kernel(const Eigen::MatrixBase<DerivedA>& x, const Eigen::MatrixBase<DerivedB>& x2,
              const KernelHyper<Scalar>& hyper) {
  if (x.size() != x2.size() || x.size() != hyper.dims()) throw InvalidInput("kernel: dimension mismatch");
  Scalar r2 = 0;
  for (Eigen::Index d = 0; d < x.size(); ++d) {
    const Scalar z = (x(d) - x2(d)) * std::exp(-hyper.log_lengthscales(d));
    r2 += z * z;
  }
  return hyper.signal_variance() * std::exp(Scalar(-0.5) * r2);
}

/// Gram matrix between the rows of a and the rows of b.
template <typename Scalar>
Matrix<Scalar> cross_kernel(const Matrix<Scalar>& a, const Matrix<Scalar>& b, const KernelHyper<Scalar>& hyper) {
  Matrix<Scalar> k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) k(i, j) = kernel(a.row(i), b.row(j), hyper);
  return k;
}

/// K + blockdiag(diag(var_i + sim2real), real_noise_var * I), in the units the observations carry.
template <typename Scalar>
Matrix<Scalar> build_augmented_cov(const ObservationSet<Scalar>& obs, const KernelHyper<Scalar>& hyper) {
  const Matrix<Scalar> x = obs.inputs();
  Matrix<Scalar> k(x.rows(), x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    k(i, i) = hyper.signal_variance();
    for (Eigen::Index j = 0; j < i; ++j) k(i, j) = k(j, i) = kernel(x.row(i), x.row(j), hyper);
  }
  k.diagonal() += obs.noise();
  return k;
}

/// Affine map applied to every target before fitting.
template <typename Scalar>
struct Standardization {
  Scalar mean = Scalar(0);
  Scalar scale = Scalar(1);
};

/// Reliability-weighted mean and standard deviation of all targets. Real rows
/// weigh 1; a prior row weighs 1 / (1 + (var_i + sim2real) / real_noise_var), so an
/// uninformative prior row (huge variance) has no influence and exact prior rows
/// count like real ones. A spread below 1e-8 leaves the scale at 1.
template <typename Scalar>
Standardization<Scalar> standardization(const ObservationSet<Scalar>& obs) {
  const Vector<Scalar> y = obs.targets();
  Vector<Scalar> w(obs.size());
  w << (Scalar(1) / (Scalar(1) + (obs.prior_var.array() + obs.sim2real) / obs.real_noise_var)).matrix(),
      Vector<Scalar>::Ones(obs.num_real());
  const Scalar wsum = w.sum();
  Standardization<Scalar> s;
  s.mean = w.dot(y) / wsum;
  const Scalar var = (w.array() * (y.array() - s.mean).square()).sum() / wsum;
  const Scalar sd = std::sqrt(var);
  s.scale = sd < Scalar(1e-8) ? Scalar(1) : sd;
  return s;
}

template <typename Scalar>
struct FitOptions {
  Scalar max_condition = Scalar(25000);
  Scalar jitter_start = Scalar(1e-5);
  Scalar jitter_max = Scalar(0.1);
  Scalar jitter_growth = Scalar(10);
  int estimate_iterations = 30;
};

/// 2-norm condition estimate of the Jacobi-scaled matrix D^-1/2 K D^-1/2, from power
/// iteration (largest eigenvalue) and inverse iteration through `llt` (smallest).
template <typename Scalar>
Scalar condition_estimate(const Matrix<Scalar>& k, const Eigen::LLT<Matrix<Scalar>>& llt, int iterations) {
  const Eigen::Index n = k.rows();
  if (n == 1) return Scalar(1);
  const Vector<Scalar> d = k.diagonal().array().rsqrt().matrix();
  const Matrix<Scalar> scaled = d.asDiagonal() * k * d.asDiagonal();

  Vector<Scalar> v = Vector<Scalar>::Ones(n).normalized();
  Scalar lmax = 0;
  for (int it = 0; it < iterations; ++it) {
    Vector<Scalar> w = scaled * v;
    lmax = v.dot(w);
    const Scalar nw = w.norm();
    if (!(nw > 0)) break;
    v = w / nw;
  }

  // Alternating signs avoid starting orthogonal to the smallest eigenvector for smooth kernels.
  v = Vector<Scalar>::NullaryExpr(n, [](Eigen::Index i) { return i % 2 ? Scalar(-1) : Scalar(1); }).normalized();
  Scalar inv_lmin = 0;
  for (int it = 0; it < iterations; ++it) {
    Vector<Scalar> w = d.cwiseInverse().asDiagonal() * llt.solve(d.cwiseInverse().asDiagonal() * v);
    inv_lmin = v.dot(w);
    const Scalar nw = w.norm();
    if (!std::isfinite(nw) || !(nw > 0)) return std::numeric_limits<Scalar>::infinity();
    v = w / nw;
  }
  if (!(inv_lmin > 0)) return std::numeric_limits<Scalar>::infinity();
  return lmax * inv_lmin;
}

template <typename Scalar>
struct Prediction {
  Scalar mean;
  Scalar variance;
};

/// Fitted posterior. Immutable once built; predictions are const and thread-safe.
template <typename Scalar>
class GpModel {
 public:
  GpModel() = default;

  /// Standardizes targets (prior variances scale with them; sim2real and
  /// real_noise_var are taken in standardized units), assembles K*, adds diagonal
  /// jitter (times the signal variance) until the scaled condition estimate is within
  /// bound, then factorizes.
  static GpModel fit(const ObservationSet<Scalar>& obs, const KernelHyper<Scalar>& hyper,
                     const FitOptions<Scalar>& opt = {}) {
    if (obs.size() < 1) throw InvalidInput("fit: no observations");
    if (hyper.dims() != obs.dims()) throw InvalidInput("fit: hyperparameter dimension mismatch");
    if (!obs.prior_y.allFinite() || !obs.real_y.allFinite()) throw InvalidInput("fit: non-finite target");
    if (!obs.prior_var.allFinite()) throw InvalidInput("fit: non-finite prior variance");

    GpModel m;
    m.hyper_ = hyper;
    m.std_ = standardization(obs);
    m.x_ = obs.inputs();
    m.y_ = ((obs.targets().array() - m.std_.mean) / m.std_.scale).matrix();

    ObservationSet<Scalar> scaled = obs;
    scaled.prior_y = ((obs.prior_y.array() - m.std_.mean) / m.std_.scale).matrix();
    scaled.real_y = ((obs.real_y.array() - m.std_.mean) / m.std_.scale).matrix();
    scaled.prior_var = obs.prior_var / (m.std_.scale * m.std_.scale);
    const Matrix<Scalar> k = build_augmented_cov(scaled, hyper);

    Scalar jitter = 0;
    while (true) {
      m.cov_ = k;
      m.cov_.diagonal().array() += jitter * hyper.signal_variance();
      m.llt_.compute(m.cov_);
      if (m.llt_.info() == Eigen::Success) {
        m.condition_ = condition_estimate(m.cov_, m.llt_, opt.estimate_iterations);
        if (m.condition_ <= opt.max_condition) break;
      } else {
        m.condition_ = std::numeric_limits<Scalar>::infinity();
      }
      jitter = jitter == 0 ? opt.jitter_start : jitter * opt.jitter_growth;
      if (jitter > opt.jitter_max * (1 + Scalar(1e-9)))
        throw IllConditioned("fit: condition estimate " + std::to_string(double(m.condition_)) +
                             " above bound at maximum jitter (n=" + std::to_string(obs.size()) + ")");
    }
    m.jitter_ = jitter;
    m.alpha_ = m.llt_.solve(m.y_);
    m.fitted_ = true;
    return m;
  }

  [[nodiscard]] bool fitted() const { return fitted_; }

  /// Posterior mean and latent-function variance at x, in target units.
  template <typename Derived>
  [[nodiscard]] Prediction<Scalar> predict(const Eigen::MatrixBase<Derived>& x) const {
    require_fit("predict");
    if (x.size() != x_.cols()) throw InvalidInput("predict: dimension mismatch");
    Vector<Scalar> ks(x_.rows());
    for (Eigen::Index i = 0; i < x_.rows(); ++i) ks(i) = kernel(x_.row(i), x, hyper_);
    const Scalar mean_s = ks.dot(alpha_);
    const Vector<Scalar> v = llt_.matrixL().solve(ks);
    const Scalar var_s = std::max(Scalar(0), hyper_.signal_variance() - v.squaredNorm());
    return {std_.mean + std_.scale * mean_s, std_.scale * std_.scale * var_s};
  }

  /// -1/2 y^T alpha - sum log diag(L) - n/2 log(2 pi), on standardized targets.
  [[nodiscard]] Scalar log_marginal_likelihood() const {
    require_fit("log_marginal_likelihood");
    const auto n = static_cast<Scalar>(y_.size());
    const Scalar logdet_half = llt_.matrixLLT().diagonal().array().log().sum();
    return Scalar(-0.5) * y_.dot(alpha_) - logdet_half - Scalar(0.5) * n * std::log(2 * std::numbers::pi_v<Scalar>);
  }

  [[nodiscard]] const KernelHyper<Scalar>& hyper() const { return hyper_; }
  [[nodiscard]] const Standardization<Scalar>& standardization_used() const { return std_; }
  [[nodiscard]] const Matrix<Scalar>& inputs() const { return x_; }
  [[nodiscard]] const Vector<Scalar>& standardized_targets() const { return y_; }
  /// K* as factorized, including any jitter.
  [[nodiscard]] const Matrix<Scalar>& covariance() const { return cov_; }
  [[nodiscard]] Matrix<Scalar> chol() const { return llt_.matrixL(); }
  [[nodiscard]] const Vector<Scalar>& alpha() const { return alpha_; }
  [[nodiscard]] Scalar jitter() const { return jitter_; }
  [[nodiscard]] Scalar condition() const { return condition_; }

 private:
  void require_fit(const char* who) const {
    if (!fitted_) throw StateError(std::string(who) + ": model has not been fit");
  }

  bool fitted_ = false;
  KernelHyper<Scalar> hyper_;
  Standardization<Scalar> std_;
  Matrix<Scalar> x_;
  Vector<Scalar> y_;
  Matrix<Scalar> cov_;
  Eigen::LLT<Matrix<Scalar>> llt_;
  Vector<Scalar> alpha_;
  Scalar jitter_ = 0;
  Scalar condition_ = 0;
};

/// Box on the packed log hyperparameters.
template <typename Scalar>
struct HyperBounds {
  Scalar log_lengthscale_lo = std::log(Scalar(1e-2));
  Scalar log_lengthscale_hi = std::log(Scalar(1e1));
  Scalar log_signal_variance_lo = std::log(Scalar(1e-3));
  Scalar log_signal_variance_hi = std::log(Scalar(1e3));

  [[nodiscard]] Vector<Scalar> lo(Eigen::Index dims) const {
    Vector<Scalar> v = Vector<Scalar>::Constant(dims + 1, log_lengthscale_lo);
    v(dims) = log_signal_variance_lo;
    return v;
  }
  [[nodiscard]] Vector<Scalar> hi(Eigen::Index dims) const {
    Vector<Scalar> v = Vector<Scalar>::Constant(dims + 1, log_lengthscale_hi);
    v(dims) = log_signal_variance_hi;
    return v;
  }
};

struct OptimizeOptions {
  int restarts = 5;
  int iterations = 50;
  double initial_step = 1.0;   // log units
  double min_step = 1e-3;
  std::uint64_t seed = 0;
};

/// log_marginal_likelihood at `hyper`, or -inf when the fit is ill-conditioned.
template <typename Scalar>
Scalar log_marginal_likelihood(const ObservationSet<Scalar>& obs, const KernelHyper<Scalar>& hyper,
                               const FitOptions<Scalar>& fit_opt = {}) {
  try {
    return GpModel<Scalar>::fit(obs, hyper, fit_opt).log_marginal_likelihood();
  } catch (const IllConditioned&) {
    return -std::numeric_limits<Scalar>::infinity();
  }
}

/// Multi-start coordinate ascent on the log marginal likelihood in log space.
///
/// Restart 0 starts at `initial` (clamped into the box); the others are drawn
/// uniformly in the box from Rng(seed, "gp.hyper.restart"). Each restart runs up to
/// `iterations` sweeps, trying +/- step on every coordinate and halving the step after
/// a sweep with no improvement. The best point seen over all restarts is returned.
template <typename Scalar>
KernelHyper<Scalar> optimize_hyper(const ObservationSet<Scalar>& obs, const KernelHyper<Scalar>& initial,
                                   const HyperBounds<Scalar>& bounds = {}, const OptimizeOptions& opt = {},
                                   const FitOptions<Scalar>& fit_opt = {}) {
  if (obs.size() < 2) throw InvalidInput("optimize_hyper: need at least 2 observations");
  const Eigen::Index d = obs.dims();
  const Vector<Scalar> lo = bounds.lo(d), hi = bounds.hi(d);
  auto score = [&](const Vector<Scalar>& p) {
    return log_marginal_likelihood(obs, KernelHyper<Scalar>::unpack(p), fit_opt);
  };

  Rng rng(opt.seed, "gp.hyper.restart");
  Vector<Scalar> best_p = initial.pack().cwiseMax(lo).cwiseMin(hi);
  Scalar best = score(best_p);

  for (int r = 0; r < opt.restarts; ++r) {
    Vector<Scalar> p(d + 1);
    if (r == 0) {
      p = initial.pack().cwiseMax(lo).cwiseMin(hi);
    } else {
      for (Eigen::Index i = 0; i <= d; ++i) p(i) = static_cast<Scalar>(rng.uniform(lo(i), hi(i)));
    }
    Scalar f = score(p);
    Scalar step = static_cast<Scalar>(opt.initial_step);
    for (int it = 0; it < opt.iterations && step >= opt.min_step; ++it) {
      bool improved = false;
      for (Eigen::Index i = 0; i <= d; ++i) {
        for (Scalar dir : {Scalar(1), Scalar(-1)}) {
          Vector<Scalar> q = p;
          q(i) = std::clamp(p(i) + dir * step, lo(i), hi(i));
          if (q(i) == p(i)) continue;
          const Scalar fq = score(q);
          if (fq > f) {
            f = fq;
            p = q;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step /= 2;
    }
    if (f > best) {
      best = f;
      best_p = p;
    }
  }
  return KernelHyper<Scalar>::unpack(best_p);
}

}  // namespace ppbo::gp
