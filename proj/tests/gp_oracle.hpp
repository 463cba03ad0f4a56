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

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "ppbo/gp.hpp"

// Textbook GP posterior computed with an explicit matrix inverse, sharing nothing with
// the library beyond the observation container.
namespace oracle {

template <typename A, typename B>
double rbf(const A& x, const B& y, const ppbo::gp::KernelHyper<double>& h) {
  const Eigen::VectorXd l = h.lengthscales();
  double r2 = 0.0;
  for (Eigen::Index d = 0; d < l.size(); ++d) r2 += std::pow((x(d) - y(d)) / l(d), 2);
  return h.signal_variance() * std::exp(-0.5 * r2);
}

struct Posterior {
  struct Out {
    double mean, variance;
  };

  Posterior(const ppbo::gp::ObservationSet<double>& obs, const ppbo::gp::KernelHyper<double>& h, double jitter = 0.0)
      : h(h) {
    const int np = static_cast<int>(obs.prior_x.rows()), nr = static_cast<int>(obs.real_x.rows());
    const int n = np + nr;
    x.resize(n, obs.prior_x.cols());
    Eigen::VectorXd y(n), w(n), add(n);
    for (int i = 0; i < np; ++i) {
      x.row(i) = obs.prior_x.row(i);
      y(i) = obs.prior_y(i);
      w(i) = 1.0 / (1.0 + (obs.prior_var(i) + obs.sim2real) / obs.real_noise_var);
    }
    for (int i = 0; i < nr; ++i) {
      x.row(np + i) = obs.real_x.row(i);
      y(np + i) = obs.real_y(i);
      w(np + i) = 1.0;
    }
    mean = (w.array() * y.array()).sum() / w.sum();
    const double sd = std::sqrt((w.array() * (y.array() - mean).square()).sum() / w.sum());
    scale = sd < 1e-8 ? 1.0 : sd;
    ys = (y.array() - mean) / scale;
    for (int i = 0; i < np; ++i) add(i) = obs.prior_var(i) / (scale * scale) + obs.sim2real;
    for (int i = 0; i < nr; ++i) add(np + i) = obs.real_noise_var;
    add.array() += jitter * h.signal_variance();
    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) k(i, j) = rbf(x.row(i), x.row(j), h) + (i == j ? add(i) : 0.0);
    kinv = k.inverse();
    det = k.determinant();
  }

  [[nodiscard]] Out predict(const Eigen::VectorXd& q) const {
    Eigen::VectorXd ks(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) ks(i) = rbf(x.row(i), q, h);
    const double m = ks.dot(kinv * ys);
    const double v = h.signal_variance() - ks.dot(kinv * ks);
    return {mean + scale * m, std::max(0.0, v) * scale * scale};
  }

  [[nodiscard]] double log_marginal_likelihood() const {
    const double n = static_cast<double>(ys.size());
    return -0.5 * ys.dot(kinv * ys) - 0.5 * std::log(det) - 0.5 * n * std::log(2.0 * std::numbers::pi);
  }

  ppbo::gp::KernelHyper<double> h;
  Eigen::MatrixXd x, kinv;
  Eigen::VectorXd ys;
  double mean = 0.0, scale = 1.0, det = 1.0;
};

}  // namespace oracle
