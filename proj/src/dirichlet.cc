// Copyright 2026 The sdiar Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sdiar/dirichlet.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sdiar/special_functions.h"

namespace sdiar {
namespace {

double Sum(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

double RelativeChange(std::span<const double> next, std::span<const double> prev) {
  double diff = 0.0, norm = 0.0;
  for (size_t l = 0; l < prev.size(); ++l) {
    diff += (next[l] - prev[l]) * (next[l] - prev[l]);
    norm += prev[l] * prev[l];
  }
  return std::sqrt(diff / norm);
}

void ScaleToPrecision(std::vector<double>* delta, double precision) {
  const double factor = precision / Sum(*delta);
  for (double& d : *delta) d *= factor;
}

DirichletMleResult FixedPoint(std::span<const double> mean_log,
                              std::vector<double> delta,
                              const DirichletMleOptions& opts) {
  DirichletMleResult result;
  std::vector<double> next(delta.size());
  for (int it = 0; it < opts.max_iters; ++it) {
    const double psi_total = Digamma(Sum(delta));
    for (size_t l = 0; l < delta.size(); ++l) {
      next[l] = InverseDigamma(psi_total + mean_log[l]);
    }
    result.iterations = it + 1;
    if (Sum(next) > opts.max_precision) {
      ScaleToPrecision(&next, opts.max_precision);
      delta.swap(next);
      result.capped = true;
      break;
    }
    const double change = RelativeChange(next, delta);
    delta.swap(next);
    if (change < opts.rel_tol) {
      result.converged = true;
      break;
    }
  }
  result.delta = std::move(delta);
  return result;
}

DirichletMleResult Gradient(std::span<const double> mean_log,
                            std::vector<double> delta,
                            const DirichletMleOptions& opts) {
  DirichletMleResult result;
  const size_t n = delta.size();
  std::vector<double> grad(n), trial(n);
  double step = 1.0;
  double value = DirichletMleObjective(delta, mean_log);
  for (int it = 0; it < opts.max_iters; ++it) {
    result.iterations = it + 1;
    const double psi_total = Digamma(Sum(delta));
    double grad_norm2 = 0.0;
    for (size_t l = 0; l < n; ++l) {
      // d/d(log delta_l) of the objective.
      grad[l] = delta[l] * (psi_total - Digamma(delta[l]) + mean_log[l]);
      grad_norm2 += grad[l] * grad[l];
    }
    if (grad_norm2 == 0.0) {
      result.converged = true;
      break;
    }
    bool accepted = false;
    step *= 2.0;
    while (step > 1e-300) {
      for (size_t l = 0; l < n; ++l) {
        trial[l] = delta[l] * std::exp(step * grad[l]);
      }
      const double trial_value = DirichletMleObjective(trial, mean_log);
      if (std::isfinite(trial_value) &&
          trial_value >= value + 1e-4 * step * grad_norm2) {
        value = trial_value;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      result.converged = true;
      break;
    }
    if (Sum(trial) > opts.max_precision) {
      ScaleToPrecision(&trial, opts.max_precision);
      delta.swap(trial);
      result.capped = true;
      break;
    }
    const double change = RelativeChange(trial, delta);
    delta.swap(trial);
    if (change < opts.rel_tol) {
      result.converged = true;
      break;
    }
  }
  result.delta = std::move(delta);
  return result;
}

}  // namespace

double DirichletLogNormalizer(std::span<const double> delta) {
  double total = 0.0, norm = 0.0;
  for (double d : delta) {
    total += d;
    norm -= LogGamma(d);
  }
  return norm + LogGamma(total);
}

double DirichletLogPdf(std::span<const double> s, std::span<const double> delta) {
  if (s.size() != delta.size() || s.empty()) {
    throw InputError("Dirichlet: dimension mismatch");
  }
  double data = 0.0;
  for (size_t l = 0; l < s.size(); ++l) {
    if (!(s[l] > 0.0)) throw InputError("Dirichlet: nonpositive probability entry");
    if (!(delta[l] > 0.0)) throw InputError("Dirichlet: nonpositive concentration");
    data += (delta[l] - 1.0) * std::log(s[l]);
  }
  return DirichletLogNormalizer(delta) + data;
}

std::vector<double> WeightedMeanLog(const Matrix& features,
                                    std::span<const double> weights) {
  if (weights.size() != features.rows()) {
    throw InputError("weights/features length mismatch");
  }
  std::vector<double> mean(features.cols(), 0.0);
  double total = 0.0;
  for (size_t n = 0; n < features.rows(); ++n) {
    const double w = weights[n];
    if (w == 0.0) continue;
    total += w;
    const auto row = features.row(n);
    for (size_t l = 0; l < row.size(); ++l) mean[l] += w * std::log(row[l]);
  }
  if (!(total > 0.0)) {
    throw ProcessingError("mixture component has zero total weight");
  }
  for (double& m : mean) m /= total;
  return mean;
}

double DirichletMleObjective(std::span<const double> delta,
                             std::span<const double> mean_log) {
  double value = DirichletLogNormalizer(delta);
  for (size_t l = 0; l < delta.size(); ++l) {
    value += (delta[l] - 1.0) * mean_log[l];
  }
  return value;
}

double StationarityResidual(std::span<const double> delta,
                            std::span<const double> mean_log) {
  const double psi_total = Digamma(Sum(delta));
  double worst = 0.0;
  for (size_t l = 0; l < delta.size(); ++l) {
    worst = std::max(worst,
                     std::abs(psi_total - Digamma(delta[l]) + mean_log[l]));
  }
  return worst;
}

DirichletMleResult FitDirichlet(std::span<const double> mean_log,
                                std::span<const double> init,
                                const DirichletMleOptions& opts) {
  if (mean_log.size() != init.size() || init.empty()) {
    throw InputError("Dirichlet MLE: dimension mismatch");
  }
  for (double d : init) {
    if (!(d > 0.0)) throw InputError("Dirichlet MLE: nonpositive initial value");
  }
  // For large precision a0, sum_l exp(mean_log_l) ~ 1 - (L - 1) / (2 a0), so a
  // small gap means the maximizer lies beyond the cap (or at infinity when all
  // samples coincide).
  double gap = 1.0;
  for (double m : mean_log) gap -= std::exp(m);
  const double dims = static_cast<double>(init.size());
  if (init.size() > 1 && gap * 2.0 * opts.max_precision <= dims - 1.0) {
    DirichletMleResult result;
    result.delta.resize(init.size());
    for (size_t l = 0; l < init.size(); ++l) result.delta[l] = std::exp(mean_log[l]);
    ScaleToPrecision(&result.delta, opts.max_precision);
    result.capped = true;
    return result;
  }
  std::vector<double> delta(init.begin(), init.end());
  return opts.solver == DirichletSolver::kGradient
             ? Gradient(mean_log, std::move(delta), opts)
             : FixedPoint(mean_log, std::move(delta), opts);
}

DirichletMleResult WeightedDirichletMle(const Matrix& features,
                                        std::span<const double> weights,
                                        std::span<const double> init,
                                        const DirichletMleOptions& opts) {
  return FitDirichlet(WeightedMeanLog(features, weights), init, opts);
}

std::vector<double> MomentMatchDirichlet(const Matrix& features,
                                         std::span<const double> weights,
                                         double min_precision,
                                         double max_precision) {
  if (weights.size() != features.rows()) {
    throw InputError("weights/features length mismatch");
  }
  const size_t dims = features.cols();
  std::vector<double> mean(dims, 0.0);
  double total = 0.0;
  for (size_t n = 0; n < features.rows(); ++n) {
    total += weights[n];
    for (size_t l = 0; l < dims; ++l) mean[l] += weights[n] * features(n, l);
  }
  if (!(total > 0.0)) throw ProcessingError("moment matching needs positive weight");
  for (double& m : mean) m /= total;

  double var = 0.0;
  for (size_t n = 0; n < features.rows(); ++n) {
    const double d = features(n, 0) - mean[0];
    var += weights[n] * d * d;
  }
  var /= total;
  double precision = max_precision;
  if (var > 0.0) {
    precision = std::clamp(mean[0] * (1.0 - mean[0]) / var - 1.0,
                           min_precision, max_precision);
  }
  std::vector<double> delta(dims);
  for (size_t l = 0; l < dims; ++l) {
    delta[l] = std::max(mean[l] * precision, 1e-12);
  }
  return delta;
}

}  // namespace sdiar
