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

// Dirichlet densities and weighted maximum-likelihood estimation of the
// concentration vector.

#ifndef SDIAR_DIRICHLET_H_
#define SDIAR_DIRICHLET_H_

#include <span>
#include <vector>

#include "sdiar/common.h"

namespace sdiar {

// log Gamma(sum delta) - sum log Gamma(delta_l).
double DirichletLogNormalizer(std::span<const double> delta);

// Log density of Dirichlet(delta) at the probability vector s. Throws
// InputError for a nonpositive entry in s or delta, or a length mismatch.
double DirichletLogPdf(std::span<const double> s, std::span<const double> delta);

// Weighted average of log s over the rows of `features` (N x L):
// sum_n w_n log s[n, l] / sum_n w_n. Throws ProcessingError when the weights
// sum to zero.
std::vector<double> WeightedMeanLog(const Matrix& features,
                                    std::span<const double> weights);

// Per-unit-weight objective maximized by the weighted MLE:
// log Gamma(sum delta) - sum log Gamma(delta_l) + sum (delta_l - 1) mean_log_l.
double DirichletMleObjective(std::span<const double> delta,
                             std::span<const double> mean_log);

// max_l |psi(sum delta) - psi(delta_l) + mean_log_l|; zero at the MLE.
double StationarityResidual(std::span<const double> delta,
                            std::span<const double> mean_log);

enum class DirichletSolver {
  kFixedPoint,  // delta_l <- psi^-1(psi(sum delta) + mean_log_l)
  kGradient,    // gradient ascent on log delta with backtracking
};

struct DirichletMleOptions {
  DirichletSolver solver = DirichletSolver::kFixedPoint;
  int max_iters = 200;
  double rel_tol = 1e-7;         // on ||delta_new - delta|| / ||delta||
  double max_precision = 1e6;    // cap on sum delta
};

struct DirichletMleResult {
  std::vector<double> delta;
  int iterations = 0;
  bool converged = false;
  bool capped = false;  // sum delta hit max_precision
};

// Maximizes DirichletMleObjective starting from `init`. Every fixed-point
// step does not decrease the objective. When the statistics imply a precision
// beyond max_precision (e.g. identical samples), returns exp(mean_log) scaled
// to max_precision with `capped` set.
DirichletMleResult FitDirichlet(std::span<const double> mean_log,
                                std::span<const double> init,
                                const DirichletMleOptions& opts = {});

// Weighted MLE from raw features: the M-step for one (source, device) pair.
DirichletMleResult WeightedDirichletMle(const Matrix& features,
                                        std::span<const double> weights,
                                        std::span<const double> init,
                                        const DirichletMleOptions& opts = {});

// Moment-matching estimate: m_l is the weighted mean of s_l, v the weighted
// variance of s_1, precision = m_1 (1 - m_1) / v - 1 clamped to
// [min_precision, max_precision], delta = m * precision.
std::vector<double> MomentMatchDirichlet(const Matrix& features,
                                         std::span<const double> weights,
                                         double min_precision = 1.0,
                                         double max_precision = 1e4);

}  // namespace sdiar

#endif  // SDIAR_DIRICHLET_H_
