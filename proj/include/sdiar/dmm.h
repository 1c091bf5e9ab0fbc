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

// Dirichlet mixture model over the directional statistics of P devices.
//
// Each frame n carries one probability vector s_p[n] per device. A latent
// source s generates all P vectors independently, s_p[n] ~ Dir(delta_sp),
// and is drawn with probability pi_s. EM alternates responsibilities
// gamma_ns (log space, logsumexp over sources) with closed-form weights
// pi_s = N_s / N and a weighted Dirichlet MLE per (source, device).

#ifndef SDIAR_DMM_H_
#define SDIAR_DMM_H_

#include <cstdint>
#include <string>
#include <vector>

#include "sdiar/common.h"
#include "sdiar/dirichlet.h"

namespace sdiar {

// One N x L matrix of directional statistics per device.
using FeatureSet = std::vector<Matrix>;

// Throws InputError unless all devices share N and L and every entry is a
// positive probability.
void ValidateFeatures(const FeatureSet& features);

struct DmmParams {
  std::vector<double> weights;          // pi, length S
  std::vector<Matrix> concentrations;   // per source: P x L, row p = delta_sp

  size_t num_sources() const { return weights.size(); }
  size_t num_devices() const {
    return concentrations.empty() ? 0 : concentrations.front().rows();
  }
  size_t num_angles() const {
    return concentrations.empty() ? 0 : concentrations.front().cols();
  }
  void Validate() const;
};

struct EStepResult {
  Matrix gamma;                          // N x S responsibilities
  std::vector<double> frame_log_likelihood;
  double log_likelihood = 0.0;           // sum over frames
};

EStepResult EStep(const FeatureSet& features, const DmmParams& params,
                  int threads = 1);

// pi_s = sum_n gamma_ns / N.
std::vector<double> MStepWeights(const Matrix& gamma);

enum class InitStrategy { kPeakKMeans, kRandom };

// Initial parameters. kPeakKMeans clusters frames by the vector of per-device
// peak angles (seeded k-means++ with restarts); kRandom, and kPeakKMeans when
// fewer than S distinct peak vectors exist, assigns a seeded permutation of
// the frames round-robin. Concentrations come from moment matching each
// cluster; pi from cluster sizes.
DmmParams InitParams(const FeatureSet& features, size_t num_sources,
                     uint64_t seed, InitStrategy strategy = InitStrategy::kPeakKMeans);

// Hard cluster assignment used by InitParams, exposed for testing.
std::vector<size_t> InitialAssignment(const FeatureSet& features,
                                      size_t num_sources, uint64_t seed,
                                      InitStrategy strategy);

struct FitOptions {
  int max_iters = 100;
  double tol = 1e-6;            // relative log-likelihood improvement
  InitStrategy init = InitStrategy::kPeakKMeans;
  uint64_t seed = 0;
  DirichletMleOptions mle;
  double death_threshold = 1e-8;
  int threads = 1;
};

struct FitReport {
  std::vector<double> log_likelihood_trace;  // one entry per E-step
  int iterations_run = 0;                    // completed M-steps
  bool converged = false;
  int reinitializations = 0;                 // component-death recoveries
  DmmParams params;
  Matrix gamma;
};

FitReport Fit(const FeatureSet& features, size_t num_sources,
              const FitOptions& opts = {});

// EM from explicit starting parameters.
FitReport FitFrom(const FeatureSet& features, DmmParams init,
                  const FitOptions& opts = {});

// Plain-text JSON model file: S, P, L, weights, concentrations and an opaque
// config echo.
std::string SerializeModel(const DmmParams& params,
                           const std::string& config_json = "{}");
DmmParams ParseModel(const std::string& text);

}  // namespace sdiar

#endif  // SDIAR_DMM_H_
