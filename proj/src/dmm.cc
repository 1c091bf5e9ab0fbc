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

#include "sdiar/dmm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "json.hpp"

namespace sdiar {
namespace {

using nlohmann::json;

constexpr int kKMeansRestarts = 8;
constexpr int kKMeansIters = 100;

double UniformUnit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

size_t UniformIndex(std::mt19937_64& rng, size_t n) {
  return std::min(n - 1, static_cast<size_t>(UniformUnit(rng) * n));
}

std::vector<Matrix> LogFeatures(const FeatureSet& features) {
  std::vector<Matrix> logs;
  logs.reserve(features.size());
  for (const auto& f : features) {
    Matrix lf(f.rows(), f.cols());
    for (size_t i = 0; i < f.data().size(); ++i) {
      lf.data()[i] = std::log(f.data()[i]);
    }
    logs.push_back(std::move(lf));
  }
  return logs;
}

EStepResult EStepWithLogs(const std::vector<Matrix>& log_features,
                          const DmmParams& params, int threads) {
  const size_t sources = params.num_sources();
  const size_t devices = log_features.size();
  const size_t frames = log_features.front().rows();
  const size_t dims = log_features.front().cols();

  // log pi_s + sum_p log normalizer(delta_sp), hoisted out of the frame loop.
  std::vector<double> offset(sources);
  for (size_t s = 0; s < sources; ++s) {
    offset[s] = std::log(params.weights[s]);
    for (size_t p = 0; p < devices; ++p) {
      offset[s] += DirichletLogNormalizer(params.concentrations[s].row(p));
    }
  }

  EStepResult out;
  out.gamma = Matrix(frames, sources);
  out.frame_log_likelihood.assign(frames, 0.0);
  ParallelFor(frames, threads, [&](size_t n) {
    std::vector<double> joint(sources);
    for (size_t s = 0; s < sources; ++s) {
      double v = offset[s];
      for (size_t p = 0; p < devices; ++p) {
        const auto delta = params.concentrations[s].row(p);
        const auto logs = log_features[p].row(n);
        for (size_t l = 0; l < dims; ++l) v += (delta[l] - 1.0) * logs[l];
      }
      joint[s] = v;
    }
    const double total = LogSumExp(joint);
    out.frame_log_likelihood[n] = total;
    auto row = out.gamma.row(n);
    for (size_t s = 0; s < sources; ++s) row[s] = std::exp(joint[s] - total);
  });

  double ll = 0.0;
  for (double v : out.frame_log_likelihood) {
    if (!std::isfinite(v)) {
      throw ProcessingError("non-finite log-likelihood in E-step");
    }
    ll += v;
  }
  out.log_likelihood = ll;
  return out;
}

// Per-frame vector of per-device peak angle indices.
std::vector<std::vector<double>> PeakVectors(const FeatureSet& features) {
  const size_t frames = features.front().rows();
  std::vector<std::vector<double>> points(frames,
                                          std::vector<double>(features.size()));
  for (size_t n = 0; n < frames; ++n) {
    for (size_t p = 0; p < features.size(); ++p) {
      points[n][p] = static_cast<double>(ArgMax(features[p].row(n)));
    }
  }
  return points;
}

double SquaredDistance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

struct KMeansResult {
  std::vector<size_t> labels;
  std::vector<std::vector<double>> centers;
  double inertia = std::numeric_limits<double>::infinity();
};

KMeansResult KMeansOnce(const std::vector<std::vector<double>>& points, size_t k,
                        std::mt19937_64& rng) {
  const size_t n = points.size();
  KMeansResult r;
  // k-means++ seeding.
  r.centers.push_back(points[UniformIndex(rng, n)]);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (r.centers.size() < k) {
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], SquaredDistance(points[i], r.centers.back()));
      total += nearest[i];
    }
    size_t pick = n - 1;
    if (total > 0.0) {
      double u = UniformUnit(rng) * total;
      for (size_t i = 0; i < n; ++i) {
        u -= nearest[i];
        if (u < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = UniformIndex(rng, n);
    }
    r.centers.push_back(points[pick]);
  }

  r.labels.assign(n, 0);
  const size_t dims = points.front().size();
  for (int iter = 0; iter < kKMeansIters; ++iter) {
    bool changed = iter == 0;
    for (size_t i = 0; i < n; ++i) {
      size_t best = 0;
      double best_d = SquaredDistance(points[i], r.centers[0]);
      for (size_t c = 1; c < k; ++c) {
        const double d = SquaredDistance(points[i], r.centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (r.labels[i] != best) changed = true;
      r.labels[i] = best;
    }
    std::vector<std::vector<double>> sums(k, std::vector<double>(dims, 0.0));
    std::vector<size_t> counts(k, 0);
    for (size_t i = 0; i < n; ++i) {
      ++counts[r.labels[i]];
      for (size_t d = 0; d < dims; ++d) sums[r.labels[i]][d] += points[i][d];
    }
    for (size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Empty cluster: move it to the point farthest from its center.
        size_t far = 0;
        double far_d = -1.0;
        for (size_t i = 0; i < n; ++i) {
          const double d = SquaredDistance(points[i], r.centers[r.labels[i]]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        r.centers[c] = points[far];
        r.labels[far] = c;
        changed = true;
        continue;
      }
      for (size_t d = 0; d < dims; ++d) {
        r.centers[c][d] = sums[c][d] / static_cast<double>(counts[c]);
      }
    }
    if (!changed) break;
  }
  r.inertia = 0.0;
  for (size_t i = 0; i < n; ++i) {
    r.inertia += SquaredDistance(points[i], r.centers[r.labels[i]]);
  }
  return r;
}

std::vector<size_t> RandomAssignment(size_t frames, size_t k,
                                     std::mt19937_64& rng) {
  std::vector<size_t> order(frames);
  std::iota(order.begin(), order.end(), 0);
  for (size_t i = frames; i > 1; --i) {
    std::swap(order[i - 1], order[UniformIndex(rng, i)]);
  }
  std::vector<size_t> labels(frames);
  for (size_t i = 0; i < frames; ++i) labels[order[i]] = i % k;
  return labels;
}

DmmParams ParamsFromAssignment(const FeatureSet& features,
                               const std::vector<size_t>& labels, size_t k) {
  const size_t frames = features.front().rows();
  DmmParams params;
  params.weights.assign(k, 0.0);
  for (size_t label : labels) params.weights[label] += 1.0;
  for (double& w : params.weights) w /= static_cast<double>(frames);
  for (size_t s = 0; s < k; ++s) {
    std::vector<double> mask(frames, 0.0);
    for (size_t n = 0; n < frames; ++n) mask[n] = labels[n] == s ? 1.0 : 0.0;
    Matrix conc(features.size(), features.front().cols());
    for (size_t p = 0; p < features.size(); ++p) {
      const auto delta = MomentMatchDirichlet(features[p], mask);
      std::copy(delta.begin(), delta.end(), conc.row(p).begin());
    }
    params.concentrations.push_back(std::move(conc));
  }
  return params;
}

// Revives components whose weight collapsed by refitting them on the frames
// the current model explains worst.
std::vector<bool> ReviveDeadComponents(const FeatureSet& features,
                                       const EStepResult& e, double threshold,
                                       DmmParams* params) {
  const size_t frames = features.front().rows();
  const size_t k = params->num_sources();
  std::vector<size_t> dead;
  for (size_t s = 0; s < k; ++s) {
    if (params->weights[s] < threshold) dead.push_back(s);
  }
  std::vector<bool> revived(k, false);
  if (dead.empty()) return revived;

  std::vector<size_t> order(frames);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return e.frame_log_likelihood[a] < e.frame_log_likelihood[b];
  });
  const size_t take = std::max<size_t>(1, frames / (k * dead.size()));
  size_t cursor = 0;
  for (size_t s : dead) {
    std::vector<double> mask(frames, 0.0);
    size_t used = 0;
    for (; cursor < frames && used < take; ++cursor, ++used) mask[order[cursor]] = 1.0;
    for (size_t p = 0; p < features.size(); ++p) {
      const auto delta = MomentMatchDirichlet(features[p], mask);
      std::copy(delta.begin(), delta.end(), params->concentrations[s].row(p).begin());
    }
    params->weights[s] = static_cast<double>(used) / static_cast<double>(frames);
    revived[s] = true;
  }
  const double total =
      std::accumulate(params->weights.begin(), params->weights.end(), 0.0);
  for (double& w : params->weights) w /= total;
  return revived;
}

}  // namespace

void ValidateFeatures(const FeatureSet& features) {
  if (features.empty()) throw InputError("no device features");
  const size_t frames = features.front().rows();
  const size_t dims = features.front().cols();
  if (frames == 0 || dims == 0) throw InputError("empty feature matrix");
  for (const auto& f : features) {
    if (f.rows() != frames || f.cols() != dims) {
      throw InputError("devices disagree on frame count or grid size");
    }
    for (double v : f.data()) {
      if (!(v > 0.0) || !(v <= 1.0)) {
        throw InputError("feature entries must be probabilities in (0, 1]");
      }
    }
  }
}

void DmmParams::Validate() const {
  if (weights.empty() || concentrations.size() != weights.size()) {
    throw InputError("DMM parameters: inconsistent source count");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw InputError("DMM parameters: nonpositive weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InputError("DMM parameters: weights do not sum to 1");
  }
  for (const auto& c : concentrations) {
    if (c.rows() != num_devices() || c.cols() != num_angles()) {
      throw InputError("DMM parameters: ragged concentration tensor");
    }
    for (double d : c.data()) {
      if (!(d > 0.0) || !std::isfinite(d)) {
        throw InputError("DMM parameters: nonpositive concentration");
      }
    }
  }
}

EStepResult EStep(const FeatureSet& features, const DmmParams& params,
                  int threads) {
  ValidateFeatures(features);
  params.Validate();
  if (params.num_devices() != features.size() ||
      params.num_angles() != features.front().cols()) {
    throw InputError("DMM parameters do not match the feature layout");
  }
  return EStepWithLogs(LogFeatures(features), params, threads);
}

std::vector<double> MStepWeights(const Matrix& gamma) {
  std::vector<double> pi(gamma.cols(), 0.0);
  for (size_t n = 0; n < gamma.rows(); ++n) {
    for (size_t s = 0; s < gamma.cols(); ++s) pi[s] += gamma(n, s);
  }
  for (double& w : pi) w /= static_cast<double>(gamma.rows());
  return pi;
}

std::vector<size_t> InitialAssignment(const FeatureSet& features,
                                      size_t num_sources, uint64_t seed,
                                      InitStrategy strategy) {
  ValidateFeatures(features);
  const size_t frames = features.front().rows();
  if (num_sources == 0) throw InputError("number of sources must be positive");
  if (frames < num_sources) throw InputError("fewer frames than sources");

  std::mt19937_64 rng(seed);
  if (strategy == InitStrategy::kPeakKMeans) {
    const auto points = PeakVectors(features);
    const std::set<std::vector<double>> distinct(points.begin(), points.end());
    if (distinct.size() >= num_sources) {
      KMeansResult best;
      for (int restart = 0; restart < kKMeansRestarts; ++restart) {
        KMeansResult r = KMeansOnce(points, num_sources, rng);
        if (r.inertia < best.inertia) best = std::move(r);
      }
      // Canonical order: clusters sorted by center, so labels do not depend on
      // which restart won.
      std::vector<size_t> order(num_sources);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return best.centers[a] < best.centers[b];
      });
      std::vector<size_t> rank(num_sources);
      for (size_t i = 0; i < num_sources; ++i) rank[order[i]] = i;
      std::vector<size_t> counts(num_sources, 0);
      for (size_t& label : best.labels) {
        label = rank[label];
        ++counts[label];
      }
      if (std::find(counts.begin(), counts.end(), 0) == counts.end()) {
        return best.labels;
      }
    }
  }
  return RandomAssignment(frames, num_sources, rng);
}

DmmParams InitParams(const FeatureSet& features, size_t num_sources,
                     uint64_t seed, InitStrategy strategy) {
  const auto labels = InitialAssignment(features, num_sources, seed, strategy);
  return ParamsFromAssignment(features, labels, num_sources);
}

FitReport FitFrom(const FeatureSet& features, DmmParams params,
                  const FitOptions& opts) {
  ValidateFeatures(features);
  params.Validate();
  if (params.num_devices() != features.size() ||
      params.num_angles() != features.front().cols()) {
    throw InputError("DMM parameters do not match the feature layout");
  }
  if (opts.max_iters < 0) throw InputError("max_iters must be nonnegative");

  const auto log_features = LogFeatures(features);
  const size_t sources = params.num_sources();
  const size_t devices = features.size();
  const size_t frames = features.front().rows();

  FitReport report;
  EStepResult e = EStepWithLogs(log_features, params, opts.threads);
  report.log_likelihood_trace.push_back(e.log_likelihood);
  bool just_revived = false;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    params.weights = MStepWeights(e.gamma);
    const auto revived =
        ReviveDeadComponents(features, e, opts.death_threshold, &params);
    const auto revived_count =
        static_cast<int>(std::count(revived.begin(), revived.end(), true));
    report.reinitializations += revived_count;

    // Concentrations: one weighted MLE per (source, device), warm-started.
    ParallelFor(sources * devices, opts.threads, [&](size_t job) {
      const size_t s = job / devices;
      const size_t p = job % devices;
      if (revived[s]) return;
      std::vector<double> weights(frames);
      for (size_t n = 0; n < frames; ++n) weights[n] = e.gamma(n, s);
      std::vector<double> mean_log(features[p].cols(), 0.0);
      double total = 0.0;
      for (size_t n = 0; n < frames; ++n) {
        if (weights[n] == 0.0) continue;
        total += weights[n];
        const auto logs = log_features[p].row(n);
        for (size_t l = 0; l < mean_log.size(); ++l) {
          mean_log[l] += weights[n] * logs[l];
        }
      }
      if (!(total > 0.0)) return;
      for (double& m : mean_log) m /= total;
      auto delta = params.concentrations[s].row(p);
      const auto fit = FitDirichlet(mean_log, delta, opts.mle);
      std::copy(fit.delta.begin(), fit.delta.end(), delta.begin());
    });
    report.iterations_run = iter + 1;
    just_revived = revived_count > 0;

    e = EStepWithLogs(log_features, params, opts.threads);
    const double prev = report.log_likelihood_trace.back();
    report.log_likelihood_trace.push_back(e.log_likelihood);
    if (!just_revived &&
        e.log_likelihood - prev < opts.tol * std::abs(prev)) {
      report.converged = true;
      break;
    }
  }
  report.params = std::move(params);
  report.gamma = std::move(e.gamma);
  return report;
}

FitReport Fit(const FeatureSet& features, size_t num_sources,
              const FitOptions& opts) {
  return FitFrom(features, InitParams(features, num_sources, opts.seed, opts.init),
                 opts);
}

std::string SerializeModel(const DmmParams& params, const std::string& config_json) {
  params.Validate();
  json j;
  j["format"] = "sdiar-dmm";
  j["version"] = 1;
  j["sources"] = params.num_sources();
  j["devices"] = params.num_devices();
  j["angles"] = params.num_angles();
  j["weights"] = params.weights;
  json conc = json::array();
  for (const auto& c : params.concentrations) {
    json per_device = json::array();
    for (size_t p = 0; p < c.rows(); ++p) {
      const auto row = c.row(p);
      per_device.push_back(std::vector<double>(row.begin(), row.end()));
    }
    conc.push_back(std::move(per_device));
  }
  j["concentrations"] = std::move(conc);
  j["config"] = json::parse(config_json);
  return j.dump(2);
}

DmmParams ParseModel(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (j.value("format", "") != "sdiar-dmm" || j.value("version", 0) != 1) {
    throw InputError("unrecognized model file format");
  }
  try {
    const auto sources = j.at("sources").get<size_t>();
    const auto devices = j.at("devices").get<size_t>();
    const auto angles = j.at("angles").get<size_t>();
    DmmParams params;
    params.weights = j.at("weights").get<std::vector<double>>();
    const auto& conc = j.at("concentrations");
    if (params.weights.size() != sources || conc.size() != sources) {
      throw InputError("model file: source count mismatch");
    }
    for (const auto& per_device : conc) {
      if (per_device.size() != devices) {
        throw InputError("model file: device count mismatch");
      }
      Matrix m(devices, angles);
      for (size_t p = 0; p < devices; ++p) {
        const auto row = per_device[p].get<std::vector<double>>();
        if (row.size() != angles) throw InputError("model file: grid size mismatch");
        std::copy(row.begin(), row.end(), m.row(p).begin());
      }
      params.concentrations.push_back(std::move(m));
    }
    params.Validate();
    return params;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed model file: ") + e.what());
  }
}

}  // namespace sdiar
