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

#ifndef SDIAR_TESTS_TEST_UTIL_H_
#define SDIAR_TESTS_TEST_UTIL_H_

#include <cmath>
#include <random>
#include <vector>

#include "sdiar/common.h"
#include "sdiar/dmm.h"

namespace sdiar::testing {

// Dirichlet sampler via normalized gamma variates.
inline std::vector<double> SampleDirichlet(const std::vector<double>& delta,
                                           std::mt19937_64& rng) {
  std::vector<double> s(delta.size());
  double total = 0.0;
  for (size_t l = 0; l < delta.size(); ++l) {
    std::gamma_distribution<double> g(delta[l], 1.0);
    s[l] = g(rng);
    total += s[l];
  }
  for (double& v : s) v /= total;
  return s;
}

inline Matrix SampleMatrix(const std::vector<double>& delta, size_t n, std::mt19937_64& rng) {
  Matrix m(n, delta.size());
  for (size_t i = 0; i < n; ++i) {
    const auto s = SampleDirichlet(delta, rng);
    std::copy(s.begin(), s.end(), m.row(i).begin());
  }
  return m;
}

// Concentration peaked at grid index `center`.
inline std::vector<double> PeakedDelta(size_t dims, double center, double height,
                                       double width = 2.0) {
  std::vector<double> d(dims);
  for (size_t l = 0; l < dims; ++l) {
    const double u = (static_cast<double>(l) - center) / width;
    d[l] = 1.0 + height * std::exp(-0.5 * u * u);
  }
  return d;
}

struct SyntheticMixture {
  FeatureSet features;
  std::vector<size_t> labels;
  std::vector<std::vector<std::vector<double>>> delta;  // [s][p]
};

// Frames drawn from S sources seen by P devices; each source has a random
// peak direction per device. Speaker turns are blocks of `run` frames.
inline SyntheticMixture MakeMixture(size_t sources, size_t devices, size_t dims, size_t frames,
                                    uint64_t seed, double height = 40.0, size_t run = 25) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> where(2.0, static_cast<double>(dims) - 3.0);
  SyntheticMixture mix;
  mix.delta.assign(sources, {});
  for (size_t s = 0; s < sources; ++s) {
    for (size_t p = 0; p < devices; ++p) {
      mix.delta[s].push_back(PeakedDelta(dims, where(rng), height));
    }
  }
  std::uniform_int_distribution<size_t> pick(0, sources - 1);
  size_t current = 0;
  for (size_t n = 0; n < frames; ++n) {
    if (n % run == 0) current = pick(rng);
    mix.labels.push_back(current);
  }
  mix.features.assign(devices, Matrix(frames, dims));
  for (size_t n = 0; n < frames; ++n) {
    for (size_t p = 0; p < devices; ++p) {
      const auto s = SampleDirichlet(mix.delta[mix.labels[n]][p], rng);
      std::copy(s.begin(), s.end(), mix.features[p].row(n).begin());
    }
  }
  return mix;
}

}  // namespace sdiar::testing

#endif  // SDIAR_TESTS_TEST_UTIL_H_
