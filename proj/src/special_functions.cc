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

#include "sdiar/special_functions.h"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>

#include "sdiar/common.h"

namespace sdiar {
namespace {

void RequirePositive(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw InputError("argument must be positive and finite");
  }
}

}  // namespace

double LogGamma(double x) {
  RequirePositive(x);
  return boost::math::lgamma(x);
}

double Digamma(double x) {
  RequirePositive(x);
  return boost::math::digamma(x);
}

double Trigamma(double x) {
  RequirePositive(x);
  return boost::math::trigamma(x);
}

double InverseDigamma(double y) {
  constexpr double kDigammaOne = -0.5772156649015328606;
  double x = y >= -2.22 ? std::exp(y) + 0.5 : -1.0 / (y - kDigammaOne);
  for (int iter = 0; iter < 50; ++iter) {
    const double step = (Digamma(x) - y) / Trigamma(x);
    double next = x - step;
    // Digamma is increasing and concave, so Newton from the left can
    // overshoot below zero; halve toward zero instead.
    if (!(next > 0.0)) next = 0.5 * x;
    const bool done = std::abs(next - x) <= 1e-14 * std::max(1.0, std::abs(x));
    x = next;
    if (done) break;
  }
  return x;
}

}  // namespace sdiar
