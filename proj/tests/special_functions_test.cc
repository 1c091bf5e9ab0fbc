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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "sdiar/common.h"

namespace sdiar {
namespace {

// High-precision values computed offline with mpmath at 40 digits.
struct Reference {
  double x, lgamma, digamma, trigamma;
};

const std::vector<Reference> kTable = {
    {0.001, 6.9071788853838536825, -1000.5755719318103005, 1000001.642533195869},
    {0.5, 0.57236494292470008707, -1.9635100260214234794, 4.9348022005446793094},
    {1.0, 0.0, -0.57721566490153286061, 1.6449340668482264365},
    {2.5, 0.28468287047291915963, 0.70315664064524318723, 0.49035775610023486497},
    {10.0, 12.801827480081469611, 2.2517525890667211076, 0.10516633568168574612},
    {123.456, 469.60554712992946873, 4.8118293238289853873, 0.0081329458342781980101},
    {10000.0, 82099.717496442377273, 9.2102903711428494036, 0.00010000500016666666633},
};

double Rel(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

TEST(SpecialFunctionsTest, MatchesHighPrecisionTable) {
  for (const auto& r : kTable) {
    EXPECT_LT(Rel(LogGamma(r.x), r.lgamma), 1e-13) << r.x;
    EXPECT_LT(Rel(Digamma(r.x), r.digamma), 1e-13) << r.x;
    EXPECT_LT(std::abs(Trigamma(r.x) - r.trigamma) / r.trigamma, 1e-12) << r.x;
  }
}

TEST(SpecialFunctionsTest, LogGammaOfFortySix) {
  EXPECT_NEAR(LogGamma(46.0), 129.12393363912721488, 1e-11);
}

TEST(SpecialFunctionsTest, RecurrenceRelations) {
  for (double x : {0.01, 0.3, 1.7, 5.0, 42.0}) {
    EXPECT_NEAR(LogGamma(x + 1.0) - LogGamma(x), std::log(x), 1e-12 * std::max(1.0, LogGamma(x)));
    EXPECT_NEAR(Digamma(x + 1.0) - Digamma(x), 1.0 / x, 1e-11 / x);
    EXPECT_NEAR(Trigamma(x) - Trigamma(x + 1.0), 1.0 / (x * x), 1e-10 / (x * x));
  }
}

TEST(SpecialFunctionsTest, InverseDigammaRoundTrip) {
  for (double x : {1e-4, 1e-2, 0.1, 0.5, 1.0, 3.0, 17.0, 250.0, 1e4, 1e6}) {
    EXPECT_NEAR(InverseDigamma(Digamma(x)), x, 1e-10 * x) << x;
  }
  for (double y : {-50.0, -3.0, -0.5, 0.0, 0.7, 4.0, 12.0}) {
    EXPECT_NEAR(Digamma(InverseDigamma(y)), y, 1e-12 * std::max(1.0, std::abs(y))) << y;
  }
}

TEST(SpecialFunctionsTest, RejectsNonPositiveArguments) {
  EXPECT_THROW(LogGamma(0.0), InputError);
  EXPECT_THROW(Digamma(-1.0), InputError);
  EXPECT_THROW(Trigamma(0.0), InputError);
}

}  // namespace
}  // namespace sdiar
