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

#ifndef SDIAR_SPECIAL_FUNCTIONS_H_
#define SDIAR_SPECIAL_FUNCTIONS_H_

namespace sdiar {

// Defined for x > 0; other arguments throw InputError.
double LogGamma(double x);
double Digamma(double x);
double Trigamma(double x);

// Solves Digamma(x) = y for x > 0. Newton's method on the digamma function,
// started from the asymptotic inverse exp(y) + 1/2 (y >= -2.22) or
// -1/(y - Digamma(1)).
double InverseDigamma(double y);

}  // namespace sdiar

#endif  // SDIAR_SPECIAL_FUNCTIONS_H_
