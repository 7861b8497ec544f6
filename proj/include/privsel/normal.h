// Copyright 2026 The Privsel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRIVSEL_NORMAL_H_
#define PRIVSEL_NORMAL_H_

namespace privsel {

// Standard normal density.
double NormalPdf(double x);

// Standard normal CDF Phi(x), evaluated through erfc so that the lower tail
// keeps full relative precision.
double NormalCdf(double x);

// Survival function 1 - Phi(x), with full relative precision in the upper
// tail.
double NormalSf(double x);

// Inverse of NormalCdf. Returns -inf for p == 0 and +inf for p == 1; NaN
// outside [0, 1]. Wichura's AS241 rational approximation followed by one
// Newton step against NormalCdf.
double NormalQuantile(double p);

// The x with NormalSf(x) == q. Accurate for tiny q where 1 - q rounds to 1.
double NormalQuantileUpper(double q);

}  // namespace privsel

#endif  // PRIVSEL_NORMAL_H_
