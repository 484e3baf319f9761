// Copyright 2026 The mfg-master-policy Authors
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
//
// Brute-force oracles on toy problems: enumeration over all deterministic
// non-stationary policies. Exponential; only usable for |X| <= 3, |A| <= 2,
// N_T <= 3.

#ifndef MFG_EXHAUSTIVE_H_
#define MFG_EXHAUSTIVE_H_

#include <cstdint>

#include "mfg/types.hpp"

namespace mfg {

struct ToyMfg {
  Environment env;
  Distribution mu0;
  int horizon = 2;
};

// Random finite MFG with |X| in 1..3, |A| in 1..2, horizon in 1..3, random
// stochastic kernels, random linear crowd reward. Deterministic in the seed.
ToyMfg RandomToyMfg(std::uint64_t seed);

// max over all |A|^(|X| * (horizon+1)) deterministic non-stationary policies
// of the exact return against the fixed flow.
double ExhaustiveBestResponseValue(const Environment& env,
                                   const Distribution& mu0, const MFFlow& flow,
                                   int horizon);

// Exploitability computed with the enumeration oracle instead of backward
// induction.
double ExhaustiveExploitability(const Environment& env, const Distribution& mu0,
                                const NonStationaryPolicy& pi, int horizon);

}  // namespace mfg

#endif  // MFG_EXHAUSTIVE_H_
