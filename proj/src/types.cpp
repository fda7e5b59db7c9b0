// Copyright 2026 The ScrewSplat Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include "screwsplat/types.hpp"

#include <cmath>
#include <numbers>

namespace screwsplat {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::DegenerateAxis: return "DegenerateAxis";
    case Errc::NotRevolute: return "NotRevolute";
    case Errc::TypeMismatch: return "TypeMismatch";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::TooSmall: return "TooSmall";
    case Errc::SingularCovariance: return "SingularCovariance";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::InvalidStep: return "InvalidStep";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::OutOfLimits: return "OutOfLimits";
    case Errc::EmptySelection: return "EmptySelection";
    case Errc::EmptySet: return "EmptySet";
    case Errc::EmptyObservations: return "EmptyObservations";
    case Errc::DegenerateSpace: return "DegenerateSpace";
    case Errc::DegenerateGoal: return "DegenerateGoal";
    case Errc::DeadScrew: return "DeadScrew";
    case Errc::EmptyPart: return "EmptyPart";
    case Errc::Io: return "Io";
    case Errc::Parse: return "Parse";
  }
  return "Unknown";
}

double standard_normal(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

VecX softmax(const VecX& logits) {
  if (logits.size() == 0) return logits;
  const double m = logits.maxCoeff();
  VecX e = (logits.array() - m).exp();
  return e / e.sum();
}

}  // namespace screwsplat
