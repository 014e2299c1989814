// Copyright 2026 The kcbs-rng Authors
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

#pragma once

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "kcbs/errors.hpp"

namespace kcbs::special {

[[nodiscard]] inline double erfc(double x) { return std::erfc(x); }

/// Regularized upper incomplete gamma Q(a, x).
[[nodiscard]] inline double igamc(double a, double x) {
    if (!(a > 0.0) || !(x >= 0.0)) {
        throw InvalidParameter("igamc needs a > 0 and x >= 0");
    }
    return boost::math::gamma_q(a, x);
}

/// Standard normal CDF.
[[nodiscard]] inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

} // namespace kcbs::special
