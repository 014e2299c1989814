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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>

namespace kcbs::opt {

struct NelderMeadOptions {
    double initial_step = 0.5;
    double f_tol = 1e-15;  ///< spread of simplex values
    double x_tol = 1e-12;  ///< simplex diameter (max-norm)
    int max_evals = 20000;
};

template <std::size_t N>
struct NelderMeadResult {
    std::array<double, N> x{};
    double value = 0.0;
    int evals = 0;
    bool converged = false;
};

/**
 * Nelder-Mead downhill simplex on a fixed-dimension problem.
 *
 * Standard coefficients (reflection 1, expansion 2, contraction 1/2,
 * shrink 1/2). The objective may return +inf to reject a point.
 */
template <std::size_t N, typename F>
[[nodiscard]] NelderMeadResult<N> nelder_mead(F &&f, const std::array<double, N> &start,
                                              const NelderMeadOptions &opt = {}) {
    using Point = std::array<double, N>;
    std::array<Point, N + 1> pts{};
    std::array<double, N + 1> val{};
    NelderMeadResult<N> res;

    auto eval = [&](const Point &p) {
        ++res.evals;
        return f(p);
    };

    pts[0] = start;
    val[0] = eval(start);
    for (std::size_t i = 0; i < N; ++i) {
        pts[i + 1] = start;
        pts[i + 1][i] += opt.initial_step;
        val[i + 1] = eval(pts[i + 1]);
    }

    std::array<std::size_t, N + 1> order{};
    auto combine = [](const Point &a, const Point &b, double t) {
        // a + t * (b - a)
        Point p{};
        for (std::size_t i = 0; i < N; ++i) {
            p[i] = a[i] + t * (b[i] - a[i]);
        }
        return p;
    };

    while (res.evals < opt.max_evals) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[N - 1];

        double diameter = 0.0;
        for (std::size_t k = 0; k <= N; ++k) {
            for (std::size_t i = 0; i < N; ++i) {
                diameter = std::max(diameter, std::abs(pts[k][i] - pts[best][i]));
            }
        }
        if (std::abs(val[worst] - val[best]) <= opt.f_tol && diameter <= opt.x_tol) {
            res.converged = true;
            break;
        }
        if (diameter <= opt.x_tol * 1e-3) {
            res.converged = true;
            break;
        }

        Point centroid{};
        for (std::size_t k = 0; k <= N; ++k) {
            if (k == worst) {
                continue;
            }
            for (std::size_t i = 0; i < N; ++i) {
                centroid[i] += pts[k][i] / static_cast<double>(N);
            }
        }

        const Point reflected = combine(centroid, pts[worst], -1.0);
        const double fr = eval(reflected);
        if (fr < val[best]) {
            const Point expanded = combine(centroid, pts[worst], -2.0);
            const double fe = eval(expanded);
            if (fe < fr) {
                pts[worst] = expanded;
                val[worst] = fe;
            } else {
                pts[worst] = reflected;
                val[worst] = fr;
            }
            continue;
        }
        if (fr < val[second]) {
            pts[worst] = reflected;
            val[worst] = fr;
            continue;
        }
        const bool outside = fr < val[worst];
        const Point contracted = outside ? combine(centroid, reflected, 0.5) : combine(centroid, pts[worst], 0.5);
        const double fc = eval(contracted);
        if (fc < (outside ? fr : val[worst])) {
            pts[worst] = contracted;
            val[worst] = fc;
            continue;
        }
        for (std::size_t k = 0; k <= N; ++k) {
            if (k == best) {
                continue;
            }
            pts[k] = combine(pts[best], pts[k], 0.5);
            val[k] = eval(pts[k]);
        }
    }

    const auto it = std::min_element(val.begin(), val.end());
    const auto idx = static_cast<std::size_t>(it - val.begin());
    res.x = pts[idx];
    res.value = *it;
    return res;
}

} // namespace kcbs::opt
