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
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kcbs/errors.hpp"

namespace kcbs::lp {

enum class Status { optimal, infeasible, unbounded };

/**
 * Dense two-phase primal simplex for
 *
 * ```
 * maximize c'x  subject to  A x = b,  x >= 0.
 * ```
 *
 * Pivoting follows Bland's rule, so degenerate problems terminate. Sized
 * for small problems (tens of rows and columns); the tableau is dense.
 *
 * On optimality the result carries the dual vector y (one entry per row of
 * the original A) and reduced costs c - A'y, which are all <= tol at an
 * optimum. On infeasibility it carries the row whose phase-one artificial
 * variable kept the largest value.
 */
template <typename Scalar = double>
struct Result {
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Status status = Status::infeasible;
    Scalar objective = 0;
    Vec x;
    Vec duals;
    Vec reduced_costs;
    /// Sum of artificial variables left after phase one.
    Scalar infeasibility = 0;
    std::optional<Eigen::Index> violated_row;
    int iterations = 0;
};

template <typename Scalar = double>
class DenseSimplex {
  public:
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    DenseSimplex(Mat a, Vec b, Vec c, Scalar tol = Scalar(1e-11))
        : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), tol_(tol) {}

    [[nodiscard]] Result<Scalar> solve() const {
        const Eigen::Index m = a_.rows();
        const Eigen::Index n = a_.cols();
        // columns: [x (n) | artificials (m) | rhs]
        Mat t = Mat::Zero(m, n + m + 1);
        Vec sign = Vec::Ones(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            if (b_(i) < 0) {
                sign(i) = -1;
            }
            t.row(i).head(n) = sign(i) * a_.row(i);
            t(i, n + i) = 1;
            t(i, n + m) = sign(i) * b_(i);
        }
        std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
        for (Eigen::Index i = 0; i < m; ++i) {
            basis[static_cast<std::size_t>(i)] = n + i;
        }

        Result<Scalar> res;
        Vec phase1 = Vec::Zero(n + m);
        phase1.tail(m).setConstant(-1);
        std::vector<bool> allowed(static_cast<std::size_t>(n + m), true);
        if (!iterate(t, basis, phase1, allowed, res.iterations)) {
            res.status = Status::unbounded; // cannot happen in phase one
            return res;
        }

        Scalar art_sum = 0;
        Scalar worst = 0;
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto bi = basis[static_cast<std::size_t>(i)];
            if (bi >= n) {
                const Scalar v = t(i, n + m);
                art_sum += v;
                if (v > worst) {
                    worst = v;
                    res.violated_row = bi - n;
                }
            }
        }
        res.infeasibility = art_sum;
        if (art_sum > feasibility_tol()) {
            res.status = Status::infeasible;
            return res;
        }
        res.violated_row.reset();

        // drive remaining zero-level artificials out of the basis
        for (Eigen::Index i = 0; i < m; ++i) {
            if (basis[static_cast<std::size_t>(i)] < n) {
                continue;
            }
            for (Eigen::Index j = 0; j < n; ++j) {
                if (std::abs(t(i, j)) > tol_) {
                    pivot(t, basis, i, j);
                    break;
                }
            }
            // a row with no structural entries is redundant and stays put
        }
        for (Eigen::Index j = n; j < n + m; ++j) {
            allowed[static_cast<std::size_t>(j)] = false;
        }

        Vec phase2 = Vec::Zero(n + m);
        phase2.head(n) = c_;
        if (!iterate(t, basis, phase2, allowed, res.iterations)) {
            res.status = Status::unbounded;
            return res;
        }

        res.status = Status::optimal;
        res.x = Vec::Zero(n);
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto bi = basis[static_cast<std::size_t>(i)];
            if (bi < n) {
                res.x(bi) = t(i, n + m);
            }
        }
        res.objective = c_.dot(res.x);
        // y' = c_B' B^{-1}; B^{-1} sits in the artificial block
        Vec cb(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto bi = basis[static_cast<std::size_t>(i)];
            cb(i) = bi < n ? c_(bi) : Scalar(0);
        }
        const Mat binv = t.block(0, n, m, m);
        res.duals = (cb.transpose() * binv).transpose().cwiseProduct(sign);
        res.reduced_costs = c_ - a_.transpose() * res.duals;
        return res;
    }

    /// Largest |A x - b| entry.
    [[nodiscard]] Scalar primal_residual(const Vec &x) const { return (a_ * x - b_).cwiseAbs().maxCoeff(); }

  private:
    [[nodiscard]] Scalar feasibility_tol() const { return Scalar(1e-9); }

    static void pivot(Mat &t, std::vector<Eigen::Index> &basis, Eigen::Index row, Eigen::Index col) {
        t.row(row) /= t(row, col);
        for (Eigen::Index i = 0; i < t.rows(); ++i) {
            if (i != row && t(i, col) != Scalar(0)) {
                t.row(i) -= t(i, col) * t.row(row);
            }
        }
        basis[static_cast<std::size_t>(row)] = col;
    }

    /// Maximizes cost'x over the current tableau; false when unbounded.
    bool iterate(Mat &t, std::vector<Eigen::Index> &basis, const Vec &cost, const std::vector<bool> &allowed,
                 int &iterations) const {
        const Eigen::Index m = t.rows();
        const Eigen::Index cols = t.cols() - 1;
        const int limit = 50 * static_cast<int>(cols + m) + 1000;
        for (int guard = 0; guard < limit; ++guard) {
            Vec cb(m);
            for (Eigen::Index i = 0; i < m; ++i) {
                cb(i) = cost(basis[static_cast<std::size_t>(i)]);
            }
            // Bland: lowest-index improving column
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < cols; ++j) {
                if (!allowed[static_cast<std::size_t>(j)]) {
                    continue;
                }
                const Scalar d = cost(j) - cb.dot(t.col(j));
                if (d > tol_) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) {
                return true;
            }
            Eigen::Index leave = -1;
            Scalar best = std::numeric_limits<Scalar>::infinity();
            for (Eigen::Index i = 0; i < m; ++i) {
                if (t(i, enter) > tol_) {
                    const Scalar ratio = t(i, cols) / t(i, enter);
                    if (ratio < best - tol_ ||
                        (std::abs(ratio - best) <= tol_ && leave >= 0 &&
                         basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
                        best = ratio;
                        leave = i;
                    }
                }
            }
            if (leave < 0) {
                return false;
            }
            pivot(t, basis, leave, enter);
            ++iterations;
        }
        throw NumericalFailure("simplex iteration limit reached");
    }

    Mat a_;
    Vec b_;
    Vec c_;
    Scalar tol_;
};

/// Numerical rank of a dense matrix.
template <typename Derived>
[[nodiscard]] Eigen::Index matrix_rank(const Eigen::MatrixBase<Derived> &a, double threshold = 1e-10) {
    Eigen::FullPivLU<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>> lu(a);
    lu.setThreshold(threshold);
    return lu.rank();
}

} // namespace kcbs::lp
