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
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "kcbs/device.hpp"
#include "kcbs/errors.hpp"
#include "kcbs/nelder_mead.hpp"
#include "kcbs/qutrit.hpp"
#include "kcbs/rng.hpp"
#include "kcbs/simplex.hpp"

namespace kcbs {

// ---------------------------------------------------------------------------
// Non-contextual bound

struct ClassicalBound {
    int max_value = std::numeric_limits<int>::min();
    std::vector<Strategy> maximizers;
    std::array<int, 32> values{}; ///< indexed by a_1 + 2 a_2 + ... + 16 a_5
};

/// Enumerates all 32 deterministic assignments.
[[nodiscard]] inline ClassicalBound classical_bound_bruteforce() {
    ClassicalBound out;
    for (unsigned code = 0; code < 32; ++code) {
        Strategy s{};
        for (std::size_t i = 0; i < 5; ++i) {
            s[i] = static_cast<std::uint8_t>((code >> i) & 1U);
        }
        const int v = strategy_value(s);
        out.values[code] = v;
        if (v > out.max_value) {
            out.max_value = v;
            out.maximizers.clear();
        }
        if (v == out.max_value) {
            out.maximizers.push_back(s);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Compatibility-only (NS) bound

namespace detail {

inline double clamp_violation(double L) {
    if (L > kQuantumBound + 1e-9) {
        throw OutOfRange("KCBS value " + std::to_string(L) + " exceeds the quantum bound 4*sqrt(5)-5");
    }
    return std::min(L, kQuantumBound);
}

} // namespace detail

/// Guessing probability allowed by compatibility alone: 1.75 - L/4.
[[nodiscard]] inline double guessing_ns(double L) {
    const double x = detail::clamp_violation(L);
    return x <= kClassicalBound ? 1.0 : 1.75 - x / 4.0;
}

/// Min-entropy bound -log2(1.75 - L/4); 0 at and below the classical bound.
[[nodiscard]] inline double f_ns(double L) {
    const double x = detail::clamp_violation(L);
    if (x <= kClassicalBound) {
        return 0.0;
    }
    return -std::log2(1.75 - x / 4.0);
}

class LpInfeasible : public Error {
  public:
    LpInfeasible(const std::string &what, std::string constraint) : Error(what), constraint_(std::move(constraint)) {}
    [[nodiscard]] const std::string &constraint() const noexcept { return constraint_; }

  private:
    std::string constraint_;
};

/**
 * Linear program over the 20 joint probabilities P(ab|ij).
 *
 * Variable `4*c + s` is context c with outcome slot s (11, 10, 01, 00).
 * Rows 0-4 normalize each context, rows 5-9 equate the marginal
 * P(a_i = 1) of observable i across its two contexts, row 10 fixes the KCBS
 * value. Non-negativity is the simplex's x >= 0.
 */
struct NsLpProblem {
    static constexpr Eigen::Index kVars = 20;
    static constexpr Eigen::Index kRows = 11;

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(kRows, kVars);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(kRows);

    explicit NsLpProblem(double L) {
        const auto contexts = Context::all();
        for (const auto &ctx : contexts) {
            const auto c = static_cast<Eigen::Index>(ctx.index());
            a.block(c, 4 * c, 1, 4).setOnes();
            b(c) = 1.0;
        }
        for (int obs = 1; obs <= 5; ++obs) {
            const Eigen::Index row = 4 + obs;
            double sign = 1.0;
            for (const auto &ctx : contexts) {
                if (ctx.first() != obs && ctx.second() != obs) {
                    continue;
                }
                const auto c = static_cast<Eigen::Index>(ctx.index());
                for (std::size_t s = 0; s < 4; ++s) {
                    const auto [ai, aj] = outcome_of_slot(s);
                    const int value = ctx.first() == obs ? ai : aj;
                    if (value == 1) {
                        a(row, 4 * c + static_cast<Eigen::Index>(s)) += sign;
                    }
                }
                sign = -1.0;
            }
        }
        for (Eigen::Index c = 0; c < 5; ++c) {
            for (std::size_t s = 0; s < 4; ++s) {
                const auto [ai, aj] = outcome_of_slot(s);
                a(kRows - 1, 4 * c + static_cast<Eigen::Index>(s)) = ai != aj ? 1.0 : -1.0;
            }
        }
        b(kRows - 1) = L;
    }

    [[nodiscard]] static std::string row_name(Eigen::Index row) {
        if (row < 5) {
            return "normalization of context " + Context::from_index(static_cast<std::size_t>(row)).label();
        }
        if (row < 10) {
            return "marginal consistency of A" + std::to_string(row - 4);
        }
        return "KCBS value";
    }
    [[nodiscard]] Eigen::Index rank() const { return lp::matrix_rank(a); }
};

struct NsLpSolution {
    double value = 0.0;
    Eigen::VectorXd x;
    Eigen::VectorXd duals;
    double max_reduced_cost = 0.0;
    double primal_residual = 0.0;
    double min_x = 0.0;
};

/// Maximizes P(slot | ctx) subject to compatibility and KCBS value L.
[[nodiscard]] inline NsLpSolution lp_solve_ns(double L, const Context &ctx, std::size_t slot) {
    if (slot > 3) {
        throw InvalidParameter("outcome slot must be 0..3");
    }
    NsLpProblem prob(L);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(NsLpProblem::kVars);
    c(4 * static_cast<Eigen::Index>(ctx.index()) + static_cast<Eigen::Index>(slot)) = 1.0;
    lp::DenseSimplex<double> solver(prob.a, prob.b, c);
    const auto r = solver.solve();
    if (r.status == lp::Status::infeasible) {
        const std::string name = NsLpProblem::row_name(r.violated_row.value_or(NsLpProblem::kRows - 1));
        throw LpInfeasible("KCBS value " + std::to_string(L) + " is infeasible; violated: " + name, name);
    }
    if (r.status == lp::Status::unbounded) {
        throw NumericalFailure("NS linear program reported unbounded");
    }
    NsLpSolution s;
    s.value = r.objective;
    s.x = r.x;
    s.duals = r.duals;
    s.max_reduced_cost = r.reduced_costs.maxCoeff();
    s.primal_residual = solver.primal_residual(r.x);
    s.min_x = r.x.minCoeff();
    return s;
}

/// Max over all 20 objectives of lp_solve_ns.
[[nodiscard]] inline double ns_guessing_probability_lp(double L) {
    double best = 0.0;
    for (const auto &ctx : Context::all()) {
        for (std::size_t s = 0; s < 4; ++s) {
            best = std::max(best, lp_solve_ns(L, ctx, s).value);
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Dimension-3 quantum realizations

struct Realization3 {
    Pentagon vectors = kcbs_vectors();
    Ket3 state = Ket3::basis(0);

    [[nodiscard]] double kcbs() const { return kcbs_value(Density3::pure(state), vectors); }
};

struct GuessingProb {
    double probability = 0.0;
    Context context{1, 2};
    std::size_t slot = 0; ///< 11, 10, 01, 00
};

/// Max joint outcome probability over contexts and outcomes; ties go to the
/// lowest context, then the order 11, 10, 01, 00.
[[nodiscard]] inline GuessingProb guessing_prob(const Realization3 &real) {
    const auto rho = Density3::pure(real.state);
    GuessingProb g;
    g.probability = -1.0;
    for (const auto &ctx : Context::all()) {
        const auto p = joint_probs(rho, ctx, real.vectors).ordered();
        for (std::size_t s = 0; s < 4; ++s) {
            if (p[s] > g.probability + 1e-12) {
                g = {p[s], ctx, s};
            }
        }
    }
    return g;
}

/// Parameter vector of a real realization: polar/azimuth of psi_1, one
/// angle each for psi_2..psi_4 inside the plane orthogonal to the previous
/// vector, polar/azimuth of the state. psi_5 is the unit vector orthogonal
/// to psi_4 and psi_1.
using RealizationParams = std::array<double, 7>;

namespace detail {

using Vec3 = Eigen::Vector3d;

inline Vec3 on_sphere(double polar, double azimuth) {
    return {std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth), std::cos(polar)};
}

/// Orthonormal basis of the plane orthogonal to unit `v`.
inline std::pair<Vec3, Vec3> plane_basis(const Vec3 &v) {
    const Vec3 e = std::abs(v.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 b1 = v.cross(e).normalized();
    return {b1, v.cross(b1)};
}

inline Vec3 in_plane(const Vec3 &v, double angle) {
    const auto [b1, b2] = plane_basis(v);
    return std::cos(angle) * b1 + std::sin(angle) * b2;
}

struct RealVectors {
    std::array<Vec3, 5> v;
    Vec3 s;
};

inline std::optional<RealVectors> real_vectors(const RealizationParams &p) {
    RealVectors r;
    r.v[0] = on_sphere(p[0], p[1]);
    r.v[1] = in_plane(r.v[0], p[2]);
    r.v[2] = in_plane(r.v[1], p[3]);
    r.v[3] = in_plane(r.v[2], p[4]);
    const Vec3 c = r.v[3].cross(r.v[0]);
    const double n = c.norm();
    if (!(n >= 1e-9)) {
        return std::nullopt;
    }
    r.v[4] = c / n;
    r.s = on_sphere(p[5], p[6]);
    return r;
}

inline Vec3 real_part(const Ket3 &k) {
    return {k[0].real(), k[1].real(), k[2].real()};
}

} // namespace detail

/// Realization for a parameter vector; empty when psi_4 is parallel to psi_1.
[[nodiscard]] inline std::optional<Realization3> realization_from_params(const RealizationParams &p) {
    const auto rv = detail::real_vectors(p);
    if (!rv) {
        return std::nullopt;
    }
    auto ket = [](const detail::Vec3 &v) { return Ket3::normalized(v.x(), v.y(), v.z()); };
    return Realization3{{ket(rv->v[0]), ket(rv->v[1]), ket(rv->v[2]), ket(rv->v[3]), ket(rv->v[4])}, ket(rv->s)};
}

/// Inverse of realization_from_params for real realizations (psi_5 is
/// recovered up to sign).
[[nodiscard]] inline RealizationParams params_from_realization(const Realization3 &r) {
    using detail::Vec3;
    auto angles = [](const Vec3 &v) { return std::pair{std::acos(std::clamp(v.z(), -1.0, 1.0)), std::atan2(v.y(), v.x())}; };
    auto plane_angle = [](const Vec3 &prev, const Vec3 &next) {
        const auto [b1, b2] = detail::plane_basis(prev);
        return std::atan2(next.dot(b2), next.dot(b1));
    };
    std::array<Vec3, 5> v;
    for (std::size_t i = 0; i < 5; ++i) {
        v[i] = detail::real_part(r.vectors[i]).normalized();
    }
    const auto [t1, a1] = angles(v[0]);
    const auto [ts, as] = angles(detail::real_part(r.state).normalized());
    return {t1, a1, plane_angle(v[0], v[1]), plane_angle(v[1], v[2]), plane_angle(v[2], v[3]), ts, as};
}

/// Deterministic realization with KCBS value 3 and guessing probability 1:
/// state = psi_1 = psi_3.
[[nodiscard]] inline Realization3 classical_realization() {
    const auto e0 = Ket3::basis(0);
    const auto e1 = Ket3::basis(1);
    const auto e2 = Ket3::basis(2);
    return Realization3{{e2, e0, e2, e1, e0}, e2};
}

struct QuantumSearchOptions {
    int restarts = 100;
    std::uint64_t seed = 7;
    double tolerance = 1e-6;       ///< final |L - target| required
    double initial_penalty = 10.0;
    double penalty_growth = 10.0;
    int max_stages = 14;
    int evals_per_stage = 4000;
    unsigned threads = 0;          ///< 0: hardware concurrency
};

struct QuantumPoint {
    double target = 0.0;
    double guessing = 0.0;          ///< best verified guessing probability
    double achieved = 0.0;          ///< KCBS value of the best realization
    bool flagged = true;            ///< no restart met the tolerance
    int converged_restarts = 0;
    std::optional<Realization3> realization;
};

namespace detail {

struct FastEval {
    double L;
    std::array<double, 5> x; ///< |<s|psi_i>|^2
};

inline std::optional<FastEval> fast_eval(const RealizationParams &p) {
    const auto rv = real_vectors(p);
    if (!rv) {
        return std::nullopt;
    }
    FastEval e{};
    double sum = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        const double d = rv->s.dot(rv->v[i]);
        e.x[i] = d * d;
        sum += e.x[i];
    }
    // orthogonal rank-1 pairs: p11 = 0, p10 = x_i, p01 = x_j
    e.L = 4.0 * sum - 5.0;
    return e;
}

inline double target_prob(const FastEval &e, const Context &ctx, std::size_t slot) {
    const double xi = e.x[static_cast<std::size_t>(ctx.first() - 1)];
    const double xj = e.x[static_cast<std::size_t>(ctx.second() - 1)];
    switch (slot) {
    case 1:
        return xi;
    case 2:
        return xj;
    case 3:
        return 1.0 - xi - xj;
    default:
        return 0.0;
    }
}

struct RestartOutcome {
    bool converged = false;
    double guessing = 0.0;
    double achieved = 0.0;
    std::optional<Realization3> realization;
};

inline RestartOutcome run_restart(double target, int restart, std::uint64_t point_seed,
                                  const QuantumSearchOptions &opt) {
    RealizationParams start{};
    if (restart == 0) {
        start = params_from_realization(Realization3{});
    } else if (restart == 1) {
        start = params_from_realization(classical_realization());
    } else {
        Rng rng(derive_seed(point_seed, {stream::restart, static_cast<std::uint64_t>(restart)}));
        for (auto &v : start) {
            v = rng.uniform(0.0, 2.0 * std::numbers::pi);
        }
    }
    // cycle the objective over contexts and the non-trivial outcomes 10, 01, 00
    const Context ctx = Context::from_index(static_cast<std::size_t>(restart) % 5);
    const std::size_t slot = 1 + static_cast<std::size_t>(restart / 5) % 3;

    RealizationParams x = start;
    double penalty = opt.initial_penalty;
    double step = 0.5;
    RestartOutcome out;
    for (int stage = 0; stage < opt.max_stages; ++stage) {
        auto objective = [&](const RealizationParams &p) {
            const auto e = fast_eval(p);
            if (!e) {
                return std::numeric_limits<double>::infinity();
            }
            const double r = e->L - target;
            return -target_prob(*e, ctx, slot) + penalty * r * r;
        };
        opt::NelderMeadOptions nm;
        nm.initial_step = step;
        nm.max_evals = opt.evals_per_stage;
        x = opt::nelder_mead<7>(objective, x, nm).x;
        const auto e = fast_eval(x);
        if (e && std::abs(e->L - target) < opt.tolerance) {
            break;
        }
        penalty *= opt.penalty_growth;
        step = std::max(step * 0.3, 1e-4);
    }
    const auto real = realization_from_params(x);
    if (!real) {
        return out;
    }
    // independent recomputation through the Born rule
    const double achieved = real->kcbs();
    if (!(std::abs(achieved - target) < opt.tolerance)) {
        return out;
    }
    out.converged = true;
    out.achieved = achieved;
    out.guessing = guessing_prob(*real).probability;
    out.realization = real;
    return out;
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn &&fn) {
    const unsigned hw = std::max(1U, std::thread::hardware_concurrency());
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(count, threads == 0 ? hw : threads));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) {
                fn(i);
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
}

} // namespace detail

/// Multi-start penalty search for the largest guessing probability of a
/// dimension-3 realization with KCBS value `target`.
[[nodiscard]] inline QuantumPoint quantum_search(double target, const QuantumSearchOptions &opt,
                                                 std::uint64_t point_label = 0) {
    if (opt.restarts < 1) {
        throw InvalidParameter("quantum search needs at least one restart");
    }
    if (!(target >= kClassicalBound - 1e-12 && target <= kQuantumBound + 1e-12)) {
        throw OutOfRange("quantum search target must lie in [3, 4*sqrt(5)-5]");
    }
    const std::uint64_t point_seed = derive_seed(opt.seed, {point_label});
    QuantumPoint best;
    best.target = target;
    for (int r = 0; r < opt.restarts; ++r) {
        const auto out = detail::run_restart(target, r, point_seed, opt);
        if (!out.converged) {
            continue;
        }
        ++best.converged_restarts;
        if (best.flagged || out.guessing > best.guessing) {
            best.flagged = false;
            best.guessing = out.guessing;
            best.achieved = out.achieved;
            best.realization = out.realization;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Entropy curves

enum class CurveKind { ns_analytic, ns_lp, quantum_reference };

[[nodiscard]] inline std::string to_string(CurveKind k) {
    switch (k) {
    case CurveKind::ns_analytic:
        return "ns_analytic";
    case CurveKind::ns_lp:
        return "ns_lp";
    case CurveKind::quantum_reference:
        return "quantum_reference";
    }
    return "ns_analytic";
}

struct CurvePoint {
    double L = 0.0;
    double f = 0.0;
};

struct CurveMetadata {
    int restarts = 0;
    double tolerance = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> flagged;          ///< grid values dropped from the curve
    std::vector<QuantumPoint> search;     ///< raw search output per grid value
};

/// Tabulated min-entropy bound f(L) with provenance.
struct EntropyCurve {
    CurveKind kind = CurveKind::ns_analytic;
    std::vector<CurvePoint> points;
    CurveMetadata metadata;

    [[nodiscard]] static EntropyCurve ns_analytic(const std::vector<double> &grid = {}) {
        EntropyCurve c;
        c.kind = CurveKind::ns_analytic;
        for (double L : grid) {
            c.points.push_back({L, f_ns(L)});
        }
        return c;
    }
};

/// n equally spaced values from 3 to 4*sqrt(5)-5 inclusive.
[[nodiscard]] inline std::vector<double> violation_grid(std::size_t n) {
    if (n < 2) {
        throw InvalidParameter("grid needs at least two points");
    }
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = kClassicalBound + (kQuantumBound - kClassicalBound) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    g.back() = kQuantumBound;
    return g;
}

/// NS curve tabulated from the LP optimum at each grid value.
[[nodiscard]] inline EntropyCurve ns_lp_curve(const std::vector<double> &grid) {
    EntropyCurve c;
    c.kind = CurveKind::ns_lp;
    for (double L : grid) {
        c.points.push_back({L, -std::log2(ns_guessing_probability_lp(L))});
    }
    return c;
}

/**
 * Smallest function above the points (L, F) that is concave and
 * non-increasing, evaluated at the same abscissae. Raising F lowers f, so
 * the envelope only ever weakens the bound.
 */
[[nodiscard]] inline std::vector<double> concave_decreasing_envelope(const std::vector<double> &xs,
                                                                     const std::vector<double> &ys) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> hull;
    for (std::size_t i = 0; i < n; ++i) {
        while (hull.size() >= 2) {
            const auto a = hull[hull.size() - 2];
            const auto b = hull.back();
            // drop b when it lies on or below the chord a -> i
            const double cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if (cross >= 0.0) {
                hull.pop_back();
            } else {
                break;
            }
        }
        hull.push_back(i);
    }
    std::vector<double> out(n);
    std::size_t seg = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (seg + 1 < hull.size() && xs[hull[seg + 1]] < xs[i]) {
            ++seg;
        }
        if (seg + 1 >= hull.size() || xs[hull[seg]] == xs[i]) {
            out[i] = ys[hull[seg]];
        } else {
            const auto a = hull[seg];
            const auto b = hull[seg + 1];
            const double t = (xs[i] - xs[a]) / (xs[b] - xs[a]);
            out[i] = ys[a] + t * (ys[b] - ys[a]);
        }
        out[i] = std::max(out[i], ys[i]);
    }
    for (std::size_t i = n; i-- > 1;) {
        out[i - 1] = std::max(out[i - 1], out[i]);
    }
    return out;
}

/// Quantum reference curve from explicit dimension-3 realizations.
[[nodiscard]] inline EntropyCurve quantum_curve(const std::vector<double> &grid, const QuantumSearchOptions &opt) {
    for (double L : grid) {
        if (!(L >= kClassicalBound - 1e-12 && L <= kQuantumBound + 1e-12)) {
            throw OutOfRange("quantum curve grid must lie within [3, 4*sqrt(5)-5]");
        }
    }
    std::vector<QuantumPoint> pts(grid.size());
    QuantumSearchOptions serial = opt;
    detail::parallel_for(grid.size(), opt.threads,
                         [&](std::size_t i) { pts[i] = quantum_search(grid[i], serial, static_cast<std::uint64_t>(i)); });

    EntropyCurve c;
    c.kind = CurveKind::quantum_reference;
    c.metadata.restarts = opt.restarts;
    c.metadata.tolerance = opt.tolerance;
    c.metadata.seed = opt.seed;
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto &p : pts) {
        if (p.flagged) {
            c.metadata.flagged.push_back(p.target);
            continue;
        }
        xs.push_back(p.target);
        ys.push_back(std::min(1.0, p.guessing));
    }
    const auto env = concave_decreasing_envelope(xs, ys);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        c.points.push_back({xs[i], std::max(0.0, -std::log2(env[i]))});
    }
    c.metadata.search = std::move(pts);
    return c;
}

/// f at L: closed form for ns_analytic, piecewise-linear otherwise. Zero at
/// or below 3; beyond the last node the last value is used.
[[nodiscard]] inline double curve_eval(const EntropyCurve &curve, double L) {
    const double x = detail::clamp_violation(L);
    if (x <= kClassicalBound) {
        return 0.0;
    }
    if (curve.kind == CurveKind::ns_analytic) {
        return f_ns(x);
    }
    const auto &p = curve.points;
    if (p.empty()) {
        throw InvalidParameter("entropy curve has no points");
    }
    if (x <= p.front().L) {
        if (p.front().L <= kClassicalBound) {
            return p.front().f;
        }
        return p.front().f * (x - kClassicalBound) / (p.front().L - kClassicalBound);
    }
    if (x >= p.back().L) {
        return p.back().f;
    }
    const auto it = std::upper_bound(p.begin(), p.end(), x, [](double v, const CurvePoint &q) { return v < q.L; });
    const auto &hi = *it;
    const auto &lo = *(it - 1);
    if (x == lo.L) {
        return lo.f;
    }
    const double t = (x - lo.L) / (hi.L - lo.L);
    return lo.f + t * (hi.f - lo.f);
}

/// Checks f(3) = 0, f non-decreasing and F = 2^-f non-increasing and
/// concave on the grid; returns a description of each violation.
[[nodiscard]] inline std::vector<std::string> curve_violations(const EntropyCurve &curve, double tol = 1e-6) {
    std::vector<std::string> out;
    const auto &p = curve.points;
    if (!p.empty() && std::abs(p.front().L - kClassicalBound) < 1e-12 && std::abs(p.front().f) > tol) {
        out.push_back("f(3) = " + std::to_string(p.front().f));
    }
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (p[i].f < p[i - 1].f - tol) {
            out.push_back("f decreases at L = " + std::to_string(p[i].L));
        }
    }
    for (std::size_t i = 1; i + 1 < p.size(); ++i) {
        const double f0 = std::exp2(-p[i - 1].f);
        const double f1 = std::exp2(-p[i].f);
        const double f2 = std::exp2(-p[i + 1].f);
        const double chord = f0 + (f2 - f0) * (p[i].L - p[i - 1].L) / (p[i + 1].L - p[i - 1].L);
        if (f1 < chord - tol) {
            out.push_back("F not concave at L = " + std::to_string(p[i].L));
        }
    }
    return out;
}

} // namespace kcbs
