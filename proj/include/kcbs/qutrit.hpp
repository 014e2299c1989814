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

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "kcbs/errors.hpp"

namespace kcbs {

using Complex = std::complex<double>;
using Vec3c = Eigen::Vector3cd;
using Mat3c = Eigen::Matrix3cd;

/// Largest KCBS value reachable by a quantum system, 4*sqrt(5) - 5.
inline const double kQuantumBound = 4.0 * std::sqrt(5.0) - 5.0;
/// Largest KCBS value reachable by a non-contextual model.
inline constexpr double kClassicalBound = 3.0;

/// Normalized qutrit state vector.
class Ket3 {
  public:
    /// Rejects vectors with norm below 1e-9; otherwise normalizes.
    static Ket3 normalized(const Vec3c &v) {
        const double n = v.norm();
        if (!(n >= 1e-9)) {
            throw InvalidParameter("cannot normalize a near-zero qutrit vector");
        }
        return Ket3(v / n);
    }
    static Ket3 normalized(Complex a0, Complex a1, Complex a2) { return normalized(Vec3c(a0, a1, a2)); }
    static Ket3 basis(int level) {
        if (level < 0 || level > 2) {
            throw InvalidParameter("qutrit basis level must be 0, 1 or 2");
        }
        Vec3c v = Vec3c::Zero();
        v(level) = 1.0;
        return Ket3(v);
    }

    [[nodiscard]] const Vec3c &amplitudes() const noexcept { return amp_; }
    [[nodiscard]] Complex operator[](std::size_t i) const { return amp_(static_cast<Eigen::Index>(i)); }
    [[nodiscard]] Complex inner(const Ket3 &other) const { return amp_.dot(other.amp_); }
    [[nodiscard]] Mat3c projector() const { return amp_ * amp_.adjoint(); }

  private:
    explicit Ket3(Vec3c v) : amp_(std::move(v)) {}
    Vec3c amp_;
};

/// The five measurement vectors of a KCBS scenario; entry 0 is psi_1.
using Pentagon = std::array<Ket3, 5>;

/// Density operator; construction validates Hermiticity, unit trace and
/// positivity (eigenvalues >= -1e-10).
class Density3 {
  public:
    static Density3 from_matrix(const Mat3c &m) {
        if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
            throw InvalidState("density matrix is not Hermitian");
        }
        if (std::abs(m.trace() - Complex(1.0, 0.0)) > 1e-12) {
            throw InvalidState("density matrix trace is not 1");
        }
        Eigen::SelfAdjointEigenSolver<Mat3c> eig(m, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() < -1e-10) {
            throw InvalidState("density matrix has a negative eigenvalue");
        }
        return Density3(m);
    }
    static Density3 pure(const Ket3 &psi) { return Density3(psi.projector()); }
    static Density3 maximally_mixed() { return Density3(Mat3c::Identity() / 3.0); }

    /// Convex combination w*a + (1-w)*b.
    static Density3 mix(const Density3 &a, const Density3 &b, double w) {
        if (!(w >= 0.0 && w <= 1.0)) {
            throw InvalidParameter("mixing weight must lie in [0, 1]");
        }
        return Density3(w * a.m_ + (1.0 - w) * b.m_);
    }

    [[nodiscard]] const Mat3c &matrix() const noexcept { return m_; }

  private:
    explicit Density3(Mat3c m) : m_(std::move(m)) {}
    Mat3c m_;
};

/// Rank-1 projector |psi><psi|.
class Projector3 {
  public:
    explicit Projector3(const Ket3 &v) : vec_(v), m_(v.projector()) {}

    [[nodiscard]] const Ket3 &vector() const noexcept { return vec_; }
    [[nodiscard]] const Mat3c &matrix() const noexcept { return m_; }
    /// Projector for outcome `a`: a=1 is |psi><psi|, a=0 its complement.
    [[nodiscard]] Mat3c outcome(int a) const { return a == 1 ? m_ : Mat3c(Mat3c::Identity() - m_); }
    /// Observable 2|psi><psi| - I with eigenvalues +1 (a=1) and -1 (a=0).
    [[nodiscard]] Mat3c observable() const { return 2.0 * m_ - Mat3c::Identity(); }

  private:
    Ket3 vec_;
    Mat3c m_;
};

/// One of the five compatible pairs (1,2), (2,3), (3,4), (4,5), (1,5).
/// Observable labels are 1-based.
class Context {
  public:
    static constexpr std::size_t kCount = 5;

    Context(int i, int j) : index_(lookup(i, j)) {}

    static Context from_index(std::size_t index) {
        if (index >= kCount) {
            throw InvalidParameter("context index out of range");
        }
        return Context(index);
    }
    static std::array<Context, kCount> all() {
        return {Context(std::size_t{0}), Context(std::size_t{1}), Context(std::size_t{2}),
                Context(std::size_t{3}), Context(std::size_t{4})};
    }

    [[nodiscard]] std::size_t index() const noexcept { return index_; }
    [[nodiscard]] int first() const noexcept { return kPairs[index_].first; }
    [[nodiscard]] int second() const noexcept { return kPairs[index_].second; }
    [[nodiscard]] std::string label() const {
        return "(" + std::to_string(first()) + "," + std::to_string(second()) + ")";
    }

    static bool is_compatible(int i, int j) {
        for (const auto &[a, b] : kPairs) {
            if ((a == i && b == j) || (a == j && b == i)) {
                return true;
            }
        }
        return false;
    }

    friend bool operator==(const Context &, const Context &) = default;

  private:
    static constexpr std::array<std::pair<int, int>, kCount> kPairs{{{1, 2}, {2, 3}, {3, 4}, {4, 5}, {1, 5}}};

    explicit Context(std::size_t index) : index_(index) {}

    static std::size_t lookup(int i, int j) {
        for (std::size_t k = 0; k < kCount; ++k) {
            if (kPairs[k].first == i && kPairs[k].second == j) {
                return k;
            }
        }
        throw InvalidParameter("(" + std::to_string(i) + "," + std::to_string(j) +
                               ") is not a compatible KCBS context");
    }

    std::size_t index_;
};

/// Joint outcome distribution of one context. Outcome order used for
/// tie-breaking everywhere is 11, 10, 01, 00.
struct JointDist {
    double p11 = 0.0;
    double p10 = 0.0;
    double p01 = 0.0;
    double p00 = 0.0;

    [[nodiscard]] double at(int a, int b) const {
        if (a == 1) {
            return b == 1 ? p11 : p10;
        }
        return b == 1 ? p01 : p00;
    }
    [[nodiscard]] std::array<double, 4> ordered() const { return {p11, p10, p01, p00}; }
    [[nodiscard]] double p_unequal() const { return p10 + p01; }
    [[nodiscard]] double p_equal() const { return p11 + p00; }
};

/// Outcome pair for slot `slot` of JointDist::ordered().
[[nodiscard]] inline std::pair<int, int> outcome_of_slot(std::size_t slot) {
    constexpr std::array<std::pair<int, int>, 4> kSlots{{{1, 1}, {1, 0}, {0, 1}, {0, 0}}};
    return kSlots.at(slot);
}

/// The KCBS measurement vectors (real amplitudes).
[[nodiscard]] inline Pentagon kcbs_vectors() {
    using std::numbers::pi;
    const double alpha = std::sqrt(std::sqrt(5.0) / 5.0);
    const double b1 = -(std::sqrt(2.0) / 2.0) / std::cos(pi / 10.0);
    const double b34 = -(std::sqrt(2.0) / 2.0) * std::tan(pi / 10.0);
    const double b25 = -b1 * std::cos(pi / 5.0);
    const double g2 = b1 * std::sin(pi / 5.0);
    const double g4 = -std::sqrt(2.0) / 2.0;
    return {Ket3::normalized(alpha, b1, 0.0), Ket3::normalized(alpha, b25, g2),
            Ket3::normalized(alpha, b34, -g4), Ket3::normalized(alpha, b34, g4),
            Ket3::normalized(alpha, b25, -g2)};
}

/// The state |0> that reaches the quantum bound with kcbs_vectors().
[[nodiscard]] inline Density3 kcbs_state() { return Density3::pure(Ket3::basis(0)); }

/// Throws unless every compatible pair of `vectors` is orthogonal to `tol`.
inline void require_pentagon_orthogonality(const Pentagon &vectors, double tol = 1e-9) {
    for (const auto &ctx : Context::all()) {
        const auto &u = vectors[static_cast<std::size_t>(ctx.first() - 1)];
        const auto &v = vectors[static_cast<std::size_t>(ctx.second() - 1)];
        if (std::abs(u.inner(v)) > tol) {
            throw InvalidParameter("measurement vectors of context " + ctx.label() + " are not orthogonal");
        }
    }
}

/// Born-rule joint distribution Tr(rho O^a_i O^b_j) for a context.
[[nodiscard]] inline JointDist joint_probs(const Density3 &rho, const Context &ctx, const Pentagon &vectors) {
    const auto &u = vectors[static_cast<std::size_t>(ctx.first() - 1)];
    const auto &v = vectors[static_cast<std::size_t>(ctx.second() - 1)];
    if (std::abs(u.inner(v)) > 1e-9) {
        throw InvalidParameter("measurement vectors of context " + ctx.label() + " are not orthogonal");
    }
    const Projector3 pi(u);
    const Projector3 pj(v);
    auto prob = [&](int a, int b) { return (rho.matrix() * pi.outcome(a) * pj.outcome(b)).trace().real(); };
    return JointDist{prob(1, 1), prob(1, 0), prob(0, 1), prob(0, 0)};
}

/// L = sum over contexts of P(a_i != a_j) - P(a_i = a_j).
[[nodiscard]] inline double kcbs_value(const Density3 &rho, const Pentagon &vectors) {
    double total = 0.0;
    for (const auto &ctx : Context::all()) {
        const auto d = joint_probs(rho, ctx, vectors);
        total += d.p_unequal() - d.p_equal();
    }
    return total;
}

/// Largest |entry| of [A_i, A_j] with A = 2|psi><psi| - I; i, j are 1-based.
[[nodiscard]] inline double commutation_residual(int i, int j, const Pentagon &vectors) {
    if (i < 1 || i > 5 || j < 1 || j > 5) {
        throw InvalidParameter("observable index must be in 1..5");
    }
    const Mat3c a = Projector3(vectors[static_cast<std::size_t>(i - 1)]).observable();
    const Mat3c b = Projector3(vectors[static_cast<std::size_t>(j - 1)]).observable();
    return (a * b - b * a).cwiseAbs().maxCoeff();
}

/// Detector projection vectors of the measurement stage for half-wave plate
/// angles (degrees) of HWP5, HWP6 and HWP8. First is detector 1, second
/// detector 2.
[[nodiscard]] inline std::pair<Ket3, Ket3> hwp_projectors(double theta1_deg, double theta2_deg, double theta3_deg) {
    constexpr double kDeg = std::numbers::pi / 180.0;
    const double t1 = 2.0 * theta1_deg * kDeg;
    const double t2 = 2.0 * theta2_deg * kDeg;
    const double t3 = 2.0 * theta3_deg * kDeg;
    using std::cos;
    using std::sin;
    auto d1 = Ket3::normalized(cos(t2), -sin(t2) * cos(t1), -sin(t2) * sin(t1));
    auto d2 = Ket3::normalized(cos(t3) * sin(t2), cos(t3) * cos(t2) * cos(t1) - sin(t3) * sin(t1),
                               cos(t3) * cos(t2) * sin(t1) + sin(t3) * cos(t1));
    return {d1, d2};
}

/// Wave-plate settings per context: HWP5, HWP6, HWP8 angles and the
/// observables read by detectors 1 and 2.
struct WavePlateSetting {
    double hwp5_deg;
    double hwp6_deg;
    double hwp8_deg;
    int detector1;
    int detector2;
};

inline constexpr std::array<WavePlateSetting, 5> kWavePlateTable{{
    {0.0, 24.0, -12.95, 1, 2},
    {144.0, 24.0, 12.95, 3, 2},
    {144.0, 24.0, -12.95, 3, 4},
    {108.0, 24.0, 12.95, 5, 4},
    {108.0, 24.0, -12.95, 5, 1},
}};

/// v*rho + (1-v)*I/3.
[[nodiscard]] inline Density3 depolarize(const Density3 &rho, double v) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw InvalidParameter("depolarizing visibility must lie in [0, 1]");
    }
    return Density3::mix(rho, Density3::maximally_mixed(), v);
}

} // namespace kcbs
