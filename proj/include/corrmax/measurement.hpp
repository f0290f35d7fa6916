// Copyright 2026 The corrmax Authors
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

#include "corrmax/state.hpp"

#include <vector>

namespace corrmax {

/// Rank-one POM {|a_j><a_j|} stored as the columns of a d x n matrix.
/// Zero columns are allowed (trivially extended outcomes).
class MaximalPOM {
public:
    static MaximalPOM create(const CMatrix& kets, const Tolerances& tol = default_tolerances()) {
        const auto d = kets.rows();
        const auto n = kets.cols();
        if (d < 1 || n < 1) throw ValidationError(ErrorKind::size_mismatch, "POM needs d >= 1 and n >= 1");
        if (!kets.allFinite()) throw ValidationError(ErrorKind::incomplete_pom, "non-finite ket entries");
        if (n < d)
            throw ValidationError(ErrorKind::incomplete_pom,
                                  std::to_string(n) + " outcomes cannot resolve dimension " + std::to_string(d));
        double defect = max_abs(CMatrix(kets * kets.adjoint()) - CMatrix::Identity(d, d));
        if (defect > tol.completeness)
            throw ValidationError(ErrorKind::incomplete_pom, "max |sum_j |a_j><a_j| - 1| = " + std::to_string(defect));
        return MaximalPOM(kets);
    }

    static MaximalPOM create(const std::vector<CVector>& kets, int d, const Tolerances& tol = default_tolerances()) {
        CMatrix m(d, static_cast<Eigen::Index>(kets.size()));
        for (std::size_t j = 0; j < kets.size(); ++j) {
            if (kets[j].size() != d)
                throw ValidationError(ErrorKind::size_mismatch, "ket " + std::to_string(j) + " has wrong dimension");
            m.col(static_cast<Eigen::Index>(j)) = kets[j];
        }
        return create(m, tol);
    }

    int dim() const { return static_cast<int>(kets_.rows()); }
    int outcomes() const { return static_cast<int>(kets_.cols()); }
    const CMatrix& kets() const { return kets_; }
    CVector ket(int j) const { return kets_.col(j); }
    CMatrix element(int j) const { return kets_.col(j) * kets_.col(j).adjoint(); }

    /// True when the kets are pairwise orthogonal (an orthogonal POM, n = d).
    bool orthogonal(double tol = 1e-10) const {
        return max_abs(CMatrix(kets_.adjoint() * kets_) - CMatrix::Identity(outcomes(), outcomes())) <= tol;
    }

    /// Same POM padded with zero kets up to `n` outcomes.
    MaximalPOM padded(int n) const {
        if (n < outcomes()) throw ValidationError(ErrorKind::out_of_range, "cannot pad to fewer outcomes");
        CMatrix k = CMatrix::Zero(dim(), n);
        k.leftCols(outcomes()) = kets_;
        return MaximalPOM(k);
    }

private:
    explicit MaximalPOM(CMatrix kets) : kets_(std::move(kets)) {}
    CMatrix kets_;
};

/// Two-outcome spin POM {(1 + a.sigma)/2, (1 - a.sigma)/2} for a unit direction.
inline MaximalPOM spin_pom(const Eigen::Vector3d& dir) {
    double nrm = dir.norm();
    if (!dir.allFinite() || std::abs(nrm - 1.0) > 1e-9)
        throw ValidationError(ErrorKind::bad_norm, "spin direction must be a unit 3-vector");
    Eigen::Vector3d a = dir / nrm;
    CMatrix k(2, 2);
    const cplx plus_xy(a(0), a(1));
    if (a(2) >= 0.0) {
        double s = std::sqrt(2.0 * (1.0 + a(2)));
        k(0, 0) = (1.0 + a(2)) / s;
        k(1, 0) = plus_xy / s;
        k(0, 1) = -std::conj(plus_xy) / s;
        k(1, 1) = (1.0 + a(2)) / s;
    } else {
        double s = std::sqrt(2.0 * (1.0 - a(2)));
        k(0, 0) = std::conj(plus_xy) / s;
        k(1, 0) = (1.0 - a(2)) / s;
        k(0, 1) = (1.0 - a(2)) / s;
        k(1, 1) = -plus_xy / s;
    }
    return MaximalPOM::create(k);
}

/// Trine POM {(2/3)|phi_j><phi_j|} with Bloch vectors on an equilateral triangle.
inline MaximalPOM trine_pom() {
    const double c = std::sqrt(2.0 / 3.0);
    const double h = std::sqrt(3.0) / 2.0;
    CMatrix k(2, 3);
    k << c * 1.0, c * 0.5, c * 0.5, 0.0, c * h, -c * h;
    return MaximalPOM::create(k);
}

/// Mirror-symmetric three-outcome family; alpha = 1/3 reproduces the trine.
inline MaximalPOM mirror_pom(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw ValidationError(ErrorKind::out_of_range, "mirror parameter alpha must lie in [0, 1]");
    const double f1 = 1.0 - alpha;
    const double f23 = (1.0 + alpha) / 2.0;
    const double norm = 1.0 / std::sqrt(1.0 + alpha);
    CMatrix k(2, 3);
    k(0, 0) = std::sqrt(f1);
    k(1, 0) = 0.0;
    k(0, 1) = std::sqrt(f23) * norm * std::sqrt(alpha);
    k(1, 1) = std::sqrt(f23) * norm;
    k(0, 2) = std::sqrt(f23) * norm * std::sqrt(alpha);
    k(1, 2) = -std::sqrt(f23) * norm;
    return MaximalPOM::create(k);
}

// ---------------------------------------------------------------------------
// Naimark extension

/// Orthogonal POM on H_n whose projection onto the first d coordinates
/// reproduces a maximal POM. Columns of `frame` are the kets |x_j>.
class NaimarkFrame {
public:
    static NaimarkFrame from_unitary(const CMatrix& u, int d, const Tolerances& tol = default_tolerances()) {
        const auto n = u.rows();
        if (u.cols() != n || d < 1 || d > n)
            throw ValidationError(ErrorKind::size_mismatch, "frame must be square with 1 <= d <= n");
        double defect = max_abs(CMatrix(u.adjoint() * u) - CMatrix::Identity(n, n));
        if (defect > tol.completeness)
            throw ValidationError(ErrorKind::incomplete_pom, "frame is not orthonormal, defect " + std::to_string(defect));
        return NaimarkFrame(u, d);
    }

    int size() const { return static_cast<int>(frame_.rows()); }
    int dim() const { return d_; }
    const CMatrix& frame() const { return frame_; }
    CVector ket(int j) const { return frame_.col(j); }

    CMatrix projection() const {
        CMatrix e = CMatrix::Zero(size(), size());
        e.topLeftCorner(d_, d_).setIdentity();
        return e;
    }

    /// |a_j> = E |x_j>, restricted to the physical d coordinates.
    MaximalPOM pom() const { return MaximalPOM::create(CMatrix(frame_.topRows(d_))); }

private:
    NaimarkFrame(CMatrix u, int d) : frame_(std::move(u)), d_(d) {}
    CMatrix frame_;
    int d_;
};

/// Lift a POM to an orthogonal frame on H_n by completing the row space of
/// the (zero-padded) d x n ket matrix to an n x n unitary.
inline NaimarkFrame naimark_extend(const MaximalPOM& pom, int n) {
    if (n < pom.outcomes())
        throw ValidationError(ErrorKind::out_of_range, "Naimark size " + std::to_string(n) + " is below the " +
                                                           std::to_string(pom.outcomes()) + " outcomes of the POM");
    const int d = pom.dim();
    CMatrix top = CMatrix::Zero(d, n);
    top.leftCols(pom.outcomes()) = pom.kets();
    CMatrix u(n, n);
    u.topRows(d) = top;
    if (n > d) {
        Eigen::HouseholderQR<CMatrix> qr(CMatrix(top.adjoint()));
        CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
        u.bottomRows(n - d) = q.rightCols(n - d).adjoint();
    }
    return NaimarkFrame::from_unitary(u, d);
}

// ---------------------------------------------------------------------------
// Joint statistics

struct JointDistribution {
    RMatrix table; // p_jk
    RVector p;     // marginal of A
    RVector q;     // marginal of B

    static JointDistribution from_table(const RMatrix& t, const Tolerances& tol = default_tolerances()) {
        if (t.size() == 0) throw ValidationError(ErrorKind::size_mismatch, "empty distribution");
        if (!t.allFinite() || t.minCoeff() < 0.0)
            throw ValidationError(ErrorKind::out_of_range, "probabilities must be finite and nonnegative");
        if (std::abs(t.sum() - 1.0) > tol.completeness)
            throw ValidationError(ErrorKind::bad_trace, "probabilities sum to " + std::to_string(t.sum()));
        return JointDistribution{t, t.rowwise().sum(), t.colwise().sum().transpose()};
    }
};

inline void require_pom_dims(const DensityOperator& rho, const MaximalPOM& a, const MaximalPOM& b) {
    if (a.dim() != rho.d1() || b.dim() != rho.d2())
        throw ValidationError(ErrorKind::size_mismatch, "POM dimensions (" + std::to_string(a.dim()) + ", " +
                                                            std::to_string(b.dim()) + ") do not match the state");
}

inline JointDistribution joint_distribution(const DensityOperator& rho, const MaximalPOM& a, const MaximalPOM& b,
                                            const Tolerances& tol = default_tolerances()) {
    require_pom_dims(rho, a, b);
    RMatrix t(a.outcomes(), b.outcomes());
    for (int j = 0; j < a.outcomes(); ++j)
        for (int k = 0; k < b.outcomes(); ++k) {
            CVector ab = kron(a.ket(j), b.ket(k));
            double v = ab.dot(rho.matrix() * ab).real();
            if (v < 0.0) {
                if (v < -tol.validation)
                    throw ValidationError(ErrorKind::not_positive, "negative joint probability");
                v = 0.0;
            }
            t(j, k) = v;
        }
    return JointDistribution::from_table(t, tol);
}

inline double coincidence_rate(const JointDistribution& dist) {
    if (dist.table.rows() != dist.table.cols())
        throw ValidationError(ErrorKind::size_mismatch, "coincidence rate needs equal outcome counts");
    return dist.table.trace();
}

inline double coincidence_rate(const DensityOperator& rho, const MaximalPOM& a, const MaximalPOM& b) {
    return coincidence_rate(joint_distribution(rho, a, b));
}

inline double shannon_entropy(const RVector& probs) {
    double h = 0.0;
    for (Eigen::Index k = 0; k < probs.size(); ++k)
        if (probs(k) > 0.0) h -= probs(k) * std::log2(probs(k));
    return h;
}

/// Mutual information in bits, sum p_jk log2(p_jk / (p_j q_k)).
inline double mutual_information(const JointDistribution& dist) {
    double i = 0.0;
    for (Eigen::Index j = 0; j < dist.table.rows(); ++j)
        for (Eigen::Index k = 0; k < dist.table.cols(); ++k) {
            double pjk = dist.table(j, k);
            if (pjk > 0.0) i += pjk * std::log2(pjk / (dist.p(j) * dist.q(k)));
        }
    return i;
}

/// G = sum g_jk p_jk.
inline double linear_measure(const JointDistribution& dist, const RMatrix& g) {
    if (g.rows() != dist.table.rows() || g.cols() != dist.table.cols())
        throw ValidationError(ErrorKind::size_mismatch, "coefficient table does not match the distribution");
    if (!g.allFinite()) throw ValidationError(ErrorKind::out_of_range, "coefficient table must be finite");
    return (g.array() * dist.table.array()).sum();
}

/// G(rho) - G(rho_1 (x) rho_2); vanishes on product states.
inline double covariance_measure(const DensityOperator& rho, const MaximalPOM& a, const MaximalPOM& b,
                                 const RMatrix& g) {
    return linear_measure(joint_distribution(rho, a, b), g) -
           linear_measure(joint_distribution(product_of_marginals(rho), a, b), g);
}

/// sum_j (p_jj - p_j q_j).
inline double corr(const JointDistribution& dist) {
    if (dist.table.rows() != dist.table.cols())
        throw ValidationError(ErrorKind::size_mismatch, "corr needs equal outcome counts");
    return dist.table.trace() - dist.p.dot(dist.q);
}

struct CoincidenceOperator {
    CMatrix matrix;
    double lambda_max = 0.0;
};

/// K_AB = sum_j |a_j><a_j| (x) |b_j><b_j| and its largest eigenvalue.
inline CoincidenceOperator coincidence_operator(const MaximalPOM& a, const MaximalPOM& b) {
    if (a.outcomes() != b.outcomes())
        throw ValidationError(ErrorKind::size_mismatch, "coincidence operator needs equal outcome counts");
    CMatrix k = CMatrix::Zero(a.dim() * b.dim(), a.dim() * b.dim());
    for (int j = 0; j < a.outcomes(); ++j) k += kron(a.element(j), b.element(j));
    return CoincidenceOperator{k, max_eigenvalue(k)};
}

} // namespace corrmax
