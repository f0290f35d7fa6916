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

#include "corrmax/measurement.hpp"

#include <optional>
#include <ostream>
#include <vector>

namespace corrmax {

// ---------------------------------------------------------------------------
// Real SVD

/// M = left * diag(values) * right^T with full orthogonal factors.
struct RealSvd {
    RMatrix left;
    RVector values; // non-increasing, nonnegative
    RMatrix right;
    double det_left = 1.0;
    double det_right = 1.0;

    RMatrix diagonal() const {
        RMatrix d = RMatrix::Zero(left.cols(), right.cols());
        for (Eigen::Index k = 0; k < values.size(); ++k) d(k, k) = values(k);
        return d;
    }
    RMatrix reconstruct() const { return left * diagonal() * right.transpose(); }
};

namespace detail {

inline bool flip_needed(const RMatrix& m, Eigen::Index col) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        double v = m(i, col);
        if (std::abs(v) > 1e-14) return v < 0.0;
    }
    return false;
}

} // namespace detail

/// Full SVD with a reproducible sign convention: the first nonzero entry of
/// each left singular vector is positive (paired right vectors follow).
inline RealSvd svd_real(const RMatrix& m) {
    Eigen::JacobiSVD<RMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    RealSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV(), 1.0, 1.0};
    const Eigen::Index r = out.values.size();
    for (Eigen::Index k = 0; k < out.left.cols(); ++k) {
        if (detail::flip_needed(out.left, k)) {
            out.left.col(k) *= -1.0;
            if (k < r) out.right.col(k) *= -1.0;
        }
    }
    for (Eigen::Index k = r; k < out.right.cols(); ++k)
        if (detail::flip_needed(out.right, k)) out.right.col(k) *= -1.0;
    if (out.left.size() > 0) out.det_left = out.left.determinant();
    if (out.right.size() > 0) out.det_right = out.right.determinant();
    return out;
}

inline RVector singular_values(const RMatrix& m) {
    if (m.size() == 0) return RVector();
    return Eigen::JacobiSVD<RMatrix>(m).singularValues();
}

/// Sum of the `k` largest singular values (all of them when k exceeds the count).
inline double top_singular_sum(const RVector& sv, Eigen::Index k) {
    k = std::clamp<Eigen::Index>(k, 0, sv.size());
    return sv.head(k).sum();
}

inline double trace_norm(const RMatrix& m) { return singular_values(m).sum(); }

// ---------------------------------------------------------------------------
// Operator bases

/// Orthonormal (tr[K_p K_q] = delta_pq) traceless Hermitian basis of H_n.
struct OperatorBasis {
    int n = 0;
    std::vector<CMatrix> elements;

    int size() const { return static_cast<int>(elements.size()); }
    const CMatrix& operator[](int p) const { return elements[static_cast<std::size_t>(p)]; }

    /// Coordinates tr[Z K_p] of the traceless part of Z.
    RVector coordinates(const CMatrix& z) const {
        RVector c(size());
        for (int p = 0; p < size(); ++p) c(p) = (z * elements[static_cast<std::size_t>(p)]).trace().real();
        return c;
    }
};

/// Generalized Gell-Mann basis: symmetric family (j < k, lexicographic), then
/// antisymmetric, then diagonal. For n = 2 this is {sigma_x, sigma_y, sigma_z}/sqrt 2.
inline OperatorBasis gell_mann_basis(int n) {
    if (n < 2) throw ValidationError(ErrorKind::out_of_range, "operator basis needs n >= 2");
    OperatorBasis b;
    b.n = n;
    const double r2 = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
            CMatrix m = CMatrix::Zero(n, n);
            m(j, k) = m(k, j) = r2;
            b.elements.push_back(std::move(m));
        }
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
            CMatrix m = CMatrix::Zero(n, n);
            m(j, k) = cplx(0.0, -r2);
            m(k, j) = cplx(0.0, r2);
            b.elements.push_back(std::move(m));
        }
    for (int l = 1; l < n; ++l) {
        CMatrix m = CMatrix::Zero(n, n);
        const double c = 1.0 / std::sqrt(double(l) * (l + 1));
        for (int j = 0; j < l; ++j) m(j, j) = c;
        m(l, l) = -double(l) * c;
        b.elements.push_back(std::move(m));
    }
    return b;
}

// ---------------------------------------------------------------------------
// Fano form

namespace detail {

/// T_pq = <K_p (x) L_q> via R_q = tr_2[rho (1 (x) L_q)].
inline RMatrix correlation_block(const CMatrix& rho, int d1, int d2, const OperatorBasis& b1,
                                 const OperatorBasis& b2) {
    RMatrix t(b1.size(), b2.size());
    CMatrix id1 = CMatrix::Identity(d1, d1);
    for (int q = 0; q < b2.size(); ++q) {
        CMatrix rq = partial_trace(CMatrix(rho * kron(id1, b2[q])), d1, d2, 1);
        for (int p = 0; p < b1.size(); ++p) t(p, q) = (rq * b1[p]).trace().real();
    }
    return t;
}

inline void require_basis(const OperatorBasis& b, int d, const char* side) {
    if (b.n != d)
        throw ValidationError(ErrorKind::size_mismatch, std::string("basis for ") + side + " has n = " +
                                                            std::to_string(b.n) + ", state has d = " + std::to_string(d));
}

} // namespace detail

/// rho = 1/(d1 d2) + sum u_p K_p (x) 1 + sum v_q 1 (x) L_q + sum T_pq K_p (x) L_q,
/// with u_p = <K_p (x) 1>/d2, v_q = <1 (x) L_q>/d1, T_pq = <K_p (x) L_q>.
struct FanoForm {
    RVector u;
    RVector v;
    RMatrix t;
    OperatorBasis basis1;
    OperatorBasis basis2;

    CMatrix reconstruct() const {
        const int d1 = basis1.n, d2 = basis2.n;
        CMatrix id1 = CMatrix::Identity(d1, d1), id2 = CMatrix::Identity(d2, d2);
        CMatrix m = CMatrix::Identity(d1 * d2, d1 * d2) / double(d1 * d2);
        for (int p = 0; p < basis1.size(); ++p) m += u(p) * kron(basis1[p], id2);
        for (int q = 0; q < basis2.size(); ++q) m += v(q) * kron(id1, basis2[q]);
        for (int p = 0; p < basis1.size(); ++p)
            for (int q = 0; q < basis2.size(); ++q) m += t(p, q) * kron(basis1[p], basis2[q]);
        return m;
    }
};

inline FanoForm fano_coefficients(const DensityOperator& rho, const OperatorBasis& b1, const OperatorBasis& b2) {
    detail::require_basis(b1, rho.d1(), "side 1");
    detail::require_basis(b2, rho.d2(), "side 2");
    FanoForm f;
    f.basis1 = b1;
    f.basis2 = b2;
    f.u = b1.coordinates(reduced(rho, 1)) / double(rho.d2());
    f.v = b2.coordinates(reduced(rho, 2)) / double(rho.d1());
    f.t = detail::correlation_block(rho.matrix(), rho.d1(), rho.d2(), b1, b2);
    return f;
}

inline FanoForm fano_coefficients(const DensityOperator& rho) {
    return fano_coefficients(rho, gell_mann_basis(rho.d1()), gell_mann_basis(rho.d2()));
}

/// T^(n): (d1^2 x d2^2) block with the K_0 / L_0 row and column in position 0.
/// `outcomes` is empty for the n -> infinity limit, where alpha_i = 1/sqrt(d_i).
struct AugmentedT {
    RMatrix full;
    double alpha1 = 0.0, beta1 = 0.0, alpha2 = 0.0, beta2 = 0.0;
    std::optional<int> outcomes;

    bool infinite() const { return !outcomes.has_value(); }
    /// The p, q >= 1 block <K_p (x) L_q>.
    RMatrix tilde() const { return full.bottomRightCorner(full.rows() - 1, full.cols() - 1); }
};

namespace detail {

inline AugmentedT assemble_augmented(const DensityOperator& rho, double a1, double a2) {
    OperatorBasis b1 = gell_mann_basis(rho.d1()), b2 = gell_mann_basis(rho.d2());
    RVector k1 = b1.coordinates(reduced(rho, 1)); // <K_p (x) 1>
    RVector l2 = b2.coordinates(reduced(rho, 2)); // <1 (x) L_q>
    AugmentedT out;
    out.full = RMatrix::Zero(b1.size() + 1, b2.size() + 1);
    out.full(0, 0) = a1 * a2;
    out.full.block(0, 1, 1, b2.size()) = a1 * l2.transpose();
    out.full.block(1, 0, b1.size(), 1) = a2 * k1;
    out.full.bottomRightCorner(b1.size(), b2.size()) = correlation_block(rho.matrix(), rho.d1(), rho.d2(), b1, b2);
    out.alpha1 = a1;
    out.alpha2 = a2;
    return out;
}

} // namespace detail

inline AugmentedT augmented_T(const DensityOperator& rho, int n) {
    if (n < rho.dims().max())
        throw ValidationError(ErrorKind::out_of_range,
                              "n = " + std::to_string(n) + " is below d = " + std::to_string(rho.dims().max()));
    auto alpha = [n](int d) { return std::sqrt(std::max(0.0, 1.0 / d - 1.0 / n)); };
    auto beta = [n](double a, int d) { return n == d ? 0.0 : a * d / double(n - d); };
    AugmentedT out = detail::assemble_augmented(rho, alpha(rho.d1()), alpha(rho.d2()));
    out.beta1 = beta(out.alpha1, rho.d1());
    out.beta2 = beta(out.alpha2, rho.d2());
    out.outcomes = n;
    return out;
}

/// n -> infinity limit: the full Fano coefficient matrix T^(infinity).
inline AugmentedT augmented_T_infinite(const DensityOperator& rho) {
    AugmentedT out =
        detail::assemble_augmented(rho, 1.0 / std::sqrt(double(rho.d1())), 1.0 / std::sqrt(double(rho.d2())));
    out.beta1 = out.beta2 = 0.0;
    return out;
}

/// Rebuild rho from T^(infinity) coefficients.
inline CMatrix reconstruct_from_limit(const AugmentedT& t, int d1, int d2) {
    OperatorBasis b1 = gell_mann_basis(d1), b2 = gell_mann_basis(d2);
    CMatrix id1 = CMatrix::Identity(d1, d1), id2 = CMatrix::Identity(d2, d2);
    CMatrix m = t.full(0, 0) * CMatrix::Identity(d1 * d2, d1 * d2) / std::sqrt(double(d1 * d2));
    for (int p = 0; p < b1.size(); ++p) m += t.full(p + 1, 0) * kron(b1[p], id2) / std::sqrt(double(d2));
    for (int q = 0; q < b2.size(); ++q) m += t.full(0, q + 1) * kron(id1, b2[q]) / std::sqrt(double(d1));
    for (int p = 0; p < b1.size(); ++p)
        for (int q = 0; q < b2.size(); ++q) m += t.full(p + 1, q + 1) * kron(b1[p], b2[q]);
    return m;
}

// ---------------------------------------------------------------------------
// Two-qubit spin matrices

struct SpinMatrices {
    Eigen::Matrix3d matrix;
    RealSvd svd;

    double spectral_norm() const { return svd.values(0); }
};

namespace detail {

inline void require_qubits(const DensityOperator& rho) {
    if (rho.d1() != 2 || rho.d2() != 2)
        throw ValidationError(ErrorKind::size_mismatch, "spin matrices need a two-qubit state");
}

inline Eigen::Matrix3d raw_spin_correlation(const CMatrix& rho) {
    Eigen::Matrix3d s;
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) s(j, k) = (rho * kron(pauli(j), pauli(k))).trace().real();
    return s;
}

} // namespace detail

/// Bloch vector <sigma_k> of side 1 or 2.
inline Eigen::Vector3d bloch_vector(const DensityOperator& rho, int side) {
    detail::require_qubits(rho);
    CMatrix r = reduced(rho, side);
    Eigen::Vector3d m;
    for (int k = 0; k < 3; ++k) m(k) = (r * pauli(k)).trace().real();
    return m;
}

/// S_jk = <sigma_j (x) sigma_k>.
inline SpinMatrices spin_correlation(const DensityOperator& rho) {
    detail::require_qubits(rho);
    Eigen::Matrix3d s = detail::raw_spin_correlation(rho.matrix());
    return SpinMatrices{s, svd_real(s)};
}

/// Sbar = S(rho) - S(rho_1 (x) rho_2).
inline SpinMatrices spin_covariance(const DensityOperator& rho) {
    detail::require_qubits(rho);
    Eigen::Matrix3d s = detail::raw_spin_correlation(rho.matrix()) -
                        bloch_vector(rho, 1) * bloch_vector(rho, 2).transpose();
    return SpinMatrices{s, svd_real(s)};
}

// ---------------------------------------------------------------------------
// W matrices

struct WMatrix {
    RMatrix w;
    std::vector<RVector> f; // f^(j)_p = <x_j|L_p|x_j>
    std::vector<RVector> g; // g^(j)_p = <y_j|L_p|y_j>
};

/// W_pq = sum_j f^(j)_p g^(j)_q, or W^G_pq = sum_jk g_jk f^(j)_p g^(k)_q when a
/// coefficient table is given.
inline WMatrix w_matrix(const NaimarkFrame& x, const NaimarkFrame& y, const OperatorBasis& basis,
                        const std::optional<RMatrix>& coeffs = std::nullopt) {
    const int n = x.size();
    if (y.size() != n || basis.n != n)
        throw ValidationError(ErrorKind::size_mismatch, "frames and basis must share the size n");
    if (coeffs && (coeffs->rows() != n || coeffs->cols() != n))
        throw ValidationError(ErrorKind::size_mismatch, "coefficient table must be n x n");
    WMatrix out;
    for (int j = 0; j < n; ++j) {
        RVector fj(basis.size()), gj(basis.size());
        CVector xj = x.ket(j), yj = y.ket(j);
        for (int p = 0; p < basis.size(); ++p) {
            fj(p) = xj.dot(basis[p] * xj).real();
            gj(p) = yj.dot(basis[p] * yj).real();
        }
        out.f.push_back(std::move(fj));
        out.g.push_back(std::move(gj));
    }
    out.w = RMatrix::Zero(basis.size(), basis.size());
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            double c = coeffs ? (*coeffs)(j, k) : (j == k ? 1.0 : 0.0);
            if (c != 0.0) out.w += c * out.f[static_cast<std::size_t>(j)] * out.g[static_cast<std::size_t>(k)].transpose();
        }
    return out;
}

// ---------------------------------------------------------------------------
// CSV emission

inline void write_matrix_csv(const RMatrix& m, std::ostream& os) {
    os << "p,q,value\n";
    os.precision(17);
    for (Eigen::Index p = 0; p < m.rows(); ++p)
        for (Eigen::Index q = 0; q < m.cols(); ++q) os << p << ',' << q << ',' << m(p, q) << '\n';
}

/// Singular values as rows (k, k, s_k).
inline void write_singular_values_csv(const RVector& sv, std::ostream& os) {
    os << "p,q,value\n";
    os.precision(17);
    for (Eigen::Index k = 0; k < sv.size(); ++k) os << k << ',' << k << ',' << sv(k) << '\n';
}

} // namespace corrmax
