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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

/// Shared numeric types, tolerances, errors and small linear-algebra helpers.
namespace corrmax {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

/// Numerical tolerances used across the library. One record is threaded
/// through every validating call so callers can tighten or relax them in one
/// place.
struct Tolerances {
    double validation = 1e-12;     // hermiticity, trace, PSD of inputs
    double completeness = 1e-10;   // POM completeness, frame orthonormality
    double reconstruction = 1e-10; // Schmidt / Fano / SVD rebuilds
    double extremal = 1e-8;        // first-order residual accepted as extremal
    double dead_band = 1e-9;       // Hessian eigenvalues treated as zero
    double operator_order = 1e-9;  // V >= <b|rho|b> style checks
};

inline const Tolerances& default_tolerances() {
    static const Tolerances tol{};
    return tol;
}

/// Category of a rejected input. The CLI maps every validation error to exit 2.
enum class ErrorKind {
    size_mismatch,
    not_hermitian,
    not_positive,
    bad_trace,
    bad_norm,
    incomplete_pom,
    out_of_range,
    not_extremal,
    schema,
    io,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::size_mismatch: return "size mismatch";
    case ErrorKind::not_hermitian: return "not Hermitian";
    case ErrorKind::not_positive: return "not positive semidefinite";
    case ErrorKind::bad_trace: return "trace is not one";
    case ErrorKind::bad_norm: return "vector is not normalised";
    case ErrorKind::incomplete_pom: return "POM completeness violated";
    case ErrorKind::out_of_range: return "parameter out of range";
    case ErrorKind::not_extremal: return "point is not extremal";
    case ErrorKind::schema: return "schema violation";
    case ErrorKind::io: return "file error";
    }
    return "validation error";
}

class ValidationError : public std::invalid_argument {
public:
    ValidationError(ErrorKind kind, const std::string& what)
        : std::invalid_argument(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// ---------------------------------------------------------------------------
// Linear algebra helpers

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline CVector kron(const CVector& a, const CVector& b) {
    CVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
    return m.size() == 0 ? 0.0 : double(m.cwiseAbs().maxCoeff());
}

inline double hermiticity_defect(const CMatrix& m) { return max_abs(m - m.adjoint()); }

inline CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

/// Eigenvalues in ascending order of the Hermitian part of `m`.
inline RVector hermitian_eigenvalues(const CMatrix& m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline double min_eigenvalue(const CMatrix& m) { return hermitian_eigenvalues(m)(0); }
inline double max_eigenvalue(const CMatrix& m) {
    RVector ev = hermitian_eigenvalues(m);
    return ev(ev.size() - 1);
}

/// exp(i t H) for Hermitian H.
inline CMatrix expi_hermitian(const CMatrix& h, double t = 1.0) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(h));
    const CMatrix& v = es.eigenvectors();
    CVector phase(es.eigenvalues().size());
    for (Eigen::Index k = 0; k < phase.size(); ++k)
        phase(k) = std::exp(kI * (t * es.eigenvalues()(k)));
    return v * phase.asDiagonal() * v.adjoint();
}

/// Partial trace of an (d1*d2)-square matrix with composite index j*d2 + k.
/// `keep` = 1 traces out the second factor, `keep` = 2 traces out the first.
inline CMatrix partial_trace(const CMatrix& m, int d1, int d2, int keep) {
    if (m.rows() != d1 * d2 || m.cols() != d1 * d2)
        throw ValidationError(ErrorKind::size_mismatch, "matrix is not " + std::to_string(d1 * d2) + " x " +
                                                            std::to_string(d1 * d2));
    if (keep == 1) {
        CMatrix out = CMatrix::Zero(d1, d1);
        for (int i = 0; i < d1; ++i)
            for (int j = 0; j < d1; ++j)
                for (int k = 0; k < d2; ++k) out(i, j) += m(i * d2 + k, j * d2 + k);
        return out;
    }
    if (keep == 2) {
        CMatrix out = CMatrix::Zero(d2, d2);
        for (int i = 0; i < d2; ++i)
            for (int j = 0; j < d2; ++j)
                for (int k = 0; k < d1; ++k) out(i, j) += m(k * d2 + i, k * d2 + j);
        return out;
    }
    throw ValidationError(ErrorKind::out_of_range, "side must be 1 or 2, got " + std::to_string(keep));
}

/// Re-embed an operator on C^{d1} (x) C^{d2} into C^{n} (x) C^{n}, padding with zeros.
inline CMatrix embed_bipartite(const CMatrix& m, int d1, int d2, int n) {
    CMatrix out = CMatrix::Zero(n * n, n * n);
    for (int a = 0; a < d1; ++a)
        for (int b = 0; b < d2; ++b)
            for (int c = 0; c < d1; ++c)
                for (int e = 0; e < d2; ++e) out(a * n + b, c * n + e) = m(a * d2 + b, c * d2 + e);
    return out;
}

// ---------------------------------------------------------------------------
// Random sampling. Every sampler takes an explicit engine; nothing global.

using Rng = std::mt19937_64;

/// Derive an independent sub-seed for stream `index` of a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

inline CMatrix ginibre(int rows, int cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    CMatrix g(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) {
            double re = normal(rng);
            double im = normal(rng);
            g(i, j) = cplx(re, im);
        }
    return g;
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the phase fix.
inline CMatrix haar_unitary(int n, Rng& rng) {
    CMatrix g = ginibre(n, n, rng);
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
    CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int k = 0; k < n; ++k) {
        double mag = std::abs(r(k, k));
        cplx ph = mag > 0.0 ? r(k, k) / mag : cplx(1.0, 0.0);
        q.col(k) *= ph;
    }
    return q;
}

inline CVector random_unit_vector(int n, Rng& rng) {
    CVector v = ginibre(n, 1, rng).col(0);
    return v / v.norm();
}

inline Eigen::Vector3d random_direction(Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::Vector3d v;
    do {
        v = Eigen::Vector3d(normal(rng), normal(rng), normal(rng));
    } while (v.norm() < 1e-12);
    return v.normalized();
}

// Pauli matrices, index 0..2 = x, y, z.
inline CMatrix pauli(int k) {
    CMatrix s(2, 2);
    switch (k) {
    case 0: s << 0, 1, 1, 0; break;
    case 1: s << 0, cplx(0, -1), cplx(0, 1), 0; break;
    case 2: s << 1, 0, 0, -1; break;
    default: throw ValidationError(ErrorKind::out_of_range, "pauli index must be 0, 1 or 2");
    }
    return s;
}

/// (1 + r.sigma)/2 for a Bloch vector r.
inline CMatrix bloch_operator(const Eigen::Vector3d& r) {
    CMatrix m = 0.5 * CMatrix::Identity(2, 2);
    for (int k = 0; k < 3; ++k) m += 0.5 * r(k) * pauli(k);
    return m;
}

} // namespace corrmax
