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

#include "corrmax/core.hpp"

#include <variant>
#include <vector>

namespace corrmax {

struct Dims {
    int d1 = 0;
    int d2 = 0;

    int total() const { return d1 * d2; }
    int max() const { return std::max(d1, d2); }
    int min() const { return std::min(d1, d2); }
    bool operator==(const Dims&) const = default;
};

/// Validated bipartite density operator on C^{d1} (x) C^{d2}.
///
/// The composite index of |j> (x) |k> is j*d2 + k. Instances are immutable;
/// the only way to obtain one is through `create`, which rejects matrices that
/// are not Hermitian, not unit-trace or not positive semidefinite at the
/// validation tolerance. Eigenvalues in [-tol, 0) are clipped to zero and the
/// matrix renormalised.
class DensityOperator {
public:
    static DensityOperator create(const CMatrix& matrix, int d1, int d2,
                                  const Tolerances& tol = default_tolerances()) {
        if (d1 < 1 || d2 < 1)
            throw ValidationError(ErrorKind::size_mismatch, "dimensions must be positive");
        if (matrix.rows() != d1 * d2 || matrix.cols() != d1 * d2)
            throw ValidationError(ErrorKind::size_mismatch,
                                  "matrix is " + std::to_string(matrix.rows()) + "x" +
                                      std::to_string(matrix.cols()) + ", expected " +
                                      std::to_string(d1 * d2) + " square");
        if (!matrix.allFinite())
            throw ValidationError(ErrorKind::not_hermitian, "matrix has non-finite entries");
        double herm = hermiticity_defect(matrix);
        if (herm > tol.validation)
            throw ValidationError(ErrorKind::not_hermitian, "max |M - M^dagger| = " + std::to_string(herm));
        double tr = matrix.trace().real();
        if (std::abs(tr - 1.0) > tol.validation)
            throw ValidationError(ErrorKind::bad_trace, "trace = " + std::to_string(tr));

        CMatrix m = hermitian_part(matrix);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
        double lo = es.eigenvalues()(0);
        if (lo < -tol.validation)
            throw ValidationError(ErrorKind::not_positive, "min eigenvalue = " + std::to_string(lo));
        if (lo < 0.0) {
            RVector ev = es.eigenvalues().cwiseMax(0.0);
            ev /= ev.sum();
            m = es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
            m = hermitian_part(m);
        }
        return DensityOperator(std::move(m), Dims{d1, d2});
    }

    const CMatrix& matrix() const { return matrix_; }
    Dims dims() const { return dims_; }
    int d1() const { return dims_.d1; }
    int d2() const { return dims_.d2; }

    double purity() const { return (matrix_ * matrix_).trace().real(); }

private:
    DensityOperator(CMatrix m, Dims dims) : matrix_(std::move(m)), dims_(dims) {}

    CMatrix matrix_;
    Dims dims_;
};

/// Reduced operator of side 1 (trace out 2) or side 2 (trace out 1).
inline CMatrix reduced(const DensityOperator& rho, int side) {
    if (side != 1 && side != 2)
        throw ValidationError(ErrorKind::out_of_range, "side must be 1 or 2, got " + std::to_string(side));
    return partial_trace(rho.matrix(), rho.d1(), rho.d2(), side);
}

/// rho_1 (x) rho_2 for the given state.
inline DensityOperator product_of_marginals(const DensityOperator& rho) {
    return DensityOperator::create(kron(reduced(rho, 1), reduced(rho, 2)), rho.d1(), rho.d2());
}

/// Von Neumann entropy in bits, with 0 log 0 = 0.
inline double von_neumann_entropy(const CMatrix& m, const Tolerances& tol = default_tolerances()) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw ValidationError(ErrorKind::size_mismatch, "entropy needs a non-empty square matrix");
    // Inputs are often partial traces, so the derived-quantity tolerance applies.
    if (hermiticity_defect(m) > tol.reconstruction)
        throw ValidationError(ErrorKind::not_hermitian, "entropy input");
    if (std::abs(m.trace().real() - 1.0) > tol.reconstruction)
        throw ValidationError(ErrorKind::bad_trace, "entropy input");
    RVector ev = hermitian_eigenvalues(m);
    if (ev(0) < -tol.reconstruction)
        throw ValidationError(ErrorKind::not_positive, "entropy input");
    double s = 0.0;
    for (Eigen::Index k = 0; k < ev.size(); ++k)
        if (ev(k) > 0.0) s -= ev(k) * std::log2(ev(k));
    return s;
}

// ---------------------------------------------------------------------------
// Pure states and the Schmidt decomposition

struct PureKet {
    CVector amplitudes;
    Dims dims;

    static PureKet create(const CVector& amps, int d1, int d2, const Tolerances& tol = default_tolerances()) {
        if (d1 < 1 || d2 < 1 || amps.size() != d1 * d2)
            throw ValidationError(ErrorKind::size_mismatch, "ket length must be d1*d2");
        double nrm = amps.norm();
        if (std::abs(nrm - 1.0) > tol.validation)
            throw ValidationError(ErrorKind::bad_norm, "norm = " + std::to_string(nrm));
        return PureKet{amps, Dims{d1, d2}};
    }

    DensityOperator density() const {
        CMatrix p = amplitudes * amplitudes.adjoint();
        p /= p.trace().real();
        return DensityOperator::create(hermitian_part(p), dims.d1, dims.d2);
    }
};

struct SchmidtForm {
    RVector coefficients; // sqrt(p_j), non-increasing, all > 0
    CMatrix left;         // d1 x r, orthonormal columns |a_j>
    CMatrix right;        // d2 x r, orthonormal columns |b_j>
    CMatrix left_full;    // d1 x d1 completion (first r columns equal `left`)
    CMatrix right_full;   // d2 x d2 completion
    Dims dims;

    CVector reconstruct() const {
        CVector psi = CVector::Zero(dims.total());
        for (Eigen::Index j = 0; j < coefficients.size(); ++j)
            psi += coefficients(j) * kron(CVector(left.col(j)), CVector(right.col(j)));
        return psi;
    }
};

/// Schmidt decomposition of a unit ket. Coefficients below the validation
/// tolerance are dropped, so a product ket has a single coefficient.
inline SchmidtForm schmidt_decompose(const CVector& ket, int d1, int d2,
                                     const Tolerances& tol = default_tolerances()) {
    PureKet pk = PureKet::create(ket, d1, d2, tol);
    CMatrix amp(d1, d2);
    for (int j = 0; j < d1; ++j)
        for (int k = 0; k < d2; ++k) amp(j, k) = pk.amplitudes(j * d2 + k);
    Eigen::JacobiSVD<CMatrix> svd(amp, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RVector& sv = svd.singularValues();
    Eigen::Index r = 0;
    while (r < sv.size() && sv(r) > tol.validation) ++r;
    SchmidtForm out;
    out.dims = Dims{d1, d2};
    out.coefficients = sv.head(r);
    out.left_full = svd.matrixU();
    out.right_full = svd.matrixV().conjugate();
    out.left = out.left_full.leftCols(r);
    out.right = out.right_full.leftCols(r);
    return out;
}

// ---------------------------------------------------------------------------
// Sampling

/// Induced-measure random state G G^dagger / tr with G of size (d1 d2) x rank.
inline DensityOperator random_density(int d1, int d2, int rank, std::uint64_t seed) {
    if (d1 < 1 || d2 < 1)
        throw ValidationError(ErrorKind::size_mismatch, "dimensions must be positive");
    if (rank < 1 || rank > d1 * d2)
        throw ValidationError(ErrorKind::out_of_range,
                              "rank must lie in [1, " + std::to_string(d1 * d2) + "], got " + std::to_string(rank));
    Rng rng(seed);
    CMatrix g = ginibre(d1 * d2, rank, rng);
    CMatrix m = g * g.adjoint();
    m /= m.trace().real();
    return DensityOperator::create(hermitian_part(m), d1, d2);
}

inline CVector random_ket(int d1, int d2, std::uint64_t seed) {
    Rng rng(seed);
    return random_unit_vector(d1 * d2, rng);
}

/// Convex mixture of `terms` random product states (always separable).
inline DensityOperator random_separable(int d1, int d2, int terms, std::uint64_t seed) {
    if (terms < 1) throw ValidationError(ErrorKind::out_of_range, "need at least one product term");
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    CMatrix m = CMatrix::Zero(d1 * d2, d1 * d2);
    double wsum = 0.0;
    for (int t = 0; t < terms; ++t) {
        CVector a = random_unit_vector(d1, rng);
        CVector b = random_unit_vector(d2, rng);
        // mixed local factors make the sample cover the interior too
        double mix = unif(rng);
        CMatrix ra = mix * a * a.adjoint() + (1.0 - mix) * CMatrix::Identity(d1, d1) / double(d1);
        CMatrix rb = b * b.adjoint();
        double w = unif(rng);
        m += w * kron(ra, rb);
        wsum += w;
    }
    m /= wsum;
    return DensityOperator::create(hermitian_part(m), d1, d2);
}

// ---------------------------------------------------------------------------
// Named states

namespace named {

struct Singlet {};
struct Isotropic {
    double w = 1.0;
};
struct Werner {
    int d = 2;
    double x = 0.0;
};
/// (|11> + |22>)/sqrt 2, the state of the trine example.
struct TrineDemo {};
/// lambda1 |z><z| (x) tau1 + lambda2 |-z><-z| (x) tau2, taus as Bloch vectors.
struct SeparableZ {
    double lambda1 = 0.5;
    double lambda2 = 0.5;
    Eigen::Vector3d tau1 = Eigen::Vector3d::Zero();
    Eigen::Vector3d tau2 = Eigen::Vector3d::Zero();
};
struct Product {
    Eigen::Vector3d m = Eigen::Vector3d::Zero();
    Eigen::Vector3d n = Eigen::Vector3d::Zero();
};
/// Mixture of pure states sharing the computational Schmidt basis |j>|j>.
struct SchmidtMixture {
    std::vector<double> weights;
    std::vector<std::vector<double>> probs;  // probs[alpha][j]
    std::vector<std::vector<double>> phases; // empty = all zero
};

} // namespace named

using NamedStateSpec = std::variant<named::Singlet, named::Isotropic, named::Werner, named::TrineDemo,
                                    named::SeparableZ, named::Product, named::SchmidtMixture>;

namespace detail {

inline CMatrix swap_operator(int d) {
    CMatrix f = CMatrix::Zero(d * d, d * d);
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) f(j * d + k, k * d + j) = 1.0;
    return f;
}

inline CVector singlet_ket() {
    CVector psi = CVector::Zero(4);
    psi(1) = 1.0 / std::sqrt(2.0);
    psi(2) = -1.0 / std::sqrt(2.0);
    return psi;
}

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(ErrorKind::out_of_range, what);
}

inline void require_bloch(const Eigen::Vector3d& r, const std::string& name) {
    require(r.allFinite() && r.norm() <= 1.0 + 1e-12, name + " must be a Bloch vector with |r| <= 1");
}

} // namespace detail

inline DensityOperator named_state(const NamedStateSpec& spec) {
    using namespace named;
    return std::visit(
        [](const auto& s) -> DensityOperator {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Singlet>) {
                CVector psi = detail::singlet_ket();
                return DensityOperator::create(psi * psi.adjoint(), 2, 2);
            } else if constexpr (std::is_same_v<T, Isotropic>) {
                detail::require(s.w >= 0.0 && s.w <= 1.0, "isotropic weight w must lie in [0, 1]");
                CVector psi = detail::singlet_ket();
                CMatrix p = psi * psi.adjoint();
                CMatrix m = s.w * p + (1.0 - s.w) / 3.0 * (CMatrix::Identity(4, 4) - p);
                return DensityOperator::create(hermitian_part(m), 2, 2);
            } else if constexpr (std::is_same_v<T, Werner>) {
                detail::require(s.d >= 2, "Werner dimension must be at least 2");
                detail::require(s.x >= -1.0 && s.x <= 1.0, "Werner parameter x must lie in [-1, 1]");
                const int d = s.d;
                const double dd = d;
                // sum_p K_p (x) K_p = SWAP - 1/d for any orthonormal traceless Hermitian basis
                CMatrix id = CMatrix::Identity(d * d, d * d);
                CMatrix m = id / (dd * dd) +
                            (s.x - 1.0 / dd) / (dd * dd - 1.0) * (detail::swap_operator(d) - id / dd);
                return DensityOperator::create(m, d, d);
            } else if constexpr (std::is_same_v<T, TrineDemo>) {
                CVector psi = CVector::Zero(4);
                psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
                return DensityOperator::create(psi * psi.adjoint(), 2, 2);
            } else if constexpr (std::is_same_v<T, SeparableZ>) {
                detail::require(s.lambda1 >= 0.0 && s.lambda2 >= 0.0 &&
                                    std::abs(s.lambda1 + s.lambda2 - 1.0) <= 1e-12,
                                "separable_z weights must be nonnegative and sum to 1");
                detail::require_bloch(s.tau1, "tau1");
                detail::require_bloch(s.tau2, "tau2");
                CMatrix up = CMatrix::Zero(2, 2), down = CMatrix::Zero(2, 2);
                up(0, 0) = 1.0;
                down(1, 1) = 1.0;
                CMatrix m = s.lambda1 * kron(up, bloch_operator(s.tau1)) +
                            s.lambda2 * kron(down, bloch_operator(s.tau2));
                return DensityOperator::create(m, 2, 2);
            } else if constexpr (std::is_same_v<T, Product>) {
                detail::require_bloch(s.m, "m");
                detail::require_bloch(s.n, "n");
                return DensityOperator::create(kron(bloch_operator(s.m), bloch_operator(s.n)), 2, 2);
            } else {
                detail::require(!s.weights.empty() && s.weights.size() == s.probs.size(),
                                "schmidt_mixture needs one probability vector per weight");
                detail::require(s.phases.empty() || s.phases.size() == s.weights.size(),
                                "schmidt_mixture phases must match the weights");
                const int d = static_cast<int>(s.probs.front().size());
                detail::require(d >= 1, "schmidt_mixture probability vectors must be non-empty");
                double wsum = 0.0;
                CMatrix m = CMatrix::Zero(d * d, d * d);
                for (std::size_t a = 0; a < s.weights.size(); ++a) {
                    detail::require(s.weights[a] >= 0.0, "schmidt_mixture weights must be nonnegative");
                    detail::require(static_cast<int>(s.probs[a].size()) == d,
                                    "schmidt_mixture probability vectors must share one length");
                    double psum = 0.0;
                    CVector psi = CVector::Zero(d * d);
                    for (int j = 0; j < d; ++j) {
                        double p = s.probs[a][j];
                        detail::require(p >= 0.0, "schmidt_mixture probabilities must be nonnegative");
                        psum += p;
                        double phi = s.phases.empty() ? 0.0 : s.phases[a].at(j);
                        psi(j * d + j) = std::sqrt(p) * std::exp(kI * phi);
                    }
                    detail::require(std::abs(psum - 1.0) <= 1e-12, "schmidt_mixture probabilities must sum to 1");
                    wsum += s.weights[a];
                    m += s.weights[a] * psi * psi.adjoint();
                }
                detail::require(std::abs(wsum - 1.0) <= 1e-12, "schmidt_mixture weights must sum to 1");
                return DensityOperator::create(hermitian_part(m), d, d);
            }
        },
        spec);
}

/// P_j = sum_alpha lambda_alpha p_j^(alpha) for a Schmidt mixture.
inline std::vector<double> schmidt_mixture_marginal(const named::SchmidtMixture& s) {
    std::vector<double> out(s.probs.empty() ? 0 : s.probs.front().size(), 0.0);
    for (std::size_t a = 0; a < s.weights.size(); ++a)
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += s.weights[a] * s.probs[a][j];
    return out;
}

} // namespace corrmax
