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

#include "corrmax/fano.hpp"

#include <array>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace corrmax {

enum class BoundKind {
    two_qubit_max,
    theorem,
    cross_norm,
    orthogonal,
    covariance,
    werner_exact,
};

inline const char* to_string(BoundKind k) {
    switch (k) {
    case BoundKind::two_qubit_max: return "two-qubit";
    case BoundKind::theorem: return "theorem";
    case BoundKind::cross_norm: return "cross-norm";
    case BoundKind::orthogonal: return "orthogonal";
    case BoundKind::covariance: return "covariance";
    case BoundKind::werner_exact: return "werner-exact";
    }
    return "unknown";
}

struct BoundCertificate {
    std::optional<Eigen::Vector3d> a; // optimal spin directions, two qubits only
    std::optional<Eigen::Vector3d> b;
    RVector singular_values;          // singular values entering the bound
    std::optional<int> n;             // empty for the n -> infinity limit
    int delta = 0;                    // min(d1, d2)
    int d = 0;                        // max(d1, d2)
    int terms = 0;                    // number of singular values summed
};

struct BoundReport {
    BoundKind kind;
    double value = 0.0;
    BoundCertificate certificate;
};

namespace detail {

inline BoundCertificate base_certificate(const DensityOperator& rho) {
    BoundCertificate c;
    c.delta = rho.dims().min();
    c.d = rho.dims().max();
    return c;
}

} // namespace detail

/// C^(2)_max = (1 + s_1(S))/2 with spin directions a = R_1 x, b = R_2 x.
inline BoundReport two_qubit_max(const DensityOperator& rho) {
    SpinMatrices s = spin_correlation(rho);
    BoundReport r{BoundKind::two_qubit_max, 0.5 * (1.0 + s.spectral_norm()), detail::base_certificate(rho)};
    r.certificate.a = Eigen::Vector3d(s.svd.left.col(0));
    r.certificate.b = Eigen::Vector3d(s.svd.right.col(0));
    r.certificate.singular_values = s.svd.values;
    r.certificate.n = 2;
    r.certificate.terms = 1;
    return r;
}

/// 1/n + sum_{k <= min(n-1, delta^2)} s_k(T^(n)).
inline BoundReport theorem_bound(const DensityOperator& rho, int n) {
    AugmentedT t = augmented_T(rho, n);
    BoundReport r{BoundKind::theorem, 0.0, detail::base_certificate(rho)};
    RVector sv = singular_values(t.full);
    const int delta = r.certificate.delta;
    const Eigen::Index terms = std::min<Eigen::Index>(n - 1, Eigen::Index(delta) * delta);
    r.value = 1.0 / n + top_singular_sum(sv, terms);
    r.certificate.singular_values = sv;
    r.certificate.n = n;
    r.certificate.terms = static_cast<int>(std::min<Eigen::Index>(terms, sv.size()));
    return r;
}

/// Trace norm of T^(infinity), the computable cross norm.
inline BoundReport cross_norm_bound(const DensityOperator& rho) {
    AugmentedT t = augmented_T_infinite(rho);
    BoundReport r{BoundKind::cross_norm, 0.0, detail::base_certificate(rho)};
    RVector sv = singular_values(t.full);
    r.value = sv.sum();
    r.certificate.singular_values = sv;
    r.certificate.terms = static_cast<int>(sv.size());
    return r;
}

/// 1/d + sum_{k <= min(d-1, delta^2-1)} s_k(T~) for measurements with d outcomes.
inline BoundReport orthogonal_bound(const DensityOperator& rho) {
    AugmentedT t = augmented_T(rho, rho.dims().max());
    BoundReport r{BoundKind::orthogonal, 0.0, detail::base_certificate(rho)};
    const int d = r.certificate.d, delta = r.certificate.delta;
    RVector sv = singular_values(t.tilde());
    const Eigen::Index terms = std::min(d - 1, delta * delta - 1);
    r.value = 1.0 / d + top_singular_sum(sv, terms);
    r.certificate.singular_values = sv;
    r.certificate.n = d;
    r.certificate.terms = static_cast<int>(std::min<Eigen::Index>(terms, sv.size()));
    return r;
}

/// Exact C^(d)_max of the two-qudit Werner state rho_x.
inline double werner_exact(int d, double x) {
    if (d < 2) throw ValidationError(ErrorKind::out_of_range, "Werner dimension must be at least 2");
    if (!(x >= -1.0 && x <= 1.0)) throw ValidationError(ErrorKind::out_of_range, "Werner x must lie in [-1, 1]");
    const double dd = d;
    const double gap = std::abs(x - 1.0 / dd);
    return x >= 1.0 / dd ? 1.0 / dd + gap / (dd + 1.0) : 1.0 / dd + gap / (dd * dd - 1.0);
}

/// Maximum spin covariance s_1(Sbar).
inline double covariance_bound(const DensityOperator& rho) { return spin_covariance(rho).spectral_norm(); }

// ---------------------------------------------------------------------------
// Separability witnesses

struct WitnessReport {
    double hs_norm = 0.0;           // Tr[Sbar^T Sbar]
    double hs_identity_gap = 0.0;   // |hs_norm - 4 tr[(rho - rho1 rho2)^2]|
    double purity_witness = 0.0;    // tr rho^2 + s_1(Sbar)/2
    double logneg_lower = 0.0;      // max{0, log2(s_1(S) + s_2(S))}
    bool hs_flag = false;           // hs_norm > 1 certifies entanglement
    bool purity_flag = false;       // purity_witness > 1 certifies entanglement
    bool logneg_flag = false;       // logneg_lower > 0 certifies entanglement
};

inline WitnessReport separability_witnesses(const DensityOperator& rho, const Tolerances& tol = default_tolerances()) {
    SpinMatrices sbar = spin_covariance(rho);
    SpinMatrices s = spin_correlation(rho);
    WitnessReport w;
    w.hs_norm = (sbar.matrix.transpose() * sbar.matrix).trace();
    CMatrix delta = rho.matrix() - product_of_marginals(rho).matrix();
    double direct = 4.0 * (delta * delta).trace().real();
    w.hs_identity_gap = std::abs(w.hs_norm - direct);
    if (w.hs_identity_gap > tol.reconstruction)
        throw std::logic_error("Hilbert-Schmidt identity violated by " + std::to_string(w.hs_identity_gap));
    w.purity_witness = rho.purity() + 0.5 * sbar.spectral_norm();
    double s12 = s.svd.values(0) + s.svd.values(1);
    w.logneg_lower = s12 > 1.0 ? std::log2(s12) : 0.0;
    w.hs_flag = w.hs_norm > 1.0 + tol.validation;
    w.purity_flag = w.purity_witness > 1.0 + tol.validation;
    w.logneg_flag = w.logneg_lower > tol.validation;
    return w;
}

// ---------------------------------------------------------------------------
// Bell combinations

struct BellReport {
    double info_lhs = 0.0;
    double info_rhs = 0.0; // H(A) + H(B)
    double coincidence_lhs = 0.0;
    double coincidence_rhs = 2.0;
    bool info_violated = false;
    bool coincidence_violated = false;
};

/// Combinations X(A,B) + X(A,B') + X(A',B) - X(A',B') for X = I and X = C.
inline BellReport bell_tests(const DensityOperator& rho, const MaximalPOM& a, const MaximalPOM& a_bar,
                             const MaximalPOM& b, const MaximalPOM& b_bar) {
    if (a.outcomes() != a_bar.outcomes() || b.outcomes() != b_bar.outcomes() || a.outcomes() != b.outcomes())
        throw ValidationError(ErrorKind::size_mismatch, "Bell combination needs matched outcome counts");
    JointDistribution ab = joint_distribution(rho, a, b);
    JointDistribution abb = joint_distribution(rho, a, b_bar);
    JointDistribution aab = joint_distribution(rho, a_bar, b);
    JointDistribution aabb = joint_distribution(rho, a_bar, b_bar);
    BellReport r;
    r.info_lhs = mutual_information(ab) + mutual_information(abb) + mutual_information(aab) - mutual_information(aabb);
    r.info_rhs = shannon_entropy(ab.p) + shannon_entropy(ab.q);
    r.coincidence_lhs = coincidence_rate(ab) + coincidence_rate(abb) + coincidence_rate(aab) - coincidence_rate(aabb);
    r.info_violated = r.info_lhs > r.info_rhs + 1e-12;
    r.coincidence_violated = r.coincidence_lhs > r.coincidence_rhs + 1e-12;
    return r;
}

/// Coplanar (x-z plane) directions a, a', b, b' maximising the singlet violation.
struct ChshDirections {
    Eigen::Vector3d a, a_bar, b, b_bar;
};

inline Eigen::Vector3d xz_direction(double angle) { return {std::sin(angle), 0.0, std::cos(angle)}; }

inline ChshDirections chsh_optimal_directions() {
    const double q = std::numbers::pi / 4.0;
    return {xz_direction(0.0), xz_direction(2.0 * q), xz_direction(5.0 * q), xz_direction(3.0 * q)};
}

// ---------------------------------------------------------------------------
// Information bounds

/// min{S(rho_1), S(rho_2)}.
inline double holevo_bound(const DensityOperator& rho) {
    return std::min(von_neumann_entropy(reduced(rho, 1)), von_neumann_entropy(reduced(rho, 2)));
}

/// -sum_j P_j log2 P_j, the maximum mutual information of a Schmidt mixture.
inline double schmidt_mixture_imax(const named::SchmidtMixture& spec) {
    named_state(spec); // validates
    std::vector<double> p = schmidt_mixture_marginal(spec);
    return shannon_entropy(Eigen::Map<const RVector>(p.data(), static_cast<Eigen::Index>(p.size())));
}

// ---------------------------------------------------------------------------
// General linear measures

struct GeneralMeasureReport {
    double bound = 0.0;      // sum_k s_k(Tbar) s_k(W^G)
    double corr_bound = 0.0; // sum_{k <= min(n-1, delta^2-1)} s_k(Tbar)
    double covariance = 0.0; // Gbar at the supplied frames
    RVector tbar_singular_values;
    RVector w_singular_values;
};

/// Tbar_pq = <K_p (x) L_q> - <K_p><L_q> on the p, q >= 1 block.
inline RMatrix covariance_block(const DensityOperator& rho) {
    FanoForm f = fano_coefficients(rho);
    RVector kp = f.basis1.coordinates(reduced(rho, 1));
    RVector lq = f.basis2.coordinates(reduced(rho, 2));
    return f.t - kp * lq.transpose();
}

inline GeneralMeasureReport general_measure_bound(const DensityOperator& rho, const RMatrix& g, const NaimarkFrame& x,
                                                  const NaimarkFrame& y) {
    const int n = x.size();
    if (y.size() != n || x.dim() != rho.d1() || y.dim() != rho.d2())
        throw ValidationError(ErrorKind::size_mismatch, "frames must share n and match the state dimensions");
    if (g.rows() != n || g.cols() != n)
        throw ValidationError(ErrorKind::size_mismatch, "coefficient table must be n x n");
    GeneralMeasureReport r;
    r.tbar_singular_values = singular_values(covariance_block(rho));
    WMatrix wg = w_matrix(x, y, gell_mann_basis(n), g);
    r.w_singular_values = singular_values(wg.w);
    const Eigen::Index k = std::min(r.tbar_singular_values.size(), r.w_singular_values.size());
    r.bound = r.tbar_singular_values.head(k).dot(r.w_singular_values.head(k));
    const int delta = rho.dims().min();
    r.corr_bound = top_singular_sum(r.tbar_singular_values, std::min(n - 1, delta * delta - 1));
    r.covariance = covariance_measure(rho, x.pom(), y.pom(), g);
    return r;
}

} // namespace corrmax
