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

#include "corrmax/bounds.hpp"

#include <limits>
#include <optional>
#include <utility>
#include <vector>

/// Variational maximisation of the coincidence rate over pairs of orthogonal
/// frames on H_n, together with first- and second-order certification.
///
/// A frame pair (X, Y) consists of two n x n unitaries whose columns are the
/// kets |x_j>, |y_j>. The physical POMs are |a_j> = E|x_j>, |b_j> = F|y_j>
/// where E, F keep the first d1 (resp. d2) coordinates. Variations are
/// X -> exp(i eps M) X, Y -> exp(i eps N) Y for Hermitian M, N, equivalently
/// rho -> exp(-i eps K) rho exp(i eps K) with K = M (x) 1 + 1 (x) N.
namespace corrmax {

enum class Classification { local_max, saddle, local_min, indeterminate };

inline const char* to_string(Classification c) {
    switch (c) {
    case Classification::local_max: return "local_max";
    case Classification::saddle: return "saddle";
    case Classification::local_min: return "local_min";
    case Classification::indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

struct FramePair {
    CMatrix x;
    CMatrix y;
};

/// Orthonormal basis of all Hermitian n x n matrices: 1/sqrt(n) followed by
/// the generalized Gell-Mann family. Used to coordinatise M and N.
inline std::vector<CMatrix> hermitian_basis(int n) {
    std::vector<CMatrix> out;
    out.push_back(CMatrix::Identity(n, n) / std::sqrt(double(n)));
    if (n >= 2)
        for (auto& k : gell_mann_basis(n).elements) out.push_back(std::move(k));
    return out;
}

/// Hermitian probe pair and its generator K = M (x) 1 + 1 (x) N.
struct HessianProbe {
    CMatrix m;
    CMatrix n;

    CMatrix generator() const {
        CMatrix id = CMatrix::Identity(m.rows(), m.cols());
        return kron(m, id) + kron(id, n);
    }
};

struct Gradient {
    CMatrix m; // ascent direction for the first frame (Hermitian)
    CMatrix n; // ascent direction for the second frame (Hermitian)

    double norm() const { return std::sqrt(m.squaredNorm() + n.squaredNorm()); }
};

/// Coincidence rate as a function of the frame pair for a fixed state
/// embedded in H_n (x) H_n.
class CoincidenceObjective {
public:
    CoincidenceObjective(const DensityOperator& rho, int n) : n_(n), d1_(rho.d1()), d2_(rho.d2()) {
        if (n < rho.dims().max())
            throw ValidationError(ErrorKind::out_of_range,
                                  "n = " + std::to_string(n) + " is below d = " + std::to_string(rho.dims().max()));
        rho_ = embed_bipartite(rho.matrix(), d1_, d2_, n);
    }

    int n() const { return n_; }
    int d1() const { return d1_; }
    int d2() const { return d2_; }
    const CMatrix& embedded_state() const { return rho_; }

    void check(const FramePair& f) const {
        if (f.x.rows() != n_ || f.x.cols() != n_ || f.y.rows() != n_ || f.y.cols() != n_)
            throw ValidationError(ErrorKind::size_mismatch, "frames must be " + std::to_string(n_) + " x " +
                                                                std::to_string(n_));
    }

    /// Product kets x_j (x) y_j as columns.
    CMatrix product_kets(const FramePair& f) const {
        CMatrix z(n_ * n_, n_);
        for (int j = 0; j < n_; ++j) z.col(j) = kron(CVector(f.x.col(j)), CVector(f.y.col(j)));
        return z;
    }

    double value(const FramePair& f) const {
        CMatrix z = product_kets(f);
        return (z.adjoint() * rho_ * z).trace().real();
    }

    /// dC along (M, N) equals tr[M G_M] + tr[N G_N].
    Gradient gradient(const FramePair& f) const {
        CMatrix z = product_kets(f);
        CMatrix q = rho_ * (z * z.adjoint());
        CMatrix h = kI * (q.adjoint() - q); // -i [rho, P]
        return Gradient{partial_trace(h, n_, n_, 1), partial_trace(h, n_, n_, 2)};
    }

    /// Exact second derivative -sum_j <x_j y_j|[K,[K,rho]]|x_j y_j>.
    double second_variation(const FramePair& f, const HessianProbe& probe) const {
        CMatrix z = product_kets(f);
        CMatrix p = z * z.adjoint();
        CMatrix k = probe.generator();
        CMatrix inner = k * rho_ - rho_ * k;
        CMatrix outer = k * inner - inner * k;
        return -(p * outer).trace().real();
    }

    /// Matrix of the second variation in the coordinates (M, N) = sum theta_a H_a,
    /// first n^2 entries for M, next n^2 for N.
    RMatrix hessian(const FramePair& f) const {
        const std::vector<CMatrix> basis = hermitian_basis(n_);
        const int nb = static_cast<int>(basis.size());
        CMatrix z = product_kets(f);
        CMatrix p = z * z.adjoint();
        CMatrix id = CMatrix::Identity(n_, n_);
        std::vector<CMatrix> left, right; // [P, K_a] and [K_a, rho]
        left.reserve(2 * nb);
        right.reserve(2 * nb);
        for (int s = 0; s < 2; ++s)
            for (int a = 0; a < nb; ++a) {
                CMatrix k = s == 0 ? kron(basis[a], id) : kron(id, basis[a]);
                left.push_back(p * k - k * p);
                right.push_back(k * rho_ - rho_ * k);
            }
        const int dim = 2 * nb;
        RMatrix h(dim, dim);
        for (int a = 0; a < dim; ++a)
            for (int b = a; b < dim; ++b) {
                double ab = (left[a].transpose().cwiseProduct(right[b])).sum().real();
                double ba = (left[b].transpose().cwiseProduct(right[a])).sum().real();
                h(a, b) = h(b, a) = -0.5 * (ab + ba);
            }
        return h;
    }

    /// Gradient in the same coordinates as `hessian`.
    RVector gradient_coordinates(const Gradient& g) const {
        const std::vector<CMatrix> basis = hermitian_basis(n_);
        const int nb = static_cast<int>(basis.size());
        RVector out(2 * nb);
        for (int a = 0; a < nb; ++a) {
            out(a) = (basis[a] * g.m).trace().real();
            out(nb + a) = (basis[a] * g.n).trace().real();
        }
        return out;
    }

    /// Apply exp(i t M) and exp(i t N) to the frames.
    static FramePair retract(const FramePair& f, const CMatrix& m, const CMatrix& nn, double t) {
        return FramePair{expi_hermitian(m, t) * f.x, expi_hermitian(nn, t) * f.y};
    }

    /// Hermitian (M, N) from coordinates.
    std::pair<CMatrix, CMatrix> directions(const RVector& theta) const {
        const std::vector<CMatrix> basis = hermitian_basis(n_);
        const int nb = static_cast<int>(basis.size());
        CMatrix m = CMatrix::Zero(n_, n_), nn = CMatrix::Zero(n_, n_);
        for (int a = 0; a < nb; ++a) {
            m += theta(a) * basis[a];
            nn += theta(nb + a) * basis[a];
        }
        return {m, nn};
    }

private:
    int n_, d1_, d2_;
    CMatrix rho_;
};

// ---------------------------------------------------------------------------
// First-order conditions

/// V = sum_j <b_j|rho|b_j> |a_j><a_j|,  W = sum_j <a_j|rho|a_j> |b_j><b_j|.
struct MultiplierPair {
    CMatrix v;
    CMatrix w;
    double hermiticity_v = 0.0;
    double hermiticity_w = 0.0;
    double trace_v = 0.0;
    double trace_w = 0.0;
};

struct ExtremalityReport {
    double residual = 0.0;   // max violation of the pairwise stationarity equations
    double coincidence = 0.0;
    MultiplierPair multipliers;
};

namespace detail {

/// <b|rho|b> as an operator on side 1.
inline CMatrix conditional_first(const CMatrix& rho, int d1, int d2, const CVector& b) {
    CMatrix out(d1, d1);
    for (int i = 0; i < d1; ++i)
        for (int j = 0; j < d1; ++j) {
            cplx s = 0.0;
            for (int k = 0; k < d2; ++k)
                for (int l = 0; l < d2; ++l) s += std::conj(b(k)) * rho(i * d2 + k, j * d2 + l) * b(l);
            out(i, j) = s;
        }
    return out;
}

/// <a|rho|a> as an operator on side 2.
inline CMatrix conditional_second(const CMatrix& rho, int d1, int d2, const CVector& a) {
    CMatrix out(d2, d2);
    for (int i = 0; i < d2; ++i)
        for (int j = 0; j < d2; ++j) {
            cplx s = 0.0;
            for (int k = 0; k < d1; ++k)
                for (int l = 0; l < d1; ++l) s += std::conj(a(k)) * rho(k * d2 + i, l * d2 + j) * a(l);
            out(i, j) = s;
        }
    return out;
}

inline void require_matched(const DensityOperator& rho, const MaximalPOM& a, const MaximalPOM& b) {
    require_pom_dims(rho, a, b);
    if (a.outcomes() != b.outcomes())
        throw ValidationError(ErrorKind::size_mismatch, "POMs must have the same number of outcomes");
}

} // namespace detail

inline ExtremalityReport extremality_residual(const DensityOperator& rho, const MaximalPOM& a, const MaximalPOM& b) {
    detail::require_matched(rho, a, b);
    const int n = a.outcomes(), d1 = rho.d1(), d2 = rho.d2();
    std::vector<CMatrix> given_b, given_a;
    for (int j = 0; j < n; ++j) {
        given_b.push_back(detail::conditional_first(rho.matrix(), d1, d2, b.ket(j)));
        given_a.push_back(detail::conditional_second(rho.matrix(), d1, d2, a.ket(j)));
    }
    ExtremalityReport r;
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            if (k == l) continue;
            // <a_k,b_l|rho|a_l,b_l> - <a_k,b_k|rho|a_l,b_k>
            cplx first = a.ket(k).dot((given_b[l] - given_b[k]) * a.ket(l));
            // <a_k,b_l|rho|a_k,b_k> - <a_l,b_l|rho|a_l,b_k>
            cplx second = b.ket(l).dot((given_a[k] - given_a[l]) * b.ket(k));
            r.residual = std::max({r.residual, std::abs(first), std::abs(second)});
        }
    MultiplierPair& mp = r.multipliers;
    mp.v = CMatrix::Zero(d1, d1);
    mp.w = CMatrix::Zero(d2, d2);
    for (int j = 0; j < n; ++j) {
        mp.v += given_b[j] * a.element(j);
        mp.w += given_a[j] * b.element(j);
    }
    mp.hermiticity_v = hermiticity_defect(mp.v);
    mp.hermiticity_w = hermiticity_defect(mp.w);
    mp.trace_v = mp.v.trace().real();
    mp.trace_w = mp.w.trace().real();
    r.coincidence = coincidence_rate(rho, a, b);
    return r;
}

/// The pair of discrimination problems attached to a POM pair: A against
/// the ensemble p_j sigma_j = <b_j|rho|b_j>, B against q_j tau_j = <a_j|rho|a_j>.
struct DiscriminationReport {
    std::vector<double> p;
    std::vector<CMatrix> sigma;
    std::vector<double> q;
    std::vector<CMatrix> tau;
    CMatrix upsilon_first;  // V
    CMatrix upsilon_second; // W
    double first_condition_residual = 0.0; // max_j |(V - p_j sigma_j) a_j|, likewise for W
    double min_margin_first = 0.0;         // min_j lambda_min(V - p_j sigma_j)
    double min_margin_second = 0.0;        // min_j lambda_min(W - q_j tau_j)
    bool first_side = false;               // V >= <b_j|rho|b_j> for all j
    bool second_side = false;              // W >= <a_j|rho|a_j> for all j
};

inline DiscriminationReport discrimination_check(const DensityOperator& rho, const MaximalPOM& a,
                                                 const MaximalPOM& b, const Tolerances& tol = default_tolerances()) {
    detail::require_matched(rho, a, b);
    const int n = a.outcomes(), d1 = rho.d1(), d2 = rho.d2();
    ExtremalityReport ex = extremality_residual(rho, a, b);
    DiscriminationReport r;
    r.upsilon_first = ex.multipliers.v;
    r.upsilon_second = ex.multipliers.w;
    CMatrix vh = hermitian_part(r.upsilon_first), wh = hermitian_part(r.upsilon_second);
    r.min_margin_first = r.min_margin_second = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
        CMatrix gb = detail::conditional_first(rho.matrix(), d1, d2, b.ket(j));
        CMatrix ga = detail::conditional_second(rho.matrix(), d1, d2, a.ket(j));
        double pj = gb.trace().real(), qj = ga.trace().real();
        r.p.push_back(pj);
        r.q.push_back(qj);
        r.sigma.push_back(pj > 0.0 ? CMatrix(gb / pj) : CMatrix::Zero(d1, d1));
        r.tau.push_back(qj > 0.0 ? CMatrix(ga / qj) : CMatrix::Zero(d2, d2));
        r.first_condition_residual =
            std::max({r.first_condition_residual, ((r.upsilon_first - gb) * a.ket(j)).norm(),
                      ((r.upsilon_second - ga) * b.ket(j)).norm()});
        r.min_margin_first = std::min(r.min_margin_first, min_eigenvalue(vh - gb));
        r.min_margin_second = std::min(r.min_margin_second, min_eigenvalue(wh - ga));
    }
    r.first_side = r.min_margin_first >= -tol.operator_order;
    r.second_side = r.min_margin_second >= -tol.operator_order;
    return r;
}

/// Both discrimination inequalities hold, so a maximum over n-outcome POMs is
/// also a local maximum over all maximal POMs.
inline bool corollary_check(const DensityOperator& rho, const MaximalPOM& a, const MaximalPOM& b,
                            const Tolerances& tol = default_tolerances()) {
    DiscriminationReport r = discrimination_check(rho, a, b, tol);
    return r.first_side && r.second_side;
}

// ---------------------------------------------------------------------------
// Frames from POMs

inline FramePair frames_from_poms(const MaximalPOM& a, const MaximalPOM& b, int n) {
    return FramePair{naimark_extend(a, n).frame(), naimark_extend(b, n).frame()};
}

inline MaximalPOM first_pom(const FramePair& f, int d1) { return MaximalPOM::create(CMatrix(f.x.topRows(d1))); }
inline MaximalPOM second_pom(const FramePair& f, int d2) { return MaximalPOM::create(CMatrix(f.y.topRows(d2))); }

/// Start aligned with the Schmidt basis of the dominant eigenvector of rho.
inline FramePair schmidt_start(const DensityOperator& rho, int n) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.matrix());
    CVector top = es.eigenvectors().col(es.eigenvectors().cols() - 1);
    SchmidtForm sf = schmidt_decompose(top / top.norm(), rho.d1(), rho.d2());
    FramePair f{CMatrix::Identity(n, n), CMatrix::Identity(n, n)};
    f.x.topLeftCorner(rho.d1(), rho.d1()) = sf.left_full;
    f.y.topLeftCorner(rho.d2(), rho.d2()) = sf.right_full;
    return f;
}

// ---------------------------------------------------------------------------
// Second-order classification

struct SecondOrderReport {
    Classification classification = Classification::indeterminate;
    double min_eigenvalue = 0.0; // extreme eigenvalues outside the dead band
    double max_eigenvalue = 0.0; // (0 when none on that side)
    int null_directions = 0;     // eigenvalues inside the dead band (gauge and flat)
    RVector eigenvalues;
};

inline Classification classify_spectrum(const RVector& ev, double dead_band) {
    bool pos = false, neg = false;
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        if (ev(k) > dead_band) pos = true;
        if (ev(k) < -dead_band) neg = true;
    }
    if (pos && neg) return Classification::saddle;
    if (neg) return Classification::local_max;
    if (pos) return Classification::local_min;
    return Classification::indeterminate;
}

inline SecondOrderReport second_order_classify(const DensityOperator& rho, const FramePair& f, int probe_cap = 6,
                                               const Tolerances& tol = default_tolerances()) {
    const int n = static_cast<int>(f.x.rows());
    if (n > probe_cap)
        throw ValidationError(ErrorKind::out_of_range, "Hessian probe space for n = " + std::to_string(n) +
                                                           " exceeds the cap " + std::to_string(probe_cap));
    CoincidenceObjective obj(rho, n);
    obj.check(f);
    double res = extremality_residual(rho, first_pom(f, rho.d1()), second_pom(f, rho.d2())).residual;
    if (res > tol.extremal)
        throw ValidationError(ErrorKind::not_extremal, "first-order residual " + std::to_string(res));
    Eigen::SelfAdjointEigenSolver<RMatrix> es(obj.hessian(f), Eigen::EigenvaluesOnly);
    SecondOrderReport r;
    r.eigenvalues = es.eigenvalues();
    r.classification = classify_spectrum(r.eigenvalues, tol.dead_band);
    for (Eigen::Index k = 0; k < r.eigenvalues.size(); ++k) {
        double e = r.eigenvalues(k);
        if (std::abs(e) <= tol.dead_band) {
            ++r.null_directions;
        } else {
            r.min_eigenvalue = std::min(r.min_eigenvalue, e);
            r.max_eigenvalue = std::max(r.max_eigenvalue, e);
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Optimisation

struct OptimizerOptions {
    int restarts = 16;
    std::uint64_t seed = 0;
    int max_iters = 5000;
    double tol = 1e-10; // stop when the gradient norm falls below this
    bool schmidt_start = true;
    std::vector<FramePair> initial_frames; // extra user starts, tried first
    bool newton_polish = true;
    double newton_threshold = 1e-3; // gradient norm below which Newton steps are tried
    bool certify = true;            // run discrimination and second-order checks on the winner
    bool record_history = false;
    int probe_cap = 6;
};

struct RunStats {
    int iterations = 0;
    int newton_steps = 0;
    std::vector<double> history; // C after each accepted step, when recorded
    double value = 0.0;
    double gradient_norm = 0.0;
    bool converged = false;
};

struct OptimizationResult {
    FramePair frames;
    int n = 0;
    int d1 = 0;
    int d2 = 0;
    double value = 0.0;
    double gradient_norm = 0.0;
    double residual = 0.0;
    bool converged = false;
    MultiplierPair multipliers;
    bool vwcon_first = false;
    bool vwcon_second = false;
    bool corollary = false;
    Classification classification = Classification::indeterminate;
    double hessian_min = 0.0;
    double hessian_max = 0.0;
    int best_start = -1;
    std::vector<RunStats> runs;

    MaximalPOM pom_a() const { return first_pom(frames, d1); }
    MaximalPOM pom_b() const { return second_pom(frames, d2); }
};

namespace detail {

/// Newton step in exponential coordinates, restricted to curvature directions
/// below -dead_band. Empty when the Hessian has positive curvature.
inline std::optional<RVector> newton_direction(const CoincidenceObjective& obj, const FramePair& f,
                                               const Gradient& g, double dead_band) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(obj.hessian(f));
    const RVector& ev = es.eigenvalues();
    if (ev(ev.size() - 1) > dead_band) return std::nullopt;
    RVector grad = obj.gradient_coordinates(g);
    RVector theta = RVector::Zero(grad.size());
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        if (ev(k) < -dead_band) {
            RVector v = es.eigenvectors().col(k);
            theta -= (v.dot(grad) / ev(k)) * v;
        }
    }
    return theta;
}

} // namespace detail

/// Gradient ascent from one start. Steps are accepted only when C increases.
inline std::pair<FramePair, RunStats> ascend(const CoincidenceObjective& obj, FramePair f,
                                             const OptimizerOptions& opt,
                                             const Tolerances& tol = default_tolerances()) {
    RunStats st;
    double c = obj.value(f);
    Gradient g = obj.gradient(f);
    if (opt.record_history) st.history.push_back(c);
    for (st.iterations = 0; st.iterations < opt.max_iters; ++st.iterations) {
        st.gradient_norm = g.norm();
        if (st.gradient_norm < opt.tol) {
            st.converged = true;
            break;
        }
        bool accepted = false;
        if (opt.newton_polish && st.gradient_norm < opt.newton_threshold && obj.n() <= opt.probe_cap) {
            if (auto theta = detail::newton_direction(obj, f, g, tol.dead_band)) {
                auto [m, nn] = obj.directions(*theta);
                FramePair trial = CoincidenceObjective::retract(f, m, nn, 1.0);
                double ct = obj.value(trial);
                Gradient gt = obj.gradient(trial);
                // near the optimum C changes below rounding; require the gradient to shrink
                if (ct >= c && gt.norm() < st.gradient_norm) {
                    f = trial;
                    c = ct;
                    g = gt;
                    ++st.newton_steps;
                    accepted = true;
                }
            }
        }
        if (!accepted) {
            double t = 1.0;
            for (int halvings = 0; halvings < 60; ++halvings, t *= 0.5) {
                FramePair trial = CoincidenceObjective::retract(f, g.m, g.n, t);
                double ct = obj.value(trial);
                if (ct > c) {
                    f = trial;
                    c = ct;
                    g = obj.gradient(f);
                    accepted = true;
                    break;
                }
            }
        }
        if (!accepted) break; // no representable ascent left
        if (opt.record_history) st.history.push_back(c);
    }
    st.value = c;
    st.gradient_norm = g.norm();
    st.converged = st.converged || st.gradient_norm < opt.tol;
    return {f, st};
}

/// Fill the certification fields of a result from its frames.
inline void certify(const DensityOperator& rho, OptimizationResult& r, const OptimizerOptions& opt,
                    const Tolerances& tol = default_tolerances()) {
    MaximalPOM a = r.pom_a(), b = r.pom_b();
    ExtremalityReport ex = extremality_residual(rho, a, b);
    r.residual = ex.residual;
    r.multipliers = ex.multipliers;
    if (!opt.certify) return;
    DiscriminationReport dr = discrimination_check(rho, a, b, tol);
    r.vwcon_first = dr.first_side;
    r.vwcon_second = dr.second_side;
    r.corollary = dr.first_side && dr.second_side;
    if (r.residual <= tol.extremal && r.n <= opt.probe_cap) {
        SecondOrderReport so = second_order_classify(rho, r.frames, opt.probe_cap, tol);
        r.classification = so.classification;
        r.hessian_min = so.min_eigenvalue;
        r.hessian_max = so.max_eigenvalue;
    } else {
        r.classification = Classification::indeterminate;
    }
}

/// Multi-start maximisation of C over orthogonal frame pairs on H_n.
/// Starts: user frames, the Schmidt-aligned start, then `restarts` Haar-random pairs.
inline OptimizationResult optimize_coincidence(const DensityOperator& rho, int n,
                                               const OptimizerOptions& opt = {},
                                               const Tolerances& tol = default_tolerances()) {
    CoincidenceObjective obj(rho, n);
    if (opt.restarts < 0) throw ValidationError(ErrorKind::out_of_range, "restarts must be nonnegative");
    std::vector<FramePair> starts = opt.initial_frames;
    for (const auto& s : starts) obj.check(s);
    if (opt.schmidt_start) starts.push_back(schmidt_start(rho, n));
    for (int k = 0; k < opt.restarts; ++k) {
        Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(k)));
        CMatrix ux = haar_unitary(n, rng);
        CMatrix uy = haar_unitary(n, rng);
        starts.push_back(FramePair{std::move(ux), std::move(uy)});
    }
    if (starts.empty()) throw ValidationError(ErrorKind::out_of_range, "optimizer needs at least one start");

    OptimizationResult best;
    best.n = n;
    best.d1 = rho.d1();
    best.d2 = rho.d2();
    double best_residual = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < starts.size(); ++s) {
        auto [frames, st] = ascend(obj, starts[s], opt, tol);
        best.runs.push_back(st);
        bool better = best.best_start < 0 || st.value > best.value + 1e-12;
        if (!better && std::abs(st.value - best.value) <= 1e-12) {
            double res = extremality_residual(rho, first_pom(frames, rho.d1()), second_pom(frames, rho.d2())).residual;
            if (res < best_residual) {
                better = true;
                best_residual = res;
            }
        } else if (better) {
            best_residual =
                extremality_residual(rho, first_pom(frames, rho.d1()), second_pom(frames, rho.d2())).residual;
        }
        if (better) {
            best.frames = frames;
            best.value = st.value;
            best.gradient_norm = st.gradient_norm;
            best.converged = st.converged;
            best.best_start = static_cast<int>(s);
        }
    }
    certify(rho, best, opt, tol);
    if (best.residual <= tol.extremal) best.converged = true;
    return best;
}

// ---------------------------------------------------------------------------
// Mirror-symmetric family on the Bell state

inline std::vector<std::pair<double, double>> mirror_family_curve(const std::vector<double>& alphas) {
    DensityOperator bell = named_state(named::TrineDemo{});
    std::vector<std::pair<double, double>> out;
    out.reserve(alphas.size());
    for (double alpha : alphas) {
        MaximalPOM p = mirror_pom(alpha);
        out.emplace_back(alpha, coincidence_rate(bell, p, p));
    }
    return out;
}

} // namespace corrmax
