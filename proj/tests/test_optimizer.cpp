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

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace corrmax;

namespace {

struct SeparableExample {
    DensityOperator rho;
    MaximalPOM a;
    MaximalPOM b;
    double expected;
};

/// lambda1 |psi1 chi1><..| + lambda2 |psi2 chi2><..| with A = {psi_j} and B the
/// Helstrom measurement for {chi_j; lambda_j}.
SeparableExample separable_example(double lambda1, const CVector& chi1, const CVector& chi2, Rng& rng) {
    CMatrix u = haar_unitary(2, rng);
    CVector psi1 = u.col(0), psi2 = u.col(1);
    const double lambda2 = 1.0 - lambda1;
    CVector k1 = kron(psi1, chi1), k2 = kron(psi2, chi2);
    DensityOperator rho =
        DensityOperator::create(lambda1 * k1 * k1.adjoint() + lambda2 * k2 * k2.adjoint(), 2, 2);
    CMatrix eta = lambda1 * chi1 * chi1.adjoint() - lambda2 * chi2 * chi2.adjoint();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(eta);
    CMatrix bk(2, 2);
    bk.col(0) = es.eigenvectors().col(1);
    bk.col(1) = es.eigenvectors().col(0);
    const double overlap = std::norm(chi1.dot(chi2));
    return {rho, MaximalPOM::create(u), MaximalPOM::create(bk),
            0.5 * (1.0 + std::sqrt(1.0 - 4.0 * lambda1 * lambda2 * overlap))};
}

FramePair schmidt_frames(const DensityOperator& pure, int n) { return schmidt_start(pure, n); }

double frame_value(const CoincidenceObjective& obj, const FramePair& f, const HessianProbe& p, double t) {
    return obj.value(CoincidenceObjective::retract(f, p.m, p.n, t));
}

} // namespace

TEST(Gradient, VanishesAtSchmidtFrames) {
    for (std::uint64_t s = 0; s < 10; ++s)
        for (auto [d1, d2] : {std::pair{2, 2}, {2, 3}, {3, 3}}) {
            DensityOperator rho = random_density(d1, d2, 1, s);
            for (int n : {std::max(d1, d2), std::max(d1, d2) + 1}) {
                CoincidenceObjective obj(rho, n);
                FramePair f = schmidt_frames(rho, n);
                EXPECT_NEAR(obj.value(f), 1.0, 1e-12);
                EXPECT_LT(obj.gradient(f).norm(), 1e-10);
                EXPECT_LE(extremality_residual(rho, first_pom(f, d1), second_pom(f, d2)).residual, 1e-12);
            }
        }
}

TEST(Gradient, VanishesForTrineOnBell) {
    DensityOperator bell = named_state(named::TrineDemo{});
    FramePair f = frames_from_poms(trine_pom(), trine_pom(), 3);
    CoincidenceObjective obj(bell, 3);
    EXPECT_LT(obj.gradient(f).norm(), 1e-10);
}

TEST(Gradient, MatchesCentralDifferences) {
    Rng rng(101);
    for (int t = 0; t < 30; ++t) {
        const int n = 2 + t % 3;
        DensityOperator rho = random_density(2, 2, 4, 500 + t);
        CoincidenceObjective obj(rho, n);
        FramePair f = oracle::random_frames(n, rng);
        HessianProbe p{oracle::random_hermitian(n, rng), oracle::random_hermitian(n, rng)};
        Gradient g = obj.gradient(f);
        EXPECT_LT(hermiticity_defect(g.m), 1e-14);
        EXPECT_LT(hermiticity_defect(g.n), 1e-14);
        double analytic = (p.m * g.m).trace().real() + (p.n * g.n).trace().real();
        double fd = oracle::central_difference([&](double e) { return frame_value(obj, f, p, e); }, 1e-5);
        EXPECT_LE(std::abs(analytic - fd), 1e-5 * std::max(1.0, std::abs(analytic)));
    }
}

TEST(Gradient, RejectsFrameMismatch) {
    CoincidenceObjective obj(random_density(2, 2, 4, 1), 3);
    EXPECT_THROW(obj.check(FramePair{CMatrix::Identity(2, 2), CMatrix::Identity(3, 3)}), ValidationError);
    EXPECT_THROW(CoincidenceObjective(random_density(2, 3, 6, 1), 2), ValidationError);
}

TEST(Hessian, QuadraticFormMatchesSecondDifferences) {
    Rng rng(202);
    for (int t = 0; t < 6; ++t) {
        const int n = 2 + t % 2;
        DensityOperator rho = random_density(2, 2, 4, 700 + t);
        CoincidenceObjective obj(rho, n);
        FramePair f = oracle::random_frames(n, rng);
        RMatrix h = obj.hessian(f);
        EXPECT_LT((h - h.transpose()).cwiseAbs().maxCoeff(), 1e-14);
        const std::vector<CMatrix> basis = hermitian_basis(n);
        for (int k = 0; k < 20; ++k) {
            HessianProbe p{oracle::random_hermitian(n, rng), oracle::random_hermitian(n, rng)};
            EXPECT_LT(hermiticity_defect(p.generator()), 1e-12);
            double exact = obj.second_variation(f, p);
            double fd = oracle::second_difference([&](double e) { return frame_value(obj, f, p, e); }, 1e-4);
            EXPECT_LE(std::abs(exact - fd), 1e-4 * std::max(1.0, std::abs(exact)));
            RVector theta(2 * n * n);
            for (int a = 0; a < n * n; ++a) {
                theta(a) = (basis[a] * p.m).trace().real();
                theta(n * n + a) = (basis[a] * p.n).trace().real();
            }
            EXPECT_NEAR(theta.dot(h * theta), exact, 1e-10 * std::max(1.0, std::abs(exact)));
        }
    }
}

TEST(Hessian, GaugeDirectionsAreNull) {
    Rng rng(3);
    DensityOperator rho = random_density(2, 2, 4, 3);
    OptimizationResult r = optimize_coincidence(rho, 3, {});
    CoincidenceObjective obj(rho, 3);
    // M diagonal in the X frame is a pure phase change of the kets
    RVector phases = RVector::Random(3);
    CMatrix m = r.frames.x * phases.cast<cplx>().asDiagonal() * r.frames.x.adjoint();
    HessianProbe p{m, CMatrix::Zero(3, 3)};
    EXPECT_NEAR(obj.second_variation(r.frames, p), 0.0, 1e-12);
}

TEST(Optimizer, PureStatesReachOne) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        OptimizerOptions o;
        o.seed = s;
        OptimizationResult r = optimize_coincidence(random_density(2, 2, 1, s), 2, o);
        EXPECT_NEAR(r.value, 1.0, 1e-8);
        EXPECT_EQ(r.classification, Classification::local_max);
        EXPECT_TRUE(r.corollary);
    }
}

TEST(Optimizer, Isotropic) {
    for (int k = 0; k <= 10; ++k) {
        double w = k / 10.0;
        OptimizationResult r = optimize_coincidence(named_state(named::Isotropic{w}), 2, {});
        EXPECT_NEAR(r.value, 0.5 * (1.0 + std::abs(4 * w - 1) / 3.0), 1e-8);
    }
}

TEST(Optimizer, RandomQubitsMatchClosedForm) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        DensityOperator rho = random_density(2, 2, 1 + int(s % 4), s);
        OptimizerOptions o;
        o.seed = s;
        OptimizationResult r = optimize_coincidence(rho, 2, o);
        EXPECT_NEAR(r.value, oracle::two_qubit_max_search(rho.matrix()), 1e-6);
        EXPECT_GE(r.value, 0.5 - 1e-9);
        EXPECT_LE(r.value, 1.0 + 1e-9);
    }
}

TEST(Optimizer, RejectsSmallN) { EXPECT_THROW(optimize_coincidence(random_density(3, 3, 9, 0), 2, {}), ValidationError); }

TEST(Optimizer, MonotoneHistory) {
    OptimizerOptions o;
    o.record_history = true;
    o.restarts = 4;
    for (int n : {2, 3, 4}) {
        OptimizationResult r = optimize_coincidence(random_density(2, 2, 4, 42), n, o);
        for (const auto& run : r.runs)
            for (std::size_t k = 1; k < run.history.size(); ++k) EXPECT_GE(run.history[k], run.history[k - 1]);
    }
}

TEST(Optimizer, CertificationFieldsConsistent) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        DensityOperator rho = random_density(2, 3, 6, s);
        OptimizerOptions o;
        o.seed = s;
        OptimizationResult r = optimize_coincidence(rho, 3, o);
        EXPECT_GE(r.value, 1.0 / 3 - 1e-9);
        EXPECT_LE(r.residual, 1e-10);
        EXPECT_NEAR(r.multipliers.trace_v, r.value, 1e-9);
        EXPECT_NEAR(r.multipliers.trace_w, r.value, 1e-9);
        EXPECT_LE(r.multipliers.hermiticity_v, 1e-10);
        EXPECT_LE(r.multipliers.hermiticity_w, 1e-10);
        if (r.classification == Classification::local_max) {
            EXPECT_LE(r.hessian_max, 0.0);
        }
        if (r.classification == Classification::saddle) {
            EXPECT_TRUE(r.hessian_min < 0 && r.hessian_max > 0);
        }
        EXPECT_LE(r.value, theorem_bound(rho, 3).value + 1e-7);
    }
}

TEST(Optimizer, WernerWithEqualFrames) {
    for (double x : {0.4, 0.7, 1.0}) {
        OptimizerOptions o;
        o.restarts = 0;
        o.schmidt_start = false;
        o.initial_frames.push_back(FramePair{CMatrix::Identity(3, 3), CMatrix::Identity(3, 3)});
        OptimizationResult r = optimize_coincidence(named_state(named::Werner{3, x}), 3, o);
        EXPECT_NEAR(r.value, 1.0 / 3 + std::abs(x - 1.0 / 3) / 4, 1e-6);
    }
}

TEST(Extremality, TrineOnBell) {
    DensityOperator bell = named_state(named::TrineDemo{});
    ExtremalityReport r = extremality_residual(bell, trine_pom(), trine_pom());
    EXPECT_LE(r.residual, 1e-12);
    EXPECT_LT(max_abs(r.multipliers.v - CMatrix::Identity(2, 2) / 3.0), 1e-12);
    EXPECT_LT(max_abs(r.multipliers.w - CMatrix::Identity(2, 2) / 3.0), 1e-12);
    EXPECT_NEAR(r.multipliers.trace_v, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(r.coincidence, 2.0 / 3.0, 1e-12);
    EXPECT_THROW(extremality_residual(bell, trine_pom(), spin_pom(Eigen::Vector3d(0, 0, 1))), ValidationError);
}

TEST(Extremality, RandomFramesAreNotExtremal) {
    Rng rng(55);
    int large = 0;
    for (int t = 0; t < 20; ++t) {
        DensityOperator rho = random_density(2, 2, 4, 900 + t);
        FramePair f = oracle::random_frames(3, rng);
        double res = extremality_residual(rho, first_pom(f, 2), second_pom(f, 2)).residual;
        double g = CoincidenceObjective(rho, 3).gradient(f).norm();
        if (res > 1e-3) ++large;
        EXPECT_GT(g, 0.0);
        // the residual entries are the off-diagonal gradient entries in the frame basis
        EXPECT_LE(res, g + 1e-12);
    }
    EXPECT_GE(large, 18);
}

TEST(Extremality, SymmetryLifting) {
    Rng rng(66);
    // Werner states are invariant under U (x) U
    DensityOperator rho = named_state(named::Werner{3, 0.6});
    OptimizationResult r = optimize_coincidence(rho, 3, {});
    for (int t = 0; t < 5; ++t) {
        CMatrix u = haar_unitary(3, rng);
        MaximalPOM a = MaximalPOM::create(CMatrix(u.adjoint() * r.pom_a().kets()));
        MaximalPOM b = MaximalPOM::create(CMatrix(u.adjoint() * r.pom_b().kets()));
        EXPECT_NEAR(extremality_residual(rho, a, b).residual, r.residual, 1e-9);
        EXPECT_NEAR(coincidence_rate(rho, a, b), r.value, 1e-9);
    }
}

TEST(Extremality, MixturesOfSharedSchmidtStates) {
    Rng rng(77);
    CMatrix u = haar_unitary(3, rng), v = haar_unitary(3, rng);
    auto pure = [&](double p0, double p1) {
        CVector psi = CVector::Zero(9);
        double p[3] = {p0, p1, 1.0 - p0 - p1};
        for (int j = 0; j < 3; ++j) psi += std::sqrt(p[j]) * kron(CVector(u.col(j)), CVector(v.col(j)));
        return DensityOperator::create(psi * psi.adjoint(), 3, 3);
    };
    DensityOperator r1 = pure(0.5, 0.3), r2 = pure(0.1, 0.6);
    MaximalPOM a = MaximalPOM::create(u), b = MaximalPOM::create(CMatrix(v.conjugate()));
    // kets |b_j> must satisfy <b_j|v_j> real; the Schmidt partner of u_j is v_j itself
    b = MaximalPOM::create(v);
    EXPECT_LE(extremality_residual(r1, a, b).residual, 1e-12);
    EXPECT_LE(extremality_residual(r2, a, b).residual, 1e-12);
    for (double l : {0.25, 0.5, 0.75}) {
        DensityOperator mix = DensityOperator::create(l * r1.matrix() + (1 - l) * r2.matrix(), 3, 3);
        EXPECT_LE(extremality_residual(mix, a, b).residual, 1e-9);
    }
}

TEST(Discrimination, TrineBothSides) {
    DensityOperator bell = named_state(named::TrineDemo{});
    DiscriminationReport r = discrimination_check(bell, trine_pom(), trine_pom());
    EXPECT_TRUE(r.first_side);
    EXPECT_TRUE(r.second_side);
    EXPECT_LE(r.first_condition_residual, 1e-12);
    for (int j = 0; j < 3; ++j) {
        EXPECT_NEAR(r.p[j], 1.0 / 3.0, 1e-12);
        EXPECT_NEAR(r.q[j], 1.0 / 3.0, 1e-12);
    }
}

TEST(Discrimination, SeparableExample) {
    Rng rng(88);
    int both = 0, first_fails = 0;
    for (int t = 0; t < 40; ++t) {
        CVector chi1 = random_unit_vector(2, rng), chi2 = random_unit_vector(2, rng);
        const double lambda1 = 0.1 + 0.02 * t;
        SeparableExample ex = separable_example(lambda1, chi1, chi2, rng);
        EXPECT_NEAR(coincidence_rate(ex.rho, ex.a, ex.b), ex.expected, 1e-12);
        EXPECT_NEAR(ex.expected, two_qubit_max(ex.rho).value, 1e-10);
        DiscriminationReport r = discrimination_check(ex.rho, ex.a, ex.b);
        // B is the Helstrom measurement for {chi_j; lambda_j}
        EXPECT_TRUE(r.second_side);
        EXPECT_LE(r.first_condition_residual, 1e-9);
        // V - rho_{b_j} is diagonal in the psi basis with entries
        // lambda_k (|<b_k|chi_k>|^2 - |<b_j|chi_k>|^2), k != j
        const double lambda[2] = {lambda1, 1.0 - lambda1};
        const CVector* chi[2] = {&chi1, &chi2};
        double margin = 0.0;
        for (int k = 0; k < 2; ++k)
            margin = std::min(margin, lambda[k] * (2.0 * std::norm(ex.b.ket(k).dot(*chi[k])) - 1.0));
        EXPECT_NEAR(r.min_margin_first, margin, 1e-10);
        EXPECT_EQ(r.first_side, margin >= -1e-9);
        EXPECT_EQ(corollary_check(ex.rho, ex.a, ex.b), r.first_side);
        (r.first_side ? both : first_fails) += 1;
        CMatrix ups = CMatrix::Zero(2, 2);
        for (int j = 0; j < 2; ++j) ups += r.p[j] * r.sigma[j] * ex.a.element(j);
        EXPECT_LT(max_abs(ups - r.upsilon_first), 1e-9);
        FramePair f = frames_from_poms(ex.a, ex.b, 2);
        EXPECT_EQ(second_order_classify(ex.rho, f).classification, Classification::local_max);
    }
    EXPECT_GT(both, 0);
    EXPECT_GT(first_fails, 0);
}

TEST(Discrimination, SeparableExampleEqualPriors) {
    Rng rng(89);
    for (int t = 0; t < 20; ++t) {
        SeparableExample ex = separable_example(0.5, random_unit_vector(2, rng), random_unit_vector(2, rng), rng);
        DiscriminationReport r = discrimination_check(ex.rho, ex.a, ex.b);
        EXPECT_TRUE(r.first_side && r.second_side);
        EXPECT_TRUE(corollary_check(ex.rho, ex.a, ex.b));
    }
}

TEST(SecondOrder, TrineIsSaddle) {
    DensityOperator bell = named_state(named::TrineDemo{});
    SecondOrderReport r = second_order_classify(bell, frames_from_poms(trine_pom(), trine_pom(), 3));
    EXPECT_EQ(r.classification, Classification::saddle);
    EXPECT_LT(r.min_eigenvalue, -1e-6);
    EXPECT_GT(r.max_eigenvalue, 1e-6);
    EXPECT_GE(r.null_directions, 6);
    // the mirror-family direction raises C; one-sided rotations lower it
    auto curve = mirror_family_curve({1.0 / 3.0 - 1e-3, 1.0 / 3.0, 1.0 / 3.0 + 1e-3});
    EXPECT_GT(curve[0].second, curve[1].second);
    EXPECT_GT(curve[2].second, curve[1].second);
    EXPECT_TRUE(corollary_check(bell, trine_pom(), trine_pom()));
}

TEST(SecondOrder, PureSchmidtIsLocalMax) {
    DensityOperator rho = random_density(2, 2, 1, 12);
    EXPECT_EQ(second_order_classify(rho, schmidt_frames(rho, 2)).classification, Classification::local_max);
    EXPECT_TRUE(corollary_check(rho, first_pom(schmidt_frames(rho, 2), 2), second_pom(schmidt_frames(rho, 2), 2)));
}

TEST(SecondOrder, Errors) {
    Rng rng(4);
    DensityOperator rho = random_density(2, 2, 4, 4);
    try {
        second_order_classify(rho, oracle::random_frames(3, rng));
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::not_extremal);
    }
    DensityOperator pure = random_density(2, 2, 1, 5);
    EXPECT_THROW(second_order_classify(pure, schmidt_frames(pure, 7)), ValidationError);
    EXPECT_NO_THROW(second_order_classify(pure, schmidt_frames(pure, 7), 7));
}

TEST(SecondOrder, SpectrumClassification) {
    RVector ev(4);
    ev << -1, -1e-10, 0, 1e-10;
    EXPECT_EQ(classify_spectrum(ev, 1e-9), Classification::local_max);
    ev << -1, 0, 0, 1;
    EXPECT_EQ(classify_spectrum(ev, 1e-9), Classification::saddle);
    ev << 0, 0, 0, 1;
    EXPECT_EQ(classify_spectrum(ev, 1e-9), Classification::local_min);
    ev << 0, 1e-12, 0, 0;
    EXPECT_EQ(classify_spectrum(ev, 1e-9), Classification::indeterminate);
}

TEST(Mirror, CurveAndMinimum) {
    std::vector<double> grid;
    for (int k = 0; k <= 100; ++k) grid.push_back(k / 100.0);
    grid.push_back(1.0 / 3.0);
    auto curve = mirror_family_curve(grid);
    double lowest = 2.0, arg = -1.0;
    for (auto [a, c] : curve) {
        EXPECT_NEAR(c, 2.0 / 3.0 + 0.75 * (a - 1.0 / 3.0) * (a - 1.0 / 3.0), 1e-12);
        if (c < lowest) lowest = c, arg = a;
    }
    EXPECT_NEAR(arg, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(lowest, 2.0 / 3.0, 1e-15);
    EXPECT_THROW(mirror_family_curve({1.5}), ValidationError);
}
