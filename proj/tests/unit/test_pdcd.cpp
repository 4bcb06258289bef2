#include "problems.hpp"

#include <cdsolve/solve.hpp>

#include <doctest.h>

#include <cmath>
#include <random>

using namespace cdsolve;
using oracle::Mat;
using oracle::Vec;

namespace {

SolveOptions tight(Algorithm algo = Algorithm::Pdcd)
{
    SolveOptions o;
    o.algo = algo;
    o.tolerance = 1e-10;
    o.max_iter = 200000;
    o.max_time = 10.;
    return o;
}

// Largest violation of the Lasso optimality conditions at x.
double lasso_kkt(const Mat& A, const Vec& b, double lambda, const Vec& x)
{
    const Vec g = A.transpose() * (A * x - b);
    double v = 0.;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x[i] == 0.)
            v = std::max(v, std::abs(g[i]) - lambda);
        else
            v = std::max(v, std::abs(g[i] + lambda * (x[i] > 0 ? 1. : -1.)));
    }
    return v;
}

Problem single_coupling(std::optional<std::vector<double>> x_init = {})
{
    ProblemInputs in;
    in.N = 1;
    in.h = {"eq_const"};
    in.Ah = MatrixInput::from_dense(1, 1, {1.});
    in.x_init = std::move(x_init);
    return build_problem(in);
}

}  // namespace

TEST_SUITE("pdcd")
{
    TEST_CASE("coordinate Lipschitz constants")
    {
        ProblemInputs in;
        in.N = 2;
        in.f = {"square", "square"};
        in.cf = std::vector<double>{0.5, 2.};
        in.Af = MatrixInput::from_dense(2, 2, {1., 3., 2., 0.});
        in.Q = MatrixInput::from_dense(2, 2, {4., 1., 1., 5.});
        const auto beta = compute_beta(build_problem(in));
        // Q_ii + sum_j cf_j * 2 * a_ji^2
        CHECK(beta[0] == doctest::Approx(4. + 0.5 * 2. * 1. + 2. * 2. * 4.));
        CHECK(beta[1] == doctest::Approx(5. + 0.5 * 2. * 9.));
    }

    TEST_CASE("block Lipschitz constant is the top eigenvalue")
    {
        std::mt19937_64 rng(2);
        const Mat A = oracle::random_gaussian(6, 3, rng);
        auto in = testprob::lasso(A, Vec::Zero(6), 1.);
        in.blocks = std::vector<index_t>{0, 3};
        in.g = {"norm2"};
        in.cg.reset();
        const auto beta = compute_beta(build_problem(in));
        const double exact = oracle::max_eigenvalue(A.transpose() * A);
        CHECK(beta[0] >= exact * (1. - 1e-9));
        CHECK(beta[0] <= exact * 1.02);
    }

    TEST_CASE("step sizes")
    {
        const auto s = compute_step_sizes(single_coupling());
        CHECK(s.sigma[0] == doctest::Approx(1.));
        CHECK(s.tau[0] == doctest::Approx(0.95));

        const auto o = compute_step_sizes(single_coupling(), 0.95, std::vector<double>{2.});
        CHECK(o.tau[0] == doctest::Approx(0.475));

        std::mt19937_64 rng(4);
        const Mat A = oracle::random_gaussian(5, 4, rng);
        const Problem pb = build_problem(testprob::lasso(A, Vec::Zero(5), 1.));
        const auto l = compute_step_sizes(pb, 0.9);
        for (index_t i = 0; i < 4; ++i) CHECK(l.tau[i] == doctest::Approx(0.9 / A.col(i).squaredNorm()));
        CHECK(l.sigma.empty());
    }

    TEST_CASE("duplicated coupling shrinks the dual steps")
    {
        ProblemInputs in;
        in.N = 2;
        in.h = {"eq_const"};
        in.Ah = MatrixInput::from_dense(1, 2, {1., 1.});
        const auto s = compute_step_sizes(build_problem(in));
        // m = 2 copies and rho(A A^T) = 2
        CHECK(s.sigma[0] == doctest::Approx(0.25));
        const auto rho = dual_coupling_radius(build_problem(in), s.sigma);
        CHECK(rho[0] == doctest::Approx(0.5));
        CHECK(s.tau[0] == doctest::Approx(0.95 / 0.5));
    }

    TEST_CASE("lasso converges to a KKT point")
    {
        std::mt19937_64 rng(21);
        const Mat A = oracle::random_gaussian(20, 12, rng);
        const Vec b = oracle::random_gaussian(20, 1, rng);
        const double lambda = 0.3 * (A.transpose() * b).cwiseAbs().maxCoeff();
        const Problem pb = build_problem(testprob::lasso(A, b, lambda));
        const auto res = solve(pb, tight());
        CHECK(res.status == Status::Converged);
        CHECK(lasso_kkt(A, b, lambda, oracle::to_vec(res.x)) < 1e-6);
    }

    TEST_CASE("equality constrained least squares matches the KKT solve")
    {
        std::mt19937_64 rng(22);
        const Mat F = oracle::random_gaussian(10, 6, rng);
        const Vec g = oracle::random_gaussian(10, 1, rng);
        const Mat Ah = oracle::random_gaussian(2, 6, rng);
        const Vec bh = oracle::random_gaussian(2, 1, rng);
        const Problem pb = build_problem(testprob::equality_qp(F, g, Ah, bh));
        const Vec ref = oracle::equality_qp(F.transpose() * F, -F.transpose() * g, Ah, bh);
        for (auto algo : {Algorithm::Pdcd, Algorithm::SmartCd}) {
            const auto res = solve(pb, tight(algo));
            CHECK(res.status == Status::Converged);
            CHECK((oracle::to_vec(res.x) - ref).cwiseAbs().maxCoeff() < 1e-6);
            CHECK((Ah * oracle::to_vec(res.x) - bh).norm() < 1e-8);
        }
    }

    TEST_CASE("the optimum is a fixed point of the iteration")
    {
        std::mt19937_64 rng(23);
        const Mat F = oracle::random_gaussian(8, 4, rng);
        const Vec g = oracle::random_gaussian(8, 1, rng);
        const Mat Ah = oracle::random_gaussian(1, 4, rng);
        const Vec bh = oracle::random_gaussian(1, 1, rng);
        const Problem pb = build_problem(testprob::equality_qp(F, g, Ah, bh));
        const Vec xs = oracle::equality_qp(F.transpose() * F, -F.transpose() * g, Ah, bh);
        // multiplier from the stationarity condition F^T (F x - g) + Ah^T y = 0, scaled by cf = 1/2
        const Vec grad = F.transpose() * (F * xs - g);
        const double y = -grad.dot(Ah.row(0).transpose()) / Ah.row(0).squaredNorm();
        std::vector<double> ydup(pb.dup.total, y);
        SolverState st(pb, oracle::to_std(xs), ydup);
        const auto steps = compute_step_sizes(pb);
        PdcdWorkspace ws(pb);
        const auto x0 = st.x;
        for (index_t i = 0; i < pb.num_blocks(); ++i) pdcd_update_block(st, steps, i, pb, ws);
        CHECK(oracle::max_abs_diff(st.x, x0) < 1e-10);
        for (double v : st.y_dup) CHECK(v == doctest::Approx(y).epsilon(1e-8));
    }

    TEST_CASE("runs are deterministic for a fixed seed")
    {
        std::mt19937_64 rng(24);
        const Mat A = oracle::random_gaussian(15, 10, rng);
        const Vec b = oracle::random_gaussian(15, 1, rng);
        const Problem pb = build_problem(testprob::lasso(A, b, 0.5));
        auto o = tight();
        o.max_iter = 50;
        o.tolerance = 0.;
        o.seed = 99;
        CHECK(solve(pb, o).x == solve(pb, o).x);
        auto p = o;
        p.seed = 100;
        CHECK(solve(pb, o).x != solve(pb, p).x);
    }

    TEST_CASE("kink-weighted sampling law")
    {
        BlockSampler s(SamplingKind::KinkHalf, 2);
        s.set_kinks({1, 0});
        CHECK(s.probability(0) == doctest::Approx(0.25));
        CHECK(s.probability(1) == doctest::Approx(0.75));

        BlockSampler all(SamplingKind::KinkHalf, 4);
        all.set_kinks({1, 1, 1, 1});
        for (index_t i = 0; i < 4; ++i) CHECK(all.probability(i) == doctest::Approx(0.25));

        BlockSampler mixed(SamplingKind::KinkHalf, 4);
        mixed.set_kinks({1, 0, 0, 0});
        CHECK(mixed.probability(0) == doctest::Approx(1. / 8.));
        CHECK(mixed.probability(2) == doctest::Approx(1. / 8. + 1. / 6.));

        mixed.deactivate(3);
        CHECK(mixed.active_count() == 3);
        CHECK(mixed.probability(3) == 0.);
        double total = 0.;
        for (index_t i = 0; i < 4; ++i) total += mixed.probability(i);
        CHECK(total == doctest::Approx(1.));

        Rng rng(1);
        for (int t = 0; t < 1000; ++t) CHECK(mixed.sample(rng) != 3);
    }

    TEST_CASE("box constrained iterates stay feasible")
    {
        std::mt19937_64 rng(25);
        const Mat M = oracle::random_gaussian(5, 12, rng);
        Vec labels(12);
        for (int k = 0; k < 12; ++k) labels[k] = k % 2 ? 1. : -1.;
        const Problem pb = build_problem(testprob::svm_dual_intercept(M, labels, 1.));
        auto o = tight();
        o.max_iter = 30;
        const auto res = solve(pb, o);
        for (double v : res.x) CHECK((v >= 0. && v <= 1.));
    }

    TEST_CASE("overflowing iterates raise a solver error")
    {
        ProblemInputs in;
        in.N = 1;
        in.f = {"square"};
        in.Af = MatrixInput::from_dense(1, 1, {1e200});
        in.x_init = std::vector<double>{1e200};
        in.g = {"abs"};
        const Problem pb = build_problem(in);
        CHECK_THROWS_AS(run_pdcd(pb, tight()), SolverError);
        CHECK_THROWS_AS(run_accel(pb, tight(Algorithm::SmartCd)), SolverError);
    }

    TEST_CASE("trace and status")
    {
        const Problem pb = single_coupling(std::vector<double>{3.});
        auto o = tight();
        const auto res = solve(pb, o);
        CHECK(res.status == Status::Converged);
        CHECK(std::abs(res.x[0]) < 1e-9);
        REQUIRE(res.trace.records.size() >= 2);
        CHECK(res.trace.records.front().epoch == 0.);
        CHECK(res.trace.records.front().infeasibility == doctest::Approx(3.));

        o.max_iter = 1;
        o.tolerance = 0.;
        CHECK(solve(pb, o).status == Status::MaxIterations);
    }
}
