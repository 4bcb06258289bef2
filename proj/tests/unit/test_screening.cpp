#include "problems.hpp"

#include <cdsolve/screening.hpp>
#include <cdsolve/solve.hpp>

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace cdsolve;
using oracle::Mat;
using oracle::Vec;

namespace {

bool contains(const std::vector<index_t>& v, index_t i) { return std::find(v.begin(), v.end(), i) != v.end(); }

SolveOptions screening_on(Algorithm algo = Algorithm::Pdcd)
{
    SolveOptions o;
    o.algo = algo;
    o.screening = true;
    o.screening_period = 1;
    o.tolerance = 1e-10;
    o.max_iter = 100000;
    o.max_time = 10.;
    return o;
}

}  // namespace

TEST_SUITE("screening")
{
    TEST_CASE("dual center is rescaled into the dual domain")
    {
        const Problem pb = build_problem(testprob::lasso(Mat::Identity(2, 2), Vec::Unit(2, 0), 0.9));
        const std::vector<double> x{0., 0.};
        const auto c = dual_scaling_center(x, pb);
        // gradient of 1/2 |x - b|^2 at 0 is -b, and |A^T b|_inf / lambda = 1 / 0.9
        CHECK(c.scale == doctest::Approx(1. / 0.9));
        CHECK(c.zeta[0] == doctest::Approx(-0.9));
        CHECK(c.zeta[1] == 0.);
    }

    TEST_CASE("an irrelevant feature is screened")
    {
        const Problem pb = build_problem(testprob::lasso(Mat::Identity(2, 2), Vec::Unit(2, 0), 0.9));
        for (auto algo : {Algorithm::Pdcd, Algorithm::SmartCd}) {
            const auto res = solve(pb, screening_on(algo));
            CHECK(contains(res.screened_blocks, 1));
            CHECK_FALSE(contains(res.screened_blocks, 0));
            CHECK(res.x[0] == doctest::Approx(0.1));
            CHECK(res.x[1] == 0.);
        }
    }

    TEST_CASE("every feature is screened above the null threshold")
    {
        std::mt19937_64 rng(41);
        const Mat A = oracle::random_gaussian(12, 8, rng);
        const Vec b = oracle::random_gaussian(12, 1, rng);
        const double lmax = (A.transpose() * b).cwiseAbs().maxCoeff();
        for (double factor : {1.01, 2.}) {
            const Problem pb = build_problem(testprob::lasso(A, b, factor * lmax));
            const auto res = solve(pb, screening_on());
            CHECK(res.screened == 8);
            CHECK(res.status == Status::Converged);
            for (double v : res.x) CHECK(v == 0.);
        }
        const Problem zero_b = build_problem(testprob::lasso(A, Vec::Zero(12), 0.1));
        CHECK(solve(zero_b, screening_on()).screened == 8);
    }

    TEST_CASE("screened coordinates are zero at the optimum")
    {
        std::mt19937_64 rng(42);
        for (int trial = 0; trial < 20; ++trial) {
            const Mat A = oracle::random_gaussian(15, 25, rng);
            const Vec b = oracle::random_gaussian(15, 1, rng);
            const double lambda = 0.4 * (A.transpose() * b).cwiseAbs().maxCoeff();
            const Problem pb = build_problem(testprob::lasso(A, b, lambda));
            auto plain = screening_on();
            plain.screening = false;
            const auto ref = solve(pb, plain);
            const auto res = solve(pb, screening_on());
            for (index_t i : res.screened_blocks) CHECK(std::abs(ref.x[i]) < 1e-8);
        }
    }

    TEST_CASE("duality gap with a quadratic term")
    {
        std::mt19937_64 rng(43);
        const Mat A = oracle::random_gaussian(6, 4, rng);
        const Vec b = oracle::random_gaussian(6, 1, rng);
        const Mat G = oracle::random_gaussian(4, 4, rng);
        const Mat Q = G.transpose() * G + Mat::Identity(4, 4);
        const double lambda = 0.7;
        auto in = testprob::lasso(A, b, lambda);
        in.Q = testprob::dense_input(Q);
        const Problem pb = build_problem(in);

        const Vec x = oracle::random_gaussian(4, 1, rng);
        const auto center = dual_scaling_center(oracle::to_std(x), pb);
        const double gap = gap_value(oracle::to_std(x), center, pb);

        const Vec r = A * x - b;
        const double primal = 0.5 * x.dot(Q * x) + 0.5 * r.squaredNorm() + lambda * x.cwiseAbs().sum();
        const Vec zeta = oracle::to_vec(center.zeta);
        const Vec omega = oracle::to_vec(center.omega);
        // (1/2 |. - b|^2)^*(z) = 1/2 |z|^2 + b^T z
        const double dual = -(0.5 * zeta.squaredNorm() + b.dot(zeta)) - 0.5 * omega.dot(Q.ldlt().solve(omega));
        CHECK((A.transpose() * zeta + omega).cwiseAbs().maxCoeff() <= lambda * (1. + 1e-12));
        CHECK(gap == doctest::Approx(primal - dual).epsilon(1e-10));
        CHECK(gap >= 0.);
    }

    TEST_CASE("polar support is a gauge")
    {
        std::mt19937_64 rng(44);
        std::normal_distribution<double> nd;
        for (auto kind : {PolarKind::DualLinf, PolarKind::DualL2}) {
            for (int t = 0; t < 100; ++t) {
                std::vector<double> p(3, 0.), u(3), v(3), w(3), su(3);
                for (int k = 0; k < 3; ++k) {
                    u[k] = nd(rng);
                    v[k] = nd(rng);
                    w[k] = u[k] + v[k];
                }
                const double a = std::abs(nd(rng));
                for (int k = 0; k < 3; ++k) su[k] = a * u[k];
                CHECK(polar_support(kind, p, su) == doctest::Approx(a * polar_support(kind, p, u)));
                CHECK(polar_support(kind, p, w) <= polar_support(kind, p, u) + polar_support(kind, p, v) + 1e-12);
            }
        }
        const std::vector<double> p{0., 0.}, u{0.3, -0.4};
        CHECK(polar_support(PolarKind::DualLinf, p, u) == doctest::Approx(0.4));
        CHECK(polar_support(PolarKind::DualL2, p, u) == doctest::Approx(0.5));
        CHECK(polar_ball_test(PolarKind::DualL2, p, u, 0.49));
        CHECK_FALSE(polar_ball_test(PolarKind::DualL2, p, u, 0.5));
    }

    TEST_CASE("screening is disabled with a warning when h is present")
    {
        std::mt19937_64 rng(45);
        const Mat F = oracle::random_gaussian(5, 3, rng);
        auto in = testprob::equality_qp(F, Vec::Ones(5), Mat::Ones(1, 3), Vec::Ones(1));
        in.g.assign(3, "abs");
        const Problem pb = build_problem(in);
        auto o = screening_on();
        o.max_iter = 3;
        const auto res = solve(pb, o);
        CHECK(res.screened == 0);
        REQUIRE(res.warnings.size() == 1);
        CHECK(res.warnings[0].find("screening") != std::string::npos);
    }
}
