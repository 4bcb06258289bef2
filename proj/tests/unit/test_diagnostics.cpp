#include "problems.hpp"

#include <cdsolve/diagnostics.hpp>
#include <cdsolve/screening.hpp>
#include <cdsolve/solve.hpp>

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <random>
#include <sstream>

using namespace cdsolve;
using oracle::Mat;
using oracle::Vec;

namespace {

Problem coupling(std::string atom, std::vector<double> ah, std::vector<double> bh, index_t rows)
{
    ProblemInputs in;
    in.N = ah.size() / rows;
    in.h.assign(rows, atom);
    in.Ah = MatrixInput::from_dense(rows, in.N, std::move(ah));
    in.bh = std::move(bh);
    return build_problem(in);
}

}  // namespace

TEST_SUITE("diagnostics")
{
    TEST_CASE("objective of a small lasso")
    {
        Mat A(2, 2);
        A << 1., 2., 0., 1.;
        const Problem pb = build_problem(testprob::lasso(A, Vec::Ones(2), 0.5));
        // 1/2 ((3 - 1)^2 + (1 - 1)^2) + 0.5 * 2
        CHECK(primal_objective(std::vector<double>{1., 1.}, pb) == doctest::Approx(3.));
        CHECK(primal_objective(std::vector<double>{0., 0.}, pb) == doctest::Approx(1.));
    }

    TEST_CASE("violated indicators give an infinite objective")
    {
        auto in = testprob::lasso(Mat::Identity(2, 2), Vec::Zero(2), 1.);
        in.g = {"nonneg", "box_zero_one"};
        in.cg.reset();
        const Problem pb = build_problem(in);
        CHECK(primal_objective(std::vector<double>{1., 0.5}, pb) == doctest::Approx(0.625));
        CHECK(primal_objective(std::vector<double>{-0.1, 0.5}, pb) == kInf);
        CHECK(primal_objective(std::vector<double>{0., 1.5}, pb) == kInf);
    }

    TEST_CASE("infeasibility is the distance to the constraint set")
    {
        CHECK(infeasibility(std::vector<double>{1., 1.}, coupling("eq_const", {1., 1.}, {1.}, 1)) == doctest::Approx(1.));
        CHECK(infeasibility(std::vector<double>{0.5, 0.5}, coupling("eq_const", {1., 1.}, {1.}, 1)) == 0.);
        const Problem pb = coupling("nonpos", {1., 0., 0., 1.}, {0., 2.}, 2);
        // Ah x - bh = (2, -1)
        CHECK(infeasibility(std::vector<double>{2., 1.}, pb) == doctest::Approx(2.));
        CHECK(infeasibility(std::vector<double>{-2., 1.}, pb) == 0.);
        const Problem nh = build_problem(testprob::lasso(Mat::Identity(2, 2), Vec::Zero(2), 1.));
        CHECK(infeasibility(std::vector<double>{5., 5.}, nh) == 0.);
    }

    TEST_CASE("smoothed gap vanishes at a KKT pair")
    {
        std::mt19937_64 rng(51);
        const Mat F = oracle::random_gaussian(9, 5, rng);
        const Vec g = oracle::random_gaussian(9, 1, rng);
        const Mat Ah = oracle::random_gaussian(2, 5, rng);
        const Vec bh = oracle::random_gaussian(2, 1, rng);
        const Problem pb = build_problem(testprob::equality_qp(F, g, Ah, bh));
        const Vec xs = oracle::equality_qp(F.transpose() * F, -F.transpose() * g, Ah, bh);
        // Ah^T y = -F^T (F x - g)
        const Vec ys = (Ah * Ah.transpose()).ldlt().solve(-Ah * (F.transpose() * (F * xs - g)));
        const auto rep = evaluate_gap(oracle::to_std(xs), oracle::to_std(ys), pb);
        CHECK(std::abs(rep.gap) < 1e-9);
        CHECK(rep.beta < 1e-10);
        CHECK(rep.gamma < 1e-10);
        CHECK(rep.infeasibility < 1e-10);

        // away from the optimum the gap is positive
        const Vec xo = xs + Vec::Constant(5, 0.1);
        CHECK(evaluate_gap(oracle::to_std(xo), oracle::to_std(ys), pb).gap > 0.);
    }

    TEST_CASE("gap without h agrees with the screening gap")
    {
        std::mt19937_64 rng(52);
        const Mat A = oracle::random_gaussian(7, 5, rng);
        const Vec b = oracle::random_gaussian(7, 1, rng);
        const Problem pb = build_problem(testprob::lasso(A, b, 0.3));
        for (int t = 0; t < 20; ++t) {
            const auto x = oracle::to_std(oracle::random_gaussian(5, 1, rng));
            const auto rep = evaluate_gap(x, {}, pb);
            const double ref = gap_value(x, dual_scaling_center(x, pb), pb);
            CHECK(rep.gap == doctest::Approx(ref).epsilon(1e-12));
            CHECK(rep.gap >= 0.);
            CHECK(rep.beta == 0.);
            CHECK(rep.gamma < 1e-12);
        }
    }

    TEST_CASE("pseudo-inverse quadratic form")
    {
        std::mt19937_64 rng(53);
        const Mat G = oracle::random_gaussian(3, 6, rng);
        const Mat Q = G.transpose() * G;  // rank 3
        auto in = testprob::lasso(Mat::Identity(6, 6), Vec::Zero(6), 1.);
        in.Q = testprob::dense_input(Q);
        const Problem pb = build_problem(in);
        const Mat pinv = Q.completeOrthogonalDecomposition().pseudoInverse();
        for (int t = 0; t < 10; ++t) {
            const Vec omega = Q * oracle::random_gaussian(6, 1, rng);
            const double ref = 0.5 * omega.dot(pinv * omega);
            CHECK(half_pinv_quadratic(oracle::to_std(omega), pb) == doctest::Approx(ref).epsilon(1e-8));
        }

        const Problem noq = build_problem(testprob::lasso(Mat::Identity(2, 2), Vec::Zero(2), 1.));
        CHECK(half_pinv_quadratic(std::vector<double>{0., 0.}, noq) == 0.);
        CHECK(half_pinv_quadratic(std::vector<double>{1., 0.}, noq) == kInf);
    }

    TEST_CASE("trace records and serialization")
    {
        std::mt19937_64 rng(54);
        const Mat A = oracle::random_gaussian(10, 6, rng);
        const Vec b = oracle::random_gaussian(10, 1, rng);
        const Problem pb = build_problem(testprob::lasso(A, b, 0.2));
        SolveOptions o;
        o.max_iter = 40;
        o.print_period = 5;
        o.tolerance = 0.;
        const auto res = solve(pb, o);
        const auto& recs = res.trace.records;
        REQUIRE(recs.size() == 9);
        for (std::size_t k = 1; k < recs.size(); ++k) {
            CHECK(recs[k].epoch > recs[k - 1].epoch);
            CHECK(recs[k].elapsed >= recs[k - 1].elapsed);
            CHECK(recs[k].gap >= 0.);
            CHECK(recs[k].beta >= 0.);
            CHECK(recs[k].gamma >= 0.);
        }

        std::ostringstream csv;
        res.trace.write_csv(csv);
        std::istringstream in(csv.str());
        std::string line;
        std::getline(in, line);
        CHECK(line == Trace::kColumns);
        int rows = 0;
        while (std::getline(in, line)) {
            CHECK(std::count(line.begin(), line.end(), ',') == 7);
            ++rows;
        }
        CHECK(rows == 9);

        std::ostringstream js;
        res.trace.write_json(js);
        const auto parsed = nlohmann::json::parse(js.str()).at("records");
        REQUIRE(parsed.is_array());
        CHECK(parsed.size() == 9);
        CHECK(parsed[8]["epoch"].get<double>() == 40.);
        CHECK(parsed[8]["objective"].get<double>() == doctest::Approx(recs[8].objective));
    }

    TEST_CASE("non-finite trace values become null in JSON")
    {
        Trace t;
        t.records.push_back({0., 0., kInf, kInf, 0., 0., 1., 0});
        std::ostringstream js;
        t.write_json(js);
        const auto parsed = nlohmann::json::parse(js.str()).at("records");
        CHECK(parsed[0]["objective"].is_null());
        CHECK(parsed[0]["infeasibility"].get<double>() == 1.);
    }
}
