#include "problems.hpp"

#include <cdsolve/problem.hpp>

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace cdsolve;

namespace {

ProblemInputs small_lasso()
{
    ProblemInputs in;
    in.N = 3;
    in.f = {"square", "square"};
    in.Af = MatrixInput::from_dense(2, 3, {1., 0., 2., 0., 1., -1.});
    in.bf = std::vector<double>{1., 2.};
    in.g.assign(3, "abs");
    in.cg = std::vector<double>{0.1, 0.1, 0.1};
    return in;
}

ProblemErrorKind error_kind(const ProblemInputs& in)
{
    try {
        build_problem(in);
    } catch (const ProblemError& e) {
        return e.kind();
    }
    FAIL("build_problem accepted invalid input");
    return ProblemErrorKind::InvalidValue;
}

ProblemInputs with_h(index_t N, index_t rows, std::vector<double> dense_ah)
{
    ProblemInputs in;
    in.N = N;
    in.h.assign(rows, "eq_const");
    in.Ah = MatrixInput::from_dense(rows, N, std::move(dense_ah));
    return in;
}

}  // namespace

TEST_SUITE("model")
{
    TEST_CASE("valid lasso without h")
    {
        const Problem pb = build_problem(small_lasso());
        CHECK(pb.N == 3);
        CHECK(pb.num_blocks() == 3);
        CHECK(pb.has_f());
        CHECK(pb.has_g());
        CHECK_FALSE(pb.has_h());
        CHECK_FALSE(pb.has_Q());
        CHECK(pb.cf == std::vector<double>{1., 1.});
        CHECK(pb.Dg == std::vector<double>{1., 1., 1.});
        CHECK(pb.dup.total == 0);
        CHECK(pb.warnings.empty());
    }

    TEST_CASE("each error kind is reported")
    {
        auto in = small_lasso();
        in.bf = std::vector<double>{1.};
        CHECK(error_kind(in) == ProblemErrorKind::DimensionMismatch);

        in = small_lasso();
        in.g[1] = "sqare";
        CHECK(error_kind(in) == ProblemErrorKind::UnknownAtom);

        in = small_lasso();
        in.cg = std::vector<double>{0.1, -0.1, 0.1};
        CHECK(error_kind(in) == ProblemErrorKind::NonpositiveWeight);

        in = small_lasso();
        in.blocks = std::vector<index_t>{0, 2, 1, 3};
        CHECK(error_kind(in) == ProblemErrorKind::InvalidBlocks);

        in = small_lasso();
        in.bf = std::vector<double>{1., NAN};
        CHECK(error_kind(in) == ProblemErrorKind::InvalidValue);

        in = small_lasso();
        in.blocks = std::vector<index_t>{0, 2, 3};
        in.g = {"norm2", "abs"};
        in.cg.reset();
        in.Dg = std::vector<double>{1., 2., 1.};
        CHECK(error_kind(in) == ProblemErrorKind::NonDiagonalDg);

        in = small_lasso();
        in.f.clear();
        CHECK(error_kind(in) == ProblemErrorKind::DimensionMismatch);
    }

    TEST_CASE("unknown atom message suggests the nearest name")
    {
        auto in = small_lasso();
        in.g[0] = "sqare";
        try {
            build_problem(in);
            FAIL("expected an error");
        } catch (const ProblemError& e) {
            CHECK(std::string(e.what()).find("square") != std::string::npos);
        }
    }

    TEST_CASE("block Dg given per coordinate or per block")
    {
        auto in = small_lasso();
        in.blocks = std::vector<index_t>{0, 2, 3};
        in.g = {"norm2", "abs"};
        in.cg.reset();
        in.Dg = std::vector<double>{3., 3., 1.};
        CHECK(build_problem(in).Dg == std::vector<double>{3., 1.});
        in.Dg = std::vector<double>{3., 1.};
        CHECK(build_problem(in).Dg == std::vector<double>{3., 1.});
    }

    TEST_CASE("duplication index of a single coupling row")
    {
        const Problem pb = build_problem(with_h(2, 1, {1., 1.}));
        const auto& d = pb.dup;
        CHECK(d.total == 2);
        CHECK(d.m == std::vector<index_t>{2});
        CHECK(std::vector<index_t>(d.blocks_of(0).begin(), d.blocks_of(0).end()) == std::vector<index_t>{0});
        CHECK(std::vector<index_t>(d.blocks_of(1).begin(), d.blocks_of(1).end()) == std::vector<index_t>{0});
        CHECK(d.dual_vars_to_update(0) == std::vector<index_t>{0});
        CHECK(d.dual_vars_to_update(1) == std::vector<index_t>{1});
    }

    TEST_CASE("duplication index of a diagonal coupling")
    {
        const Problem pb = build_problem(with_h(2, 2, {1., 0., 0., 2.}));
        CHECK(pb.dup.total == 2);
        CHECK(pb.dup.m == std::vector<index_t>{1, 1});
        CHECK(pb.dup.blocks_of(0)[0] == 0);
        CHECK(pb.dup.blocks_of(1)[0] == 1);
    }

    TEST_CASE("a zero column owns no dual copies")
    {
        const Problem pb = build_problem(with_h(2, 1, {1., 0.}));
        CHECK(pb.dup.total == 1);
        CHECK(pb.dup.blocks_of(1).empty());
        CHECK(pb.dup.dual_vars_to_update(1).empty());
    }

    TEST_CASE("explicit zeros are structural nonzeros")
    {
        SparseColMatrix ah(1, 2, {0, 1, 2}, {0, 0}, {1., 0.});
        ProblemInputs in;
        in.N = 2;
        in.h = {"eq_const"};
        in.Ah = MatrixInput::from_sparse(ah);
        const Problem pb = build_problem(in);
        CHECK(pb.dup.total == 2);
        CHECK(pb.dup.m == std::vector<index_t>{2});
    }

    TEST_CASE("duplication index invariants on random structures")
    {
        std::mt19937_64 rng(7);
        for (int trial = 0; trial < 30; ++trial) {
            const index_t N = 5 + trial % 20, rows = 3 + trial % 11;
            const auto Ah = testprob::random_sparse(rows, N, (N * rows) / 4 + 1, rng);
            const BlockStructure blocks(testprob::random_blocks(N, 3, rng));
            const BlockStructure blocks_h(testprob::random_blocks(rows, 3, rng));
            const auto d = build_duplication_index(Ah, blocks, blocks_h);

            // Sum of m_l M_l is the length of y, and J and I are mutually inverse.
            index_t expected = 0;
            for (index_t l = 0; l < blocks_h.count(); ++l) expected += d.m[l] * blocks_h.size(l);
            CHECK(d.total == expected);
            for (index_t i = 0; i < blocks.count(); ++i) {
                index_t owned = 0;
                for (index_t l : d.blocks_of(i)) {
                    auto I = d.primal_blocks_of(l);
                    CHECK(std::find(I.begin(), I.end(), i) != I.end());
                    owned += blocks_h.size(l);
                }
                CHECK(d.dual_vars_to_update(i).size() == owned);
            }
            for (index_t l = 0; l < blocks_h.count(); ++l) {
                CHECK(d.primal_blocks_of(l).size() == d.m[l]);
                for (index_t i : d.primal_blocks_of(l)) {
                    auto J = d.blocks_of(i);
                    CHECK(std::find(J.begin(), J.end(), l) != J.end());
                }
            }
            // Ownership ranges tile [0, total).
            std::vector<int> seen(d.total, 0);
            for (index_t i = 0; i < blocks.count(); ++i)
                for (index_t k : d.dual_vars_to_update(i)) ++seen[k];
            CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));

            // (l, i) is present exactly when Ah has a stored entry in rows of l and columns of i.
            const auto inv_h = blocks_h.inverse();
            for (index_t i = 0; i < blocks.count(); ++i) {
                std::vector<char> touches(blocks_h.count(), 0);
                for (auto e : column_block(Ah, blocks, i, inv_h)) touches[e.row_block] = 1;
                auto J = d.blocks_of(i);
                for (index_t l = 0; l < blocks_h.count(); ++l)
                    CHECK((std::find(J.begin(), J.end(), l) != J.end()) == (touches[l] != 0));
            }
        }
    }

    TEST_CASE("column block iteration")
    {
        const auto m = SparseColMatrix::from_dense(3, 3, std::vector<double>{1., 0., 2., 0., 3., 0., 4., 0., 5.});
        const BlockStructure cols({0, 2, 3});
        const BlockStructure rows({0, 1, 3});
        const auto inv = rows.inverse();
        std::vector<BlockEntry> got;
        for (auto e : column_block(m, cols, 0, inv)) got.push_back(e);
        REQUIRE(got.size() == 3);
        CHECK((got[0].row == 0 && got[0].col == 0 && got[0].value == 1. && got[0].row_block == 0));
        CHECK((got[1].row == 2 && got[1].col == 0 && got[1].value == 4. && got[1].row_block == 1));
        CHECK((got[2].row == 1 && got[2].col == 1 && got[2].value == 3. && got[2].row_block == 1));
        CHECK(column_block(m, cols, 1, inv).nnz() == 2);

        // empty leading column is skipped
        const auto z = SparseColMatrix::from_dense(2, 2, std::vector<double>{0., 1., 0., 0.});
        const BlockStructure one({0, 2});
        const auto zi = BlockStructure::scalar(2).inverse();
        auto it = column_block(z, one, 0, zi).begin();
        CHECK((*it).col == 1);
    }

    TEST_CASE("sparse round trips")
    {
        std::mt19937_64 rng(3);
        for (int trial = 0; trial < 20; ++trial) {
            const auto m = testprob::random_sparse(7, 5, 12, rng);
            m.validate();
            const auto d = m.to_dense();
            const auto back = SparseColMatrix::from_dense(7, 5, d);
            CHECK(back.to_dense() == d);
            const auto tt = m.transpose().transpose();
            CHECK(tt.to_dense() == d);
            CHECK(m.transpose().rows() == 5);
        }
    }

    TEST_CASE("triplets with duplicates are summed")
    {
        const auto m = SparseColMatrix::from_triplets(2, 2, {{0, 1, 1.}, {0, 1, 2.5}, {1, 0, -1.}});
        CHECK(m.coeff(0, 1) == 3.5);
        CHECK(m.coeff(1, 0) == -1.);
        CHECK(m.coeff(0, 0) == 0.);
        CHECK(m.nnz() == 2);
    }

    TEST_CASE("block structure")
    {
        const BlockStructure b({0, 1, 4, 6});
        CHECK(b.count() == 3);
        CHECK(b.total() == 6);
        CHECK(b.max_size() == 3);
        CHECK(b.inverse() == std::vector<index_t>{0, 1, 1, 1, 2, 2});
        CHECK_THROWS(BlockStructure({1, 2}));
        CHECK_THROWS(BlockStructure({0, 2, 2}));
    }

    TEST_CASE("asymmetric Q is symmetrized with a warning")
    {
        auto in = small_lasso();
        in.Q = MatrixInput::from_dense(3, 3, {2., 1., 0., 0., 2., 0., 0., 0., 1.});
        const Problem pb = build_problem(in);
        REQUIRE(pb.Q);
        CHECK(pb.Q->coeff(0, 1) == doctest::Approx(0.5));
        CHECK(pb.Q->coeff(1, 0) == doctest::Approx(0.5));
        CHECK(pb.warnings.size() == 1);

        in.Q = MatrixInput::from_dense(3, 3, {2., 1., 0., 1., 2., 0., 0., 0., 1.});
        CHECK(build_problem(in).warnings.empty());
    }

    TEST_CASE("initial points are checked and copied")
    {
        auto in = small_lasso();
        in.x_init = std::vector<double>{1., 2., 3.};
        CHECK(build_problem(in).x_init == std::vector<double>{1., 2., 3.});
        in.x_init = std::vector<double>{1., 2.};
        CHECK(error_kind(in) == ProblemErrorKind::DimensionMismatch);
    }
}
