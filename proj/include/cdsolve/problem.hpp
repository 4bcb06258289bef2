#pragma once

#include <cdsolve/atoms.hpp>
#include <cdsolve/sparse.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdsolve {

enum class ProblemErrorKind {
    DimensionMismatch,
    NonDiagonalDg,
    UnknownAtom,
    NonpositiveWeight,
    InvalidBlocks,
    InvalidValue,
};

class ProblemError : public std::invalid_argument {
public:
    ProblemError(ProblemErrorKind kind, const std::string& what)
        : std::invalid_argument(what), kind_(kind)
    {
    }
    ProblemErrorKind kind() const { return kind_; }

private:
    ProblemErrorKind kind_;
};

/*
 * A matrix as handed over by a caller: either already sparse, or dense
 * row-major. Both are converted to compressed sparse column storage.
 */
struct MatrixInput {
    index_t rows = 0;
    index_t cols = 0;
    std::optional<SparseColMatrix> sparse;
    std::vector<double> dense;  // row-major, used when sparse is empty

    static MatrixInput from_sparse(SparseColMatrix m);
    static MatrixInput from_dense(index_t rows, index_t cols, std::vector<double> row_major);
    SparseColMatrix to_sparse() const;
};

/*
 * Raw arguments of the problem
 *
 *   min_x 1/2 x^T Q x + sum_j cf_j f_j(Af_j x - bf_j)
 *                     + sum_i cg_i g_i(Dg_i x^(i) - bg_i)
 *                     + sum_l ch_l h_l(Ah_l x - bh_l)
 *
 * Omitted pieces take their defaults: scalar blocks, unit weights, zero
 * offsets, Dg = identity, zero initial points. An empty atom list means
 * the corresponding function is absent.
 */
struct ProblemInputs {
    index_t N = 0;
    std::optional<std::vector<index_t>> blocks;
    std::optional<std::vector<index_t>> blocks_f;
    std::optional<std::vector<index_t>> blocks_h;
    std::vector<std::string> f, g, h;
    std::optional<std::vector<double>> cf, cg, ch;
    std::optional<MatrixInput> Af, Ah, Q;
    std::optional<std::vector<double>> bf, bg, bh;
    // Either one value per block or one per coordinate (constant within a block).
    std::optional<std::vector<double>> Dg;
    std::optional<std::vector<double>> x_init;
    std::optional<std::vector<double>> y_init;
};

/*
 * Index tables for the duplicated dual variables.
 *
 * For every primal block i, J(i) lists the h-blocks l whose rows meet the
 * columns of block i in a structural nonzero. For each such pair (l, i) the
 * duplicated vector y holds a full copy of the M^h_l dual coordinates of
 * block l. Segments are stored primal-block-major, so
 * dual_vars_to_update(i) is the contiguous range
 * [update_ptr[i], update_ptr[i + 1]).
 */
struct DualDuplicationIndex {
    // primal block -> touched h-blocks, CSR-like
    std::vector<index_t> J_ptr;
    std::vector<index_t> J;
    // offset into y of the segment of pair (J[k], i), parallel to J
    std::vector<index_t> segment;
    // h-block -> touching primal blocks, CSR-like, with the matching segment offsets
    std::vector<index_t> I_ptr;
    std::vector<index_t> I;
    std::vector<index_t> I_segment;
    std::vector<index_t> m;  // m_l = |I(l)|
    std::vector<index_t> update_ptr;
    index_t total = 0;

    std::span<const index_t> blocks_of(index_t i) const
    {
        return {J.data() + J_ptr[i], J_ptr[i + 1] - J_ptr[i]};
    }
    std::span<const index_t> segments_of(index_t i) const
    {
        return {segment.data() + J_ptr[i], J_ptr[i + 1] - J_ptr[i]};
    }
    std::span<const index_t> primal_blocks_of(index_t l) const
    {
        return {I.data() + I_ptr[l], I_ptr[l + 1] - I_ptr[l]};
    }
    std::span<const index_t> primal_segments_of(index_t l) const
    {
        return {I_segment.data() + I_ptr[l], I_ptr[l + 1] - I_ptr[l]};
    }
    // Flat indices of y owned by primal block i.
    std::vector<index_t> dual_vars_to_update(index_t i) const;
};

DualDuplicationIndex build_duplication_index(const SparseColMatrix& Ah, const BlockStructure& blocks,
                                             const BlockStructure& blocks_h);

struct Problem {
    index_t N = 0;
    BlockStructure blocks;
    BlockStructure blocks_f;
    BlockStructure blocks_h;

    std::vector<const Atom*> f, g, h;
    std::vector<double> cf, cg, ch;
    std::vector<double> bf, bg, bh;
    std::vector<double> Dg;  // one scalar per primal block
    SparseColMatrix Af;      // sum_j M^f_j x N
    SparseColMatrix Ah;      // sum_l M^h_l x N
    std::optional<SparseColMatrix> Q;

    std::vector<double> x_init;
    std::vector<double> y_init;  // duplicated layout, length dup.total

    std::vector<index_t> inv_blocks;
    std::vector<index_t> inv_blocks_f;
    std::vector<index_t> inv_blocks_h;
    DualDuplicationIndex dup;

    std::vector<std::string> warnings;

    index_t num_blocks() const { return blocks.count(); }
    bool has_f() const { return !f.empty(); }
    bool has_g() const { return !g.empty(); }
    bool has_h() const { return !h.empty(); }
    bool has_Q() const { return Q.has_value(); }
    index_t rows_f() const { return blocks_f.total(); }
    index_t rows_h() const { return blocks_h.total(); }
};

Problem build_problem(const ProblemInputs& in);

}  // namespace cdsolve
