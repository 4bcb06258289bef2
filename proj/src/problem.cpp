#include <cdsolve/problem.hpp>

#include <algorithm>
#include <cmath>

namespace cdsolve {

namespace {

[[noreturn]] void fail(ProblemErrorKind kind, const std::string& msg) { throw ProblemError(kind, msg); }

std::string str(index_t v) { return std::to_string(v); }

BlockStructure make_blocks(const std::optional<std::vector<index_t>>& given, index_t total,
                           const char* name)
{
    if (!given) return BlockStructure::scalar(total);
    try {
        BlockStructure b(*given);
        if (b.total() != total)
            fail(ProblemErrorKind::DimensionMismatch, std::string(name) + " ends at " + str(b.total()) +
                                                          " but the dimension is " + str(total));
        return b;
    } catch (const ProblemError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        fail(ProblemErrorKind::InvalidBlocks, std::string(name) + ": " + e.what());
    }
}

std::vector<const Atom*> resolve_atoms(const std::vector<std::string>& names, const char* which)
{
    std::vector<const Atom*> out;
    out.reserve(names.size());
    for (std::size_t k = 0; k < names.size(); ++k) {
        const Atom* a = catalog_find(names[k]);
        if (!a)
            fail(ProblemErrorKind::UnknownAtom,
                 std::string(which) + "[" + str(k) + "]: unknown atom '" + names[k] + "' (did you mean '" +
                     std::string(nearest_atom_name(names[k])) + "'?)");
        out.push_back(a);
    }
    return out;
}

std::vector<double> weights(const std::optional<std::vector<double>>& given, index_t count,
                            const char* name)
{
    if (!given) return std::vector<double>(count, 1.);
    if (given->size() != count)
        fail(ProblemErrorKind::DimensionMismatch,
             std::string(name) + " has " + str(given->size()) + " entries, expected " + str(count));
    for (std::size_t k = 0; k < given->size(); ++k)
        if (!((*given)[k] > 0.) || !std::isfinite((*given)[k]))
            fail(ProblemErrorKind::NonpositiveWeight,
                 std::string(name) + "[" + str(k) + "] = " + std::to_string((*given)[k]) +
                     " is not a positive finite weight");
    return *given;
}

std::vector<double> offsets(const std::optional<std::vector<double>>& given, index_t len, const char* name)
{
    if (!given) return std::vector<double>(len, 0.);
    if (given->size() != len)
        fail(ProblemErrorKind::DimensionMismatch,
             std::string(name) + " has " + str(given->size()) + " entries, expected " + str(len));
    for (double v : *given)
        if (!std::isfinite(v)) fail(ProblemErrorKind::InvalidValue, std::string(name) + " has a non-finite entry");
    return *given;
}

SparseColMatrix matrix(const std::optional<MatrixInput>& given, index_t rows, index_t cols, const char* name)
{
    if (!given) return SparseColMatrix(rows, cols);
    SparseColMatrix m = given->to_sparse();
    if (m.rows() != rows || m.cols() != cols)
        fail(ProblemErrorKind::DimensionMismatch, std::string(name) + " is " + str(m.rows()) + "x" +
                                                      str(m.cols()) + ", expected " + str(rows) + "x" + str(cols));
    for (double v : m.values())
        if (!std::isfinite(v)) fail(ProblemErrorKind::InvalidValue, std::string(name) + " has a non-finite entry");
    return m;
}

// Row dimension of a matrix input, or 0 when absent.
index_t rows_of(const std::optional<MatrixInput>& m)
{
    if (!m) return 0;
    return m->sparse ? m->sparse->rows() : m->rows;
}

SparseColMatrix symmetrize(const SparseColMatrix& q)
{
    const SparseColMatrix qt = q.transpose();
    std::vector<Triplet> t;
    t.reserve(2 * q.nnz());
    for (const SparseColMatrix* m : {&q, &qt})
        for (index_t c = 0; c < m->cols(); ++c)
            for (index_t k = m->col_begin(c); k < m->col_end(c); ++k)
                t.push_back({m->row_idx()[k], c, 0.5 * m->values()[k]});
    return SparseColMatrix::from_triplets(q.rows(), q.cols(), std::move(t));
}

}  // namespace

MatrixInput MatrixInput::from_sparse(SparseColMatrix m)
{
    MatrixInput in;
    in.rows = m.rows();
    in.cols = m.cols();
    in.sparse = std::move(m);
    return in;
}

MatrixInput MatrixInput::from_dense(index_t rows, index_t cols, std::vector<double> row_major)
{
    MatrixInput in;
    in.rows = rows;
    in.cols = cols;
    in.dense = std::move(row_major);
    return in;
}

SparseColMatrix MatrixInput::to_sparse() const
{
    if (sparse) return *sparse;
    return SparseColMatrix::from_dense(rows, cols, dense);
}

std::vector<index_t> DualDuplicationIndex::dual_vars_to_update(index_t i) const
{
    std::vector<index_t> out;
    for (index_t k = update_ptr[i]; k < update_ptr[i + 1]; ++k) out.push_back(k);
    return out;
}

DualDuplicationIndex build_duplication_index(const SparseColMatrix& Ah, const BlockStructure& blocks,
                                             const BlockStructure& blocks_h)
{
    DualDuplicationIndex idx;
    const index_t n_blocks = blocks.count();
    const index_t n_hblocks = blocks_h.count();
    const std::vector<index_t> inv_h = blocks_h.inverse();

    idx.J_ptr.assign(n_blocks + 1, 0);
    idx.update_ptr.assign(n_blocks + 1, 0);
    std::vector<index_t> seen(n_hblocks, static_cast<index_t>(-1));
    for (index_t i = 0; i < n_blocks; ++i) {
        if (!Ah.empty()) {
            for (index_t c = blocks.begin(i); c < blocks.end(i); ++c) {
                for (index_t k = Ah.col_begin(c); k < Ah.col_end(c); ++k) {
                    const index_t l = inv_h[Ah.row_idx()[k]];
                    if (seen[l] == i) continue;
                    seen[l] = i;
                    idx.J.push_back(l);
                    idx.segment.push_back(idx.total);
                    idx.total += blocks_h.size(l);
                }
            }
        }
        idx.J_ptr[i + 1] = idx.J.size();
        idx.update_ptr[i + 1] = idx.total;
    }

    idx.m.assign(n_hblocks, 0);
    for (index_t l : idx.J) ++idx.m[l];
    idx.I_ptr.assign(n_hblocks + 1, 0);
    for (index_t l = 0; l < n_hblocks; ++l) idx.I_ptr[l + 1] = idx.I_ptr[l] + idx.m[l];
    idx.I.resize(idx.J.size());
    idx.I_segment.resize(idx.J.size());
    std::vector<index_t> next(idx.I_ptr.begin(), idx.I_ptr.end() - 1);
    for (index_t i = 0; i < n_blocks; ++i) {
        for (index_t k = idx.J_ptr[i]; k < idx.J_ptr[i + 1]; ++k) {
            const index_t dst = next[idx.J[k]]++;
            idx.I[dst] = i;
            idx.I_segment[dst] = idx.segment[k];
        }
    }
    return idx;
}

Problem build_problem(const ProblemInputs& in)
{
    Problem pb;
    pb.N = in.N;
    if (in.N == 0) fail(ProblemErrorKind::DimensionMismatch, "N must be positive");
    pb.blocks = make_blocks(in.blocks, in.N, "blocks");
    const index_t I = pb.blocks.count();

    pb.f = resolve_atoms(in.f, "f");
    pb.g = resolve_atoms(in.g, "g");
    pb.h = resolve_atoms(in.h, "h");

    // f part
    if (pb.f.empty() && in.Af && rows_of(in.Af) > 0)
        fail(ProblemErrorKind::DimensionMismatch, "Af given but f is absent");
    if (!pb.f.empty() && !in.Af) fail(ProblemErrorKind::DimensionMismatch, "f given without Af");
    const index_t Mf = pb.f.empty() ? 0 : rows_of(in.Af);
    pb.blocks_f = pb.f.empty() ? BlockStructure() : make_blocks(in.blocks_f, Mf, "blocks_f");
    if (pb.blocks_f.count() != pb.f.size())
        fail(ProblemErrorKind::DimensionMismatch, "blocks_f defines " + str(pb.blocks_f.count()) +
                                                      " blocks but f lists " + str(pb.f.size()) + " atoms");
    pb.Af = pb.f.empty() ? SparseColMatrix(0, in.N) : matrix(in.Af, Mf, in.N, "Af");
    pb.cf = weights(in.cf, pb.f.size(), "cf");
    pb.bf = offsets(in.bf, Mf, "bf");

    // g part; an absent g is the zero function on every block
    if (pb.g.empty()) {
        if (in.cg || in.bg || in.Dg)
            fail(ProblemErrorKind::DimensionMismatch, "cg, bg or Dg given but g is absent");
        pb.g.assign(I, &catalog_lookup("zero"));
    }
    if (pb.g.size() != I)
        fail(ProblemErrorKind::DimensionMismatch,
             "g lists " + str(pb.g.size()) + " atoms but there are " + str(I) + " primal blocks");
    pb.cg = weights(in.cg, I, "cg");
    pb.bg = offsets(in.bg, in.N, "bg");
    pb.Dg.assign(I, 1.);
    if (in.Dg) {
        const auto& d = *in.Dg;
        if (d.size() == in.N) {
            for (index_t i = 0; i < I; ++i) {
                const double v = d[pb.blocks.begin(i)];
                for (index_t e = pb.blocks.begin(i); e < pb.blocks.end(i); ++e)
                    if (d[e] != v)
                        fail(ProblemErrorKind::NonDiagonalDg,
                             "Dg is not a multiple of the identity on block " + str(i) + " (entries " +
                                 std::to_string(v) + " and " + std::to_string(d[e]) + ")");
                pb.Dg[i] = v;
            }
        } else if (d.size() == I) {
            pb.Dg = d;
        } else {
            fail(ProblemErrorKind::DimensionMismatch, "Dg has " + str(d.size()) + " entries, expected " +
                                                          str(I) + " (per block) or " + str(in.N) +
                                                          " (per coordinate)");
        }
        for (index_t i = 0; i < I; ++i)
            if (pb.Dg[i] == 0. || !std::isfinite(pb.Dg[i]))
                fail(ProblemErrorKind::NonDiagonalDg, "Dg entry of block " + str(i) + " must be nonzero and finite");
    }

    // h part
    if (pb.h.empty() && in.Ah && rows_of(in.Ah) > 0)
        fail(ProblemErrorKind::DimensionMismatch, "Ah given but h is absent");
    if (!pb.h.empty() && !in.Ah) fail(ProblemErrorKind::DimensionMismatch, "h given without Ah");
    const index_t Mh = pb.h.empty() ? 0 : rows_of(in.Ah);
    pb.blocks_h = pb.h.empty() ? BlockStructure() : make_blocks(in.blocks_h, Mh, "blocks_h");
    if (pb.blocks_h.count() != pb.h.size())
        fail(ProblemErrorKind::DimensionMismatch, "blocks_h defines " + str(pb.blocks_h.count()) +
                                                      " blocks but h lists " + str(pb.h.size()) + " atoms");
    pb.Ah = pb.h.empty() ? SparseColMatrix(0, in.N) : matrix(in.Ah, Mh, in.N, "Ah");
    pb.ch = weights(in.ch, pb.h.size(), "ch");
    pb.bh = offsets(in.bh, Mh, "bh");

    // capabilities the solvers rely on
    for (std::size_t j = 0; j < pb.f.size(); ++j)
        if (!pb.f[j]->supports(Mode::Grad) || !pb.f[j]->supports(Mode::Lipschitz))
            fail(ProblemErrorKind::UnknownAtom,
                 "f[" + str(j) + "] = '" + std::string(pb.f[j]->name) + "' is not differentiable");
    for (std::size_t i = 0; i < pb.g.size(); ++i)
        if (!pb.g[i]->supports(Mode::Prox))
            fail(ProblemErrorKind::UnknownAtom, "g[" + str(i) + "] has no proximal operator");
    for (std::size_t l = 0; l < pb.h.size(); ++l)
        if (!pb.h[l]->supports(Mode::Prox))
            fail(ProblemErrorKind::UnknownAtom, "h[" + str(l) + "] has no proximal operator");

    if (in.Q) {
        SparseColMatrix q = matrix(in.Q, in.N, in.N, "Q");
        const double asym = q.asymmetry();
        if (asym > 0.) {
            if (asym > 1e-12)
                pb.warnings.push_back("Q is not symmetric (relative asymmetry " + std::to_string(asym) +
                                      "); using (Q + Q^T) / 2");
            q = symmetrize(q);
        }
        pb.Q = std::move(q);
    }

    pb.x_init = offsets(in.x_init, in.N, "x_init");

    pb.inv_blocks = pb.blocks.inverse();
    pb.inv_blocks_f = pb.blocks_f.inverse();
    pb.inv_blocks_h = pb.blocks_h.inverse();
    pb.dup = build_duplication_index(pb.Ah, pb.blocks, pb.blocks_h);
    pb.y_init = offsets(in.y_init, pb.dup.total, "y_init");
    return pb;
}

}  // namespace cdsolve
