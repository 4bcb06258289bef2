#include <cdsolve/sparse.hpp>

#include <algorithm>
#include <cmath>

namespace cdsolve {

SparseColMatrix::SparseColMatrix(index_t n_rows, index_t n_cols)
    : n_rows_(n_rows), n_cols_(n_cols), col_ptr_(n_cols + 1, 0)
{
}

SparseColMatrix::SparseColMatrix(index_t n_rows, index_t n_cols, std::vector<index_t> col_ptr,
                                 std::vector<index_t> row_idx, std::vector<double> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      col_ptr_(std::move(col_ptr)),
      row_idx_(std::move(row_idx)),
      values_(std::move(values))
{
    validate();
}

void SparseColMatrix::validate() const
{
    if (col_ptr_.size() != n_cols_ + 1)
        throw std::invalid_argument("col_ptr must have n_cols + 1 entries");
    if (col_ptr_.front() != 0) throw std::invalid_argument("col_ptr must start at 0");
    for (index_t c = 0; c < n_cols_; ++c)
        if (col_ptr_[c + 1] < col_ptr_[c]) throw std::invalid_argument("col_ptr must be nondecreasing");
    if (col_ptr_.back() != row_idx_.size() || row_idx_.size() != values_.size())
        throw std::invalid_argument("col_ptr, row_idx and values lengths disagree");
    for (index_t c = 0; c < n_cols_; ++c) {
        for (index_t k = col_ptr_[c]; k < col_ptr_[c + 1]; ++k) {
            if (row_idx_[k] >= n_rows_)
                throw std::invalid_argument("row index " + std::to_string(row_idx_[k]) +
                                            " out of range in column " + std::to_string(c));
            if (k > col_ptr_[c] && row_idx_[k] <= row_idx_[k - 1])
                throw std::invalid_argument("row indices must be strictly increasing in column " +
                                            std::to_string(c));
        }
    }
}

SparseColMatrix SparseColMatrix::from_dense(index_t n_rows, index_t n_cols,
                                            std::span<const double> row_major)
{
    if (row_major.size() != n_rows * n_cols)
        throw std::invalid_argument("dense data has " + std::to_string(row_major.size()) +
                                    " entries, expected " + std::to_string(n_rows * n_cols));
    std::vector<index_t> col_ptr(n_cols + 1, 0), row_idx;
    std::vector<double> values;
    for (index_t c = 0; c < n_cols; ++c) {
        for (index_t r = 0; r < n_rows; ++r) {
            const double v = row_major[r * n_cols + c];
            if (v != 0.) {
                row_idx.push_back(r);
                values.push_back(v);
            }
        }
        col_ptr[c + 1] = row_idx.size();
    }
    return {n_rows, n_cols, std::move(col_ptr), std::move(row_idx), std::move(values)};
}

SparseColMatrix SparseColMatrix::from_triplets(index_t n_rows, index_t n_cols,
                                               std::vector<Triplet> entries)
{
    for (const Triplet& t : entries)
        if (t.row >= n_rows || t.col >= n_cols)
            throw std::invalid_argument("triplet (" + std::to_string(t.row) + ", " +
                                        std::to_string(t.col) + ") outside a " +
                                        std::to_string(n_rows) + "x" + std::to_string(n_cols) + " matrix");
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.col != b.col ? a.col < b.col : a.row < b.row;
    });
    std::vector<index_t> col_ptr(n_cols + 1, 0), row_idx;
    std::vector<double> values;
    row_idx.reserve(entries.size());
    values.reserve(entries.size());
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const Triplet& t = entries[k];
        if (k > 0 && entries[k - 1].row == t.row && entries[k - 1].col == t.col) {
            values.back() += t.value;
            continue;
        }
        row_idx.push_back(t.row);
        values.push_back(t.value);
        ++col_ptr[t.col + 1];
    }
    for (index_t c = 0; c < n_cols; ++c) col_ptr[c + 1] += col_ptr[c];
    return {n_rows, n_cols, std::move(col_ptr), std::move(row_idx), std::move(values)};
}

SparseColMatrix SparseColMatrix::identity(index_t n)
{
    std::vector<index_t> col_ptr(n + 1), row_idx(n);
    for (index_t i = 0; i <= n; ++i) col_ptr[i] = i;
    for (index_t i = 0; i < n; ++i) row_idx[i] = i;
    return {n, n, std::move(col_ptr), std::move(row_idx), std::vector<double>(n, 1.)};
}

double SparseColMatrix::coeff(index_t r, index_t c) const
{
    const auto first = row_idx_.begin() + static_cast<std::ptrdiff_t>(col_ptr_[c]);
    const auto last = row_idx_.begin() + static_cast<std::ptrdiff_t>(col_ptr_[c + 1]);
    const auto it = std::lower_bound(first, last, r);
    if (it == last || *it != r) return 0.;
    return values_[static_cast<index_t>(it - row_idx_.begin())];
}

std::vector<double> SparseColMatrix::to_dense() const
{
    std::vector<double> out(n_rows_ * n_cols_, 0.);
    for (index_t c = 0; c < n_cols_; ++c)
        for (index_t k = col_ptr_[c]; k < col_ptr_[c + 1]; ++k) out[row_idx_[k] * n_cols_ + c] = values_[k];
    return out;
}

SparseColMatrix SparseColMatrix::transpose() const
{
    std::vector<index_t> col_ptr(n_rows_ + 1, 0);
    for (index_t r : row_idx_) ++col_ptr[r + 1];
    for (index_t r = 0; r < n_rows_; ++r) col_ptr[r + 1] += col_ptr[r];
    std::vector<index_t> next(col_ptr.begin(), col_ptr.end() - 1);
    std::vector<index_t> row_idx(nnz());
    std::vector<double> values(nnz());
    for (index_t c = 0; c < n_cols_; ++c) {
        for (index_t k = col_ptr_[c]; k < col_ptr_[c + 1]; ++k) {
            const index_t dst = next[row_idx_[k]]++;
            row_idx[dst] = c;
            values[dst] = values_[k];
        }
    }
    return {n_cols_, n_rows_, std::move(col_ptr), std::move(row_idx), std::move(values)};
}

void SparseColMatrix::multiply(std::span<const double> x, std::span<double> out) const
{
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n_rows_), 0.);
    for (index_t c = 0; c < n_cols_; ++c) {
        const double xc = x[c];
        if (xc == 0.) continue;
        for (index_t k = col_ptr_[c]; k < col_ptr_[c + 1]; ++k) out[row_idx_[k]] += values_[k] * xc;
    }
}

void SparseColMatrix::multiply_transpose(std::span<const double> y, std::span<double> out) const
{
    for (index_t c = 0; c < n_cols_; ++c) {
        double s = 0.;
        for (index_t k = col_ptr_[c]; k < col_ptr_[c + 1]; ++k) s += values_[k] * y[row_idx_[k]];
        out[c] = s;
    }
}

double SparseColMatrix::asymmetry() const
{
    if (n_rows_ != n_cols_) return INFINITY;
    double scale = 0., diff = 0.;
    for (index_t c = 0; c < n_cols_; ++c) {
        for (index_t k = col_ptr_[c]; k < col_ptr_[c + 1]; ++k) {
            scale = std::max(scale, std::abs(values_[k]));
            diff = std::max(diff, std::abs(values_[k] - coeff(c, row_idx_[k])));
        }
    }
    return scale > 0. ? diff / scale : 0.;
}

BlockStructure::BlockStructure(std::vector<index_t> boundaries) : bounds_(std::move(boundaries))
{
    if (bounds_.empty() || bounds_.front() != 0)
        throw std::invalid_argument("block boundaries must start at 0");
    for (std::size_t k = 1; k < bounds_.size(); ++k)
        if (bounds_[k] <= bounds_[k - 1])
            throw std::invalid_argument("block boundaries must be strictly increasing");
}

BlockStructure BlockStructure::scalar(index_t n)
{
    std::vector<index_t> b(n + 1);
    for (index_t i = 0; i <= n; ++i) b[i] = i;
    return BlockStructure(std::move(b));
}

index_t BlockStructure::max_size() const
{
    index_t m = 0;
    for (index_t k = 0; k < count(); ++k) m = std::max(m, size(k));
    return m;
}

std::vector<index_t> BlockStructure::inverse() const
{
    std::vector<index_t> inv(total());
    for (index_t k = 0; k < count(); ++k)
        for (index_t e = begin(k); e < end(k); ++e) inv[e] = k;
    return inv;
}

ColumnBlockView::ColumnBlockView(const SparseColMatrix& m, index_t first_col, index_t last_col,
                                 std::span<const index_t> row_to_block)
    : m_(&m), first_(first_col), last_(last_col), row_to_block_(row_to_block)
{
}

ColumnBlockView::iterator::iterator(const ColumnBlockView* view, index_t col, index_t pos)
    : view_(view), col_(col), pos_(pos)
{
    skip_empty();
}

void ColumnBlockView::iterator::skip_empty()
{
    while (col_ < view_->last_ && pos_ >= view_->m_->col_end(col_)) ++col_;
}

BlockEntry ColumnBlockView::iterator::operator*() const
{
    const index_t r = view_->m_->row_idx()[pos_];
    const index_t blk = view_->row_to_block_.empty() ? r : view_->row_to_block_[r];
    return {r, col_, view_->m_->values()[pos_], blk};
}

ColumnBlockView::iterator& ColumnBlockView::iterator::operator++()
{
    ++pos_;
    skip_empty();
    return *this;
}

ColumnBlockView::iterator ColumnBlockView::begin() const
{
    return iterator(this, first_, m_->col_begin(first_));
}

ColumnBlockView::iterator ColumnBlockView::end() const
{
    return iterator(this, last_, m_->col_begin(last_));
}

index_t ColumnBlockView::nnz() const { return m_->col_begin(last_) - m_->col_begin(first_); }

ColumnBlockView column_block(const SparseColMatrix& m, const BlockStructure& col_blocks, index_t i,
                             std::span<const index_t> row_to_block)
{
    if (i >= col_blocks.count()) throw std::out_of_range("column block index out of range");
    return ColumnBlockView(m, col_blocks.begin(i), col_blocks.end(i), row_to_block);
}

std::vector<double> column_gram(const SparseColMatrix& m, index_t first, index_t last,
                                std::span<const double> row_weight)
{
    const index_t n = last - first;
    std::vector<double> g(n * n, 0.);
    std::vector<double> dense(m.rows(), 0.);
    const auto rows = m.row_idx();
    const auto vals = m.values();
    for (index_t a = 0; a < n; ++a) {
        const index_t ca = first + a;
        for (index_t k = m.col_begin(ca); k < m.col_end(ca); ++k)
            dense[rows[k]] = vals[k] * (row_weight.empty() ? 1. : row_weight[rows[k]]);
        for (index_t b = a; b < n; ++b) {
            const index_t cb = first + b;
            double s = 0.;
            for (index_t k = m.col_begin(cb); k < m.col_end(cb); ++k) s += dense[rows[k]] * vals[k];
            g[a * n + b] = s;
            g[b * n + a] = s;
        }
        for (index_t k = m.col_begin(ca); k < m.col_end(ca); ++k) dense[rows[k]] = 0.;
    }
    return g;
}

}  // namespace cdsolve
