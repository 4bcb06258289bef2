#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdsolve {

using index_t = std::size_t;

struct Triplet {
    index_t row;
    index_t col;
    double value;
};

/*
 * Compressed sparse column storage.
 *
 * Invariants: col_ptr has n_cols + 1 nondecreasing entries starting at 0,
 * row indices are strictly increasing within each column and
 * values.size() == row_idx.size() == col_ptr.back(). Explicitly stored zeros
 * are kept and count as structural nonzeros.
 */
class SparseColMatrix {
public:
    SparseColMatrix() : col_ptr_(1, 0) {}
    SparseColMatrix(index_t n_rows, index_t n_cols);
    SparseColMatrix(index_t n_rows, index_t n_cols, std::vector<index_t> col_ptr,
                    std::vector<index_t> row_idx, std::vector<double> values);

    // Row-major dense input; exact zeros are dropped.
    static SparseColMatrix from_dense(index_t n_rows, index_t n_cols, std::span<const double> row_major);
    // Duplicate (row, col) entries are summed.
    static SparseColMatrix from_triplets(index_t n_rows, index_t n_cols, std::vector<Triplet> entries);
    static SparseColMatrix identity(index_t n);

    index_t rows() const { return n_rows_; }
    index_t cols() const { return n_cols_; }
    index_t nnz() const { return row_idx_.size(); }
    bool empty() const { return n_rows_ == 0 || n_cols_ == 0; }

    std::span<const index_t> col_ptr() const { return col_ptr_; }
    std::span<const index_t> row_idx() const { return row_idx_; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    index_t col_begin(index_t c) const { return col_ptr_[c]; }
    index_t col_end(index_t c) const { return col_ptr_[c + 1]; }
    index_t col_nnz(index_t c) const { return col_ptr_[c + 1] - col_ptr_[c]; }

    // Structural lookup; 0 when (r, c) is not stored.
    double coeff(index_t r, index_t c) const;

    std::vector<double> to_dense() const;  // row-major
    SparseColMatrix transpose() const;

    // out = A x (out sized rows()).
    void multiply(std::span<const double> x, std::span<double> out) const;
    // out = A^T y (out sized cols()).
    void multiply_transpose(std::span<const double> y, std::span<double> out) const;

    // Largest |A - A^T| entry relative to the largest |A| entry.
    double asymmetry() const;

    void validate() const;

private:
    index_t n_rows_ = 0;
    index_t n_cols_ = 0;
    std::vector<index_t> col_ptr_;
    std::vector<index_t> row_idx_;
    std::vector<double> values_;
};

// Partition of [0, total) in indptr style: boundaries[0] = 0, boundaries[K] = total.
class BlockStructure {
public:
    BlockStructure() : bounds_(1, 0) {}
    explicit BlockStructure(std::vector<index_t> boundaries);
    static BlockStructure scalar(index_t n);

    index_t count() const { return bounds_.size() - 1; }
    index_t total() const { return bounds_.back(); }
    index_t begin(index_t k) const { return bounds_[k]; }
    index_t end(index_t k) const { return bounds_[k + 1]; }
    index_t size(index_t k) const { return bounds_[k + 1] - bounds_[k]; }
    index_t max_size() const;
    std::span<const index_t> boundaries() const { return bounds_; }

    // element -> owning block
    std::vector<index_t> inverse() const;

    bool operator==(const BlockStructure&) const = default;

private:
    std::vector<index_t> bounds_;
};

struct BlockEntry {
    index_t row;
    index_t col;
    double value;
    index_t row_block;
};

/*
 * Structural nonzeros of the columns of one column block, with the owning
 * row block of each entry.
 */
class ColumnBlockView {
public:
    class iterator {
    public:
        using value_type = BlockEntry;
        using difference_type = std::ptrdiff_t;

        iterator() = default;
        iterator(const ColumnBlockView* view, index_t col, index_t pos);
        BlockEntry operator*() const;
        iterator& operator++();
        iterator operator++(int)
        {
            auto copy = *this;
            ++*this;
            return copy;
        }
        bool operator==(const iterator& other) const { return pos_ == other.pos_; }

    private:
        void skip_empty();
        const ColumnBlockView* view_ = nullptr;
        index_t col_ = 0;
        index_t pos_ = 0;
    };

    ColumnBlockView(const SparseColMatrix& m, index_t first_col, index_t last_col,
                    std::span<const index_t> row_to_block);

    iterator begin() const;
    iterator end() const;
    index_t nnz() const;

private:
    friend class iterator;
    const SparseColMatrix* m_;
    index_t first_;
    index_t last_;
    std::span<const index_t> row_to_block_;
};

// Row-major Gram matrix sum_r w_r A[r, c1] A[r, c2] over columns [first, last).
// An empty weight span means unit weights.
std::vector<double> column_gram(const SparseColMatrix& m, index_t first, index_t last,
                                std::span<const double> row_weight = {});

ColumnBlockView column_block(const SparseColMatrix& m, const BlockStructure& col_blocks, index_t i,
                             std::span<const index_t> row_to_block);

}  // namespace cdsolve
