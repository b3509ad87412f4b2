#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "errors.hpp"

namespace mxc {

using SpMat = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace sparse {

inline SpMat from_triplets(Index rows, Index cols, const Triplets& t)
{
    SpMat m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

inline SpMat identity(Index n, double value = 1.0)
{
    Triplets t;
    t.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) t.emplace_back(i, i, value);
    return from_triplets(n, n, t);
}

inline SpMat zeros(Index rows, Index cols) { return SpMat(rows, cols); }

inline void append(Triplets& t, const SpMat& m, Index row0, Index col0, double scale = 1.0)
{
    for (Index c = 0; c < m.outerSize(); ++c)
        for (SpMat::InnerIterator it(m, c); it; ++it) t.emplace_back(row0 + it.row(), col0 + it.col(), scale * it.value());
}

// diag(block, ..., block), `count` copies.
inline SpMat block_diag(const SpMat& block, Index count)
{
    Triplets t;
    t.reserve(static_cast<std::size_t>(block.nonZeros() * count));
    for (Index b = 0; b < count; ++b) append(t, block, b * block.rows(), b * block.cols());
    return from_triplets(block.rows() * count, block.cols() * count, t);
}

// nb x (nb+1) block matrix with -I_m on the block diagonal and I_m to its right.
inline SpMat bidiag(Index nb, Index m)
{
    Triplets t;
    t.reserve(static_cast<std::size_t>(2 * nb * m));
    for (Index r = 0; r < nb; ++r)
        for (Index i = 0; i < m; ++i) {
            t.emplace_back(r * m + i, r * m + i, -1.0);
            t.emplace_back(r * m + i, (r + 1) * m + i, 1.0);
        }
    return from_triplets(nb * m, (nb + 1) * m, t);
}

inline SpMat vstack(const std::vector<SpMat>& parts)
{
    Index rows = 0;
    const Index cols = parts.empty() ? 0 : parts.front().cols();
    Triplets t;
    for (const auto& p : parts) {
        if (p.cols() != cols) throw ShapeError("vstack: column mismatch");
        append(t, p, rows, 0);
        rows += p.rows();
    }
    return from_triplets(rows, cols, t);
}

inline SpMat hstack(const std::vector<SpMat>& parts)
{
    Index cols = 0;
    const Index rows = parts.empty() ? 0 : parts.front().rows();
    Triplets t;
    for (const auto& p : parts) {
        if (p.rows() != rows) throw ShapeError("hstack: row mismatch");
        append(t, p, 0, cols);
        cols += p.cols();
    }
    return from_triplets(rows, cols, t);
}

// Block matrix from a grid of optional blocks. Empty entries (0x0) are zero
// blocks whose size is inferred from row heights / column widths.
inline SpMat assemble_blocks(const std::vector<Index>& row_heights, const std::vector<Index>& col_widths,
                             const std::vector<std::vector<SpMat>>& blocks)
{
    Triplets t;
    Index r0 = 0;
    for (std::size_t r = 0; r < row_heights.size(); ++r) {
        Index c0 = 0;
        for (std::size_t c = 0; c < col_widths.size(); ++c) {
            const SpMat& b = blocks[r][c];
            if (b.rows() != 0 || b.cols() != 0) {
                if (b.rows() != row_heights[r] || b.cols() != col_widths[c])
                    throw ShapeError("block (" + std::to_string(r) + "," + std::to_string(c) + ") has shape " +
                                     std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ", expected " +
                                     std::to_string(row_heights[r]) + "x" + std::to_string(col_widths[c]));
                append(t, b, r0, c0);
            }
            c0 += col_widths[c];
        }
        r0 += row_heights[r];
    }
    Index rows = 0, cols = 0;
    for (Index h : row_heights) rows += h;
    for (Index w : col_widths) cols += w;
    return from_triplets(rows, cols, t);
}

// Rows of `m` listed in `rows`, in that order.
inline SpMat select_rows(const SpMat& m, const std::vector<Index>& rows)
{
    Triplets t;
    for (std::size_t r = 0; r < rows.size(); ++r) t.emplace_back(static_cast<Index>(r), rows[r], 1.0);
    const SpMat sel = from_triplets(static_cast<Index>(rows.size()), m.rows(), t);
    SpMat out = sel * m;
    out.makeCompressed();
    return out;
}

inline SpMat select_cols(const SpMat& m, const std::vector<Index>& cols)
{
    Triplets t;
    for (std::size_t c = 0; c < cols.size(); ++c) t.emplace_back(cols[c], static_cast<Index>(c), 1.0);
    const SpMat sel = from_triplets(m.cols(), static_cast<Index>(cols.size()), t);
    SpMat out = m * sel;
    out.makeCompressed();
    return out;
}

inline double max_abs(const SpMat& m)
{
    double out = 0.0;
    for (Index c = 0; c < m.outerSize(); ++c)
        for (SpMat::InnerIterator it(m, c); it; ++it) out = std::max(out, std::abs(it.value()));
    return out;
}

// Largest number of nonzeros in any row.
inline Index max_row_nnz(const SpMat& m)
{
    std::vector<Index> count(static_cast<std::size_t>(m.rows()), 0);
    for (Index c = 0; c < m.outerSize(); ++c)
        for (SpMat::InnerIterator it(m, c); it; ++it)
            if (it.value() != 0.0) ++count[static_cast<std::size_t>(it.row())];
    Index out = 0;
    for (Index n : count) out = std::max(out, n);
    return out;
}

}  // namespace sparse
}  // namespace mxc
