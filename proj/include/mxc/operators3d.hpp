#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <string>

#include "grid.hpp"
#include "sparse.hpp"

namespace mxc {

enum class DifferenceBlock { D1, D2, D1p, D3, D4, D5, D6, D3p, D4p };

// Curl, boundary-coupling and divergence operators of one grid, with the
// 1/h scalings already folded in. Row/column orderings follow `layout`.
//   A  : E_h <- H_h      (N_E x N_H)
//   F  : H_h <- E_h      (N_H x N_E)
//   G  : H_h <- E_*      (N_H x N_*)
//   V0 : E divergence at interior integer nodes
//   P0, Q0 : H divergence at cell centres, interior H and boundary g_* parts
struct OperatorSet {
    StateLayout layout;
    SpMat A, F, G, V0, P0, Q0;
    std::map<std::string, SpMat> sub_blocks;
};

inline SpMat assemble_difference_block(DifferenceBlock kind, const GridSpec& spec)
{
    spec.validate();
    const Index n2 = spec.n_cells[1];
    const Index n3 = spec.n_cells[2];
    using sparse::bidiag;
    using sparse::identity;
    using sparse::vstack;
    using sparse::zeros;
    switch (kind) {
    case DifferenceBlock::D1: return bidiag(n2 - 1, n3 - 1);
    case DifferenceBlock::D2: return bidiag(n3 - 1, 1);
    case DifferenceBlock::D1p: return bidiag(n2 - 1, n3);
    case DifferenceBlock::D3: return vstack({identity(n3, -1.0), zeros((n2 - 1) * n3, n3)});
    case DifferenceBlock::D4: return vstack({zeros((n2 - 1) * n3, n3), identity(n3)});
    case DifferenceBlock::D5: return vstack({identity(1, -1.0), zeros(n3 - 1, 1)});
    case DifferenceBlock::D6: return vstack({zeros(n3 - 1, 1), identity(1)});
    case DifferenceBlock::D3p: return vstack({identity(n3 - 1, -1.0), zeros((n2 - 1) * (n3 - 1), n3 - 1)});
    case DifferenceBlock::D4p: return vstack({zeros((n2 - 1) * (n3 - 1), n3 - 1), identity(n3 - 1)});
    }
    throw ConfigError("unknown difference block");
}

namespace detail {

inline void check_shape(const std::string& name, const SpMat& m, std::size_t rows, std::size_t cols)
{
    if (static_cast<std::size_t>(m.rows()) != rows || static_cast<std::size_t>(m.cols()) != cols)
        throw ShapeError(name + " is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ", expected " +
                         std::to_string(rows) + "x" + std::to_string(cols));
}

inline SpMat transpose(const SpMat& m)
{
    SpMat t = m.transpose();
    t.makeCompressed();
    return t;
}

inline SpMat scaled(const SpMat& m, double s)
{
    SpMat out = s * m;
    out.makeCompressed();
    return out;
}

}  // namespace detail

// V0 = [V1/h1 V2/h2 V3/h3], P0 = [P1/h1 P2/h2 P3/h3], Q0 = [Q1/h1 Q2/h2 Q3/h3].
struct DivergenceBlocks {
    SpMat V0, P0, Q0;
};

namespace detail {

inline std::map<std::string, SpMat> divergence_sub_blocks(const GridSpec& spec)
{
    const Index n1 = spec.n_cells[0];
    const Index n2 = spec.n_cells[1];
    const Index n3 = spec.n_cells[2];
    using sparse::block_diag;
    using sparse::hstack;
    using sparse::identity;
    using sparse::vstack;
    using sparse::zeros;
    const SpMat d1 = assemble_difference_block(DifferenceBlock::D1, spec);
    const SpMat d2 = assemble_difference_block(DifferenceBlock::D2, spec);
    const SpMat d1p = assemble_difference_block(DifferenceBlock::D1p, spec);
    const SpMat d3 = assemble_difference_block(DifferenceBlock::D3, spec);
    const SpMat d4 = assemble_difference_block(DifferenceBlock::D4, spec);
    const SpMat d5 = assemble_difference_block(DifferenceBlock::D5, spec);
    const SpMat d6 = assemble_difference_block(DifferenceBlock::D6, spec);

    std::map<std::string, SpMat> b;
    b["V1"] = sparse::bidiag(n1 - 1, (n2 - 1) * (n3 - 1));
    b["V2"] = block_diag(d1, n1 - 1);
    b["V3"] = block_diag(d2, (n1 - 1) * (n2 - 1));
    // P1: I on the block diagonal, -I below it; N1 x (N1-1) blocks of size N2N3
    b["P1"] = scaled(transpose(sparse::bidiag(n1 - 1, n2 * n3)), -1.0);
    b["P2"] = block_diag(scaled(transpose(d1p), -1.0), n1);
    b["P3"] = block_diag(scaled(transpose(d2), -1.0), n1 * n2);
    b["Q11"] = vstack({identity(n2 * n3, -1.0), zeros((n1 - 1) * n2 * n3, n2 * n3)});
    b["Q12"] = vstack({zeros((n1 - 1) * n2 * n3, n2 * n3), identity(n2 * n3)});
    b["Q21"] = block_diag(d3, n1);
    b["Q22"] = block_diag(d4, n1);
    b["Q31"] = block_diag(d5, n1 * n2);
    b["Q32"] = block_diag(d6, n1 * n2);
    b["Q1"] = hstack({b["Q11"], b["Q12"]});
    b["Q2"] = hstack({b["Q21"], b["Q22"]});
    b["Q3"] = hstack({b["Q31"], b["Q32"]});
    return b;
}

}  // namespace detail

inline DivergenceBlocks assemble_divergence_blocks(const GridSpec& spec)
{
    if (spec.dim_mode != DimMode::Full3D) throw ConfigError("assemble_divergence_blocks: Full3D mode required");
    const StateLayout layout = make_state_layout(spec);
    auto b = detail::divergence_sub_blocks(spec);
    const double h1 = spec.h(0), h2 = spec.h(1), h3 = spec.h(2);
    using detail::scaled;
    DivergenceBlocks out;
    out.V0 = sparse::hstack({scaled(b["V1"], 1.0 / h1), scaled(b["V2"], 1.0 / h2), scaled(b["V3"], 1.0 / h3)});
    out.P0 = sparse::hstack({scaled(b["P1"], 1.0 / h1), scaled(b["P2"], 1.0 / h2), scaled(b["P3"], 1.0 / h3)});
    out.Q0 = sparse::hstack({scaled(b["Q1"], 1.0 / h1), scaled(b["Q2"], 1.0 / h2), scaled(b["Q3"], 1.0 / h3)});

    const std::size_t n1 = spec.n_cells[0], n2 = spec.n_cells[1], n3 = spec.n_cells[2];
    detail::check_shape("V0", out.V0, (n1 - 1) * (n2 - 1) * (n3 - 1), layout.n_e());
    detail::check_shape("P0", out.P0, n1 * n2 * n3, layout.n_h());
    detail::check_shape("Q0", out.Q0, n1 * n2 * n3, layout.n_gstar());
    return out;
}

inline OperatorSet assemble_operator_set(const GridSpec& spec)
{
    if (spec.dim_mode != DimMode::Full3D) throw ConfigError("assemble_operator_set: Full3D mode required");
    OperatorSet ops;
    ops.layout = make_state_layout(spec);
    const Index n1 = spec.n_cells[0];
    const Index n2 = spec.n_cells[1];
    const Index n3 = spec.n_cells[2];
    const double h1 = spec.h(0), h2 = spec.h(1), h3 = spec.h(2);

    using detail::scaled;
    using detail::transpose;
    using sparse::bidiag;
    using sparse::block_diag;
    using sparse::hstack;
    using sparse::identity;
    using sparse::vstack;
    using sparse::zeros;

    auto& b = ops.sub_blocks;
    const std::array<std::pair<DifferenceBlock, const char*>, 9> kinds{{{DifferenceBlock::D1, "D1"},
                                                                         {DifferenceBlock::D2, "D2"},
                                                                         {DifferenceBlock::D1p, "D1p"},
                                                                         {DifferenceBlock::D3, "D3"},
                                                                         {DifferenceBlock::D4, "D4"},
                                                                         {DifferenceBlock::D5, "D5"},
                                                                         {DifferenceBlock::D6, "D6"},
                                                                         {DifferenceBlock::D3p, "D3p"},
                                                                         {DifferenceBlock::D4p, "D4p"}}};
    for (const auto& [kind, name] : kinds)
        b[name] = assemble_difference_block(kind, spec);

    b["A1"] = block_diag(b["D1"], n1);
    b["A2"] = block_diag(b["D2"], n1 * (n2 - 1));
    b["A3"] = block_diag(b["D2"], (n1 - 1) * n2);
    b["A4"] = bidiag(n1 - 1, n2 * (n3 - 1));
    b["A5"] = bidiag(n1 - 1, (n2 - 1) * n3);
    b["A6"] = block_diag(b["D1p"], n1 - 1);

    b["F1"] = scaled(transpose(b["A6"]), -1.0);
    b["F2"] = scaled(transpose(b["A3"]), -1.0);
    b["F3"] = scaled(transpose(b["A2"]), -1.0);
    b["F4"] = scaled(transpose(b["A5"]), -1.0);
    b["F5"] = scaled(transpose(b["A4"]), -1.0);
    b["F6"] = scaled(transpose(b["A1"]), -1.0);

    b["G11"] = block_diag(b["D3"], n1 - 1);
    b["G12"] = block_diag(b["D4"], n1 - 1);
    b["G21"] = block_diag(b["D5"], (n1 - 1) * n2);
    b["G22"] = block_diag(b["D6"], (n1 - 1) * n2);
    b["G31"] = block_diag(b["D5"], n1 * (n2 - 1));
    b["G32"] = block_diag(b["D6"], n1 * (n2 - 1));
    b["G41"] = vstack({identity((n2 - 1) * n3, -1.0), zeros((n1 - 1) * (n2 - 1) * n3, (n2 - 1) * n3)});
    b["G42"] = vstack({zeros((n1 - 1) * (n2 - 1) * n3, (n2 - 1) * n3), identity((n2 - 1) * n3)});
    b["G51"] = vstack({identity(n2 * (n3 - 1), -1.0), zeros((n1 - 1) * n2 * (n3 - 1), n2 * (n3 - 1))});
    b["G52"] = vstack({zeros((n1 - 1) * n2 * (n3 - 1), n2 * (n3 - 1)), identity(n2 * (n3 - 1))});
    b["G61"] = block_diag(b["D3p"], n1);
    b["G62"] = block_diag(b["D4p"], n1);
    for (int g = 1; g <= 6; ++g) {
        const std::string name = "G" + std::to_string(g);
        b[name] = hstack({b[name + "1"], b[name + "2"]});
    }

    for (auto& [name, m] : detail::divergence_sub_blocks(spec)) b[name] = m;

    const StateLayout& L = ops.layout;
    auto fam = [&](const Block& blk, Family f) {
        return static_cast<Index>(blk.families[static_cast<std::size_t>(blk.find(f))].flat_len());
    };
    const std::vector<Index> e_rows{fam(L.e_h, Family::E1), fam(L.e_h, Family::E2), fam(L.e_h, Family::E3)};
    const std::vector<Index> h_rows{fam(L.h_h, Family::H1), fam(L.h_h, Family::H2), fam(L.h_h, Family::H3)};
    std::vector<Index> star_cols;
    for (const auto& f : L.e_star.families) star_cols.push_back(static_cast<Index>(f.flat_len()));

    const SpMat none;
    ops.A = sparse::assemble_blocks(e_rows, h_rows,
                                    {{none, scaled(b["A2"], -1.0 / h3), scaled(b["A1"], 1.0 / h2)},
                                     {scaled(b["A3"], 1.0 / h3), none, scaled(b["A4"], -1.0 / h1)},
                                     {scaled(b["A6"], -1.0 / h2), scaled(b["A5"], 1.0 / h1), none}});
    ops.F = sparse::assemble_blocks(h_rows, e_rows,
                                    {{none, scaled(b["F2"], 1.0 / h3), scaled(b["F1"], -1.0 / h2)},
                                     {scaled(b["F3"], -1.0 / h3), none, scaled(b["F4"], 1.0 / h1)},
                                     {scaled(b["F6"], 1.0 / h2), scaled(b["F5"], -1.0 / h1), none}});
    // columns: E12 E13 E21 E23 E31 E32
    ops.G = sparse::assemble_blocks(
        h_rows, star_cols,
        {{none, none, none, scaled(b["G2"], 1.0 / h3), none, scaled(b["G1"], -1.0 / h2)},
         {none, scaled(b["G3"], -1.0 / h3), none, none, scaled(b["G4"], 1.0 / h1), none},
         {scaled(b["G6"], 1.0 / h2), none, scaled(b["G5"], -1.0 / h1), none, none, none}});

    const DivergenceBlocks div = assemble_divergence_blocks(spec);
    ops.V0 = div.V0;
    ops.P0 = div.P0;
    ops.Q0 = div.Q0;

    detail::check_shape("A", ops.A, L.n_e(), L.n_h());
    detail::check_shape("F", ops.F, L.n_h(), L.n_e());
    detail::check_shape("G", ops.G, L.n_h(), L.n_star());
    return ops;
}

// Dense CSV dump of a sub-block (or of A, F, G, V0, P0, Q0), row-major.
inline void dump_block_csv(const OperatorSet& ops, const std::string& name, const std::filesystem::path& file)
{
    const SpMat* m = nullptr;
    const std::map<std::string, const SpMat*> stacked{{"A", &ops.A},   {"F", &ops.F},   {"G", &ops.G},
                                                      {"V0", &ops.V0}, {"P0", &ops.P0}, {"Q0", &ops.Q0}};
    if (auto it = stacked.find(name); it != stacked.end()) m = it->second;
    if (auto it = ops.sub_blocks.find(name); m == nullptr && it != ops.sub_blocks.end()) m = &it->second;
    if (m == nullptr) throw ConfigError("no operator block named '" + name + "'");

    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file.string());
    const GridSpec& s = ops.layout.spec;
    out << "# block " << name << " " << m->rows() << "x" << m->cols() << "\n";
    out << "# grid N=(" << s.n_cells[0] << "," << s.n_cells[1];
    if (s.dim_mode == DimMode::Full3D) out << "," << s.n_cells[2];
    out << ") h=(" << s.h(0) << "," << s.h(1);
    if (s.dim_mode == DimMode::Full3D) out << "," << s.h(2);
    out << ")\n";
    const MatrixXd dense(*m);
    out << std::setprecision(17);
    for (Index r = 0; r < dense.rows(); ++r) {
        for (Index c = 0; c < dense.cols(); ++c) out << (c ? "," : "") << dense(r, c);
        out << "\n";
    }
}

}  // namespace mxc
