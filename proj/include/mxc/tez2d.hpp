#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "grid.hpp"
#include "operators3d.hpp"
#include "sparse.hpp"

namespace mxc {

// TE_z operators on the 2-D Yee grid: E1 at (i+1/2, j), E2 at (i, j+1/2),
// H3 at (i+1/2, j+1/2). Boundary tangential E lives in E12 (E1 on j = 0, N2)
// and E21 (E2 on i = 0, N1).
struct TEzOperatorSet {
    StateLayout layout;
    SpMat A2d;  // E_h <- H3: rows E1 carry +-1/h2, rows E2 carry -+1/h1
    SpMat F2d;  // H3 <- interior E
    SpMat G2d;  // H3 <- [E12; E21]
    SpMat V2d;  // E divergence at interior nodes (i, j), 1 <= i < N1, 1 <= j < N2
    std::size_t n_e2 = 0, n_h2 = 0, n_star2 = 0;
};

inline TEzOperatorSet assemble_tez(const GridSpec& spec)
{
    if (spec.dim_mode != DimMode::TEz2D) throw ConfigError("assemble_tez: TEz2D mode required");
    TEzOperatorSet ops;
    ops.layout = make_state_layout(spec);
    const StateLayout& L = ops.layout;
    const int n1 = spec.n_cells[0];
    const int n2 = spec.n_cells[1];
    const double ih1 = 1.0 / spec.h(0);
    const double ih2 = 1.0 / spec.h(1);

    const ComponentLayout& e1 = L.e_h.families[0];
    const ComponentLayout& e2 = L.e_h.families[1];
    const ComponentLayout& h3 = L.h_h.families[0];
    const ComponentLayout& e12 = L.e_star.families[0];
    const ComponentLayout& e21 = L.e_star.families[1];
    const auto e2_off = static_cast<Index>(L.e_h.offsets[1]);
    const auto e21_off = static_cast<Index>(L.e_star.offsets[1]);
    auto idx = [](const ComponentLayout& c, int i, int j) { return static_cast<Index>(c.index({i, j, 0})); };

    Triplets a, f, g, v;
    // dE1 = dH3/dx2
    for (int i = 0; i < n1; ++i)
        for (int j = 1; j < n2; ++j) {
            const Index row = idx(e1, i, j);
            a.emplace_back(row, idx(h3, i, j), ih2);
            a.emplace_back(row, idx(h3, i, j - 1), -ih2);
        }
    // dE2 = -dH3/dx1
    for (int i = 1; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            const Index row = e2_off + idx(e2, i, j);
            a.emplace_back(row, idx(h3, i, j), -ih1);
            a.emplace_back(row, idx(h3, i - 1, j), ih1);
        }
    // dH3 = dE1/dx2 - dE2/dx1, boundary samples routed through G2d
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            const Index row = idx(h3, i, j);
            for (auto [jj, sign] : {std::pair{j + 1, ih2}, std::pair{j, -ih2}}) {
                if (jj == 0 || jj == n2)
                    g.emplace_back(row, idx(e12, i, jj), sign);
                else
                    f.emplace_back(row, idx(e1, i, jj), sign);
            }
            for (auto [ii, sign] : {std::pair{i + 1, -ih1}, std::pair{i, ih1}}) {
                if (ii == 0 || ii == n1)
                    g.emplace_back(row, e21_off + idx(e21, ii, j), sign);
                else
                    f.emplace_back(row, e2_off + idx(e2, ii, j), sign);
            }
        }
    // div E at interior nodes, j fastest
    Index node = 0;
    for (int i = 1; i < n1; ++i)
        for (int j = 1; j < n2; ++j, ++node) {
            v.emplace_back(node, idx(e1, i, j), ih1);
            v.emplace_back(node, idx(e1, i - 1, j), -ih1);
            v.emplace_back(node, e2_off + idx(e2, i, j), ih2);
            v.emplace_back(node, e2_off + idx(e2, i, j - 1), -ih2);
        }

    ops.n_e2 = L.n_e();
    ops.n_h2 = L.n_h();
    ops.n_star2 = L.n_star();
    const auto ne = static_cast<Index>(ops.n_e2), nh = static_cast<Index>(ops.n_h2),
               ns = static_cast<Index>(ops.n_star2);
    ops.A2d = sparse::from_triplets(ne, nh, a);
    ops.F2d = sparse::from_triplets(nh, ne, f);
    ops.G2d = sparse::from_triplets(nh, ns, g);
    ops.V2d = sparse::from_triplets(static_cast<Index>(n1 - 1) * (n2 - 1), ne, v);
    return ops;
}

// The 2-D set viewed through the generic interface; the H divergence
// constraint is vacuous for a single out-of-plane component, so P0 and Q0
// have no rows.
inline OperatorSet as_operator_set(const TEzOperatorSet& tez)
{
    OperatorSet ops;
    ops.layout = tez.layout;
    ops.A = tez.A2d;
    ops.F = tez.F2d;
    ops.G = tez.G2d;
    ops.V0 = tez.V2d;
    ops.P0 = SpMat(0, tez.A2d.cols());
    ops.Q0 = SpMat(0, 0);
    return ops;
}

// Assembles whichever operator set the grid's mode calls for.
inline OperatorSet assemble_operators(const GridSpec& spec)
{
    return spec.dim_mode == DimMode::TEz2D ? as_operator_set(assemble_tez(spec)) : assemble_operator_set(spec);
}

// Samples an analytic field (component, x) -> value at every state sample.
// R_* and g_* entries are sampled like their physical component.
template <class Fn>
VectorXd sample_state(const StateLayout& layout, Fn&& field)
{
    VectorXd phi = VectorXd::Zero(static_cast<Index>(layout.state_dim()));
    for (const auto& [fam, off] : layout.state_families()) {
        const Family comp = component_of(fam->family());
        for (std::size_t p = 0; p < fam->flat_len(); ++p)
            phi[static_cast<Index>(off + p)] = field(comp, fam->coordinates(p, layout.spec));
    }
    return phi;
}

// Initial data of the TE_z experiment:
//   E1 = 5 sin(2 pi x1) cos(2 pi x2), E2 = -5 cos(2 pi x1) sin(2 pi x2), H3 = 5 sin(2 pi x1) sin(2 pi x2)
inline VectorXd tez_initial_fields(const GridSpec& spec)
{
    if (spec.dim_mode != DimMode::TEz2D) throw ConfigError("tez_initial_fields: TEz2D mode required");
    const StateLayout layout = make_state_layout(spec);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    return sample_state(layout, [&](Family comp, const std::array<double, 3>& x) {
        const double s1 = std::sin(two_pi * x[0]), c1 = std::cos(two_pi * x[0]);
        const double s2 = std::sin(two_pi * x[1]), c2 = std::cos(two_pi * x[1]);
        switch (comp) {
        case Family::E1: return 5.0 * s1 * c2;
        case Family::E2: return -5.0 * c1 * s2;
        case Family::H3: return 5.0 * s1 * s2;
        default: return 0.0;
        }
    });
}

// Signed permutation: out[target[p]] = sign[p] * in[p].
struct SignedPermutation {
    std::vector<Index> target;
    std::vector<double> sign;

    VectorXd apply(const VectorXd& in) const
    {
        if (static_cast<std::size_t>(in.size()) != target.size())
            throw DimensionMismatch("signed permutation: size mismatch");
        VectorXd out(in.size());
        for (std::size_t p = 0; p < target.size(); ++p) out[target[p]] = sign[p] * in[static_cast<Index>(p)];
        return out;
    }

    SpMat matrix() const
    {
        Triplets t;
        for (std::size_t p = 0; p < target.size(); ++p) t.emplace_back(target[p], static_cast<Index>(p), sign[p]);
        const auto n = static_cast<Index>(target.size());
        return sparse::from_triplets(n, n, t);
    }
};

// Grid with x1 and x2 exchanged.
inline GridSpec swap_axes(GridSpec spec)
{
    std::swap(spec.a[0], spec.a[1]);
    std::swap(spec.b[0], spec.b[1]);
    std::swap(spec.n_cells[0], spec.n_cells[1]);
    return spec;
}

// Relabelling x1 <-> x2 of the TE_z system: E1' = E2, E2' = E1, H3' = -H3,
// E12' = E21, E21' = E12. Maps a state on `from` onto the swapped grid
// `to = swap_axes(from.spec)`; the same map acts on f (E part), g (H part)
// and boundary controls (E_* part).
inline SignedPermutation axis_swap(const StateLayout& from, const StateLayout& to)
{
    if (from.spec.dim_mode != DimMode::TEz2D || to.spec.dim_mode != DimMode::TEz2D)
        throw ConfigError("axis_swap: TEz2D layouts required");
    if (to.spec.n_cells[0] != from.spec.n_cells[1] || to.spec.n_cells[1] != from.spec.n_cells[0])
        throw ConfigError("axis_swap: target grid is not the swapped source grid");

    auto partner = [](Family f) {
        switch (f) {
        case Family::E1: return std::pair{Family::E2, 1.0};
        case Family::E2: return std::pair{Family::E1, 1.0};
        case Family::H3: return std::pair{Family::H3, -1.0};
        case Family::E12: return std::pair{Family::E21, 1.0};
        case Family::E21: return std::pair{Family::E12, 1.0};
        default: throw ConfigError("axis_swap: unexpected family");
        }
    };
    SignedPermutation perm;
    perm.target.resize(from.state_dim());
    perm.sign.resize(from.state_dim());
    for (const auto& [fam, off] : from.state_families()) {
        const auto [dst_family, sign] = partner(fam->family());
        const auto [dst, dst_off] = to.locate(dst_family);
        for (std::size_t p = 0; p < fam->flat_len(); ++p) {
            const MultiIndex m = fam->multi_index(p);
            perm.target[off + p] = static_cast<Index>(dst_off + dst->index({m[1], m[0], 0}));
            perm.sign[off + p] = sign;
        }
    }
    return perm;
}

}  // namespace mxc
