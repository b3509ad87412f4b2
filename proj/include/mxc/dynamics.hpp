#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/SparseLU>

#include "grid.hpp"
#include "operators3d.hpp"
#include "sparse.hpp"

namespace mxc {

// One-step midpoint scheme M1 Phi_{n+1} = M2 Phi_n + (Bf f_n + Bg g_n) dW_n
//                                         + B1 E*_{n+1} + B2 E*_n + B3 R*_{n+1}.
// K = M1^{-1} is held as a sparse LU factorization; U = K M2 is materialized
// densely when the state is small enough (the terminal constraint needs its powers).
struct SchemeMatrices {
    StateLayout layout;
    double dt = 0.0;
    SpMat M1, M2, Bf, Bg, B1, B2, B3;
    std::shared_ptr<const Eigen::SparseLU<SpMat>> lu;
    MatrixXd U;  // empty unless has_dense_u()
    SpMat div_e;         // V0
    SpMat div_h_closed;  // rows of P0 whose stencil only touches evolved H

    Index state_dim() const { return static_cast<Index>(layout.state_dim()); }
    bool has_dense_u() const { return U.size() > 0; }

    VectorXd apply_K(const VectorXd& rhs) const { return lu->solve(rhs); }
    MatrixXd apply_K(const MatrixXd& rhs) const
    {
        if (rhs.cols() == 0) return MatrixXd(rhs.rows(), 0);
        return lu->solve(rhs);
    }

    VectorXd apply_U(const VectorXd& phi) const
    {
        if (has_dense_u()) return U * phi;
        return apply_K(VectorXd(M2 * phi));
    }
};

namespace detail {

inline SpMat closed_h_divergence_rows(const OperatorSet& ops)
{
    const GridSpec& s = ops.layout.spec;
    if (s.dim_mode != DimMode::Full3D || ops.P0.rows() == 0) return SpMat(0, ops.P0.cols());
    const int n1 = s.n_cells[0], n2 = s.n_cells[1], n3 = s.n_cells[2];
    std::vector<Index> rows;
    for (int i = 1; i + 1 < n1; ++i)
        for (int j = 1; j + 1 < n2; ++j)
            for (int k = 1; k + 1 < n3; ++k) rows.push_back((static_cast<Index>(i) * n2 + j) * n3 + k);
    return sparse::select_rows(ops.P0, rows);
}

}  // namespace detail

inline SchemeMatrices assemble_scheme(const OperatorSet& ops, double dt, std::size_t dense_cap = 5000)
{
    SchemeMatrices s;
    s.layout = ops.layout;
    s.dt = dt;
    const StateLayout& L = ops.layout;
    const auto ne = static_cast<Index>(L.n_e()), nh = static_cast<Index>(L.n_h()),
               ns = static_cast<Index>(L.n_star()), nr = static_cast<Index>(L.n_r());
    const std::vector<Index> rows{ne, nh, ns, nr};
    const double half = 0.5 * dt;
    const SpMat none;
    auto scaled = [](const SpMat& m, double c) {
        SpMat out = c * m;
        return out;
    };

    s.M1 = sparse::assemble_blocks(rows, rows,
                                   {{sparse::identity(ne), scaled(ops.A, -half), none, none},
                                    {scaled(ops.F, -half), sparse::identity(nh), none, none},
                                    {none, none, sparse::identity(ns), none},
                                    {none, none, none, sparse::identity(nr)}});
    s.M2 = sparse::assemble_blocks(rows, rows,
                                   {{sparse::identity(ne), scaled(ops.A, half), none, none},
                                    {scaled(ops.F, half), sparse::identity(nh), none, none},
                                    {none, none, none, none},
                                    {none, none, none, none}});
    s.Bf = sparse::assemble_blocks(rows, {ne}, {{sparse::identity(ne)}, {none}, {none}, {none}});
    s.Bg = sparse::assemble_blocks(rows, {nh}, {{none}, {sparse::identity(nh)}, {none}, {none}});
    s.B1 = sparse::assemble_blocks(rows, {ns}, {{none}, {scaled(ops.G, half)}, {sparse::identity(ns)}, {none}});
    s.B2 = sparse::assemble_blocks(rows, {ns}, {{none}, {scaled(ops.G, half)}, {none}, {none}});
    s.B3 = sparse::assemble_blocks(rows, {nr}, {{none}, {none}, {none}, {sparse::identity(nr)}});

    auto lu = std::make_shared<Eigen::SparseLU<SpMat>>();
    lu->analyzePattern(s.M1);
    lu->factorize(s.M1);
    if (lu->info() != Eigen::Success) throw SingularM1("M1 factorization failed: " + lu->lastErrorMessage());
    s.lu = std::move(lu);

    if (L.state_dim() <= dense_cap) s.U = s.lu->solve(MatrixXd(s.M2));

    s.div_e = ops.V0;
    s.div_h_closed = detail::closed_h_divergence_rows(ops);
    return s;
}

inline SchemeMatrices assemble_scheme(const OperatorSet& ops) { return assemble_scheme(ops, ops.layout.spec.dt()); }

// Realized Wiener increments dW_n = W(t_{n+1}) - W(t_n) ~ N(0, dt).
struct BrownianPath {
    std::uint64_t seed = 0;
    double dt = 0.0;
    bool frozen = false;
    std::vector<double> increments;

    int n_steps() const { return static_cast<int>(increments.size()); }

    BrownianPath scaled(double c) const
    {
        BrownianPath out = *this;
        for (double& w : out.increments) w *= c;
        return out;
    }
};

inline BrownianPath sample_path(std::uint64_t seed, int n_steps, double dt, bool frozen = false)
{
    BrownianPath path;
    path.seed = seed;
    path.dt = dt;
    path.frozen = frozen;
    path.increments.assign(static_cast<std::size_t>(n_steps), 0.0);
    if (frozen) return path;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(dt));
    for (double& w : path.increments) w = normal(rng);
    return path;
}

inline BrownianPath sample_path(std::uint64_t seed, const GridSpec& spec, bool frozen = false)
{
    return sample_path(seed, spec.n_steps, spec.dt(), frozen);
}

struct StateVector {
    VectorXd phi;
    int time_index = 0;
};

// Copy of one family's entries of a state vector.
inline VectorXd family_slice(const StateLayout& layout, const VectorXd& phi, Family f)
{
    const auto [fam, off] = layout.locate(f);
    return phi.segment(static_cast<Index>(off), static_cast<Index>(fam->flat_len()));
}

// All unknowns of the control problem, stacked over time steps:
//   f_s, g_s, gstar_s  for n = 0 .. N_t-1
//   estar_s, rstar_s   for n = 1 .. N_t
struct ControlVectors {
    VectorXd f_s, g_s, gstar_s, estar_s, rstar_s;

    static ControlVectors zeros(const StateLayout& L, int n_steps)
    {
        const auto nt = static_cast<Index>(n_steps);
        ControlVectors c;
        c.f_s = VectorXd::Zero(nt * static_cast<Index>(L.n_e()));
        c.g_s = VectorXd::Zero(nt * static_cast<Index>(L.n_h()));
        c.gstar_s = VectorXd::Zero(nt * static_cast<Index>(L.n_gstar()));
        c.estar_s = VectorXd::Zero(nt * static_cast<Index>(L.n_star()));
        c.rstar_s = VectorXd::Zero(nt * static_cast<Index>(L.n_r()));
        return c;
    }

    // Concatenation [f_s; g_s; gstar_s; estar_s; rstar_s].
    VectorXd stacked() const
    {
        VectorXd out(f_s.size() + g_s.size() + gstar_s.size() + estar_s.size() + rstar_s.size());
        out << f_s, g_s, gstar_s, estar_s, rstar_s;
        return out;
    }

    double squared_norm() const
    {
        return f_s.squaredNorm() + g_s.squaredNorm() + gstar_s.squaredNorm() + estar_s.squaredNorm() +
               rstar_s.squaredNorm();
    }

    // J = 1/2 |x|^2
    double objective() const { return 0.5 * squared_norm(); }
};

inline void check_controls(const StateLayout& L, const ControlVectors& c, int n_steps)
{
    const auto nt = static_cast<Index>(n_steps);
    if (c.f_s.size() != nt * static_cast<Index>(L.n_e()) || c.g_s.size() != nt * static_cast<Index>(L.n_h()) ||
        c.gstar_s.size() != nt * static_cast<Index>(L.n_gstar()) ||
        c.estar_s.size() != nt * static_cast<Index>(L.n_star()) || c.rstar_s.size() != nt * static_cast<Index>(L.n_r()))
        throw DimensionMismatch("control vectors do not match the layout and step count");
}

// Phi_{n+1} = U Phi_n + K((Bf f_n + Bg g_n) dW_n + B1 E*_{n+1} + B2 E*_n + B3 R*_{n+1})
inline StateVector step(const SchemeMatrices& s, const StateVector& state, const VectorXd& f_n, const VectorXd& g_n,
                        const VectorXd& estar_n, const VectorXd& estar_np1, const VectorXd& rstar_np1, double dW)
{
    const StateLayout& L = s.layout;
    if (state.phi.size() != s.state_dim() || f_n.size() != static_cast<Index>(L.n_e()) ||
        g_n.size() != static_cast<Index>(L.n_h()) || estar_n.size() != static_cast<Index>(L.n_star()) ||
        estar_np1.size() != static_cast<Index>(L.n_star()) || rstar_np1.size() != static_cast<Index>(L.n_r()))
        throw DimensionMismatch("step: vector sizes do not match the scheme layout");

    VectorXd rhs = s.M2 * state.phi;
    rhs += dW * (s.Bf * f_n);
    rhs += dW * (s.Bg * g_n);
    rhs += s.B1 * estar_np1;
    rhs += s.B2 * estar_n;
    rhs += s.B3 * rstar_np1;
    return {s.apply_K(rhs), state.time_index + 1};
}

// Largest |div E| at interior nodes and |div H| at closed-stencil cells.
struct DivergenceSample {
    double e = 0.0;
    double h = 0.0;
};

inline DivergenceSample discrete_divergence(const SchemeMatrices& s, const VectorXd& phi)
{
    DivergenceSample out;
    const auto ne = static_cast<Index>(s.layout.n_e());
    const auto nh = static_cast<Index>(s.layout.n_h());
    if (s.div_e.rows() > 0) out.e = (s.div_e * phi.head(ne)).cwiseAbs().maxCoeff();
    if (s.div_h_closed.rows() > 0) out.h = (s.div_h_closed * phi.segment(ne, nh)).cwiseAbs().maxCoeff();
    return out;
}

struct Trajectory {
    std::vector<VectorXd> states;  // Phi_0 .. Phi_{N_t}
    std::vector<DivergenceSample> divergence;

    const VectorXd& terminal() const { return states.back(); }
};

// Forward replay of a control solution along a realized path. E*_0 is read
// from the initial state; later boundary values come from the controls.
inline Trajectory replay(const SchemeMatrices& s, const VectorXd& phi0, const ControlVectors& controls,
                         const BrownianPath& path)
{
    const StateLayout& L = s.layout;
    const int nt = path.n_steps();
    check_controls(L, controls, nt);
    if (phi0.size() != s.state_dim()) throw DimensionMismatch("replay: initial state has the wrong size");

    const auto ne = static_cast<Index>(L.n_e()), nh = static_cast<Index>(L.n_h()),
               ns = static_cast<Index>(L.n_star()), nr = static_cast<Index>(L.n_r());
    Trajectory traj;
    traj.states.reserve(static_cast<std::size_t>(nt) + 1);
    traj.states.push_back(phi0);
    traj.divergence.push_back(discrete_divergence(s, phi0));

    StateVector state{phi0, 0};
    VectorXd estar_n = phi0.segment(static_cast<Index>(L.off_star()), ns);
    for (int n = 0; n < nt; ++n) {
        const VectorXd estar_np1 = controls.estar_s.segment(n * ns, ns);
        state = step(s, state, controls.f_s.segment(n * ne, ne), controls.g_s.segment(n * nh, nh), estar_n, estar_np1,
                     controls.rstar_s.segment(n * nr, nr), path.increments[static_cast<std::size_t>(n)]);
        traj.states.push_back(state.phi);
        traj.divergence.push_back(discrete_divergence(s, state.phi));
        estar_n = estar_np1;
    }
    return traj;
}

// Trapezoid weight of one sample: 1/2 per non-staggered axis sitting on the boundary.
inline double quadrature_weight(const ComponentLayout& fam, std::size_t p, const GridSpec& spec)
{
    const MultiIndex m = fam.multi_index(p);
    double w = 1.0;
    for (int d = 0; d < spec.spatial_dims(); ++d)
        if (!fam.axis(d).staggered && (m[d] == 0 || m[d] == spec.n_cells[d])) w *= 0.5;
    return w;
}

// 1/2 (|E|^2 + |H|^2) integrated with the trapezoid rule over the Yee samples
// (cell volume times weighted sum of squares over every field sample).
inline double discrete_energy(const StateLayout& layout, const VectorXd& phi)
{
    if (phi.size() != static_cast<Index>(layout.state_dim()))
        throw DimensionMismatch("discrete_energy: state has the wrong size");
    const GridSpec& s = layout.spec;
    double volume = 1.0;
    for (int d = 0; d < s.spatial_dims(); ++d) volume *= s.h(d);
    double sum = 0.0;
    for (const auto& [fam, off] : layout.state_families())
        for (std::size_t p = 0; p < fam->flat_len(); ++p) {
            const double v = phi[static_cast<Index>(off + p)];
            sum += quadrature_weight(*fam, p, s) * v * v;
        }
    return 0.5 * volume * sum;
}

}  // namespace mxc
