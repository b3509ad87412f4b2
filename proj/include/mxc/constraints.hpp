#pragma once

#include <vector>

#include "dynamics.hpp"
#include "operators3d.hpp"
#include "sparse.hpp"

namespace mxc {

// Stacked constraints on x = [f_s; g_s; gstar_s; estar_s; rstar_s]:
//   V f_s = 0,  P g_s + Q gstar_s = 0,
//   Sf f_s + Sg g_s + S1 estar_s + Sr rstar_s = xi.
struct ConstraintSystem {
    StateLayout layout;
    int n_steps = 0;
    SpMat V0, P0, Q0;  // per-step blocks
    SpMat V, P, Q;     // block-diagonal over the N_t steps
    MatrixXd Sf, Sg, S1, Sr;
    VectorXd xi;

    Index n_f() const { return Sf.cols(); }
    Index n_g() const { return Sg.cols(); }
    Index n_gstar() const { return static_cast<Index>(n_steps) * static_cast<Index>(layout.n_gstar()); }
    Index n_estar() const { return S1.cols(); }
    Index n_rstar() const { return Sr.cols(); }
    Index n_unknowns() const { return n_f() + n_g() + n_gstar() + n_estar() + n_rstar(); }

    // Predicted Phi_{N_t} - Phi_target for a candidate.
    VectorXd terminal_defect(const ControlVectors& c) const
    {
        VectorXd out = -xi;
        if (c.f_s.size()) out.noalias() += Sf * c.f_s;
        if (c.g_s.size()) out.noalias() += Sg * c.g_s;
        if (c.estar_s.size()) out.noalias() += S1 * c.estar_s;
        if (c.rstar_s.size()) out.noalias() += Sr * c.rstar_s;
        return out;
    }
};

struct DivergenceConstraints {
    SpMat V, P, Q;
};

inline DivergenceConstraints assemble_divergence_constraints(const OperatorSet& ops, int n_steps)
{
    const auto nt = static_cast<Index>(n_steps);
    DivergenceConstraints out;
    out.V = sparse::block_diag(ops.V0, nt);
    out.P = sparse::block_diag(ops.P0, nt);
    const SpMat q0 = ops.Q0.rows() == ops.P0.rows() ? ops.Q0 : SpMat(ops.P0.rows(), static_cast<Index>(ops.layout.n_gstar()));
    out.Q = sparse::block_diag(q0, nt);
    return out;
}

struct TerminalConstraint {
    MatrixXd Sf, Sg, S1, Sr;
    VectorXd xi;
};

// Terminal constraint from iterating the one-step recurrence.
// Block n of Sf is U^{N_t-1-n} K Bf dW_n (same for Sg, Sr without dW);
// S1 = [U^{N_t-2} S0, ..., U S0, S0, K B1] with S0 = U K B1 + K B2;
// xi = Phi_target - U^{N_t} Phi_0 - U^{N_t-1} K B2 E*_0.
inline TerminalConstraint assemble_terminal_constraint(const SchemeMatrices& s, const BrownianPath& path,
                                                       const VectorXd& phi0, const VectorXd& estar0,
                                                       const VectorXd& phi_target)
{
    if (!s.has_dense_u())
        throw CapExceeded("state dimension " + std::to_string(s.state_dim()) +
                          " exceeds the dense cap; lower the cell counts");
    const StateLayout& L = s.layout;
    const int nt = path.n_steps();
    if (nt < 1) throw DimensionMismatch("terminal constraint needs at least one step");
    const Index n = s.state_dim();
    if (phi0.size() != n || phi_target.size() != n || estar0.size() != static_cast<Index>(L.n_star()))
        throw DimensionMismatch("terminal constraint: vector sizes do not match the layout");

    const auto ne = static_cast<Index>(L.n_e()), nh = static_cast<Index>(L.n_h()),
               ns = static_cast<Index>(L.n_star()), nr = static_cast<Index>(L.n_r());

    const MatrixXd KBf = s.apply_K(MatrixXd(s.Bf));
    const MatrixXd KBg = s.apply_K(MatrixXd(s.Bg));
    const MatrixXd KB1 = s.apply_K(MatrixXd(s.B1));
    const MatrixXd KB2 = s.apply_K(MatrixXd(s.B2));
    const MatrixXd KB3 = s.apply_K(MatrixXd(s.B3));

    // W = [K Bf, K Bg, S0, K B3]; power[m] = U^m W
    MatrixXd W(n, ne + nh + ns + nr);
    W.leftCols(ne) = KBf;
    W.middleCols(ne, nh) = KBg;
    W.middleCols(ne + nh, ns).noalias() = s.U * KB1;
    W.middleCols(ne + nh, ns) += KB2;
    W.rightCols(nr) = KB3;

    TerminalConstraint t;
    t.Sf.resize(n, nt * ne);
    t.Sg.resize(n, nt * nh);
    t.S1.resize(n, nt * ns);
    t.Sr.resize(n, nt * nr);

    MatrixXd power = W;
    for (int m = 0; m < nt; ++m) {
        const int step = nt - 1 - m;  // column block fed by U^m
        const double dW = path.increments[static_cast<std::size_t>(step)];
        t.Sf.middleCols(step * ne, ne) = dW * power.leftCols(ne);
        t.Sg.middleCols(step * nh, nh) = dW * power.middleCols(ne, nh);
        t.Sr.middleCols(step * nr, nr) = power.rightCols(nr);
        // E*_{step} for step >= 1 uses U^{N_t-1-step} S0
        if (step >= 1) t.S1.middleCols((step - 1) * ns, ns) = power.middleCols(ne + nh, ns);
        if (m + 1 < nt) power = s.U * power;
    }
    t.S1.rightCols(ns) = KB1;

    VectorXd free_part = phi0;
    for (int m = 0; m < nt; ++m) free_part = s.U * free_part;
    VectorXd boundary_part = KB2 * estar0;
    for (int m = 0; m + 1 < nt; ++m) boundary_part = s.U * boundary_part;
    t.xi = phi_target - free_part - boundary_part;
    return t;
}

inline ConstraintSystem assemble_constraint_system(const OperatorSet& ops, const SchemeMatrices& s,
                                                   const BrownianPath& path, const VectorXd& phi0,
                                                   const VectorXd& phi_target)
{
    ConstraintSystem sys;
    sys.layout = s.layout;
    sys.n_steps = path.n_steps();
    sys.V0 = ops.V0;
    sys.P0 = ops.P0;
    sys.Q0 = ops.Q0.rows() == ops.P0.rows() ? ops.Q0 : SpMat(ops.P0.rows(), static_cast<Index>(s.layout.n_gstar()));
    auto div = assemble_divergence_constraints(ops, sys.n_steps);
    sys.V = std::move(div.V);
    sys.P = std::move(div.P);
    sys.Q = std::move(div.Q);
    const VectorXd estar0 = phi0.segment(static_cast<Index>(s.layout.off_star()), static_cast<Index>(s.layout.n_star()));
    auto t = assemble_terminal_constraint(s, path, phi0, estar0, phi_target);
    sys.Sf = std::move(t.Sf);
    sys.Sg = std::move(t.Sg);
    sys.S1 = std::move(t.S1);
    sys.Sr = std::move(t.Sr);
    sys.xi = std::move(t.xi);
    return sys;
}

struct ConstraintResidual {
    double div_e = 0.0;       // |V f_s|
    double div_h = 0.0;       // |P g_s + Q gstar_s|
    double terminal = 0.0;    // |terminal defect|
    double xi_norm = 0.0;

    double relative_terminal() const { return xi_norm > 0.0 ? terminal / xi_norm : terminal; }
};

inline ConstraintResidual constraint_residual(const ConstraintSystem& sys, const ControlVectors& c)
{
    check_controls(sys.layout, c, sys.n_steps);
    ConstraintResidual r;
    if (sys.V.rows() > 0) r.div_e = (sys.V * c.f_s).norm();
    if (sys.P.rows() > 0) {
        VectorXd d = sys.P * c.g_s;
        if (sys.Q.cols() > 0) d += sys.Q * c.gstar_s;
        r.div_h = d.norm();
    }
    r.terminal = sys.terminal_defect(c).norm();
    r.xi_norm = sys.xi.norm();
    return r;
}

}  // namespace mxc
