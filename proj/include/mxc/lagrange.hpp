#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>

#include "constraints.hpp"

namespace mxc {

// Set of control families removed from the problem. Tokens: f1 f2 f3 g1 g2 g3,
// a single boundary family (E12, E13, E21, E23, E31, E32), or u for the whole
// boundary control (every E_* family and R_*). Dropping g_d also drops g*_dd.
class AblationMode {
public:
    AblationMode() = default;

    static AblationMode full() { return {}; }

    static AblationMode drop(const std::vector<std::string>& tokens)
    {
        AblationMode m;
        for (const auto& t : tokens) {
            if (!is_token(t)) throw ConfigError("unknown control family '" + t + "'");
            m.dropped_.insert(t);
        }
        return m;
    }

    const std::set<std::string>& dropped() const { return dropped_; }
    bool is_full() const { return dropped_.empty(); }

    bool keeps(Family f) const
    {
        switch (f) {
        case Family::E1: return !dropped_.count("f1");
        case Family::E2: return !dropped_.count("f2");
        case Family::E3: return !dropped_.count("f3");
        case Family::H1: case Family::G11: return !dropped_.count("g1");
        case Family::H2: case Family::G22: return !dropped_.count("g2");
        case Family::H3: case Family::G33: return !dropped_.count("g3");
        case Family::E12: case Family::E13: case Family::E21: case Family::E23: case Family::E31: case Family::E32:
            return !dropped_.count("u") && !dropped_.count(std::string(family_name(f)));
        default: return !dropped_.count("u");  // R_* entries
        }
    }

    // Rejects tokens that name families absent from the layout and the empty control set.
    void validate(const StateLayout& L) const
    {
        for (const auto& t : dropped_) {
            if (t == "u") continue;
            bool present = false;
            for (const Block* b : {&L.e_h, &L.h_h, &L.e_star})
                for (const auto& fam : b->families) present |= token_of(fam.family()) == t;
            if (!present) throw ConfigError("control family '" + t + "' does not exist in " +
                                            std::string(dim_mode_name(L.spec.dim_mode)) + " mode");
        }
        if (active_tokens(L).empty()) throw ConfigError("ablation removes every control family");
    }

    // Active families, e.g. "(f1, f2, g3, E12, E21)".
    std::string label(const StateLayout& L) const
    {
        std::string out = "(";
        const auto tokens = active_tokens(L);
        for (std::size_t i = 0; i < tokens.size(); ++i) out += (i ? ", " : "") + tokens[i];
        return out + ")";
    }

    std::vector<std::string> active_tokens(const StateLayout& L) const
    {
        std::vector<std::string> out;
        for (const Block* b : {&L.e_h, &L.h_h, &L.e_star})
            for (const auto& fam : b->families)
                if (keeps(fam.family())) out.push_back(token_of(fam.family()));
        if (L.n_r() > 0 && !dropped_.count("u")) out.push_back("R*");
        return out;
    }

    static std::string token_of(Family f)
    {
        switch (f) {
        case Family::E1: return "f1";
        case Family::E2: return "f2";
        case Family::E3: return "f3";
        case Family::H1: return "g1";
        case Family::H2: return "g2";
        case Family::H3: return "g3";
        default: return std::string(family_name(f));
        }
    }

private:
    static bool is_token(const std::string& t)
    {
        static const std::set<std::string> known{"f1",  "f2",  "f3",  "g1",  "g2",  "g3", "u",
                                                 "E12", "E13", "E21", "E23", "E31", "E32"};
        return known.count(t) > 0;
    }

    std::set<std::string> dropped_;
};

struct SolveOptions {
    double rank_tolerance = 0.0;         // relative eigenvalue cutoff; 0 picks dim * eps
    double feasibility_tolerance = 1e-9; // on |terminal defect| / |xi|
    int refinement_steps = 3;
};

struct ControlSolution {
    ControlVectors controls;
    VectorXd lambda1, lambda2, lambda3;
    double objective_value = 0.0;
    double schur_condition_estimate = 0.0;
    Index effective_rank = 0;
    Index schur_dimension = 0;
    ConstraintResidual residuals;
    bool feasible = false;
    std::string label;
};

namespace detail {

inline std::vector<Index> kept_columns(const Block& block, const AblationMode& mode)
{
    std::vector<Index> out;
    for (std::size_t f = 0; f < block.families.size(); ++f)
        if (mode.keeps(block.families[f].family()))
            for (std::size_t p = 0; p < block.families[f].flat_len(); ++p)
                out.push_back(static_cast<Index>(block.offsets[f] + p));
    return out;
}

inline std::vector<Index> nonzero_rows(const SpMat& m)
{
    std::vector<char> hit(static_cast<std::size_t>(m.rows()), 0);
    for (Index c = 0; c < m.outerSize(); ++c)
        for (SpMat::InnerIterator it(m, c); it; ++it)
            if (it.value() != 0.0) hit[static_cast<std::size_t>(it.row())] = 1;
    std::vector<Index> out;
    for (std::size_t r = 0; r < hit.size(); ++r)
        if (hit[r]) out.push_back(static_cast<Index>(r));
    return out;
}

// Per-step divergence constraint D x = 0 with a factorized Gram matrix D D^T.
// Rows left empty by an ablation are removed first.
class DivergenceProjector {
public:
    DivergenceProjector() = default;

    explicit DivergenceProjector(const SpMat& d, const char* what)
    {
        rows_ = nonzero_rows(d);
        D_ = sparse::select_rows(d, rows_);
        full_rows_ = d.rows();
        if (D_.rows() == 0) return;
        gram_ = std::make_shared<Eigen::SimplicialLDLT<SpMat>>();
        const SpMat g = D_ * SpMat(D_.transpose());
        gram_->compute(g);
        if (gram_->info() != Eigen::Success)
            throw Error(std::string(what) + " Gram matrix is not invertible for this control set");
    }

    bool active() const { return D_.rows() > 0; }
    const SpMat& D() const { return D_; }

    // (D D^T)^{-1} D X^T for a dense block X (rows = state)
    MatrixXd coefficients(const MatrixXd& X) const
    {
        const MatrixXd y = D_ * X.transpose();
        return gram_->solve(y);
    }

    // Scatter per-step multipliers for the reduced rows back to the full row set.
    VectorXd expand(const VectorXd& reduced) const
    {
        VectorXd out = VectorXd::Zero(full_rows_);
        for (std::size_t r = 0; r < rows_.size(); ++r) out[rows_[r]] = reduced[static_cast<Index>(r)];
        return out;
    }

private:
    std::vector<Index> rows_;
    Index full_rows_ = 0;
    SpMat D_;
    std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> gram_;
};

// Lower triangle of s += m m^T
inline void add_gram(MatrixXd& s, const MatrixXd& m)
{
    if (m.cols() > 0) s.selfadjointView<Eigen::Lower>().rankUpdate(m);
}

struct SymmetricPseudoInverse {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig;
    double cutoff = 0.0;
    Index rank = 0;
    double condition = 0.0;

    SymmetricPseudoInverse(const MatrixXd& s, double rel_tol) : eig(s)
    {
        const VectorXd& ev = eig.eigenvalues();
        const double top = ev.size() ? std::max(ev.maxCoeff(), 0.0) : 0.0;
        const double tol = rel_tol > 0.0 ? rel_tol : static_cast<double>(s.rows()) * std::numeric_limits<double>::epsilon();
        cutoff = tol * top;
        double smallest = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < ev.size(); ++i)
            if (ev[i] > cutoff && top > 0.0) {
                ++rank;
                smallest = std::min(smallest, ev[i]);
            }
        condition = rank > 0 ? top / smallest : std::numeric_limits<double>::infinity();
    }

    VectorXd solve(const VectorXd& b) const
    {
        const MatrixXd& q = eig.eigenvectors();
        const VectorXd& ev = eig.eigenvalues();
        VectorXd c = q.transpose() * b;
        for (Index i = 0; i < c.size(); ++i) c[i] = ev[i] > cutoff && cutoff >= 0.0 && rank > 0 ? c[i] / ev[i] : 0.0;
        return q * c;
    }
};

}  // namespace detail

// Minimum-norm solve by multiplier elimination:
//   lambda1 = -(V V^T)^{-1} V Sf^T lambda3,
//   lambda2 = -(P P^T + Q Q^T)^{-1} P Sg^T lambda3,
//   (Sf Pi_f Sf^T + Sg Pi_g Sg^T + S1 S1^T + Sr Sr^T) lambda3 = xi,
// then f = V^T lambda1 + Sf^T lambda3, g = P^T lambda2 + Sg^T lambda3,
// gstar = Q^T lambda2, estar = S1^T lambda3, rstar = Sr^T lambda3.
// The Schur complement is positive semidefinite with a structural null space
// (V E is conserved by the scheme), so lambda3 comes from a truncated
// eigen-decomposition plus refinement; when xi is outside its range this
// yields the least-squares residual with minimum control norm.
inline ControlSolution solve_ablated(const ConstraintSystem& sys, const AblationMode& mode,
                                     const SolveOptions& opt = {})
{
    const StateLayout& L = sys.layout;
    mode.validate(L);
    const int nt = sys.n_steps;
    const auto ne = static_cast<Index>(L.n_e()), nh = static_cast<Index>(L.n_h()),
               ngs = static_cast<Index>(L.n_gstar()), ns = static_cast<Index>(L.n_star()),
               nr = static_cast<Index>(L.n_r());
    const Index n = sys.xi.size();

    const auto f_cols = detail::kept_columns(L.e_h, mode);
    const auto g_cols = detail::kept_columns(L.h_h, mode);
    const auto gs_cols = detail::kept_columns(L.g_star, mode);
    const auto s_cols = detail::kept_columns(L.e_star, mode);
    const bool r_kept = nr > 0 && mode.keeps(Family::RE1);

    const SpMat V0a = sparse::select_cols(sys.V0, f_cols);
    const SpMat PQ0a = sparse::hstack({sparse::select_cols(sys.P0, g_cols), sparse::select_cols(sys.Q0, gs_cols)});
    const detail::DivergenceProjector vproj(V0a, "V V^T");
    const detail::DivergenceProjector pproj(PQ0a, "P P^T + Q Q^T");
    const auto nfa = static_cast<Index>(f_cols.size()), nga = static_cast<Index>(g_cols.size()),
               ngsa = static_cast<Index>(gs_cols.size()), nsa = static_cast<Index>(s_cols.size());

    // Projected per-step blocks: Mf_n = Sf_n Pi_f, Mg_n = [Sg_n 0] Pi_g
    std::vector<MatrixXd> mf(static_cast<std::size_t>(nt)), mg(static_cast<std::size_t>(nt));
    MatrixXd schur = MatrixXd::Zero(n, n);
    for (int k = 0; k < nt; ++k) {
        const MatrixXd sf = sys.Sf.middleCols(k * ne, ne)(Eigen::all, f_cols);
        MatrixXd m = sf;
        if (vproj.active()) m -= vproj.coefficients(sf).transpose() * vproj.D();
        detail::add_gram(schur, m);
        mf[static_cast<std::size_t>(k)] = std::move(m);

        MatrixXd sg(n, nga + ngsa);
        sg.leftCols(nga) = sys.Sg.middleCols(k * nh, nh)(Eigen::all, g_cols);
        sg.rightCols(ngsa).setZero();
        if (pproj.active()) sg -= pproj.coefficients(sg).transpose() * pproj.D();
        detail::add_gram(schur, sg);
        mg[static_cast<std::size_t>(k)] = std::move(sg);

        if (nsa > 0) detail::add_gram(schur, MatrixXd(sys.S1.middleCols(k * ns, ns)(Eigen::all, s_cols)));
        if (r_kept) detail::add_gram(schur, MatrixXd(sys.Sr.middleCols(k * nr, nr)));
    }
    schur.triangularView<Eigen::StrictlyUpper>() = schur.transpose();

    const detail::SymmetricPseudoInverse pinv(schur, opt.rank_tolerance);
    VectorXd lambda3 = pinv.solve(sys.xi);
    for (int it = 0; it < opt.refinement_steps; ++it) lambda3 += pinv.solve(sys.xi - schur * lambda3);

    ControlSolution sol;
    sol.label = mode.label(L);
    sol.schur_dimension = n;
    sol.effective_rank = pinv.rank;
    sol.schur_condition_estimate = pinv.condition;
    sol.lambda3 = lambda3;
    sol.controls = ControlVectors::zeros(L, nt);
    sol.lambda1 = VectorXd::Zero(sys.V.rows());
    sol.lambda2 = VectorXd::Zero(sys.P.rows());
    const Index v_rows = sys.V0.rows(), p_rows = sys.P0.rows();

    for (int k = 0; k < nt; ++k) {
        // f_n = V0^T lambda1_n + Sf_n^T lambda3
        const MatrixXd sf = sys.Sf.middleCols(k * ne, ne)(Eigen::all, f_cols);
        VectorXd f = sf.transpose() * lambda3;
        if (vproj.active()) {
            const VectorXd l1 = -vproj.coefficients(MatrixXd(f.transpose())).col(0);
            f += vproj.D().transpose() * l1;
            sol.lambda1.segment(k * v_rows, v_rows) = vproj.expand(l1);
        }
        for (Index c = 0; c < nfa; ++c) sol.controls.f_s[k * ne + f_cols[static_cast<std::size_t>(c)]] = f[c];

        // [g_n; gstar_n] = [P0 Q0]^T lambda2_n + [Sg_n^T lambda3; 0]
        VectorXd gx = VectorXd::Zero(nga + ngsa);
        gx.head(nga) = sys.Sg.middleCols(k * nh, nh)(Eigen::all, g_cols).transpose() * lambda3;
        if (pproj.active()) {
            const VectorXd l2 = -pproj.coefficients(MatrixXd(gx.transpose())).col(0);
            gx += pproj.D().transpose() * l2;
            sol.lambda2.segment(k * p_rows, p_rows) = pproj.expand(l2);
        }
        for (Index c = 0; c < nga; ++c) sol.controls.g_s[k * nh + g_cols[static_cast<std::size_t>(c)]] = gx[c];
        for (Index c = 0; c < ngsa; ++c)
            sol.controls.gstar_s[k * ngs + gs_cols[static_cast<std::size_t>(c)]] = gx[nga + c];

        // estar = S1^T lambda3, rstar = Sr^T lambda3
        for (Index c = 0; c < nsa; ++c) {
            const Index col = k * ns + s_cols[static_cast<std::size_t>(c)];
            sol.controls.estar_s[col] = sys.S1.col(col).dot(lambda3);
        }
        if (r_kept) sol.controls.rstar_s.segment(k * nr, nr) = sys.Sr.middleCols(k * nr, nr).transpose() * lambda3;
    }

    sol.objective_value = sol.controls.objective();
    sol.residuals = constraint_residual(sys, sol.controls);
    const double scale = std::max(sol.residuals.xi_norm, 1e-300);
    sol.feasible = sol.residuals.terminal <= opt.feasibility_tolerance * scale &&
                   sol.residuals.div_e <= opt.feasibility_tolerance * std::max(1.0, sol.controls.f_s.norm()) &&
                   sol.residuals.div_h <= opt.feasibility_tolerance * std::max(1.0, sol.controls.g_s.norm());
    if (sol.residuals.xi_norm == 0.0) sol.feasible = true;
    return sol;
}

// Full control set; throws SchurSingular when the terminal target is unreachable.
inline ControlSolution solve_min_norm(const ConstraintSystem& sys, const SolveOptions& opt = {})
{
    ControlSolution sol = solve_ablated(sys, AblationMode::full(), opt);
    if (!sol.feasible)
        throw SchurSingular("terminal constraint is not attainable: relative residual " +
                                std::to_string(sol.residuals.relative_terminal()),
                            sol.effective_rank, sol.schur_dimension, sol.residuals.relative_terminal());
    return sol;
}

// Alternative ablation: keep the full-control solution and zero the dropped
// families before replay, instead of re-optimizing over the remaining ones.
inline ControlSolution truncate_solution(const ConstraintSystem& sys, const ControlSolution& full,
                                         const AblationMode& mode)
{
    const StateLayout& L = sys.layout;
    mode.validate(L);
    ControlSolution sol = full;
    sol.label = mode.label(L);
    auto zero_dropped = [&](const Block& block, VectorXd& v, std::size_t stride) {
        for (std::size_t f = 0; f < block.families.size(); ++f)
            if (!mode.keeps(block.families[f].family()))
                for (int n = 0; n < sys.n_steps; ++n)
                    v.segment(static_cast<Index>(n * stride + block.offsets[f]),
                              static_cast<Index>(block.families[f].flat_len()))
                        .setZero();
    };
    zero_dropped(L.e_h, sol.controls.f_s, L.n_e());
    zero_dropped(L.h_h, sol.controls.g_s, L.n_h());
    zero_dropped(L.g_star, sol.controls.gstar_s, L.n_gstar());
    zero_dropped(L.e_star, sol.controls.estar_s, L.n_star());
    zero_dropped(L.r_star, sol.controls.rstar_s, L.n_r());
    sol.objective_value = sol.controls.objective();
    sol.residuals = constraint_residual(sys, sol.controls);
    sol.feasible = sol.residuals.relative_terminal() <= SolveOptions{}.feasibility_tolerance;
    return sol;
}

// Full stacked constraint matrix C with x = [f_s; g_s; gstar_s; estar_s; rstar_s]
// and right-hand side d = [0; 0; xi].
inline MatrixXd dense_constraint_matrix(const ConstraintSystem& sys)
{
    const Index nf = sys.n_f(), ng = sys.n_g(), ngs = sys.n_gstar(), ns = sys.n_estar(), nr = sys.n_rstar();
    const Index rv = sys.V.rows(), rp = sys.P.rows(), rt = sys.xi.size();
    MatrixXd c = MatrixXd::Zero(rv + rp + rt, nf + ng + ngs + ns + nr);
    if (rv) c.block(0, 0, rv, nf) = MatrixXd(sys.V);
    if (rp) {
        c.block(rv, nf, rp, ng) = MatrixXd(sys.P);
        if (ngs) c.block(rv, nf + ng, rp, ngs) = MatrixXd(sys.Q);
    }
    c.block(rv + rp, 0, rt, nf) = sys.Sf;
    c.block(rv + rp, nf, rt, ng) = sys.Sg;
    c.block(rv + rp, nf + ng + ngs, rt, ns) = sys.S1;
    if (nr) c.block(rv + rp, nf + ng + ngs + ns, rt, nr) = sys.Sr;
    return c;
}

inline ControlVectors split_unknowns(const ConstraintSystem& sys, const VectorXd& x)
{
    ControlVectors c;
    Index o = 0;
    c.f_s = x.segment(o, sys.n_f());
    o += sys.n_f();
    c.g_s = x.segment(o, sys.n_g());
    o += sys.n_g();
    c.gstar_s = x.segment(o, sys.n_gstar());
    o += sys.n_gstar();
    c.estar_s = x.segment(o, sys.n_estar());
    o += sys.n_estar();
    c.rstar_s = x.segment(o, sys.n_rstar());
    return c;
}

// Independent reference: the KKT saddle system [[I, C^T], [C, 0]] [x; mu] = [0; d]
// solved directly by a complete orthogonal decomposition, no elimination.
inline ControlVectors oracle_min_norm(const ConstraintSystem& sys, Index cap = 6000)
{
    const MatrixXd c = dense_constraint_matrix(sys);
    const Index nx = c.cols(), nc = c.rows();
    if (nx + nc > cap)
        throw CapExceeded("KKT oracle size " + std::to_string(nx + nc) + " exceeds cap " + std::to_string(cap));
    MatrixXd kkt = MatrixXd::Zero(nx + nc, nx + nc);
    kkt.topLeftCorner(nx, nx).setIdentity();
    kkt.topRightCorner(nx, nc) = c.transpose();
    kkt.bottomLeftCorner(nc, nx) = c;
    VectorXd rhs = VectorXd::Zero(nx + nc);
    rhs.tail(sys.xi.size()) = sys.xi;
    const Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(kkt);
    const VectorXd sol = cod.solve(rhs);
    return split_unknowns(sys, sol.head(nx));
}

}  // namespace mxc
