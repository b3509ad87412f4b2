#include <gtest/gtest.h>

#include <map>
#include <random>

#include "mxc/operators3d.hpp"

using namespace mxc;

namespace {

GridSpec grid3(int n1, int n2, int n3, std::array<double, 3> b = {1.0, 1.0, 1.0})
{
    GridSpec s;
    s.n_cells = {n1, n2, n3};
    s.b = b;
    return s;
}

VectorXd random_vector(Index n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    VectorXd v(n);
    for (Index i = 0; i < n; ++i) v[i] = u(rng);
    return v;
}

MatrixXd dense(const SpMat& m) { return MatrixXd(m); }

// Sample lookup (component, i, j, k) -> value over a set of blocks.
class Samples {
public:
    void add(const Block& block, const VectorXd& values)
    {
        for (std::size_t f = 0; f < block.families.size(); ++f) {
            const auto& fam = block.families[f];
            for (std::size_t p = 0; p < fam.flat_len(); ++p) {
                const MultiIndex m = fam.multi_index(p);
                map_[{component_of(fam.family()), m}] = values[static_cast<Index>(block.offsets[f] + p)];
            }
        }
    }

    double operator()(Family comp, int i, int j, int k) const { return map_.at({comp, MultiIndex{i, j, k}}); }

private:
    std::map<std::pair<Family, MultiIndex>, double> map_;
};

}  // namespace

TEST(DifferenceBlocks, PrintedExamples)
{
    const MatrixXd d2 = dense(assemble_difference_block(DifferenceBlock::D2, grid3(2, 2, 3)));
    MatrixXd expect(2, 3);
    expect << -1, 1, 0, 0, -1, 1;
    EXPECT_EQ(d2, expect);

    const MatrixXd d5 = dense(assemble_difference_block(DifferenceBlock::D5, grid3(2, 2, 2)));
    ASSERT_EQ(d5.rows(), 2);
    ASSERT_EQ(d5.cols(), 1);
    EXPECT_EQ(d5(0, 0), -1.0);
    EXPECT_EQ(d5(1, 0), 0.0);

    const MatrixXd d4 = dense(assemble_difference_block(DifferenceBlock::D4, grid3(2, 2, 2)));
    MatrixXd e4 = MatrixXd::Zero(4, 2);
    e4.bottomRows(2).setIdentity();
    EXPECT_EQ(d4, e4);
}

TEST(DifferenceBlocks, EntriesArePlusMinusOne)
{
    for (const GridSpec& s : {grid3(2, 2, 2), grid3(3, 4, 5)})
        for (int k = 0; k <= static_cast<int>(DifferenceBlock::D4p); ++k) {
            const SpMat d = assemble_difference_block(static_cast<DifferenceBlock>(k), s);
            for (Index c = 0; c < d.outerSize(); ++c)
                for (SpMat::InnerIterator it(d, c); it; ++it) EXPECT_EQ(std::abs(it.value()), 1.0);
        }
}

TEST(OperatorSet, TransposeIdentitiesExact)
{
    const std::array<std::pair<const char*, const char*>, 6> pairs{
        {{"F1", "A6"}, {"F2", "A3"}, {"F3", "A2"}, {"F4", "A5"}, {"F5", "A4"}, {"F6", "A1"}}};
    for (int n1 = 2; n1 <= 4; ++n1)
        for (int n2 = 2; n2 <= 4; ++n2)
            for (int n3 = 2; n3 <= 4; ++n3) {
                const OperatorSet ops = assemble_operator_set(grid3(n1, n2, n3, {1.0, 0.7, 1.3}));
                for (const auto& [f, a] : pairs)
                    EXPECT_EQ(sparse::max_abs(ops.sub_blocks.at(f) + SpMat(ops.sub_blocks.at(a).transpose())), 0.0);
                EXPECT_EQ(sparse::max_abs(ops.F + SpMat(ops.A.transpose())), 0.0);
            }
}

TEST(OperatorSet, Shapes)
{
    const OperatorSet ops = assemble_operator_set(grid3(3, 3, 3));
    EXPECT_EQ(ops.A.rows(), 36);
    EXPECT_EQ(ops.A.cols(), static_cast<Index>(ops.layout.n_h()));
    EXPECT_EQ(ops.G.cols(), static_cast<Index>(ops.layout.n_star()));

    const OperatorSet small = assemble_operator_set(grid3(2, 2, 2));
    EXPECT_EQ(small.sub_blocks.at("V1").rows(), 1);
    EXPECT_EQ(small.sub_blocks.at("Q1").rows(), 8);
    EXPECT_EQ(small.sub_blocks.at("Q1").cols(), 8);
    EXPECT_EQ(small.V0.rows(), 1);
    EXPECT_EQ(small.P0.rows(), 8);
}

TEST(OperatorSet, Sparsity)
{
    const OperatorSet ops = assemble_operator_set(grid3(3, 4, 5));
    EXPECT_LE(sparse::max_row_nnz(ops.A), 4);
    EXPECT_LE(sparse::max_row_nnz(ops.F), 4);
    EXPECT_LE(sparse::max_row_nnz(ops.V0), 6);
}

TEST(OperatorSet, Deterministic)
{
    const OperatorSet a = assemble_operator_set(grid3(3, 2, 4));
    const OperatorSet b = assemble_operator_set(grid3(3, 2, 4));
    for (const auto& [name, m] : a.sub_blocks) {
        const SpMat& o = b.sub_blocks.at(name);
        ASSERT_EQ(m.nonZeros(), o.nonZeros()) << name;
        EXPECT_TRUE(std::equal(m.valuePtr(), m.valuePtr() + m.nonZeros(), o.valuePtr())) << name;
        EXPECT_TRUE(std::equal(m.innerIndexPtr(), m.innerIndexPtr() + m.nonZeros(), o.innerIndexPtr())) << name;
    }
}

// div(curl) vanishes: exactly as a product of integer-valued stencils, and up
// to rounding (a few ulps of the 1/h^2-scaled entries) when applied to vectors.
TEST(OperatorSet, MimeticIdentity)
{
    std::mt19937_64 rng(11);
    for (const GridSpec& s : {grid3(2, 2, 2), grid3(3, 3, 3), grid3(2, 3, 4), grid3(4, 3, 5, {1.0, 2.0, 0.5})}) {
        const OperatorSet ops = assemble_operator_set(s);
        const SpMat va = ops.V0 * ops.A;
        EXPECT_EQ(sparse::max_abs(va), 0.0);
        for (int t = 0; t < 200; ++t) {
            const VectorXd w = random_vector(ops.A.cols(), rng);
            EXPECT_LE((ops.V0 * (ops.A * w)).cwiseAbs().maxCoeff(), 1e-13 * w.cwiseAbs().maxCoeff());
        }
    }
}

TEST(OperatorSet, ConstantFieldDivergence)
{
    const OperatorSet ops = assemble_operator_set(grid3(3, 3, 3));
    const StateLayout& L = ops.layout;
    VectorXd e = VectorXd::Zero(static_cast<Index>(L.n_e()));
    e.head(static_cast<Index>(L.locate(Family::E1).first->flat_len())).setConstant(2.5);
    EXPECT_EQ((ops.V0 * e).cwiseAbs().maxCoeff(), 0.0);
}

// Independent oracle: curl and divergence written directly on the staggered samples.
TEST(OperatorSet, MatchesStencilOracle)
{
    std::mt19937_64 rng(5);
    for (const GridSpec& s : {grid3(2, 2, 2), grid3(3, 4, 2, {1.0, 0.5, 2.0}), grid3(4, 3, 3, {2.0, 1.0, 1.0})}) {
        const OperatorSet ops = assemble_operator_set(s);
        const StateLayout& L = ops.layout;
        const double h1 = s.h(0), h2 = s.h(1), h3 = s.h(2);
        const int n1 = s.n_cells[0], n2 = s.n_cells[1], n3 = s.n_cells[2];

        const VectorXd e = random_vector(static_cast<Index>(L.n_e()), rng);
        const VectorXd h = random_vector(static_cast<Index>(L.n_h()), rng);
        const VectorXd es = random_vector(static_cast<Index>(L.n_star()), rng);
        const VectorXd gs = random_vector(static_cast<Index>(L.n_gstar()), rng);
        Samples E, H;
        E.add(L.e_h, e);
        E.add(L.e_star, es);
        H.add(L.h_h, h);
        H.add(L.g_star, gs);
        using F = Family;

        // dE/dt = curl H
        const VectorXd ah = ops.A * h;
        auto row_e = [&](F f) { return L.e_h.offsets[static_cast<std::size_t>(L.e_h.find(f))]; };
        for (const ComponentLayout& fam : L.e_h.families)
            for (std::size_t p = 0; p < fam.flat_len(); ++p) {
                const auto [i, j, k] = fam.multi_index(p);
                double v = 0.0;
                if (fam.family() == F::E1)
                    v = (H(F::H3, i, j, k) - H(F::H3, i, j - 1, k)) / h2 - (H(F::H2, i, j, k) - H(F::H2, i, j, k - 1)) / h3;
                else if (fam.family() == F::E2)
                    v = (H(F::H1, i, j, k) - H(F::H1, i, j, k - 1)) / h3 - (H(F::H3, i, j, k) - H(F::H3, i - 1, j, k)) / h1;
                else
                    v = (H(F::H2, i, j, k) - H(F::H2, i - 1, j, k)) / h1 - (H(F::H1, i, j, k) - H(F::H1, i, j - 1, k)) / h2;
                EXPECT_NEAR(ah[static_cast<Index>(row_e(fam.family()) + p)], v, 1e-12) << family_name(fam.family());
            }

        // dH/dt = -curl E, boundary tangential E entering through G
        const VectorXd fe = ops.F * e + ops.G * es;
        auto row_h = [&](F f) { return L.h_h.offsets[static_cast<std::size_t>(L.h_h.find(f))]; };
        for (const ComponentLayout& fam : L.h_h.families)
            for (std::size_t p = 0; p < fam.flat_len(); ++p) {
                const auto [i, j, k] = fam.multi_index(p);
                double v = 0.0;
                if (fam.family() == F::H1)
                    v = -((E(F::E3, i, j + 1, k) - E(F::E3, i, j, k)) / h2 - (E(F::E2, i, j, k + 1) - E(F::E2, i, j, k)) / h3);
                else if (fam.family() == F::H2)
                    v = -((E(F::E1, i, j, k + 1) - E(F::E1, i, j, k)) / h3 - (E(F::E3, i + 1, j, k) - E(F::E3, i, j, k)) / h1);
                else
                    v = -((E(F::E2, i + 1, j, k) - E(F::E2, i, j, k)) / h1 - (E(F::E1, i, j + 1, k) - E(F::E1, i, j, k)) / h2);
                EXPECT_NEAR(fe[static_cast<Index>(row_h(fam.family()) + p)], v, 1e-12) << family_name(fam.family());
            }

        // div E at interior nodes, k fastest
        const VectorXd ve = ops.V0 * e;
        Index node = 0;
        for (int i = 1; i < n1; ++i)
            for (int j = 1; j < n2; ++j)
                for (int k = 1; k < n3; ++k, ++node) {
                    const double v = (E(F::E1, i, j, k) - E(F::E1, i - 1, j, k)) / h1 +
                                     (E(F::E2, i, j, k) - E(F::E2, i, j - 1, k)) / h2 +
                                     (E(F::E3, i, j, k) - E(F::E3, i, j, k - 1)) / h3;
                    EXPECT_NEAR(ve[node], v, 1e-12);
                }

        // div H at cell centres with the g_* samples on the faces
        const VectorXd ph = ops.P0 * h + ops.Q0 * gs;
        Index cell = 0;
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n2; ++j)
                for (int k = 0; k < n3; ++k, ++cell) {
                    const double v = (H(F::H1, i + 1, j, k) - H(F::H1, i, j, k)) / h1 +
                                     (H(F::H2, i, j + 1, k) - H(F::H2, i, j, k)) / h2 +
                                     (H(F::H3, i, j, k + 1) - H(F::H3, i, j, k)) / h3;
                    EXPECT_NEAR(ph[cell], v, 1e-12);
                }
    }
}

TEST(OperatorSet, RejectsTez)
{
    GridSpec s;
    s.dim_mode = DimMode::TEz2D;
    s.n_cells = {3, 3, 1};
    EXPECT_THROW(assemble_operator_set(s), ConfigError);
}

TEST(OperatorSet, DumpBlock)
{
    const OperatorSet ops = assemble_operator_set(grid3(2, 2, 2));
    const auto file = std::filesystem::temp_directory_path() / "mxc_dump_D2.csv";
    dump_block_csv(ops, "D2", file);
    std::ifstream in(file);
    std::string first;
    std::getline(in, first);
    EXPECT_EQ(first.rfind("# block D2", 0), 0u);
    EXPECT_THROW(dump_block_csv(ops, "nope", file), ConfigError);
}
