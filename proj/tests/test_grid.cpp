#include <gtest/gtest.h>

#include <random>
#include <set>

#include "mxc/grid.hpp"

using namespace mxc;

namespace {

GridSpec grid3(int n1, int n2, int n3)
{
    GridSpec s;
    s.n_cells = {n1, n2, n3};
    return s;
}

GridSpec grid2(int n1, int n2)
{
    GridSpec s;
    s.dim_mode = DimMode::TEz2D;
    s.n_cells = {n1, n2, 1};
    return s;
}

std::size_t len(const StateLayout& L, Family f) { return L.locate(f).first->flat_len(); }

}  // namespace

TEST(Grid, SmallCubeCounts)
{
    const StateLayout L = make_state_layout(grid3(2, 2, 2));
    EXPECT_EQ(len(L, Family::E1), 2u);
    EXPECT_EQ(L.n_e(), 6u);
    EXPECT_EQ(L.n_star(), 24u);
}

TEST(Grid, TezCounts)
{
    const StateLayout L = make_state_layout(grid2(2, 2));
    EXPECT_EQ(len(L, Family::E1), 2u);
    EXPECT_EQ(len(L, Family::H3), 4u);
    EXPECT_EQ(L.n_r(), 0u);
    EXPECT_EQ(L.n_gstar(), 0u);
}

TEST(Grid, CountFormulas)
{
    for (auto [n1, n2, n3] : std::vector<std::array<int, 3>>{{2, 2, 2}, {2, 3, 4}, {5, 3, 2}, {4, 4, 6}}) {
        const StateLayout L = make_state_layout(grid3(n1, n2, n3));
        const std::size_t ne = n1 * (n2 - 1) * (n3 - 1) + (n1 - 1) * n2 * (n3 - 1) + (n1 - 1) * (n2 - 1) * n3;
        const std::size_t nh = (n1 - 1) * n2 * n3 + n1 * (n2 - 1) * n3 + n1 * n2 * (n3 - 1);
        const std::size_t ns = 2 * n1 * (n2 + n3 - 2) + 2 * n2 * (n1 + n3 - 2) + 2 * n3 * (n1 + n2 - 2);
        const std::size_t nr = 4 * (n1 + n2 + n3) + 2 * (n2 * n3 + n1 * n3 + n1 * n2);
        EXPECT_EQ(L.n_e(), ne);
        EXPECT_EQ(L.n_h(), nh);
        EXPECT_EQ(L.n_star(), ns);
        EXPECT_EQ(L.n_r(), nr);
        EXPECT_EQ(L.n_gstar(), static_cast<std::size_t>(2 * (n2 * n3 + n1 * n3 + n1 * n2)));
    }
}

TEST(Grid, YeeIndexExamples)
{
    const StateLayout a = make_state_layout(grid3(2, 2, 2));
    EXPECT_EQ(yee_index(*a.locate(Family::E1).first, {0, 1, 1}), 0u);
    const StateLayout b = make_state_layout(grid3(2, 3, 3));
    EXPECT_EQ(yee_index(*b.locate(Family::E1).first, {1, 1, 1}), 4u);
    EXPECT_THROW(yee_index(*b.locate(Family::E1).first, {2, 1, 1}), IndexError);
    EXPECT_THROW(yee_index(*b.locate(Family::E1).first, {0, 0, 1}), IndexError);
}

TEST(Grid, BoundaryFamiliesLowFaceFirst)
{
    const StateLayout L = make_state_layout(grid3(2, 3, 4));
    const ComponentLayout& e12 = *L.locate(Family::E12).first;
    // E12: i staggered 0..1, j in {0, 3}, k 1..3; the j face is outermost
    EXPECT_EQ(e12.index({0, 0, 1}), 0u);
    EXPECT_EQ(e12.index({0, 0, 2}), 1u);
    EXPECT_EQ(e12.index({1, 0, 3}), 5u);
    EXPECT_EQ(e12.index({0, 3, 1}), 6u);
}

TEST(Grid, FamilyOffsetsFollowListingOrder)
{
    const StateLayout L = make_state_layout(grid3(2, 2, 2));
    const std::vector<std::pair<Family, std::size_t>> expect{
        {Family::E1, 0},   {Family::E2, 2},   {Family::E3, 4},   {Family::H1, 6},   {Family::H2, 10},
        {Family::H3, 14},  {Family::E12, 18}, {Family::E13, 22}, {Family::E21, 26}, {Family::E23, 30},
        {Family::E31, 34}, {Family::E32, 38}, {Family::RE1, 42}};
    for (const auto& [f, off] : expect) EXPECT_EQ(L.locate(f).second, off) << family_name(f);
    EXPECT_EQ(L.state_dim(), 6u + 12u + 24u + 48u);
}

TEST(Grid, YeeIndexRoundTrip)
{
    for (const GridSpec& s : {grid3(2, 2, 2), grid3(3, 2, 4), grid2(2, 5), grid2(7, 3)})
        for (const ComponentLayout& fam : build_layouts(s)) {
            std::set<std::size_t> seen;
            for (std::size_t p = 0; p < fam.flat_len(); ++p) {
                const MultiIndex m = yee_multi_index(fam, p);
                ASSERT_TRUE(fam.contains(m));
                ASSERT_EQ(yee_index(fam, m), p);
                seen.insert(p);
            }
            EXPECT_EQ(seen.size(), fam.flat_len());
        }
}

TEST(Grid, FlatLengthIsProductOfExtents)
{
    for (const ComponentLayout& fam : build_layouts(grid3(3, 4, 5))) {
        std::size_t prod = 1;
        for (int d = 0; d < 3; ++d) prod *= fam.axis(d).size();
        EXPECT_EQ(prod, fam.flat_len());
    }
}

TEST(Grid, BuildLayoutsFamilies)
{
    EXPECT_EQ(build_layouts(grid3(2, 2, 2)).size(), 21u);
    const auto tez = build_layouts(grid2(3, 3));
    ASSERT_EQ(tez.size(), 5u);
    EXPECT_EQ(tez[3].family(), Family::E12);
    EXPECT_EQ(tez[4].family(), Family::E21);
}

TEST(Grid, Validation)
{
    EXPECT_THROW(make_state_layout(grid3(1, 2, 2)), ConfigError);
    EXPECT_THROW(make_state_layout(grid2(2, 1)), ConfigError);
    GridSpec s = grid3(2, 2, 2);
    s.b[1] = s.a[1];
    EXPECT_THROW(s.validate(), ConfigError);
    s = grid3(2, 2, 2);
    s.t_final = 0.0;
    EXPECT_THROW(s.validate(), ConfigError);
    s = grid3(2, 2, 2);
    s.n_steps = 0;
    EXPECT_THROW(s.validate(), ConfigError);
    EXPECT_NO_THROW(grid2(2, 2).validate());
}

TEST(Grid, Coordinates)
{
    GridSpec s = grid2(4, 2);
    s.a = {-1.0, 0.0, 0.0};
    s.b = {1.0, 1.0, 0.0};
    const StateLayout L = make_state_layout(s);
    const ComponentLayout& e1 = *L.locate(Family::E1).first;
    const auto x = e1.coordinates(e1.index({2, 1, 0}), s);
    EXPECT_DOUBLE_EQ(x[0], -1.0 + 2.5 * 0.5);
    EXPECT_DOUBLE_EQ(x[1], 0.5);
}

TEST(Grid, CriticalTime)
{
    GridSpec s = grid2(2, 2);
    s.a = {-0.6, -0.8, 0.0};
    s.b = {0.6, 0.8, 0.0};
    EXPECT_DOUBLE_EQ(critical_time(s), 54.0);
    s.a = s.b = {0.0, 0.0, 0.0};
    EXPECT_DOUBLE_EQ(critical_time(s), 18.0);
    EXPECT_NEAR(critical_time(grid3(2, 2, 2)), 126.0, 1e-12);
}
