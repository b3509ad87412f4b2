#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace mxc {

enum class DimMode { Full3D, TEz2D };

inline std::string_view dim_mode_name(DimMode mode)
{
    return mode == DimMode::Full3D ? "full3d" : "tez2d";
}

// Uniform box mesh plus time horizon. In TEz2D mode the third axis is ignored.
struct GridSpec {
    std::array<double, 3> a{0.0, 0.0, 0.0};
    std::array<double, 3> b{1.0, 1.0, 1.0};
    std::array<int, 3> n_cells{2, 2, 2};
    double t_final = 1.0;
    int n_steps = 1;
    DimMode dim_mode = DimMode::Full3D;

    int spatial_dims() const { return dim_mode == DimMode::Full3D ? 3 : 2; }

    double h(int d) const { return (b[d] - a[d]) / n_cells[d]; }

    double dt() const { return t_final / n_steps; }

    void validate() const
    {
        for (int d = 0; d < spatial_dims(); ++d) {
            if (!(b[d] > a[d]))
                throw ConfigError("grid: upper corner must exceed lower corner on axis " + std::to_string(d + 1));
            if (n_cells[d] < 2)
                throw ConfigError("grid: need at least 2 cells on axis " + std::to_string(d + 1) + ", got " +
                                  std::to_string(n_cells[d]));
        }
        if (!(t_final > 0.0)) throw ConfigError("grid: t_final must be positive");
        if (n_steps < 1) throw ConfigError("grid: n_steps must be positive");
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// Every vector family that appears in the stacked state or control vectors.
//   E1..H3      interior Yee samples
//   E12..E32    tangential E on the boundary faces (E_ab: component a on the faces normal to axis b)
//   G11..G33    boundary extension of the H-noise control used by the g divergence constraint
//   RE1..RH3    remaining boundary samples: E edges and normal H on faces
enum class Family : std::uint8_t {
    E1, E2, E3, H1, H2, H3,
    E12, E13, E21, E23, E31, E32,
    G11, G22, G33,
    RE1, RE2, RE3, RH1, RH2, RH3
};

inline std::string_view family_name(Family f)
{
    static constexpr std::array<std::string_view, 21> names{
        "E1",  "E2",  "E3",  "H1",  "H2",  "H3",  "E12", "E13", "E21", "E23", "E31",
        "E32", "g11", "g22", "g33", "RE1", "RE2", "RE3", "RH1", "RH2", "RH3"};
    return names[static_cast<std::size_t>(f)];
}

// Physical field component a family samples (E1..H3).
inline Family component_of(Family f)
{
    switch (f) {
    case Family::E12:
    case Family::E13:
    case Family::RE1: return Family::E1;
    case Family::E21:
    case Family::E23:
    case Family::RE2: return Family::E2;
    case Family::E31:
    case Family::E32:
    case Family::RE3: return Family::E3;
    case Family::G11:
    case Family::RH1: return Family::H1;
    case Family::G22:
    case Family::RH2: return Family::H2;
    case Family::G33:
    case Family::RH3: return Family::H3;
    default: return f;
    }
}

// Index set along one axis. `staggered` means the sample sits at index + 1/2.
struct AxisIndices {
    std::vector<int> values;
    bool staggered = false;

    std::size_t size() const { return values.size(); }

    // Position of `index` inside `values`, or npos.
    std::size_t position(int index) const
    {
        auto it = std::lower_bound(values.begin(), values.end(), index);
        if (it == values.end() || *it != index) return npos;
        return static_cast<std::size_t>(it - values.begin());
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    static AxisIndices range(int lo, int hi, bool staggered)
    {
        AxisIndices axis;
        axis.staggered = staggered;
        for (int v = lo; v <= hi; ++v) axis.values.push_back(v);
        return axis;
    }

    static AxisIndices faces(int lo, int hi)
    {
        return AxisIndices{{lo, hi}, false};
    }

    friend bool operator==(const AxisIndices&, const AxisIndices&) = default;
};

using MultiIndex = std::array<int, 3>;

// One family of Yee samples and its flattening. Indices are 0-based integer
// parts (E1 at i+1/2 is stored as i). Flattening: k fastest, then j, then i;
// if face_axis >= 0 that axis is iterated outermost so the low face precedes
// the high face.
class ComponentLayout {
public:
    ComponentLayout() = default;

    ComponentLayout(Family family, std::array<AxisIndices, 3> axes, int face_axis = -1)
        : family_(family), axes_(std::move(axes)), face_axis_(face_axis)
    {
        order_.clear();
        if (face_axis_ >= 0) order_.push_back(face_axis_);
        for (int d = 0; d < 3; ++d)
            if (d != face_axis_) order_.push_back(d);
        // stride of the fastest axis is 1
        std::size_t stride = 1;
        for (int p = 2; p >= 0; --p) {
            strides_[order_[p]] = stride;
            stride *= axes_[order_[p]].size();
        }
        flat_len_ = stride;
    }

    Family family() const { return family_; }
    const AxisIndices& axis(int d) const { return axes_[d]; }
    int face_axis() const { return face_axis_; }
    std::size_t flat_len() const { return flat_len_; }

    bool contains(const MultiIndex& m) const
    {
        for (int d = 0; d < 3; ++d)
            if (axes_[d].position(m[d]) == AxisIndices::npos) return false;
        return true;
    }

    std::size_t index(const MultiIndex& m) const
    {
        std::size_t flat = 0;
        for (int d = 0; d < 3; ++d) {
            const std::size_t pos = axes_[d].position(m[d]);
            if (pos == AxisIndices::npos)
                throw IndexError(std::string(family_name(family_)) + ": multi-index (" + std::to_string(m[0]) + "," +
                                 std::to_string(m[1]) + "," + std::to_string(m[2]) + ") out of range");
            flat += pos * strides_[d];
        }
        return flat;
    }

    MultiIndex multi_index(std::size_t flat) const
    {
        if (flat >= flat_len_) throw IndexError(std::string(family_name(family_)) + ": flat index out of range");
        MultiIndex m{};
        for (int d = 0; d < 3; ++d) {
            const std::size_t pos = (flat / strides_[d]) % axes_[d].size();
            m[d] = axes_[d].values[pos];
        }
        return m;
    }

    // Physical node position of a flat entry.
    std::array<double, 3> coordinates(std::size_t flat, const GridSpec& spec) const
    {
        const MultiIndex m = multi_index(flat);
        std::array<double, 3> x{0.0, 0.0, 0.0};
        for (int d = 0; d < spec.spatial_dims(); ++d)
            x[d] = spec.a[d] + (m[d] + (axes_[d].staggered ? 0.5 : 0.0)) * spec.h(d);
        return x;
    }

private:
    Family family_ = Family::E1;
    std::array<AxisIndices, 3> axes_{};
    int face_axis_ = -1;
    std::vector<int> order_;
    std::array<std::size_t, 3> strides_{0, 0, 0};
    std::size_t flat_len_ = 0;
};

namespace detail {

inline ComponentLayout make_layout(Family f, const GridSpec& s)
{
    using AI = AxisIndices;
    const int n1 = s.n_cells[0];
    const int n2 = s.n_cells[1];
    const int n3 = s.n_cells[2];
    const AI stag1 = AI::range(0, n1 - 1, true);
    const AI stag2 = AI::range(0, n2 - 1, true);
    const AI stag3 = AI::range(0, n3 - 1, true);
    const AI in1 = AI::range(1, n1 - 1, false);
    const AI in2 = AI::range(1, n2 - 1, false);
    const AI in3 = AI::range(1, n3 - 1, false);
    const AI f1 = AI::faces(0, n1);
    const AI f2 = AI::faces(0, n2);
    const AI f3 = AI::faces(0, n3);

    if (s.dim_mode == DimMode::TEz2D) {
        const AI flat = AI::range(0, 0, false);
        switch (f) {
        case Family::E1: return {f, {stag1, in2, flat}};
        case Family::E2: return {f, {in1, stag2, flat}};
        case Family::H3: return {f, {stag1, stag2, flat}};
        case Family::E12: return {f, {stag1, f2, flat}, 1};
        case Family::E21: return {f, {f1, stag2, flat}, 0};
        default: throw ConfigError("family " + std::string(family_name(f)) + " does not exist in TEz2D mode");
        }
    }

    switch (f) {
    case Family::E1: return {f, {stag1, in2, in3}};
    case Family::E2: return {f, {in1, stag2, in3}};
    case Family::E3: return {f, {in1, in2, stag3}};
    case Family::H1: return {f, {in1, stag2, stag3}};
    case Family::H2: return {f, {stag1, in2, stag3}};
    case Family::H3: return {f, {stag1, stag2, in3}};
    case Family::E12: return {f, {stag1, f2, in3}, 1};
    case Family::E13: return {f, {stag1, in2, f3}, 2};
    case Family::E21: return {f, {f1, stag2, in3}, 0};
    case Family::E23: return {f, {in1, stag2, f3}, 2};
    case Family::E31: return {f, {f1, in2, stag3}, 0};
    case Family::E32: return {f, {in1, f2, stag3}, 1};
    case Family::G11:
    case Family::RH1: return {f, {f1, stag2, stag3}, 0};
    case Family::G22:
    case Family::RH2: return {f, {stag1, f2, stag3}, 1};
    case Family::G33:
    case Family::RH3: return {f, {stag1, stag2, f3}, 2};
    // edges: the first boundary axis is outermost
    case Family::RE1: return {f, {stag1, f2, f3}, 1};
    case Family::RE2: return {f, {f1, stag2, f3}, 0};
    case Family::RE3: return {f, {f1, f2, stag3}, 0};
    }
    throw ConfigError("unknown family");
}

}  // namespace detail

// A stacked vector made of several families, concatenated in order.
struct Block {
    std::vector<ComponentLayout> families;
    std::vector<std::size_t> offsets;
    std::size_t size = 0;

    explicit Block(std::vector<ComponentLayout> fams = {}) : families(std::move(fams))
    {
        for (const auto& f : families) {
            offsets.push_back(size);
            size += f.flat_len();
        }
    }

    // Index of a family inside this block, or -1.
    int find(Family f) const
    {
        for (std::size_t p = 0; p < families.size(); ++p)
            if (families[p].family() == f) return static_cast<int>(p);
        return -1;
    }
};

// Ordering of Phi_n = [E_h; H_h; E_*; R_*] plus the g_* control block.
struct StateLayout {
    GridSpec spec;
    Block e_h;
    Block h_h;
    Block e_star;
    Block r_star;
    Block g_star;

    std::size_t n_e() const { return e_h.size; }
    std::size_t n_h() const { return h_h.size; }
    std::size_t n_star() const { return e_star.size; }
    std::size_t n_r() const { return r_star.size; }
    std::size_t n_gstar() const { return g_star.size; }
    std::size_t state_dim() const { return n_e() + n_h() + n_star() + n_r(); }

    std::size_t off_h() const { return n_e(); }
    std::size_t off_star() const { return n_e() + n_h(); }
    std::size_t off_r() const { return n_e() + n_h() + n_star(); }

    // Families of Phi in stacking order with their absolute offsets.
    std::vector<std::pair<const ComponentLayout*, std::size_t>> state_families() const
    {
        std::vector<std::pair<const ComponentLayout*, std::size_t>> out;
        const std::array<std::pair<const Block*, std::size_t>, 4> blocks{
            {{&e_h, 0}, {&h_h, off_h()}, {&e_star, off_star()}, {&r_star, off_r()}}};
        for (const auto& [blk, base] : blocks)
            for (std::size_t p = 0; p < blk->families.size(); ++p)
                out.emplace_back(&blk->families[p], base + blk->offsets[p]);
        return out;
    }

    // Absolute offset of a family in Phi (throws if not a state family).
    std::pair<const ComponentLayout*, std::size_t> locate(Family f) const
    {
        for (const auto& entry : state_families())
            if (entry.first->family() == f) return entry;
        throw IndexError("family " + std::string(family_name(f)) + " is not part of the state vector");
    }
};

inline StateLayout make_state_layout(const GridSpec& spec)
{
    spec.validate();
    auto mk = [&](std::initializer_list<Family> fams) {
        std::vector<ComponentLayout> out;
        for (Family f : fams) out.push_back(detail::make_layout(f, spec));
        return Block(std::move(out));
    };
    StateLayout s;
    s.spec = spec;
    if (spec.dim_mode == DimMode::TEz2D) {
        s.e_h = mk({Family::E1, Family::E2});
        s.h_h = mk({Family::H3});
        s.e_star = mk({Family::E12, Family::E21});
    } else {
        s.e_h = mk({Family::E1, Family::E2, Family::E3});
        s.h_h = mk({Family::H1, Family::H2, Family::H3});
        s.e_star = mk({Family::E12, Family::E13, Family::E21, Family::E23, Family::E31, Family::E32});
        s.r_star = mk({Family::RE1, Family::RE2, Family::RE3, Family::RH1, Family::RH2, Family::RH3});
        s.g_star = mk({Family::G11, Family::G22, Family::G33});
    }
    return s;
}

// All layouts of the grid: interior fields, E_* families, then (3-D only)
// the g_* and R_* families.
inline std::vector<ComponentLayout> build_layouts(const GridSpec& spec)
{
    const StateLayout s = make_state_layout(spec);
    std::vector<ComponentLayout> out;
    for (const Block* blk : {&s.e_h, &s.h_h, &s.e_star, &s.g_star, &s.r_star})
        out.insert(out.end(), blk->families.begin(), blk->families.end());
    return out;
}

inline std::size_t yee_index(const ComponentLayout& layout, const MultiIndex& m) { return layout.index(m); }

inline MultiIndex yee_multi_index(const ComponentLayout& layout, std::size_t flat) { return layout.multi_index(flat); }

// T* = 18(2M^2+1), M the largest distance of a box corner from the origin.
inline double critical_time(const GridSpec& spec)
{
    const int dims = spec.spatial_dims();
    double m2 = 0.0;
    for (int corner = 0; corner < (1 << dims); ++corner) {
        double r2 = 0.0;
        for (int d = 0; d < dims; ++d) {
            const double x = (corner >> d) & 1 ? spec.b[d] : spec.a[d];
            r2 += x * x;
        }
        m2 = std::max(m2, r2);
    }
    return 18.0 * (2.0 * m2 + 1.0);
}

}  // namespace mxc
