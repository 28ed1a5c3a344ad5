#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pattern.hpp"
#include "robinson.hpp"

namespace sftsim {

inline constexpr const char* kFunctionLayer = "function";
inline constexpr const char* kOrganiteLayer = "organite";
inline constexpr const char* kModularityLayer = "modularity";

enum class PetalRole : std::uint8_t { support, transmission };

inline const char* to_string(PetalRole r) { return r == PetalRole::support ? "support" : "transmission"; }

struct Petal {
    int order = 0;
    Box box;
    PetalRole role = PetalRole::transmission;
    std::array<Pos, 4> corners{}; // sw, se, ne, nw

    int side() const { return box.w; }
};

inline long petal_side(int order) { return (2L << order) + 1; }
inline long cell_side(int order) { return (4L << (2 * order)) + 1; }

namespace detail {

inline std::optional<RobinsonSymbol> corner_at(const Pattern& p, std::size_t rl, int x, int y, int z)
{
    const auto t = decode(p.at(rl, Pos{x, y, z}));
    if (t && t->corner()) return t;
    return std::nullopt;
}

// Steps from (x, y) along s until a corner; returns the distance, or nullopt when the walk
// leaves the support or meets an undecodable tile.
inline std::optional<int> walk_to_corner(const Pattern& p, std::size_t rl, int x, int y, int z, Side s)
{
    for (int d = 1;; ++d) {
        const Pos q{x + d * dx(s), y + d * dy(s), z};
        if (!p.contains(q)) return std::nullopt;
        const auto t = decode(p.at(rl, q));
        if (!t) return std::nullopt;
        if (t->corner()) return d;
    }
}

} // namespace detail

// Petals are read off the corners: every sw-oriented corner starts the two double-arrow
// paths bounding exactly one petal.
inline std::vector<Petal> extract_petals(const Pattern& p)
{
    const std::size_t rl = p.layer_index(kRobinsonLayer);
    const Box& b = p.support();
    const int z = b.z0();
    std::vector<Petal> out;
    for (int y = b.y0(); y <= b.y1(); ++y)
        for (int x = b.x0(); x <= b.x1(); ++x) {
            const auto c = detail::corner_at(p, rl, x, y, z);
            if (!c || c->orientation() != Orientation::sw) continue;
            const auto up = detail::walk_to_corner(p, rl, x, y, z, Side::N);
            const auto right = detail::walk_to_corner(p, rl, x, y, z, Side::E);
            if (!up || !right || *up != *right) continue;
            const int d = *up;
            if (d < 2 || !std::has_single_bit(static_cast<unsigned>(d))) continue;
            const auto nw = detail::corner_at(p, rl, x, y + d, z);
            const auto se = detail::corner_at(p, rl, x + d, y, z);
            if (!nw || !se || nw->orientation() != Orientation::nw || se->orientation() != Orientation::se) continue;
            const auto top = detail::walk_to_corner(p, rl, x, y + d, z, Side::E);
            const auto east = detail::walk_to_corner(p, rl, x + d, y, z, Side::N);
            if (!top || !east || *top != d || *east != d) continue;
            const auto ne = detail::corner_at(p, rl, x + d, y + d, z);
            if (!ne || ne->orientation() != Orientation::ne) continue;
            Petal pt;
            pt.order = std::countr_zero(static_cast<unsigned>(d)) - 1;
            pt.box = Box{{x, y, z}, d + 1, d + 1, 1, 2};
            pt.role = c->effective_parity().i == 1 ? PetalRole::support : PetalRole::transmission;
            pt.corners = {Pos{x, y, z}, Pos{x + d, y, z}, Pos{x + d, y + d, z}, Pos{x, y + d, z}};
            out.push_back(pt);
        }
    std::sort(out.begin(), out.end(), [](const Petal& a, const Petal& b) {
        return std::tie(a.order, a.box.origin.x, a.box.origin.y) < std::tie(b.order, b.box.origin.x, b.box.origin.y);
    });
    return out;
}

// --- cells --------------------------------------------------------------------------------

enum class AreaFunction : std::uint8_t { computation, transfer_h, transfer_v, none };

inline const char* to_string(AreaFunction f)
{
    switch (f) {
    case AreaFunction::computation: return "computation";
    case AreaFunction::transfer_h: return "transfer-h";
    case AreaFunction::transfer_v: return "transfer-v";
    case AreaFunction::none: return "none";
    }
    return "?";
}

// Organite address: i counts row blocks from the bottom, j column blocks from the left.
struct OrganiteCoord {
    int i = 0;
    int j = 0;
    friend auto operator<=>(const OrganiteCoord&, const OrganiteCoord&) = default;
};

enum class OrganiteFunction : std::uint8_t {
    machine,
    demultiplexer,
    linear_increment,
    system_counter,
    transport,
    none
};

inline const char* to_string(OrganiteFunction f)
{
    switch (f) {
    case OrganiteFunction::machine: return "machine";
    case OrganiteFunction::demultiplexer: return "demultiplexer";
    case OrganiteFunction::linear_increment: return "linear-increment";
    case OrganiteFunction::system_counter: return "system-counter";
    case OrganiteFunction::transport: return "transport";
    case OrganiteFunction::none: return "none";
    }
    return "?";
}

// All functions of a sub-unit, in table order. (3,3) is both a demultiplexer and a
// system-counter unit.
inline std::vector<OrganiteFunction> organite_functions(OrganiteCoord c)
{
    auto is = [&](int i, int j) { return c.i == i && c.j == j; };
    std::vector<OrganiteFunction> f;
    if (is(6, 5)) f.push_back(OrganiteFunction::machine);
    if (is(1, 3) || is(3, 3) || is(6, 3) || is(3, 7) || is(6, 7)) f.push_back(OrganiteFunction::demultiplexer);
    if (is(2, 3)) f.push_back(OrganiteFunction::linear_increment);
    if (is(3, 3) || is(3, 4) || is(4, 3) || is(4, 4)) f.push_back(OrganiteFunction::system_counter);
    if (f.empty()) {
        const bool inner = c.i >= 1 && c.i <= 6 && c.j >= 1 && c.j <= 6;
        const bool channel = (inner && (c.j == 4 || c.j == 1)) || (c.j >= 1 && c.j <= 6 && (c.i == 2 || c.i == 5));
        f.push_back(channel ? OrganiteFunction::transport : OrganiteFunction::none);
    }
    return f;
}

inline OrganiteFunction organite_function(OrganiteCoord c) { return organite_functions(c).front(); }

struct Organites {
    int block = 0;              // functional lines per organite side
    std::vector<int> columns;   // functional columns, increasing
    std::vector<int> rows;      // functional rows, increasing
    std::array<Box, 64> boxes{}; // index i * 8 + j

    const Box& box(OrganiteCoord c) const { return boxes[static_cast<std::size_t>(c.i * 8 + c.j)]; }
    // Functional position (col index, row index) of the unit's grid, both in [0, block).
    Pos position(OrganiteCoord c, int col, int row) const
    {
        return Pos{columns[static_cast<std::size_t>(c.j * block + col)],
                   rows[static_cast<std::size_t>(c.i * block + row)], 0};
    }
    std::optional<OrganiteCoord> locate(Pos p) const
    {
        for (int k = 0; k < 64; ++k)
            if (boxes[static_cast<std::size_t>(k)].contains(Pos{p.x, p.y, boxes[0].z0()}))
                return OrganiteCoord{k / 8, k % 8};
        return std::nullopt;
    }
};

struct CellRecord {
    int order = 0;
    Box box;
    std::optional<Organites> organites;
    std::optional<int> modularity;
    std::optional<std::map<Pos, AreaFunction>> functions;

    int petal_order() const { return 2 * order + 1; }
    Pos center() const { return Pos{box.x0() + box.w / 2, box.y0() + box.h / 2, box.z0()}; }
    Box interior() const { return Box{{box.x0() + 1, box.y0() + 1, box.z0()}, box.w - 2, box.h - 2, 1, 2}; }
};

inline std::vector<CellRecord> cells_from_petals(std::span<const Petal> petals)
{
    std::vector<CellRecord> out;
    for (const Petal& pt : petals)
        if (pt.order % 2 == 1) out.push_back(CellRecord{(pt.order - 1) / 2, pt.box, {}, {}, {}});
    std::sort(out.begin(), out.end(), [](const CellRecord& a, const CellRecord& b) {
        return std::tie(a.order, a.box.origin.x, a.box.origin.y) < std::tie(b.order, b.box.origin.x, b.box.origin.y);
    });
    return out;
}

inline std::vector<CellRecord> detect_cells(const Pattern& p)
{
    const auto petals = extract_petals(p);
    return cells_from_petals(petals);
}

// Geometry shared by the functional-area, organite and assembler code: for each cell, which
// interior lines avoid every smaller cell, and which cell is the smallest around a position.
class CellIndex {
public:
    explicit CellIndex(std::vector<CellRecord> cells) : cells_(std::move(cells))
    {
        int top = -1;
        for (const auto& c : cells_) top = std::max(top, c.order);
        by_order_.assign(static_cast<std::size_t>(top + 1), {});
        for (std::size_t k = 0; k < cells_.size(); ++k)
            by_order_[static_cast<std::size_t>(cells_[k].order)].push_back(k);
        for (auto& v : by_order_)
            std::sort(v.begin(), v.end(), [this](std::size_t a, std::size_t b) {
                return std::tie(cells_[a].box.origin.y, cells_[a].box.origin.x) <
                       std::tie(cells_[b].box.origin.y, cells_[b].box.origin.x);
            });
    }

    const std::vector<CellRecord>& cells() const { return cells_; }
    int top_order() const { return static_cast<int>(by_order_.size()) - 1; }

    std::vector<std::size_t> of_order(int k) const
    {
        if (k < 0 || k >= static_cast<int>(by_order_.size())) return {};
        return by_order_[static_cast<std::size_t>(k)];
    }

    // Cells of smaller order lying inside c.
    std::vector<std::size_t> inner(const CellRecord& c) const
    {
        std::vector<std::size_t> out;
        for (int k = 0; k < c.order && k < static_cast<int>(by_order_.size()); ++k) {
            const auto& v = by_order_[static_cast<std::size_t>(k)];
            auto it = std::lower_bound(v.begin(), v.end(), c.box.y0(), [this](std::size_t a, int y) {
                return cells_[a].box.origin.y < y;
            });
            for (; it != v.end() && cells_[*it].box.y0() <= c.box.y1(); ++it)
                if (c.box.contains(cells_[*it].box)) out.push_back(*it);
        }
        return out;
    }

    struct Lines {
        std::vector<char> col_free; // indexed by x - interior x0
        std::vector<char> row_free; // indexed by y - interior y0
    };

    Lines free_lines(const CellRecord& c) const
    {
        const Box in = c.interior();
        Lines l{std::vector<char>(static_cast<std::size_t>(in.w), 1), std::vector<char>(static_cast<std::size_t>(in.h), 1)};
        for (std::size_t k : inner(c)) {
            const Box& b = cells_[k].box;
            for (int x = std::max(b.x0(), in.x0()); x <= std::min(b.x1(), in.x1()); ++x)
                l.col_free[static_cast<std::size_t>(x - in.x0())] = 0;
            for (int y = std::max(b.y0(), in.y0()); y <= std::min(b.y1(), in.y1()); ++y)
                l.row_free[static_cast<std::size_t>(y - in.y0())] = 0;
        }
        return l;
    }

    // Smallest cell whose interior holds p.
    std::optional<std::size_t> owner(Pos p) const
    {
        for (std::size_t k = 0; k < by_order_.size(); ++k)
            for (std::size_t idx : by_order_[k])
                if (cells_[idx].interior().contains(Pos{p.x, p.y, cells_[idx].box.z0()})) return idx;
        return std::nullopt;
    }

    // Owner map over a window: for each position, index of the smallest enclosing cell or -1.
    std::vector<int> owner_map(const Box& window) const
    {
        std::vector<int> own(window.w * static_cast<std::size_t>(window.h), -1);
        for (int k = static_cast<int>(by_order_.size()) - 1; k >= 0; --k)
            for (std::size_t idx : by_order_[static_cast<std::size_t>(k)]) {
                const Box in = cells_[idx].interior();
                for (int y = std::max(in.y0(), window.y0()); y <= std::min(in.y1(), window.y1()); ++y)
                    for (int x = std::max(in.x0(), window.x0()); x <= std::min(in.x1(), window.x1()); ++x)
                        own[static_cast<std::size_t>(y - window.y0()) * static_cast<std::size_t>(window.w) +
                            static_cast<std::size_t>(x - window.x0())] = static_cast<int>(idx);
            }
        return own;
    }

private:
    std::vector<CellRecord> cells_;
    std::vector<std::vector<std::size_t>> by_order_;
};

namespace detail {

inline bool is_blue(const Pattern& p, std::size_t rl, int x, int y, int z)
{
    const auto t = decode(p.at(rl, Pos{x, y, z}));
    return t && t->kind == Kind::BlueCorner;
}

inline AreaFunction classify(bool row_free, bool col_free)
{
    if (row_free && col_free) return AreaFunction::computation;
    if (row_free) return AreaFunction::transfer_h;
    if (col_free) return AreaFunction::transfer_v;
    return AreaFunction::none;
}

} // namespace detail

inline std::map<Pos, AreaFunction> assign_functional_areas(const CellRecord& c, const Pattern& p, const CellIndex& idx)
{
    const std::size_t rl = p.layer_index(kRobinsonLayer);
    const Box in = c.interior();
    const auto lines = idx.free_lines(c);
    std::map<Pos, AreaFunction> out;
    for (int y = in.y0(); y <= in.y1(); ++y)
        for (int x = in.x0(); x <= in.x1(); ++x)
            if (detail::is_blue(p, rl, x, y, in.z0()))
                out[Pos{x, y, in.z0()}] = detail::classify(lines.row_free[static_cast<std::size_t>(y - in.y0())] != 0,
                                                          lines.col_free[static_cast<std::size_t>(x - in.x0())] != 0);
    return out;
}

inline std::map<Pos, AreaFunction> assign_functional_areas(const CellRecord& c, const Pattern& p)
{
    return assign_functional_areas(c, p, CellIndex(detect_cells(p)));
}

namespace detail {

// Functional grid of a cell: free lines that carry blue corners on free crossings.
inline std::pair<std::vector<int>, std::vector<int>> functional_grid(const CellRecord& c, const Pattern& p,
                                                                     const CellIndex& idx)
{
    const std::size_t rl = p.layer_index(kRobinsonLayer);
    const Box in = c.interior();
    const auto lines = idx.free_lines(c);
    std::vector<int> cols, rows;
    for (int x = in.x0(); x <= in.x1(); ++x) {
        if (!lines.col_free[static_cast<std::size_t>(x - in.x0())]) continue;
        for (int y = in.y0(); y <= in.y1(); ++y)
            if (lines.row_free[static_cast<std::size_t>(y - in.y0())] && is_blue(p, rl, x, y, in.z0())) {
                cols.push_back(x);
                break;
            }
    }
    for (int y = in.y0(); y <= in.y1(); ++y) {
        if (!lines.row_free[static_cast<std::size_t>(y - in.y0())]) continue;
        for (int x = in.x0(); x <= in.x1(); ++x)
            if (lines.col_free[static_cast<std::size_t>(x - in.x0())] && is_blue(p, rl, x, y, in.z0())) {
                rows.push_back(y);
                break;
            }
    }
    return {cols, rows};
}

// Splits [lo, hi] so that part k holds entries [k*block, (k+1)*block) of `lines`.
inline std::array<std::pair<int, int>, 8> split_ranges(const std::vector<int>& lines, int block, int lo, int hi)
{
    std::array<std::pair<int, int>, 8> r{};
    for (int k = 0; k < 8; ++k) {
        const int a = k == 0 ? lo : lines[static_cast<std::size_t>(k * block - 1)] + 1;
        const int b = k == 7 ? hi : lines[static_cast<std::size_t>((k + 1) * block - 1)];
        r[static_cast<std::size_t>(k)] = {a, b};
    }
    return r;
}

} // namespace detail

// Organite signal code: 0 blank, 1 + (d1 * 16 + d2 * 4 + d3) for the three nested quadrant
// digits (digit = column bit + 2 * row bit, coarsest first), kGrayAddress for blocked corners.
inline constexpr Code kGrayAddress = 65;

inline Code address_code(OrganiteCoord c)
{
    int code = 0;
    for (int level = 2; level >= 0; --level) {
        const int bx = (c.j >> level) & 1;
        const int by = (c.i >> level) & 1;
        code = code * 4 + bx + 2 * by;
    }
    return static_cast<Code>(1 + code);
}

inline std::optional<OrganiteCoord> decode_address(Code code)
{
    if (code < 1 || code > 64) return std::nullopt;
    int v = code - 1;
    OrganiteCoord c;
    for (int level = 0; level < 3; ++level) {
        const int d = v & 3;
        c.j |= (d & 1) << level;
        c.i |= ((d >> 1) & 1) << level;
        v >>= 2;
    }
    return c;
}

struct Subdivision {
    CellRecord cell;
    std::vector<RuleViolation> violations;
};

inline Organites organite_boxes(const CellRecord& c, const Pattern& p, const CellIndex& idx)
{
    if (c.order < 3) throw Error(ErrorKind::CellTooSmall, "order " + std::to_string(c.order) + " < 3");
    auto [cols, rows] = detail::functional_grid(c, p, idx);
    if (cols.size() != rows.size() || cols.size() % 8 != 0 || cols.empty())
        throw Error(ErrorKind::InvalidArgument, "functional grid is not divisible into 8 blocks");
    Organites o;
    o.block = static_cast<int>(cols.size() / 8);
    const Box in = c.interior();
    const auto xs = detail::split_ranges(cols, o.block, in.x0(), in.x1());
    const auto ys = detail::split_ranges(rows, o.block, in.y0(), in.y1());
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
            const auto [xa, xb] = xs[static_cast<std::size_t>(j)];
            const auto [ya, yb] = ys[static_cast<std::size_t>(i)];
            o.boxes[static_cast<std::size_t>(i * 8 + j)] = Box{{xa, ya, in.z0()}, xb - xa + 1, yb - ya + 1, 1, 2};
        }
    o.columns = std::move(cols);
    o.rows = std::move(rows);
    return o;
}

// Expected organite-layer content inside cell c (order >= 3) for one blue corner position.
inline Code expected_address(const CellIndex& idx, const std::vector<int>& owner, const Box& window, Pos q,
                             const std::map<std::size_t, Organites>& parts)
{
    const int own = owner[static_cast<std::size_t>(q.y - window.y0()) * static_cast<std::size_t>(window.w) +
                          static_cast<std::size_t>(q.x - window.x0())];
    if (own < 0) return kBlank;
    const CellRecord& c = idx.cells()[static_cast<std::size_t>(own)];
    if (c.order < 3) return kGrayAddress;
    const auto it = parts.find(static_cast<std::size_t>(own));
    if (it == parts.end()) return kBlank;
    const Organites& o = it->second;
    if (!std::binary_search(o.columns.begin(), o.columns.end(), q.x) ||
        !std::binary_search(o.rows.begin(), o.rows.end(), q.y))
        return kBlank;
    const auto u = o.locate(q);
    return u ? address_code(*u) : kBlank;
}

// Splits an order >= 3 cell into its 64 organites and checks the organite signal layer
// inside it, when p carries one.
inline Subdivision subdivide_cell(const CellRecord& c, const Pattern& p, const CellIndex& idx)
{
    if (c.order < 3) throw Error(ErrorKind::CellTooSmall, "order " + std::to_string(c.order) + " < 3");
    if (!p.support().contains(c.box)) throw Error(ErrorKind::InvalidArgument, "cell outside pattern");
    Subdivision s{c, {}};
    s.cell.organites = organite_boxes(c, p, idx);
    if (!p.has_layer(kOrganiteLayer)) return s;
    const std::size_t ol = p.layer_index(kOrganiteLayer);
    const std::size_t rl = p.layer_index(kRobinsonLayer);
    const Box in = c.interior();
    const auto owner = idx.owner_map(in);
    std::map<std::size_t, Organites> parts;
    for (std::size_t k = 0; k < idx.cells().size(); ++k)
        if (idx.cells()[k].box == c.box) parts.emplace(k, *s.cell.organites);
    for (int y = in.y0(); y <= in.y1(); ++y)
        for (int x = in.x0(); x <= in.x1(); ++x) {
            const Pos q{x, y, in.z0()};
            const int own = owner[static_cast<std::size_t>(y - in.y0()) * static_cast<std::size_t>(in.w) +
                                  static_cast<std::size_t>(x - in.x0())];
            const bool mine = own >= 0 && idx.cells()[static_cast<std::size_t>(own)].box == c.box;
            const Code got = p.at(ol, q);
            if (!detail::is_blue(p, rl, x, y, in.z0())) {
                if (got != kBlank) s.violations.push_back({"organite-localization", {q}, "signal off a blue corner"});
                continue;
            }
            if (!mine) {
                const bool small = own >= 0 && idx.cells()[static_cast<std::size_t>(own)].order < 3;
                if (small && got != kGrayAddress)
                    s.violations.push_back({"organite-gray", {q}, "blue corner of a small cell not gray"});
                continue;
            }
            const Code want = expected_address(idx, owner, in, q, parts);
            if (got != want)
                s.violations.push_back({"organite-address", {q},
                                        "expected " + std::to_string(want) + ", found " + std::to_string(got)});
        }
    return s;
}

inline Subdivision subdivide_cell(const CellRecord& c, const Pattern& p)
{
    if (c.order < 3) throw Error(ErrorKind::CellTooSmall, "order " + std::to_string(c.order) + " < 3");
    return subdivide_cell(c, p, CellIndex(detect_cells(p)));
}

// --- modularity marks -----------------------------------------------------------------------

// Layer codes: 1 + mark on the east half of the north side, 5 + mark at the north-east
// corner, where the pair (mark, mark + 1) is handed to the enclosing level.
inline constexpr Code modularity_code(int mark) { return static_cast<Code>(1 + (mark & 3)); }
inline constexpr Code modularity_pair_code(int mark) { return static_cast<Code>(5 + (mark & 3)); }

struct ModularityReport {
    std::vector<CellRecord> cells;
    std::vector<RuleViolation> violations;
};

namespace detail {

// Smallest strictly larger cell around each cell. Cells of one order are disjoint, so a
// bucket grid of cell side per order finds the candidate in constant time.
inline std::vector<std::optional<std::size_t>> enclosing_all(const std::vector<CellRecord>& cells)
{
    auto fdiv = [](long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); };
    std::map<int, std::map<std::pair<long, long>, std::vector<std::size_t>>> grid;
    for (std::size_t m = 0; m < cells.size(); ++m) {
        const long s = cell_side(cells[m].order);
        grid[cells[m].order][{fdiv(cells[m].box.x0(), s), fdiv(cells[m].box.y0(), s)}].push_back(m);
    }
    std::vector<std::optional<std::size_t>> out(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
        for (auto it = grid.upper_bound(cells[k].order); it != grid.end() && !out[k]; ++it) {
            const long s = cell_side(it->first);
            const long bx = fdiv(cells[k].box.x0(), s), by = fdiv(cells[k].box.y0(), s);
            for (long dx = -1; dx <= 0 && !out[k]; ++dx)
                for (long dy = -1; dy <= 0 && !out[k]; ++dy) {
                    const auto b = it->second.find({bx + dx, by + dy});
                    if (b == it->second.end()) continue;
                    for (std::size_t m : b->second)
                        if (cells[m].box.contains(cells[k].box)) out[k] = m;
                }
        }
    }
    return out;
}

} // namespace detail

inline ModularityReport modularity_marks(std::vector<CellRecord> cells)
{
    ModularityReport r;
    for (auto& c : cells) c.modularity = c.order % 4;
    const auto parents = detail::enclosing_all(cells);
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const auto& c = cells[k];
        if (c.order == 0 && *c.modularity != 0)
            r.violations.push_back({"modularity-initialization", {c.box.origin}, "order-0 mark must be 0"});
        const auto& parent = parents[k];
        if (parent && cells[*parent].order == c.order + 1 && *cells[*parent].modularity != (*c.modularity + 1) % 4)
            r.violations.push_back({"modularity-transformation", {c.box.origin, cells[*parent].box.origin},
                                    "parent mark is not child mark + 1"});
    }
    r.cells = std::move(cells);
    return r;
}

inline void paint_modularity(Pattern& p, const std::vector<CellRecord>& cells)
{
    const std::size_t ml = p.add_layer(kModularityLayer);
    for (const auto& c : cells) {
        const int mark = c.order % 4;
        const int y = c.box.y1();
        for (int x = c.center().x; x <= c.box.x1(); ++x)
            if (p.contains(Pos{x, y, c.box.z0()})) p.set(ml, Pos{x, y, c.box.z0()}, modularity_code(mark));
        if (p.contains(Pos{c.box.x1(), y, c.box.z0()}))
            p.set(ml, Pos{c.box.x1(), y, c.box.z0()}, modularity_pair_code(mark));
    }
}

// Checks the modularity layer of p against the detected cells.
inline std::vector<RuleViolation> validate_modularity_layer(const Pattern& p, const std::vector<CellRecord>& cells)
{
    std::vector<RuleViolation> out;
    const std::size_t ml = p.layer_index(kModularityLayer);
    const Box& b = p.support();
    Pattern expect(b, {kModularityLayer});
    paint_modularity(expect, cells);
    for (int y = b.y0(); y <= b.y1(); ++y)
        for (int x = b.x0(); x <= b.x1(); ++x) {
            const Pos q{x, y, b.z0()};
            const Code got = p.at(ml, q), want = expect.at(0, q);
            if (got == want) continue;
            if (want == kBlank) out.push_back({"modularity-localization", {q}, "mark outside a north-east segment"});
            else if (got == kBlank) out.push_back({"modularity-localization", {q}, "missing mark"});
            else out.push_back({"modularity-level", {q}, "mark is not the level modulo 4"});
        }
    // local hand-over between consecutive levels, read from the layer itself
    auto read = [&](const CellRecord& c) -> std::optional<int> {
        const Code v = p.at(ml, Pos{c.box.x1(), c.box.y1(), c.box.z0()});
        if (v >= 5 && v <= 8) return v - 5;
        return std::nullopt;
    };
    const auto parents = detail::enclosing_all(cells);
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const auto mine = read(cells[k]);
        if (cells[k].order == 0 && mine && *mine != 0)
            out.push_back({"modularity-initialization", {cells[k].box.origin}, "order-0 cell not marked 0"});
        const auto& parent = parents[k];
        if (!parent || cells[*parent].order != cells[k].order + 1) continue;
        const auto up = read(cells[*parent]);
        if (mine && up && *up != (*mine + 1) % 4)
            out.push_back({"modularity-transformation", {cells[k].box.origin, cells[*parent].box.origin},
                           "enclosing mark is not mark + 1"});
    }
    sort_violations(out);
    return out;
}

} // namespace sftsim
