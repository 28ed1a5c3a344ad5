#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "pattern.hpp"

namespace sftsim {

inline constexpr const char* kRobinsonLayer = "robinson";
inline constexpr const char* kAlignmentLayer = "alignment";

enum class Side : std::uint8_t { N = 0, E = 1, S = 2, W = 3 };

constexpr Side opposite(Side s) { return static_cast<Side>((static_cast<int>(s) + 2) & 3); }
constexpr int dx(Side s) { return s == Side::E ? 1 : (s == Side::W ? -1 : 0); }
constexpr int dy(Side s) { return s == Side::N ? 1 : (s == Side::S ? -1 : 0); }

// Rotation index of a corner; rotating a corner by 90 degrees counterclockwise adds one.
enum class Orientation : std::uint8_t { sw = 0, se = 1, ne = 2, nw = 3 };

constexpr Orientation rotate(Orientation o, int quarter_turns)
{
    return static_cast<Orientation>((static_cast<int>(o) + quarter_turns) & 3);
}

constexpr Orientation quadrant_orientation(int qx, int qy)
{
    if (qx == 0) return qy == 0 ? Orientation::sw : Orientation::nw;
    return qy == 0 ? Orientation::se : Orientation::ne;
}

inline const char* to_string(Orientation o)
{
    switch (o) {
    case Orientation::sw: return "sw";
    case Orientation::se: return "se";
    case Orientation::ne: return "ne";
    case Orientation::nw: return "nw";
    }
    return "?";
}

inline std::optional<Orientation> parse_orientation(std::string_view s)
{
    if (s == "sw") return Orientation::sw;
    if (s == "se") return Orientation::se;
    if (s == "ne") return Orientation::ne;
    if (s == "nw") return Orientation::nw;
    return std::nullopt;
}

// Alignment layer code: 0 blank, otherwise orientation + 1.
constexpr Code alignment_code(Orientation o) { return static_cast<Code>(static_cast<int>(o) + 1); }
constexpr std::optional<Orientation> alignment_mark(Code c)
{
    if (c < 1 || c > 4) return std::nullopt;
    return static_cast<Orientation>(c - 1);
}

// Arrow positions along an edge, measured in the edge's own coordinate (x on N/S edges,
// y on E/W edges).
namespace lines {
inline constexpr std::uint8_t lo = 1;
inline constexpr std::uint8_t mid = 2;
inline constexpr std::uint8_t hi = 4;
} // namespace lines

struct Edge {
    bool out = false;
    std::uint8_t lines = 0;
    friend constexpr bool operator==(const Edge&, const Edge&) = default;
};

constexpr std::uint8_t mirror_lines(std::uint8_t l)
{
    return static_cast<std::uint8_t>((l & lines::mid) | ((l & lines::lo) ? lines::hi : 0) |
                                     ((l & lines::hi) ? lines::lo : 0));
}

constexpr bool edges_match(Edge a, Edge b) { return a.lines == b.lines && a.out != b.out; }

enum class Kind : std::uint8_t { BlueCorner, RedCorner, Arrow3, Arrow5, Arrow4, Arrow4Hi, Arrow6, Arrow6Hi };
inline constexpr int kKindCount = 8;

constexpr bool is_corner(Kind k) { return k == Kind::BlueCorner || k == Kind::RedCorner; }
constexpr bool single_long_arrow(Kind k) { return k == Kind::Arrow3 || k == Kind::Arrow5; }
constexpr bool double_sides(Kind k)
{
    return k == Kind::Arrow5 || k == Kind::Arrow6 || k == Kind::Arrow6Hi;
}

inline const char* to_string(Kind k)
{
    switch (k) {
    case Kind::BlueCorner: return "blue-corner";
    case Kind::RedCorner: return "red-corner";
    case Kind::Arrow3: return "arrow3";
    case Kind::Arrow5: return "arrow5";
    case Kind::Arrow4: return "arrow4";
    case Kind::Arrow4Hi: return "arrow4-hi";
    case Kind::Arrow6: return "arrow6";
    case Kind::Arrow6Hi: return "arrow6-hi";
    }
    return "?";
}

struct Parity {
    std::uint8_t i = 0; // carried along rows
    std::uint8_t j = 0; // carried along columns
    friend constexpr bool operator==(const Parity&, const Parity&) = default;
};

struct RobinsonSymbol {
    Kind kind = Kind::BlueCorner;
    std::uint8_t rotation = 0;
    std::optional<Parity> parity;        // arrows only
    std::optional<std::uint8_t> red_bit; // red corners only
    std::optional<Orientation> alignment;

    bool corner() const { return is_corner(kind); }
    Orientation orientation() const { return static_cast<Orientation>(rotation & 3); }
    // Arrows have exactly one outgoing edge: the head of the long arrow.
    Side long_arrow() const { return static_cast<Side>((2 + 3 * rotation) & 3); }
    Parity effective_parity() const
    {
        if (parity) return *parity;
        const std::uint8_t b = red_bit.value_or(0);
        return Parity{b, b};
    }
    friend bool operator==(const RobinsonSymbol&, const RobinsonSymbol&) = default;
};

namespace detail {

using EdgeSet = std::array<Edge, 4>; // indexed by Side

constexpr Edge in(std::uint8_t l) { return Edge{false, l}; }
constexpr Edge out(std::uint8_t l) { return Edge{true, l}; }

constexpr std::uint8_t LC = lines::lo | lines::mid;
constexpr std::uint8_t CH = lines::mid | lines::hi;
constexpr std::uint8_t C = lines::mid;

// Unrotated shapes: long arrow exits south; corners emit the double arrows north and east.
constexpr std::array<EdgeSet, kKindCount> kBaseEdges{{
    {out(LC), out(LC), out(C), out(C)}, // blue corner
    {out(LC), out(LC), out(C), out(C)}, // red corner
    {in(C), in(C), out(C), in(C)},      // 3 arrows
    {in(C), in(LC), out(C), in(LC)},    // 5 arrows
    {in(LC), in(C), out(LC), in(C)},    // 4 arrows
    {in(CH), in(C), out(CH), in(C)},    // 4 arrows, double on the high side
    {in(LC), in(LC), out(LC), in(LC)},  // 6 arrows
    {in(CH), in(LC), out(CH), in(LC)},  // 6 arrows, double on the high side
}};

constexpr EdgeSet rotate_ccw(const EdgeSet& e)
{
    auto flip = [](Edge x) { return Edge{x.out, mirror_lines(x.lines)}; };
    EdgeSet r{};
    r[0] = flip(e[1]);
    r[1] = e[2];
    r[2] = flip(e[3]);
    r[3] = e[0];
    return r;
}

struct EdgeTable {
    std::array<std::array<EdgeSet, 4>, kKindCount> edges{};
    // packed four edges -> kind * 4 + rotation, arrows only; -1 when no tile
    std::vector<std::int16_t> arrow_by_edges;

    EdgeTable() : arrow_by_edges(1 << 16, -1)
    {
        for (int k = 0; k < kKindCount; ++k) {
            EdgeSet cur = kBaseEdges[static_cast<std::size_t>(k)];
            for (int r = 0; r < 4; ++r) {
                edges[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)] = cur;
                if (!is_corner(static_cast<Kind>(k))) arrow_by_edges[pack(cur)] = static_cast<std::int16_t>(k * 4 + r);
                cur = rotate_ccw(cur);
            }
        }
    }

    static std::size_t pack(const EdgeSet& e)
    {
        std::size_t key = 0;
        for (int s = 0; s < 4; ++s) key |= static_cast<std::size_t>((e[s].out ? 8 : 0) | e[s].lines) << (4 * s);
        return key;
    }
};

inline const EdgeTable& edge_table()
{
    static const EdgeTable t;
    return t;
}

} // namespace detail

inline Edge edge_of(Kind k, int rotation, Side s)
{
    return detail::edge_table()
        .edges[static_cast<std::size_t>(k)][static_cast<std::size_t>(rotation & 3)][static_cast<std::size_t>(s)];
}

inline Edge edge_of(const RobinsonSymbol& t, Side s) { return edge_of(t.kind, t.rotation, s); }

inline Edge corner_edge(Orientation o, Side s) { return edge_of(Kind::BlueCorner, static_cast<int>(o), s); }

// Robinson layer code: 1 + ((kind * 4 + rotation) * 2 + i) * 2 + j, corners storing their bit in i and j.
inline Code encode(const RobinsonSymbol& t)
{
    const Parity p = t.effective_parity();
    return static_cast<Code>(1 + ((static_cast<int>(t.kind) * 4 + (t.rotation & 3)) * 2 + p.i) * 2 + p.j);
}

inline constexpr Code kMaxRobinsonCode = 1 + kKindCount * 16 - 1;

namespace detail {

inline std::optional<RobinsonSymbol> decode_slow(Code c)
{
    if (c < 1 || c > kMaxRobinsonCode) return std::nullopt;
    const int v = c - 1;
    const int j = v & 1;
    const int i = (v >> 1) & 1;
    const int rot = (v >> 2) & 3;
    const auto kind = static_cast<Kind>(v >> 4);
    RobinsonSymbol t{kind, static_cast<std::uint8_t>(rot), std::nullopt, std::nullopt, std::nullopt};
    if (kind == Kind::BlueCorner) {
        if (i != 0 || j != 0) return std::nullopt;
    } else if (kind == Kind::RedCorner) {
        if (i != j) return std::nullopt;
        t.red_bit = static_cast<std::uint8_t>(i);
    } else {
        t.parity = Parity{static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(j)};
    }
    return t;
}

inline const std::array<std::optional<RobinsonSymbol>, kMaxRobinsonCode + 1>& decode_table()
{
    static const auto table = [] {
        std::array<std::optional<RobinsonSymbol>, kMaxRobinsonCode + 1> t{};
        for (int c = 0; c <= kMaxRobinsonCode; ++c) t[static_cast<std::size_t>(c)] = decode_slow(static_cast<Code>(c));
        return t;
    }();
    return table;
}

} // namespace detail

inline std::optional<RobinsonSymbol> decode(Code c)
{
    if (c > kMaxRobinsonCode) return std::nullopt;
    return detail::decode_table()[c];
}

// --- geometry of the limit configuration ------------------------------------------------

struct Limits {
    int max_supertile_order = 10;
    int max_window_side = 8192;
};

// Parity phase of a row or column index: 0 on even lines, otherwise the parity of the
// level of the cross running along that line.
constexpr std::uint8_t line_level_parity(long t)
{
    if ((t & 1) == 0) return 0;
    return static_cast<std::uint8_t>(std::countr_zero(static_cast<unsigned long>(t + 1)) & 1);
}

namespace detail {

// Edge exposed by a supertile of the given order and orientation on `side`, at offset t
// along that side.
inline Edge border_edge(Orientation o, int order, Side side, long t)
{
    for (;;) {
        if (order == 0) return corner_edge(o, side);
        const long half = 1L << order;
        const long ctr = half - 1;
        if (t == ctr) return corner_edge(o, side);
        const int high = t > ctr ? 1 : 0;
        if (high) t -= half;
        int qx = 0, qy = 0;
        switch (side) {
        case Side::E: qx = 1; qy = high; break;
        case Side::W: qx = 0; qy = high; break;
        case Side::N: qy = 1; qx = high; break;
        case Side::S: qy = 0; qx = high; break;
        }
        o = quadrant_orientation(qx, qy);
        --order;
    }
}

inline Edge facing(Edge neighbour_edge) { return Edge{!neighbour_edge.out, neighbour_edge.lines}; }

} // namespace detail

// Tile at (x, y) of the supertile St_o(top_order) whose lower-left tile is (0, 0).
// top_order < 0 selects the quarter-plane limit of St_sw(n) as n grows.
inline RobinsonSymbol tile_at(long x, long y, int top_order = -1, Orientation top = Orientation::sw)
{
    for (int m = 0;; ++m) {
        const long span = 2L << m;
        const long half = 1L << m;
        const bool is_top = m == top_order;
        const long u = is_top ? x : (x & (span - 1));
        const long v = is_top ? y : (y & (span - 1));
        if (!is_top && (u == span - 1 || v == span - 1)) continue;
        const long ctr = half - 1;
        const Orientation o = is_top ? top
                                     : quadrant_orientation(static_cast<int>((x >> (m + 1)) & 1),
                                                            static_cast<int>((y >> (m + 1)) & 1));
        RobinsonSymbol t;
        if (u == ctr && v == ctr) {
            t.rotation = static_cast<std::uint8_t>(o);
            if (m == 0) {
                t.kind = Kind::BlueCorner;
            } else {
                t.kind = Kind::RedCorner;
                t.red_bit = static_cast<std::uint8_t>(m & 1);
            }
            return t;
        }
        Side d;
        detail::EdgeSet e{};
        if (u == ctr) {
            d = v > ctr ? Side::N : Side::S;
            const int qy = v > ctr ? 1 : 0;
            const long tt = v > ctr ? v - half : v;
            e[static_cast<std::size_t>(Side::W)] =
                detail::facing(detail::border_edge(quadrant_orientation(0, qy), m - 1, Side::E, tt));
            e[static_cast<std::size_t>(Side::E)] =
                detail::facing(detail::border_edge(quadrant_orientation(1, qy), m - 1, Side::W, tt));
        } else {
            d = u > ctr ? Side::E : Side::W;
            const int qx = u > ctr ? 1 : 0;
            const long tt = u > ctr ? u - half : u;
            e[static_cast<std::size_t>(Side::S)] =
                detail::facing(detail::border_edge(quadrant_orientation(qx, 0), m - 1, Side::N, tt));
            e[static_cast<std::size_t>(Side::N)] =
                detail::facing(detail::border_edge(quadrant_orientation(qx, 1), m - 1, Side::S, tt));
        }
        const Edge along = corner_edge(o, d);
        e[static_cast<std::size_t>(d)] = along;
        e[static_cast<std::size_t>(opposite(d))] = detail::facing(along);
        const int found = detail::edge_table().arrow_by_edges[detail::EdgeTable::pack(e)];
        if (found < 0) throw std::logic_error("no arrow tile fits the cross arm");
        t.kind = static_cast<Kind>(found / 4);
        t.rotation = static_cast<std::uint8_t>(found % 4);
        t.parity = Parity{line_level_parity(y), line_level_parity(x)};
        if (single_long_arrow(t.kind)) t.alignment = o;
        return t;
    }
}

namespace detail {

inline Pattern render_frame(const Box& window, int top_order, Orientation top)
{
    Pattern p(window, {kRobinsonLayer, kAlignmentLayer});
    const std::size_t rl = 0, al = 1;
    for (int y = window.y0(); y <= window.y1(); ++y)
        for (int x = window.x0(); x <= window.x1(); ++x) {
            const RobinsonSymbol t = tile_at(x, y, top_order, top);
            p.set(rl, x, y, encode(t));
            if (t.alignment) p.set(al, x, y, alignment_code(*t.alignment));
        }
    return p;
}

} // namespace detail

inline long supertile_side(int order) { return (2L << order) - 1; }

// St_corner(n): side 2^{n+1}-1, lower-left tile at (0, 0).
inline Pattern generate_supertile(Orientation corner, int n, const Limits& lim = {})
{
    if (n < 0) throw Error(ErrorKind::InvalidArgument, "negative order");
    if (n > lim.max_supertile_order)
        throw Error(ErrorKind::OrderTooLarge,
                    "order " + std::to_string(n) + " exceeds cap " + std::to_string(lim.max_supertile_order));
    const int side = static_cast<int>(supertile_side(n));
    return detail::render_frame(Box::square(0, 0, side), n, corner);
}

// Window of the quarter-plane limit configuration. Every St_sw(m) with m >= n sits at the
// origin of that configuration, so the window agrees with any such supertile it fits in.
inline Pattern tile_plane(int n, const Box& window, const Limits& lim = {})
{
    if (n < 0) throw Error(ErrorKind::InvalidArgument, "negative order");
    if (window.w > lim.max_window_side || window.h > lim.max_window_side)
        throw Error(ErrorKind::WindowTooLarge, "window side exceeds cap " + std::to_string(lim.max_window_side));
    if (window.x0() < 0 || window.y0() < 0 || window.dims != 2)
        throw Error(ErrorKind::InvalidWindow, "window must be 2D with non-negative origin");
    return detail::render_frame(window, -1, Orientation::sw);
}

inline int ceil_log2(long n)
{
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "log of non-positive value");
    return n == 1 ? 0 : static_cast<int>(std::bit_width(static_cast<unsigned long>(n - 1)));
}

inline int chi(long n) { return ceil_log2(n) + 4; }
inline int chi_prime(long n) { return (ceil_log2(n) + 1) / 2 + 2; }

// --- local rules ------------------------------------------------------------------------

namespace detail {

struct RuleScan {
    const Pattern& p;
    std::size_t rl;
    std::optional<std::size_t> al;
    std::vector<RuleViolation> out;

    std::optional<RobinsonSymbol> sym(int x, int y, int z) const { return decode(p.at(rl, Pos{x, y, z})); }
    bool inside(int x, int y, int z) const { return p.contains(Pos{x, y, z}); }
    void flag(const char* rule, std::vector<Pos> ps, std::string detail)
    {
        out.push_back(RuleViolation{rule, std::move(ps), std::move(detail)});
    }
    std::optional<Orientation> mark(int x, int y, int z) const
    {
        return alignment_mark(p.at(*al, Pos{x, y, z}));
    }

    void rows(int ylo, int yhi)
    {
        const Box& b = p.support();
        for (int z = b.z0(); z <= b.z1(); ++z)
            for (int y = ylo; y <= yhi; ++y)
                for (int x = b.x0(); x <= b.x1(); ++x) position(x, y, z);
    }

    void position(int x, int y, int z)
    {
        const Pos here{x, y, z};
        const auto t = sym(x, y, z);
        if (!t) {
            flag("invalid-symbol", {here}, "code " + std::to_string(p.at(rl, here)));
            return;
        }
        for (Side s : {Side::E, Side::N}) {
            const int nx = x + dx(s), ny = y + dy(s);
            if (!inside(nx, ny, z)) continue;
            const auto u = sym(nx, ny, z);
            if (!u) continue;
            if (!edges_match(edge_of(*t, s), edge_of(*u, opposite(s))))
                flag("arrow-correspondence", {here, Pos{nx, ny, z}}, "edges do not match");
            const Parity a = t->effective_parity(), c = u->effective_parity();
            if (s == Side::E && a.i != c.i)
                flag("parity-transmission", {here, Pos{nx, ny, z}}, "row bit differs");
            if (s == Side::N && a.j != c.j)
                flag("parity-transmission", {here, Pos{nx, ny, z}}, "column bit differs");
        }
        if (double_sides(t->kind) && t->parity && t->parity->i == t->parity->j)
            flag("parity-inequality", {here}, "5/6-arrow tile with equal bits");

        blue_density(*t, x, y, z);
        if (al) alignment(*t, x, y, z);
    }

    bool blue(int x, int y, int z) const
    {
        const auto t = sym(x, y, z);
        return t && t->kind == Kind::BlueCorner;
    }

    void blue_density(const RobinsonSymbol& t, int x, int y, int z)
    {
        if (inside(x + 1, y + 1, z) &&
            !(t.kind == Kind::BlueCorner || blue(x + 1, y, z) || blue(x, y + 1, z) || blue(x + 1, y + 1, z)))
            flag("blue-density", {Pos{x, y, z}}, "2x2 square without blue corner");
        if (t.kind != Kind::BlueCorner) return;
        for (auto [ox, oy] : {std::pair{2, 0}, std::pair{-2, 0}, std::pair{0, 2}, std::pair{0, -2}})
            if (inside(x + ox, y + oy, z) && sym(x + ox, y + oy, z) && !blue(x + ox, y + oy, z))
                flag("blue-density", {Pos{x, y, z}, Pos{x + ox, y + oy, z}}, "blue translate missing");
    }

    void alignment(const RobinsonSymbol& t, int x, int y, int z)
    {
        const Pos here{x, y, z};
        const auto m = mark(x, y, z);
        if (p.at(*al, here) > 4) flag("alignment-localization", {here}, "invalid alignment code");
        if (m && !single_long_arrow(t.kind)) flag("alignment-localization", {here}, "mark off a 3/5-arrow tile");
        if (!single_long_arrow(t.kind)) return;
        const Side d = t.long_arrow();
        const int bx = x - dx(d), by = y - dy(d);
        if (t.kind == Kind::Arrow3 && inside(bx, by, z)) {
            const auto c = sym(bx, by, z);
            if (c && c->corner() && m != c->orientation())
                flag("alignment-induction", {here, Pos{bx, by, z}}, "mark differs from originating corner");
        }
        const int fx = x + dx(d), fy = y + dy(d);
        if (inside(fx, fy, z)) {
            const auto n = sym(fx, fy, z);
            if (n && single_long_arrow(n->kind) && n->long_arrow() == d && mark(fx, fy, z) != m)
                flag("alignment-transmission", {here, Pos{fx, fy, z}}, "mark not carried along the arm");
        }
        if (t.kind == Kind::Arrow3) synchronization(t, x, y, z);
    }

    // Triple: 3-arrow toward the middle, middle pointing across (3-arrow) or back (4-arrow),
    // 3-arrow toward the middle; (x, y) is the first tile, rotation fixed by its arrow.
    void synchronization(const RobinsonSymbol& t, int x, int y, int z)
    {
        for (int r = 0; r < 4; ++r) {
            const Side ahead = static_cast<Side>((1 + 3 * r) & 3); // E rotated r times counterclockwise
            if (t.long_arrow() != ahead) continue;
            const Side across = static_cast<Side>((2 + 3 * r) & 3); // S rotated likewise
            const int mx = x + dx(ahead), my = y + dy(ahead);
            const int ex = x + 2 * dx(ahead), ey = y + 2 * dy(ahead);
            if (!inside(ex, ey, z)) return;
            const auto mid = sym(mx, my, z);
            const auto end = sym(ex, ey, z);
            if (!mid || !end) return;
            const bool mid_ok = (mid->kind == Kind::Arrow3 && mid->long_arrow() == across) ||
                                ((mid->kind == Kind::Arrow4 || mid->kind == Kind::Arrow4Hi) &&
                                 mid->long_arrow() == opposite(across));
            if (!mid_ok || end->kind != Kind::Arrow3 || end->long_arrow() != opposite(ahead)) return;
            const auto left = mark(x, y, z);
            const auto right = mark(ex, ey, z);
            const Orientation ne = rotate(Orientation::ne, r), nw = rotate(Orientation::nw, r);
            const Orientation se = rotate(Orientation::se, r), sw = rotate(Orientation::sw, r);
            const std::vector<Pos> ps{Pos{x, y, z}, Pos{mx, my, z}, Pos{ex, ey, z}};
            if (left == ne && right != nw) flag("alignment-synchronization", ps, "expected nw-type mark on the right");
            else if (left == se && right != sw) flag("alignment-synchronization", ps, "expected sw-type mark on the right");
            else if (!(left == ne && right == nw) && !(left == se && right == sw))
                flag("alignment-coherence", ps, "mark pair not allowed on this triple");
            return;
        }
    }
};

} // namespace detail

// Checks rules 1-4 and, when present, the alignment layer. Constraints that reach outside
// the support are skipped. `threads` > 1 splits the rows; the result order is fixed.
inline std::vector<RuleViolation> check_robinson_rules(const Pattern& p, unsigned threads = 1)
{
    const std::size_t rl = p.layer_index(kRobinsonLayer);
    std::optional<std::size_t> al;
    if (p.has_layer(kAlignmentLayer)) al = p.layer_index(kAlignmentLayer);
    const Box& b = p.support();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(b.h)));
    std::vector<detail::RuleScan> scans(threads, detail::RuleScan{p, rl, al, {}});
    if (threads == 1) {
        scans[0].rows(b.y0(), b.y1());
    } else {
        std::vector<std::jthread> pool;
        const int chunk = (b.h + static_cast<int>(threads) - 1) / static_cast<int>(threads);
        for (unsigned t = 0; t < threads; ++t) {
            const int lo = b.y0() + static_cast<int>(t) * chunk;
            const int hi = std::min(b.y1(), lo + chunk - 1);
            if (lo > hi) continue;
            pool.emplace_back([&scans, t, lo, hi] { scans[t].rows(lo, hi); });
        }
    }
    std::vector<RuleViolation> all;
    for (auto& s : scans) all.insert(all.end(), s.out.begin(), s.out.end());
    sort_violations(all);
    return all;
}

// --- block completion -------------------------------------------------------------------

struct Placement {
    int order = 0;
    int x = 0;
    int y = 0;
    friend bool operator==(const Placement&, const Placement&) = default;
};

inline Placement complete_block(const Pattern& b, const Limits& lim = {})
{
    const std::size_t rl = b.layer_index(kRobinsonLayer);
    std::optional<std::size_t> al;
    if (b.has_layer(kAlignmentLayer)) al = b.layer_index(kAlignmentLayer);
    const int side = std::max(b.width(), b.height());
    const int cap = std::min(chi(side), lim.max_supertile_order);
    const Box& sb = b.support();
    for (int o = 0; o <= cap; ++o) {
        const Pattern st = generate_supertile(Orientation::sw, o, lim);
        const int s = st.width();
        for (int ox = 0; ox + b.width() <= s; ++ox)
            for (int oy = 0; oy + b.height() <= s; ++oy) {
                bool ok = true;
                for (int y = 0; ok && y < b.height(); ++y)
                    for (int x = 0; ok && x < b.width(); ++x) {
                        const Pos src{sb.x0() + x, sb.y0() + y, sb.z0()};
                        if (b.at(rl, src) != st.at(0, Pos{ox + x, oy + y, 0})) ok = false;
                        else if (al && b.at(*al, src) != st.at(1, Pos{ox + x, oy + y, 0})) ok = false;
                    }
                if (ok) return Placement{o, ox, oy};
            }
    }
    throw Error(ErrorKind::NotFound, "no placement up to order " + std::to_string(cap));
}

} // namespace sftsim
