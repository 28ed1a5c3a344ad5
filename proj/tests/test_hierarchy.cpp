#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "sftsim/hierarchy.hpp"

using namespace sftsim;

namespace {

// One order-3 cell sits at (127, 127) with side 257 in this window.
const Pattern& plane400()
{
    static const Pattern p = tile_plane(8, Box::square(0, 0, 400));
    return p;
}

const std::vector<CellRecord>& cells400()
{
    static const std::vector<CellRecord> c = detect_cells(plane400());
    return c;
}

const CellRecord& order3()
{
    for (const auto& c : cells400())
        if (c.order == 3) return c;
    throw std::logic_error("no order-3 cell");
}

bool is_blue(const Pattern& p, int x, int y)
{
    const auto t = decode(p.at(p.layer_index(kRobinsonLayer), Pos{x, y, 0}));
    return t && t->kind == Kind::BlueCorner;
}

} // namespace

TEST(Petals, OrderTwoSupertile)
{
    const auto petals = extract_petals(generate_supertile(Orientation::sw, 2));
    int small = 0;
    for (const auto& pt : petals)
        if (pt.order == 0) {
            ++small;
            EXPECT_EQ(pt.side(), 3);
            EXPECT_EQ(pt.role, PetalRole::transmission);
            for (const Pos& q : pt.corners) EXPECT_TRUE(is_blue(generate_supertile(Orientation::sw, 2), q.x, q.y));
        }
    EXPECT_EQ(small, 4);
    EXPECT_TRUE(extract_petals(generate_supertile(Orientation::sw, 0)).empty());
}

// St(n) is four copies of St(n-1) around a cross that closes one petal of order n-1.
TEST(Petals, CountsPerOrderFollowTheRecursion)
{
    for (int n = 1; n <= 5; ++n) {
        std::map<int, long> count;
        for (const auto& pt : extract_petals(generate_supertile(Orientation::ne, n))) {
            ++count[pt.order];
            ASSERT_EQ(pt.side(), petal_side(pt.order));
            EXPECT_EQ(pt.role == PetalRole::support, pt.order % 2 == 1);
        }
        ASSERT_EQ(static_cast<int>(count.size()), n);
        for (int k = 0; k < n; ++k) EXPECT_EQ(count[k], 1L << (2 * (n - 1 - k))) << n << " " << k;
    }
}

TEST(Petals, SidesInOrderFourSupertile)
{
    const std::set<int> allowed{3, 5, 9, 17};
    for (const auto& pt : extract_petals(generate_supertile(Orientation::sw, 4)))
        EXPECT_TRUE(allowed.count(pt.side())) << pt.side();
}

TEST(Cells, NoneInOrderOneSupertile)
{
    EXPECT_TRUE(detect_cells(generate_supertile(Orientation::sw, 1)).empty());
}

TEST(Cells, OrderZeroLatticeInPlane)
{
    const Pattern p = tile_plane(5, Box::square(0, 0, 64));
    const auto cells = detect_cells(p);
    ASSERT_FALSE(cells.empty());
    std::set<std::pair<int, int>> at;
    for (const auto& c : cells)
        if (c.order == 0) {
            EXPECT_EQ(c.box.w, 5);
            at.insert({c.box.x0(), c.box.y0()});
        }
    ASSERT_FALSE(at.empty());
    // anchors recur under translations by 4^{0+2}
    for (auto [x, y] : at) {
        if (x + 16 + 4 < 64) { EXPECT_TRUE(at.count({x + 16, y})); }
        if (y + 16 + 4 < 64) { EXPECT_TRUE(at.count({x, y + 16})); }
        EXPECT_EQ((x - 1) % 8, 0);
        EXPECT_EQ((y - 1) % 8, 0);
    }
}

TEST(Cells, OrderOneInLargerPlane)
{
    const auto cells = detect_cells(tile_plane(7, Box::square(0, 0, 300)));
    std::set<std::pair<int, int>> at;
    for (const auto& c : cells)
        if (c.order == 1) {
            EXPECT_EQ(c.box.w, 17);
            at.insert({c.box.x0(), c.box.y0()});
        }
    ASSERT_FALSE(at.empty());
    for (auto [x, y] : at) {
        if (x + 64 + 16 < 300) { EXPECT_TRUE(at.count({x + 64, y})); }
        if (y + 64 + 16 < 300) { EXPECT_TRUE(at.count({x, y + 64})); }
    }
}

TEST(Cells, SidesAndFirstAnchors)
{
    for (const auto& c : cells400()) {
        EXPECT_EQ(c.box.w, cell_side(c.order));
        const int first = (2 << (2 * c.order)) - 1;
        const int period = 8 << (2 * c.order);
        EXPECT_EQ((c.box.x0() - first) % period, 0);
        EXPECT_EQ((c.box.y0() - first) % period, 0);
    }
    EXPECT_EQ(order3().box.x0(), 127);
    EXPECT_EQ(order3().box.w, 257);
}

TEST(Cells, SameOrderCellsAreDisjoint)
{
    const auto& cells = cells400();
    for (std::size_t a = 0; a < cells.size(); ++a)
        for (std::size_t b = a + 1; b < cells.size(); ++b) {
            if (cells[a].order != cells[b].order) continue;
            const Box& u = cells[a].box;
            const Box& v = cells[b].box;
            const bool apart = u.x1() < v.x0() || v.x1() < u.x0() || u.y1() < v.y0() || v.y1() < u.y0();
            EXPECT_TRUE(apart);
        }
}

TEST(FunctionalAreas, ClassificationMatchesBruteForce)
{
    const CellRecord& c = order3();
    const Pattern& p = plane400();
    const auto areas = assign_functional_areas(c, p);
    const Box in = c.interior();
    std::vector<Box> inner;
    for (const auto& d : cells400())
        if (d.order < c.order && c.box.contains(d.box)) inner.push_back(d.box);
    auto row_free = [&](int y) {
        for (const Box& b : inner)
            if (y >= b.y0() && y <= b.y1()) return false;
        return true;
    };
    auto col_free = [&](int x) {
        for (const Box& b : inner)
            if (x >= b.x0() && x <= b.x1()) return false;
        return true;
    };
    std::map<AreaFunction, int> count;
    std::size_t blue = 0;
    for (int y = in.y0(); y <= in.y1(); ++y)
        for (int x = in.x0(); x <= in.x1(); ++x) {
            if (!is_blue(p, x, y)) continue;
            ++blue;
            const auto it = areas.find(Pos{x, y, 0});
            ASSERT_NE(it, areas.end());
            AreaFunction want = AreaFunction::none;
            if (row_free(y) && col_free(x)) want = AreaFunction::computation;
            else if (row_free(y)) want = AreaFunction::transfer_h;
            else if (col_free(x)) want = AreaFunction::transfer_v;
            EXPECT_EQ(it->second, want);
            ++count[want];
        }
    EXPECT_EQ(areas.size(), blue);
    // 16 free rows and columns carrying blue corners, of 128 each
    EXPECT_EQ(count[AreaFunction::computation], 256);
    EXPECT_EQ(count[AreaFunction::transfer_h], 16 * 112);
    EXPECT_EQ(count[AreaFunction::transfer_v], 16 * 112);
    EXPECT_EQ(count[AreaFunction::none], 112 * 112);
}

TEST(FunctionalAreas, Idempotent)
{
    const CellIndex idx(cells400());
    EXPECT_EQ(assign_functional_areas(order3(), plane400(), idx), assign_functional_areas(order3(), plane400(), idx));
}

TEST(Organites, FunctionTable)
{
    EXPECT_EQ(organite_function({6, 5}), OrganiteFunction::machine);
    EXPECT_EQ(organite_function({2, 3}), OrganiteFunction::linear_increment);
    const auto both = organite_functions({3, 3});
    EXPECT_EQ(both.size(), 2u);
    EXPECT_NE(std::find(both.begin(), both.end(), OrganiteFunction::system_counter), both.end());
    EXPECT_NE(std::find(both.begin(), both.end(), OrganiteFunction::demultiplexer), both.end());
    EXPECT_EQ(organite_function({0, 0}), OrganiteFunction::none);
    int machines = 0;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) machines += organite_function({i, j}) == OrganiteFunction::machine;
    EXPECT_EQ(machines, 1);
}

TEST(Organites, AddressCodesRoundTrip)
{
    std::set<Code> seen;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
            const Code c = address_code({i, j});
            EXPECT_GE(c, 1);
            EXPECT_LE(c, 64);
            seen.insert(c);
            const auto back = decode_address(c);
            ASSERT_TRUE(back);
            EXPECT_EQ(back->i, i);
            EXPECT_EQ(back->j, j);
        }
    EXPECT_EQ(seen.size(), 64u);
    EXPECT_FALSE(decode_address(kGrayAddress));
    EXPECT_FALSE(decode_address(kBlank));
}

TEST(Organites, PartitionOrderThreeCell)
{
    const CellRecord& c = order3();
    const auto s = subdivide_cell(c, plane400());
    ASSERT_TRUE(s.cell.organites);
    const Organites& o = *s.cell.organites;
    EXPECT_EQ(o.block, 2);
    const Box in = c.interior();
    // every interior position lies in exactly one of the 64 equal boxes
    for (int y = in.y0(); y <= in.y1(); ++y)
        for (int x = in.x0(); x <= in.x1(); ++x) {
            int hits = 0;
            for (const Box& b : o.boxes) hits += b.contains(Pos{x, y, 0});
            ASSERT_EQ(hits, 1) << x << "," << y;
        }
    // functional grid is exactly the set of computation corners
    std::set<Pos> grid;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            for (int a = 0; a < o.block; ++a)
                for (int b = 0; b < o.block; ++b) {
                    const Pos q = o.position({i, j}, a, b);
                    EXPECT_TRUE(o.box({i, j}).contains(q));
                    const auto u = o.locate(q);
                    ASSERT_TRUE(u);
                    EXPECT_EQ(u->i, i);
                    EXPECT_EQ(u->j, j);
                    grid.insert(q);
                }
    std::set<Pos> comp;
    for (const auto& [q, f] : assign_functional_areas(c, plane400()))
        if (f == AreaFunction::computation) comp.insert(q);
    EXPECT_EQ(grid, comp);
}

TEST(Organites, SmallCellsRejected)
{
    for (const auto& c : cells400())
        if (c.order < 3) {
            try {
                subdivide_cell(c, plane400());
                FAIL() << "order " << c.order;
            } catch (const Error& e) {
                EXPECT_EQ(e.kind(), ErrorKind::CellTooSmall);
            }
        }
}

TEST(Modularity, MarksAreOrderModFour)
{
    std::vector<CellRecord> cells = cells400();
    cells.push_back(CellRecord{5, Box::square(2047, 2047, static_cast<int>(cell_side(5))), {}, {}, {}});
    const auto r = modularity_marks(cells);
    EXPECT_TRUE(r.violations.empty());
    for (const auto& c : r.cells) {
        ASSERT_TRUE(c.modularity);
        EXPECT_EQ(*c.modularity, c.order % 4);
        if (c.order == 0) { EXPECT_EQ(*c.modularity, 0); }
        if (c.order == 5) { EXPECT_EQ(*c.modularity, 1); }
    }
}

TEST(Modularity, PaintedLayerValidatesAndMutationsAreCaught)
{
    Pattern p = plane400();
    paint_modularity(p, cells400());
    EXPECT_TRUE(validate_modularity_layer(p, cells400()).empty());

    const CellRecord& c = order3();
    const Pos ne{c.box.x1(), c.box.y1(), 0};
    Pattern bad = p;
    bad.set(kModularityLayer, ne, modularity_pair_code(0));
    std::set<std::string> rules;
    for (const auto& v : validate_modularity_layer(bad, cells400())) rules.insert(v.rule);
    EXPECT_TRUE(rules.count("modularity-level"));
    EXPECT_TRUE(rules.count("modularity-transformation"));

    Pattern stray = p;
    stray.set(kModularityLayer, Pos{c.center().x, c.center().y, 0}, modularity_code(1));
    const auto v = validate_modularity_layer(stray, cells400());
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].rule, "modularity-localization");
}
