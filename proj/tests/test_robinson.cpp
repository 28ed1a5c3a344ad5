#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "sftsim/robinson.hpp"

using namespace sftsim;

namespace {

RobinsonSymbol arrow(Kind k, int rot, int i, int j)
{
    return RobinsonSymbol{k, static_cast<std::uint8_t>(rot), Parity{static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(j)},
                          std::nullopt, std::nullopt};
}

const std::array<Orientation, 4> kCorners{Orientation::sw, Orientation::se, Orientation::ne, Orientation::nw};

} // namespace

TEST(Chi, MatchesFormula)
{
    EXPECT_EQ(chi(1), 4);
    EXPECT_EQ(chi(3), 6);
    EXPECT_EQ(chi_prime(4), 3);
    for (long n = 1; n <= 5000; ++n) {
        const int l = oracle::ceil_log2(n);
        ASSERT_EQ(chi(n), l + 4) << n;
        ASSERT_EQ(chi_prime(n), (l + 1) / 2 + 2) << n;
    }
    EXPECT_THROW(chi(0), Error);
}

TEST(Codes, RoundTripEveryCode)
{
    int valid = 0;
    for (Code c = 0; c <= kMaxRobinsonCode + 3; ++c) {
        const auto t = decode(c);
        if (!t) continue;
        ++valid;
        EXPECT_EQ(encode(*t), c);
        EXPECT_EQ(t->parity.has_value(), !t->corner());
        EXPECT_EQ(t->red_bit.has_value(), t->kind == Kind::RedCorner);
    }
    // arrows: 4 rotations x 4 parity pairs; blue corners: 4 rotations; red corners: 4 rotations x bit
    EXPECT_EQ(valid, (kKindCount - 2) * 16 + 4 + 8);
}

TEST(Supertile, OrderZeroIsTheBlueCorner)
{
    for (auto c : kCorners) {
        const Pattern p = generate_supertile(c, 0);
        ASSERT_EQ(p.width(), 1);
        const auto t = decode(p.at(0, 0, 0));
        ASSERT_TRUE(t);
        EXPECT_EQ(t->kind, Kind::BlueCorner);
        EXPECT_EQ(t->orientation(), c);
    }
}

TEST(Supertile, SideAndLegalityUpToSix)
{
    for (int n = 0; n <= 6; ++n)
        for (auto c : kCorners) {
            const Pattern p = generate_supertile(c, n);
            EXPECT_EQ(p.width(), (2 << n) - 1);
            EXPECT_EQ(p.height(), (2 << n) - 1);
            EXPECT_TRUE(check_robinson_rules(p).empty()) << n << ' ' << to_string(c);
        }
}

TEST(Supertile, CenterCarriesTheRedCorner)
{
    const Pattern p = generate_supertile(Orientation::ne, 3);
    ASSERT_EQ(p.width(), 15);
    const auto t = decode(p.at(0, 7, 7));
    EXPECT_EQ(t->kind, Kind::RedCorner);
    EXPECT_EQ(t->orientation(), Orientation::ne);
    EXPECT_TRUE(check_robinson_rules(p).empty());
}

TEST(Supertile, BlueCornersFollowTheRecursion)
{
    for (int n = 0; n <= 6; ++n) {
        const Pattern p = generate_supertile(Orientation::sw, n);
        std::set<std::pair<int, int>> blue;
        for (int y = 0; y < p.height(); ++y)
            for (int x = 0; x < p.width(); ++x)
                if (decode(p.at(0, x, y))->kind == Kind::BlueCorner) blue.insert({x, y});
        EXPECT_EQ(blue, oracle::supertile_blue(n)) << n;
    }
}

TEST(Supertile, QuadrantsAreTheFourSmallerSupertiles)
{
    for (int n = 1; n <= 5; ++n)
        for (auto c : kCorners) {
            const Pattern p = generate_supertile(c, n);
            const int s = 1 << n;
            EXPECT_TRUE(oracle::same_shape_at(p, 0, 0, generate_supertile(Orientation::sw, n - 1)));
            EXPECT_TRUE(oracle::same_shape_at(p, s, 0, generate_supertile(Orientation::se, n - 1)));
            EXPECT_TRUE(oracle::same_shape_at(p, s, s, generate_supertile(Orientation::ne, n - 1)));
            EXPECT_TRUE(oracle::same_shape_at(p, 0, s, generate_supertile(Orientation::nw, n - 1)));
        }
}

TEST(Supertile, OrderCap)
{
    EXPECT_THROW(generate_supertile(Orientation::sw, 11), Error);
    Limits lim;
    lim.max_supertile_order = 3;
    try {
        generate_supertile(Orientation::sw, 4, lim);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::OrderTooLarge);
    }
}

TEST(Supertile, RepetitionPeriodSmall)
{
    for (int n = 2; n <= 5; ++n) {
        const Pattern big = generate_supertile(Orientation::sw, n);
        for (int m = 0; m < n; ++m) {
            const int period = 4 << m;
            for (auto c : kCorners) {
                const auto occ = oracle::occurrences(big, generate_supertile(c, m));
                ASSERT_FALSE(occ.empty());
                const int side = (2 << m) - 1;
                for (auto [x, y] : occ) {
                    if (x + period + side <= big.width()) {
                        EXPECT_TRUE(occ.count({x + period, y}));
                    }
                    if (y + period + side <= big.height()) {
                        EXPECT_TRUE(occ.count({x, y + period}));
                    }
                }
            }
        }
    }
}

TEST(Rules, SinglePositionHasNoAdjacencyViolation)
{
    // only the one-position parity rule of 5- and 6-arrows can fire
    for (Code c = 1; c <= kMaxRobinsonCode; ++c) {
        const auto t = decode(c);
        if (!t) continue;
        Pattern p(Box::square(0, 0, 1), {kRobinsonLayer});
        p.set(0, 0, 0, c);
        const auto v = check_robinson_rules(p);
        const bool five_or_six = t->kind == Kind::Arrow5 || t->kind == Kind::Arrow6 || t->kind == Kind::Arrow6Hi;
        if (five_or_six && t->parity->i == t->parity->j) {
            ASSERT_EQ(v.size(), 1u) << c;
            EXPECT_EQ(v[0].rule, "parity-inequality");
        } else {
            EXPECT_TRUE(v.empty()) << c;
        }
    }
    const Pattern st = generate_supertile(Orientation::sw, 4);
    for (int y = 0; y < st.height(); ++y)
        for (int x = 0; x < st.width(); ++x) EXPECT_TRUE(check_robinson_rules(st.crop(Box::square(x, y, 1))).empty());
}

TEST(Rules, ForbiddenStackFromTheRuleExample)
{
    // double-line 4-arrow below a 5-arrow whose long arrow points down
    Pattern p(Box::rect(0, 0, 1, 2), {kRobinsonLayer});
    p.set(0, 0, 0, encode(arrow(Kind::Arrow4, 0, 0, 0)));
    p.set(0, 0, 1, encode(arrow(Kind::Arrow5, 0, 1, 0)));
    const auto v = check_robinson_rules(p);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].rule, "arrow-correspondence");

    // the allowed variant: a single-line 3-arrow below
    p.set(0, 0, 0, encode(arrow(Kind::Arrow3, 0, 0, 0)));
    EXPECT_TRUE(check_robinson_rules(p).empty());
}

TEST(Rules, MissingLayer)
{
    Pattern p(Box::square(0, 0, 2), {kAlignmentLayer});
    try {
        check_robinson_rules(p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MissingLayer);
    }
}

TEST(Rules, ThreadCountDoesNotChangeTheReport)
{
    Pattern p = tile_plane(0, Box::square(0, 0, 64));
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> pos(0, 63), code(1, kMaxRobinsonCode);
    for (int i = 0; i < 40; ++i) p.set(0, pos(rng), pos(rng), static_cast<Code>(code(rng)));
    const auto one = check_robinson_rules(p, 1);
    const auto four = check_robinson_rules(p, 4);
    ASSERT_FALSE(one.empty());
    ASSERT_EQ(one.size(), four.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        EXPECT_EQ(one[i].rule, four[i].rule);
        EXPECT_EQ(one[i].positions, four[i].positions);
    }
    for (const auto& r : one)
        for (const auto& q : r.positions) EXPECT_TRUE(p.contains(q));
}

TEST(Rules, BlueDensityIsChecked)
{
    // a 2x2 block of horizontal 3-arrows has no blue corner
    Pattern q(Box::square(0, 0, 2), {kRobinsonLayer});
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) q.set(0, x, y, encode(arrow(Kind::Arrow3, 1, 0, 0)));
    const auto v = check_robinson_rules(q);
    EXPECT_TRUE(std::any_of(v.begin(), v.end(), [](const RuleViolation& r) { return r.rule == "blue-density"; }));
}

TEST(Plane, OrderOneCopiesRecurWithPeriodEight)
{
    const Pattern p = tile_plane(2, Box::square(0, 0, 32));
    EXPECT_TRUE(check_robinson_rules(p).empty());
    for (auto c : kCorners) {
        const auto occ = oracle::occurrences(p, generate_supertile(c, 1));
        ASSERT_FALSE(occ.empty());
        for (auto [x, y] : occ) {
            if (x + 8 + 3 <= 32) {
                EXPECT_TRUE(occ.count({x + 8, y}));
            }
            if (y + 8 + 3 <= 32) {
                EXPECT_TRUE(occ.count({x, y + 8}));
            }
        }
    }
}

TEST(Plane, BlueCornersOnTheEvenLattice)
{
    const Pattern p = tile_plane(0, Box::square(0, 0, 4));
    std::set<std::pair<int, int>> blue;
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
            if (decode(p.at(0, x, y))->kind == Kind::BlueCorner) blue.insert({x, y});
    EXPECT_EQ(blue, (std::set<std::pair<int, int>>{{0, 0}, {2, 0}, {0, 2}, {2, 2}}));
}

TEST(Plane, LegalAndTranslationConsistent)
{
    const Pattern p = tile_plane(3, Box::square(0, 0, 64));
    EXPECT_TRUE(check_robinson_rules(p).empty());
    const Box sub = Box::rect(13, 21, 30, 17);
    EXPECT_EQ(p.crop(sub), tile_plane(3, sub));
    const Pattern shifted = tile_plane(0, Box::rect(400, 100, 50, 50));
    EXPECT_TRUE(check_robinson_rules(shifted).empty());
    try {
        tile_plane(0, Box::rect(-1, 0, 4, 4));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidWindow);
    }
}

TEST(Plane, AlignmentOnlyOnThreeAndFiveArrows)
{
    const Pattern p = tile_plane(4, Box::square(0, 0, 128));
    const std::size_t al = p.layer_index(kAlignmentLayer);
    int marks = 0;
    for (int y = 0; y < 128; ++y)
        for (int x = 0; x < 128; ++x) {
            if (p.at(al, x, y) == kBlank) continue;
            ++marks;
            const auto k = decode(p.at(0, x, y))->kind;
            EXPECT_TRUE(k == Kind::Arrow3 || k == Kind::Arrow5);
        }
    EXPECT_GT(marks, 0);
}

TEST(Plane, WindowCap)
{
    Limits lim;
    lim.max_window_side = 16;
    try {
        tile_plane(0, Box::square(0, 0, 17), lim);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::WindowTooLarge);
    }
}

TEST(Completion, SupertileEmbedsInItself)
{
    const auto pl = complete_block(generate_supertile(Orientation::sw, 2));
    EXPECT_EQ(pl, (Placement{2, 0, 0}));
}

TEST(Completion, SingleSymbolsOfOrderFourSupertile)
{
    const Pattern st = generate_supertile(Orientation::sw, 4);
    std::set<Code> seen;
    for (int y = 0; y < st.height(); ++y)
        for (int x = 0; x < st.width(); ++x) {
            const Code c = st.at(0, x, y);
            if (!seen.insert(c).second) continue;
            const auto pl = complete_block(st.crop(Box::square(x, y, 1)));
            EXPECT_LE(pl.order, 4);
            // the placement really holds the symbol
            EXPECT_EQ(generate_supertile(Orientation::sw, pl.order).at(0, pl.x, pl.y), c);
        }
}

TEST(Completion, RandomSmallBlocksOfThePlane)
{
    const Pattern p = tile_plane(5, Box::square(0, 0, 128));
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> pos(0, 125);
    for (int i = 0; i < 20; ++i) {
        const int x = pos(rng), y = pos(rng);
        const Pattern b = p.crop(Box::square(x, y, 3));
        const auto pl = complete_block(b);
        EXPECT_LE(pl.order, chi(3));
        const Pattern st = generate_supertile(Orientation::sw, pl.order);
        EXPECT_EQ(st.crop(Box::square(pl.x, pl.y, 3)).raw(0),
                  b.raw(b.layer_index(kRobinsonLayer)));
    }
}

TEST(Completion, NotFoundOutsideTheLanguage)
{
    // two blue corners side by side never occur
    Pattern b(Box::rect(0, 0, 2, 1), {kRobinsonLayer});
    const Code blue = encode(RobinsonSymbol{Kind::BlueCorner, 0, std::nullopt, std::nullopt, std::nullopt});
    b.set(0, 0, 0, blue);
    b.set(0, 1, 0, blue);
    try {
        complete_block(b);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotFound);
    }
}
