#include <gtest/gtest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "sftsim/simulation.hpp"

using namespace sftsim;

namespace {

const StackAssembly& stack3()
{
    static const StackAssembly st = assemble_stack(odometer_system(5), 3, 4);
    return st;
}

const std::vector<CellRecord>& cells3()
{
    static const std::vector<CellRecord> c = detect_cells(stack3().shared);
    return c;
}

std::set<std::string> rules_of(const std::vector<RuleViolation>& v)
{
    std::set<std::string> out;
    for (const auto& r : v) out.insert(r.rule);
    return out;
}

const CellRecord& first_of_order(int L)
{
    for (const auto& c : cells3())
        if (c.order == L) return c;
    throw std::logic_error("missing order");
}

// Independent bit expansion of z + c, least significant first.
std::vector<int> bits_of(std::uint64_t v, std::size_t n)
{
    std::vector<int> out;
    for (std::size_t i = 0; i < n; ++i, v /= 2) out.push_back(static_cast<int>(v % 2));
    return out;
}

Code flip(Code v) { return v == 1 ? 2 : 1; }

} // namespace

TEST(Odometer, ImagePrefixes)
{
    const auto sys = odometer_system();
    EXPECT_EQ(sys.image(Word{0, 0, 0}), (Word{1, 0, 0}));
    EXPECT_EQ(sys.image(Word{1, 1, 0}), (Word{0, 0, 1}));
    std::mt19937 rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        Word x(1 + rng() % 12);
        for (auto& b : x) b = static_cast<int>(rng() % 2);
        EXPECT_EQ(sys.image(x), oracle::odometer_image(x));
    }
}

TEST(Odometer, GraphOracleFollowsTheCarryLaw)
{
    const auto sys = odometer_system();
    const std::vector<std::pair<int, int>> ok{{1, 0}, {1, 0}, {0, 1}};
    EXPECT_TRUE(sys.graph(ok, 100));
    std::mt19937 rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        Word x(1 + rng() % 10);
        for (auto& b : x) b = static_cast<int>(rng() % 2);
        const Word y = oracle::odometer_image(x);
        std::vector<std::pair<int, int>> pairs;
        for (std::size_t i = 0; i < x.size(); ++i) pairs.emplace_back(x[i], y[i]);
        EXPECT_TRUE(sys.graph(pairs, 100));
        const std::size_t k = rng() % pairs.size();
        pairs[k].second ^= 1;
        EXPECT_FALSE(sys.graph(pairs, 100));
    }
    try {
        sys.graph(ok, 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::BudgetExceeded);
    }
}

TEST(Odometer, OrbitIsBitsOfTheSum)
{
    const auto sys = odometer_system(11);
    for (std::uint64_t c = 0; c < 40; ++c) EXPECT_EQ(sys.orbit(c, 8), bits_of(11 + c, 8));
    EXPECT_THROW(sys.orbit(0, 65), Error);
}

TEST(Recurrence, Examples)
{
    const auto sys = odometer_system();
    const Word one{1}, zero_one{0, 1}, empty{};
    EXPECT_LE(recurrence_witness(sys, one, 2, 64), 2u);
    EXPECT_GE(recurrence_witness(sys, one, 2, 64), 1u);
    EXPECT_EQ(recurrence_witness(sys, empty, 3, 1), 0u);
    // brute force: first hit u, then smallest t with a hit at u + N t
    const std::uint64_t t = recurrence_witness(sys, zero_one, 5, 32);
    std::uint64_t u = 0;
    while (bits_of(u, 2) != zero_one) ++u;
    std::uint64_t want = 1;
    while (bits_of(u + 5 * want, 2) != zero_one) ++want;
    EXPECT_EQ(t, want);
    EXPECT_EQ(t, 4u);
    const Word ones(10, 1);
    try {
        recurrence_witness(sys, ones, 1, 10);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::BoundExceeded);
    }
}

TEST(Stack, AssembledStackValidates)
{
    EXPECT_TRUE(validate_stack(stack3()).empty());
    EXPECT_EQ(stack3().sections.size(), 4u);
    const auto single = assemble_stack(odometer_system(), 3, 1);
    EXPECT_TRUE(validate_stack(single).empty());
    EXPECT_TRUE(check_commuting(single));
}

TEST(Stack, OrderFourValidates)
{
    StackParams p;
    p.linear_phase = 3;
    p.system_phase = 250;
    const auto st = assemble_stack(odometer_system(9), 4, 3, p);
    EXPECT_TRUE(validate_stack(st, 2).empty());
    EXPECT_TRUE(check_commuting(st));
    EXPECT_EQ(phi(st, 2).bits, bits_of(11, 3));
}

TEST(Stack, LinearDigitLayoutOne)
{
    StackParams p;
    p.linear_l = 1;
    const auto st = assemble_stack(odometer_system(), 3, 2, p);
    EXPECT_TRUE(validate_stack(st).empty());
}

TEST(Stack, OddLevelBitsFollowTheSystemCounter)
{
    const StackAssembly& st = stack3();
    const StackGeometry g(st.shared);
    const auto sp = st.system_params(3);
    const auto trace = system_bit_trace(SystemCounterState::zero(sp), static_cast<std::uint64_t>(st.height), sp);
    for (int c = 0; c < st.height; ++c) {
        const auto r = validate_section(st, g, c);
        ASSERT_TRUE(r.level_bits.count(3));
        EXPECT_EQ(static_cast<Digit>(r.level_bits.at(3)), trace[static_cast<std::size_t>(c)]) << c;
        EXPECT_EQ(r.level_bits.at(1), 0);
    }
}

TEST(Phi, PrefixesOfTheOrbit)
{
    const StackAssembly& st = stack3();
    for (int c = 0; c < st.height; ++c) {
        const auto p = phi(st, c, cells3());
        EXPECT_EQ(p.bits, bits_of(5 + static_cast<std::uint64_t>(c), 2)) << c;
        ASSERT_EQ(p.provenance.size(), p.bits.size());
    }
    EXPECT_EQ(phi(st, 1).bits, odometer_system().image(phi(st, 0).bits));
    EXPECT_THROW(phi(st, 4), Error);
}

TEST(Phi, EveryEvenCellCarriesTheSameBit)
{
    const StackAssembly& st = stack3();
    for (int c = 0; c < st.height; ++c) {
        const auto p = phi(st, c, cells3());
        const Pattern& sec = st.sections[static_cast<std::size_t>(c)];
        for (const auto& cell : cells3()) {
            if (cell.order % 2) continue;
            const Code v = sec.at(kSysbitLayer, Pos{cell.box.x0(), cell.box.y0(), 0});
            EXPECT_EQ(v - 1, p.bits[static_cast<std::size_t>(cell.order / 2)]);
        }
        std::set<Pos> even;
        for (const auto& cell : cells3())
            if (cell.order % 2 == 0) even.insert(cell.box.origin);
        for (const Pos& q : p.provenance) EXPECT_TRUE(even.count(q));
    }
}

TEST(Phi, NoEvenCellsGiveAnEmptyPrefix)
{
    std::vector<CellRecord> odd;
    for (const auto& c : cells3())
        if (c.order % 2) odd.push_back(c);
    EXPECT_TRUE(phi(stack3(), 0, odd).bits.empty());
}

TEST(Commuting, HoldsAndCatchesLevelFlips)
{
    EXPECT_TRUE(check_commuting(stack3()));
    for (int level : {0, 2}) {
        StackAssembly st = stack3();
        Pattern& sec = st.sections[2];
        for (const auto& cell : cells3())
            if (cell.order == level)
                detail::for_border(cell, [&](int x, int y) {
                    sec.set(kSysbitLayer, Pos{x, y, 0}, flip(sec.at(kSysbitLayer, Pos{x, y, 0})));
                });
        EXPECT_FALSE(check_commuting(st)) << level;
        EXPECT_TRUE(validate_stack(st).empty()) << "a whole-level flip is locally consistent";
    }
    StackAssembly one = stack3();
    const CellRecord& c0 = first_of_order(0);
    one.sections[1].set(kSysbitLayer, c0.box.origin, flip(one.sections[1].at(kSysbitLayer, c0.box.origin)));
    EXPECT_FALSE(check_commuting(one));
}

TEST(Mutation, SingleSystemBit)
{
    StackAssembly st = stack3();
    const CellRecord& c = first_of_order(2);
    const Pos q{c.box.x0() + 3, c.box.y0(), 0};
    st.sections[1].set(kSysbitLayer, q, flip(st.sections[1].at(kSysbitLayer, q)));
    const auto v = validate_stack(st);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].rule, "sysbit-synchronization");
    EXPECT_EQ(v[0].positions.front(), (Pos{q.x, q.y, 1}));
}

TEST(Mutation, StrayBitsAndCounters)
{
    StackAssembly st = stack3();
    const Pos centre = first_of_order(3).center();
    st.sections[0].set(kSysbitLayer, centre, 1);
    st.sections[0].set(kSyscounterLayer, centre, 1);
    st.sections[0].set(kChannelLayer, centre, 1);
    const auto r = rules_of(validate_stack(st));
    EXPECT_TRUE(r.count("sysbit-localization"));
    EXPECT_TRUE(r.count("syscounter-localization"));
    EXPECT_TRUE(r.count("channel-localization"));
}

TEST(Mutation, OddLevelModularityMark)
{
    StackAssembly st = stack3();
    const CellRecord& c = first_of_order(3);
    st.shared.set(kModularityLayer, Pos{c.box.x1(), c.box.y1(), 0}, modularity_pair_code(1));
    const auto r = rules_of(validate_stack(st));
    EXPECT_TRUE(r.count("channel-localization"));
    EXPECT_TRUE(r.count("modularity-level"));
}

TEST(Mutation, ChannelSymbol)
{
    StackAssembly st = stack3();
    const Pattern& sec = st.sections[3];
    const Box& b = sec.support();
    for (int y = b.y0(); y <= b.y1(); ++y)
        for (int x = b.x0(); x <= b.x1(); ++x)
            if (sec.at(kChannelLayer, Pos{x, y, 0}) != kBlank) {
                st.sections[3].set(kChannelLayer, Pos{x, y, 0}, flip(sec.at(kChannelLayer, Pos{x, y, 0})));
                const auto v = validate_stack(st);
                ASSERT_EQ(v.size(), 1u);
                EXPECT_EQ(v[0].rule, "channel-synchronization");
                return;
            }
    FAIL() << "no channel symbol";
}

TEST(Mutation, SystemCounterSymbol)
{
    StackAssembly st = stack3();
    const Pattern& sec = st.sections[2];
    const Box& b = sec.support();
    for (int y = b.y0(); y <= b.y1(); ++y)
        for (int x = b.x0(); x <= b.x1(); ++x) {
            const Code v = sec.at(kSyscounterLayer, Pos{x, y, 0});
            if (v == kBlank) continue;
            st.sections[2].set(kSyscounterLayer, Pos{x, y, 0}, v == 1 ? 2 : v - 1);
            EXPECT_FALSE(validate_stack(st).empty());
            return;
        }
    FAIL() << "no counter symbol";
}

TEST(Mutation, SharedLayers)
{
    const StackAssembly& base = stack3();
    const Box& b = base.shared.support();
    auto first_nonblank = [&](const char* layer) {
        for (int y = b.y0(); y <= b.y1(); ++y)
            for (int x = b.x0(); x <= b.x1(); ++x)
                if (base.shared.at(layer, Pos{x, y, 0}) != kBlank) return Pos{x, y, 0};
        throw std::logic_error("empty layer");
    };
    {
        StackAssembly st = base;
        const Pos q = first_nonblank(kLinearLayer);
        st.shared.set(kLinearLayer, q, st.shared.at(kLinearLayer, q) + 1);
        EXPECT_FALSE(validate_stack(st).empty());
    }
    {
        StackAssembly st = base;
        const Pos q = first_nonblank(kMachineLayer);
        st.shared.set(kMachineLayer, q, st.shared.at(kMachineLayer, q) + 1);
        EXPECT_TRUE(rules_of(validate_stack(st)).count("machine-rules"));
    }
    {
        StackAssembly st = base;
        const Pos q = first_nonblank(kOrganiteLayer);
        st.shared.set(kOrganiteLayer, q, kBlank);
        EXPECT_FALSE(validate_stack(st).empty());
    }
    {
        StackAssembly st = base;
        const Pos q = first_nonblank(kFunctionLayer);
        st.shared.set(kFunctionLayer, q, kBlank);
        EXPECT_TRUE(rules_of(validate_stack(st)).count("function-area"));
    }
}

TEST(Mutation, ThreadCountDoesNotChangeTheReport)
{
    StackAssembly st = stack3();
    const CellRecord& c = first_of_order(2);
    st.sections[0].set(kSysbitLayer, Pos{c.box.x0() + 1, c.box.y0(), 0}, flip(st.sections[0].at(kSysbitLayer, Pos{c.box.x0() + 1, c.box.y0(), 0})));
    st.sections[3].set(kChannelLayer, c.center(), 2);
    const auto a = validate_stack(st, 1);
    const auto b = validate_stack(st, 3);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].rule, b[i].rule);
        EXPECT_EQ(a[i].positions, b[i].positions);
    }
}

TEST(Stack, ThreeDimensionalRoundTrip)
{
    const Pattern p = to_pattern(stack3());
    EXPECT_EQ(p.support().d, 4);
    std::vector<RuleViolation> transport;
    StackAssembly back = stack_from_pattern(p, transport);
    back.system = odometer_system(5);
    EXPECT_TRUE(transport.empty());
    EXPECT_TRUE(validate_stack(back).empty());
    EXPECT_TRUE(check_commuting(back));

    Pattern moved = p;
    const Pos q{p.support().x0() + 10, p.support().y0() + 12, 2};
    moved.set(kRobinsonLayer, q, moved.at(kRobinsonLayer, Pos{q.x, q.y, 0}) + 1);
    stack_from_pattern(moved, transport);
    ASSERT_EQ(transport.size(), 1u);
    EXPECT_EQ(transport[0].rule, "structure-transport");
    EXPECT_EQ(transport[0].positions.front(), q);
}

TEST(Stack, Errors)
{
    auto kind_of = [](auto f) {
        try {
            f();
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::InvalidArgument;
    };
    EXPECT_THROW(assemble_stack(odometer_system(), 2, 1), Error);
    EXPECT_THROW(assemble_stack(odometer_system(), 3, 0), Error);
    StackParams tight;
    tight.oracle_budget = 1;
    EXPECT_EQ(kind_of([&] { assemble_stack(odometer_system(), 3, 1, tight); }), ErrorKind::BudgetExceeded);
    EffectiveSystemSpec picky = odometer_system();
    picky.member = [](std::span<const int> w, std::uint64_t) { return w[0] == 0; };
    EXPECT_EQ(kind_of([&] { assemble_stack(picky, 3, 2); }), ErrorKind::OracleRejection);
    Limits small;
    small.max_window_side = 100;
    EXPECT_EQ(kind_of([&] { assemble_stack(odometer_system(), 3, 1, {}, small); }), ErrorKind::WindowTooLarge);
    StackParams wide;
    wide.linear_l = 2;
    EXPECT_EQ(kind_of([&] { assemble_stack(odometer_system(), 3, 1, wide); }), ErrorKind::Overflow);
}
