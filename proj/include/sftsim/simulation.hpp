#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "counters.hpp"
#include "hierarchy.hpp"
#include "machine.hpp"
#include "pattern.hpp"
#include "robinson.hpp"

namespace sftsim {

// --- effective systems ----------------------------------------------------------------------

using Word = std::vector<int>;

struct EffectiveSystemSpec {
    std::string name;
    int alphabet = 2;
    // Does the cylinder of the word meet Z? Throws BudgetExceeded past the step budget.
    std::function<bool(std::span<const int>, std::uint64_t budget)> member;
    // Does the cylinder of the paired word meet the graph of f?
    std::function<bool(std::span<const std::pair<int, int>>, std::uint64_t budget)> graph;
    // Prefix of length len of f^c(z) for the designated point z.
    std::function<Word(std::uint64_t c, std::size_t len)> orbit;
    // Prefix of f(x) determined by a prefix of x, when f allows it.
    std::function<Word(std::span<const int>)> image;
};

// Binary odometer on {0,1}^N, least significant bit first, started from the bits of `z`
// followed by zeros.
inline EffectiveSystemSpec odometer_system(std::uint64_t z = 0)
{
    EffectiveSystemSpec s;
    s.name = "odometer";
    s.alphabet = 2;
    s.member = [](std::span<const int> w, std::uint64_t budget) {
        if (w.size() > budget) throw Error(ErrorKind::BudgetExceeded, "membership oracle budget");
        return std::all_of(w.begin(), w.end(), [](int b) { return b == 0 || b == 1; });
    };
    s.graph = [](std::span<const std::pair<int, int>> w, std::uint64_t budget) {
        if (w.size() > budget) throw Error(ErrorKind::BudgetExceeded, "graph oracle budget");
        int carry = 1;
        for (auto [x, y] : w) {
            if ((x != 0 && x != 1) || (y != 0 && y != 1)) return false;
            if (y != (x ^ carry)) return false;
            carry &= x;
        }
        return true;
    };
    s.orbit = [z](std::uint64_t c, std::size_t len) {
        if (len > 64) throw Error(ErrorKind::InvalidArgument, "odometer prefixes are limited to 64 bits");
        const std::uint64_t v = z + c;
        Word w(len);
        for (std::size_t i = 0; i < len; ++i) w[i] = static_cast<int>((v >> i) & 1);
        return w;
    };
    s.image = [](std::span<const int> x) {
        Word y(x.begin(), x.end());
        for (auto& b : y) {
            b ^= 1;
            if (b == 1) break;
        }
        return y;
    };
    return s;
}

// First u with f^u(z) in [p], then the smallest t >= 1 with f^(u + N t)(z) in [p].
inline std::uint64_t recurrence_witness(const EffectiveSystemSpec& sys, std::span<const int> p, std::uint64_t n,
                                        std::uint64_t bound)
{
    if (p.empty()) return 0;
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "N must be positive");
    auto hits = [&](std::uint64_t s) {
        const Word w = sys.orbit(s, p.size());
        return std::equal(w.begin(), w.end(), p.begin());
    };
    std::optional<std::uint64_t> u;
    for (std::uint64_t s = 0; s <= bound * n && !u; ++s)
        if (hits(s)) u = s;
    if (!u) throw Error(ErrorKind::BoundExceeded, "word does not occur within the bound");
    for (std::uint64_t t = 1; t <= bound; ++t)
        if (hits(*u + n * t)) return t;
    throw Error(ErrorKind::BoundExceeded, "no recurrence at a multiple of N within the bound");
}

// --- layers and codes -----------------------------------------------------------------------

inline constexpr const char* kSysbitLayer = "sysbit";
inline constexpr const char* kSyscounterLayer = "syscounter";
inline constexpr const char* kChannelLayer = "channel";
inline constexpr const char* kLinearLayer = "linear";
inline constexpr const char* kMachineLayer = "machine";

inline const std::vector<std::string>& shared_layers()
{
    static const std::vector<std::string> v{kRobinsonLayer, kAlignmentLayer, kModularityLayer, kFunctionLayer,
                                            kOrganiteLayer, kLinearLayer,    kMachineLayer};
    return v;
}

inline const std::vector<std::string>& section_layers()
{
    static const std::vector<std::string> v{kSysbitLayer, kSyscounterLayer, kChannelLayer};
    return v;
}

struct StackParams {
    int linear_l = 0; // linear digits have 2^(2^(l+3)) values
    int system_m = 0; // system symbols: 2^(2^m)
    std::uint64_t linear_phase = 0;
    std::uint64_t system_phase = 0;
    std::uint64_t oracle_budget = 1u << 20;
};

inline int level_of_origin(int order) { return (2 << (2 * order)) - 1; }
inline long level_period(int order) { return 8L << (2 * order); }

inline Box top_cell_box(int order)
{
    const int side = static_cast<int>(cell_side(order));
    return Box::square(level_of_origin(order), level_of_origin(order), side);
}

// The witness machine flips the letter under its head and never moves.
inline MachineSpec witness_machine()
{
    MachineSpec m = MachineSpec::inert({"q0", "qe", "qs"}, {"#", "1"}, 0, 1, 2, 0);
    m.at(0, 0) = Transition{1, 0, Move::up};
    m.at(1, 0) = Transition{0, 0, Move::up};
    return m;
}

inline Code machine_code(const MachineCell& c, const MachineSpec& m)
{
    const int na = m.letter_count(), nq = m.state_count();
    auto content = [&](int a, int q) {
        return static_cast<Code>(q < 0 ? 1 + a : 1 + na + a * nq + q);
    };
    switch (c.kind) {
    case CellKind::blank: return kBlank;
    case CellKind::letter:
    case CellKind::head:
    case CellKind::vertical: return content(c.up_letter, c.up_state);
    case CellKind::horizontal:
        return static_cast<Code>(1 + na + na * nq + (c.to_left < 0 ? m.qs : c.to_left) * nq +
                                 (c.to_right < 0 ? m.qs : c.to_right));
    }
    return kBlank;
}

// Digit state field: 0 is the shadow state, 1 the initial state, larger values name states.
inline int machine_state_of(std::uint64_t field, const MachineSpec& m)
{
    if (field == 0) return m.qs;
    if (field == 1) return m.q0;
    return field < static_cast<std::uint64_t>(m.state_count()) ? static_cast<int>(field) : m.qs;
}

inline ComputationArea area_from_digits(std::span<const Digit> digits, const LinearDigitLayout& lay,
                                        const MachineSpec& m)
{
    const int w = static_cast<int>(digits.size());
    ComputationArea a;
    a.width = a.height = w;
    std::vector<DecodedLinearDigit> dd;
    for (Digit d : digits) dd.push_back(decode_digit(d, lay));
    for (int i = 0; i < w; ++i) {
        const auto& d = dd[static_cast<std::size_t>(i)];
        a.active_cols.push_back(d.on[0]);
        a.active_rows.push_back(d.on[1]);
        a.west.push_back(machine_state_of(d.states[1], m));
        a.east.push_back(machine_state_of(d.states[2], m));
        a.arrows.push_back(d.direction);
        if (d.on[0])
            a.tape.push_back(TapeCell{static_cast<int>(d.letter % static_cast<std::uint64_t>(m.letter_count())),
                                      machine_state_of(d.states[0], m)});
    }
    return a;
}

inline LinearCounterState linear_state_at(const CounterParams& p, std::uint64_t s)
{
    const std::uint64_t bits = (std::uint64_t{1} << p.k) * static_cast<std::uint64_t>(p.w);
    LinearCounterState st = LinearCounterState::zero(p);
    if (bits < 64) s %= (std::uint64_t{1} << bits) + 1;
    if (bits < 64 && s == (std::uint64_t{1} << bits)) {
        std::fill(st.digits.begin(), st.digits.end(), p.c_max);
        st.frozen = true;
        return st;
    }
    const std::uint64_t D = p.alphabet();
    for (auto& d : st.digits) {
        d = s % D;
        s /= D;
    }
    return st;
}

// --- geometry shared by assembler and validator ---------------------------------------------

struct StackGeometry {
    CellIndex index;
    std::map<std::size_t, Organites> organites;

    explicit StackGeometry(const Pattern& p) : index(detect_cells(p))
    {
        for (std::size_t k = 0; k < index.cells().size(); ++k)
            if (index.cells()[k].order >= 3) organites.emplace(k, organite_boxes(index.cells()[k], p, index));
    }

    const CellRecord& cell(std::size_t k) const { return index.cells()[k]; }
};

namespace detail {

inline std::size_t at_offset(const Box& b, int x, int y)
{
    return static_cast<std::size_t>(y - b.y0()) * static_cast<std::size_t>(b.w) + static_cast<std::size_t>(x - b.x0());
}

inline std::vector<Code> expected_function_layer(const Pattern& p, const CellIndex& idx)
{
    const Box& b = p.support();
    const std::size_t rl = p.layer_index(kRobinsonLayer);
    const auto owner = idx.owner_map(b);
    std::map<int, CellIndex::Lines> lines;
    std::vector<Code> out(static_cast<std::size_t>(b.w) * static_cast<std::size_t>(b.h), kBlank);
    for (int y = b.y0(); y <= b.y1(); ++y)
        for (int x = b.x0(); x <= b.x1(); ++x) {
            const int own = owner[at_offset(b, x, y)];
            if (own < 0 || !is_blue(p, rl, x, y, b.z0())) continue;
            auto it = lines.find(own);
            if (it == lines.end()) it = lines.emplace(own, idx.free_lines(idx.cells()[static_cast<std::size_t>(own)])).first;
            const Box in = idx.cells()[static_cast<std::size_t>(own)].interior();
            const bool row = it->second.row_free[static_cast<std::size_t>(y - in.y0())] != 0;
            const bool col = it->second.col_free[static_cast<std::size_t>(x - in.x0())] != 0;
            out[at_offset(b, x, y)] = static_cast<Code>(1 + static_cast<int>(classify(row, col)));
        }
    return out;
}

inline std::vector<Code> expected_organite_layer(const Pattern& p, const StackGeometry& g)
{
    const Box& b = p.support();
    const std::size_t rl = p.layer_index(kRobinsonLayer);
    const auto owner = g.index.owner_map(b);
    std::vector<Code> out(static_cast<std::size_t>(b.w) * static_cast<std::size_t>(b.h), kBlank);
    for (int y = b.y0(); y <= b.y1(); ++y)
        for (int x = b.x0(); x <= b.x1(); ++x)
            if (is_blue(p, rl, x, y, b.z0()))
                out[at_offset(b, x, y)] = expected_address(g.index, owner, b, Pos{x, y, b.z0()}, g.organites);
    return out;
}

struct Slot {
    Pos pos;
    int item = 0; // digit index inside the word
};

inline std::vector<Slot> row_slots(const Organites& o, OrganiteCoord u, int count)
{
    std::vector<Slot> s;
    for (int i = 0; i < count; ++i) s.push_back({o.position(u, i, 0), i});
    return s;
}

// Channel positions for a modularity mark: the leftmost functional column of a vertical run
// of units and the bottom functional row of a horizontal run.
inline std::vector<Pos> channel_positions(const Organites& o, int mark)
{
    std::vector<Pos> out;
    if (mark != 1 && mark != 3) return out;
    const int column_unit = mark == 1 ? 4 : 1;
    const int row_unit = mark == 1 ? 2 : 5;
    for (int k = 1; k <= 6; ++k)
        for (int r = 0; r < o.block; ++r) out.push_back(o.position({k, column_unit}, 0, r));
    for (int k = 1; k <= 6; ++k)
        for (int c = 0; c < o.block; ++c) out.push_back(o.position({row_unit, k}, c, 0));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

template <class F>
void for_border(const CellRecord& c, F f)
{
    for (int x = c.box.x0(); x <= c.box.x1(); ++x) f(x, c.box.y0());
    for (int y = c.box.y0() + 1; y <= c.box.y1(); ++y) f(c.box.x0(), y);
}

} // namespace detail

// --- assembly -------------------------------------------------------------------------------

struct StackAssembly {
    int order = 0;
    int height = 0;
    StackParams params;
    Pattern shared;
    std::vector<Pattern> sections;
    std::optional<EffectiveSystemSpec> system;

    int even_levels() const { return order / 2 + 1; }
    CounterParams linear_params(int cell_order) const
    {
        return CounterParams::standard(params.linear_l + 3, 1 << (cell_order - 2));
    }
    SystemCounterParams system_params(int cell_order) const
    {
        return SystemCounterParams{params.system_m, 1 << (cell_order - 3)};
    }
    LinearDigitLayout layout() const { return LinearDigitLayout{params.linear_l}; }
};

inline SystemCounterState system_state_at(const SystemCounterParams& p, std::uint64_t steps)
{
    auto st = SystemCounterState::zero(p);
    for (std::uint64_t i = 0; i < steps; ++i) st = system_step(std::move(st), p);
    return st;
}

namespace detail {

inline void write_linear(Pattern& shared, const Organites& o, const LinearCounterState& st, Digit alphabet)
{
    const std::size_t ll = shared.layer_index(kLinearLayer);
    for (const auto& s : row_slots(o, {2, 3}, static_cast<int>(st.digits.size())))
        shared.set(ll, s.pos,
                   static_cast<Code>(1 + st.digits[static_cast<std::size_t>(s.item)] + (st.frozen ? alphabet : 0)));
}

inline void write_syscounter(Pattern& sec, const Organites& o, const SystemCounterState& st)
{
    const std::size_t sl = sec.layer_index(kSyscounterLayer);
    const int half = static_cast<int>(st.index.size());
    for (const auto& s : row_slots(o, {3, 3}, half)) sec.set(sl, s.pos, static_cast<Code>(1 + st.index[static_cast<std::size_t>(s.item)]));
    for (const auto& s : row_slots(o, {3, 4}, half)) sec.set(sl, s.pos, static_cast<Code>(1 + st.upper[static_cast<std::size_t>(s.item)]));
    for (const auto& s : row_slots(o, {4, 3}, half)) sec.set(sl, s.pos, static_cast<Code>(1 + st.lower[static_cast<std::size_t>(s.item)]));
    sec.set(sl, o.position({4, 4}, 0, 0), static_cast<Code>(st.frozen ? 2 : 1));
}

inline void write_machine(Pattern& shared, const Organites& o, const SpaceTimeDiagram& d, const MachineSpec& m)
{
    const std::size_t ml = shared.layer_index(kMachineLayer);
    for (int y = 0; y < d.height; ++y)
        for (int x = 0; x < d.width; ++x) shared.set(ml, o.position({6, 5}, x, y), machine_code(d.at(x, y), m));
}

} // namespace detail

inline StackAssembly assemble_stack(const EffectiveSystemSpec& sys, int order, int height, StackParams params = {},
                                    const Limits& lim = {})
{
    if (order < 3) throw Error(ErrorKind::InvalidArgument, "stack order must be at least 3");
    if (height < 1) throw Error(ErrorKind::InvalidArgument, "stack height must be positive");
    if (params.linear_l < 0 || params.linear_l > 1)
        throw Error(ErrorKind::Overflow, "linear digit layout beyond 16-bit codes");
    const Box window = top_cell_box(order);
    if (window.w > lim.max_window_side) throw Error(ErrorKind::WindowTooLarge, "stack window exceeds cap");

    StackAssembly st;
    st.order = order;
    st.height = height;
    st.params = params;
    st.system = sys;
    st.shared = tile_plane(0, window, lim);
    for (const auto& l : shared_layers()) st.shared.add_layer(l);
    Pattern& sh = st.shared;

    const StackGeometry g(sh);
    paint_modularity(sh, g.index.cells());
    sh.raw(sh.layer_index(kFunctionLayer)) = detail::expected_function_layer(sh, g.index);
    sh.raw(sh.layer_index(kOrganiteLayer)) = detail::expected_organite_layer(sh, g);

    const MachineSpec wm = witness_machine();
    const LinearDigitLayout lay = st.layout();
    for (const auto& [k, o] : g.organites) {
        const CellRecord& c = g.cell(k);
        const auto lp = st.linear_params(c.order);
        const auto t = static_cast<std::uint64_t>((c.box.x0() - level_of_origin(c.order)) / level_period(c.order));
        const auto ls = linear_state_at(lp, params.linear_phase + t);
        detail::write_linear(sh, o, ls, lp.alphabet());
        const auto area = area_from_digits(ls.digits, lay, wm);
        detail::write_machine(sh, o, run_area(wm, area), wm);
    }

    // per-level system counters for every section
    const int top = g.index.top_order();
    std::vector<std::vector<SystemCounterState>> counters(static_cast<std::size_t>(top + 1));
    for (int L = 3; L <= top; L += 2) {
        const auto sp = st.system_params(L);
        sp.validate();
        auto s = system_state_at(sp, params.system_phase);
        for (int c = 0; c < height; ++c) {
            counters[static_cast<std::size_t>(L)].push_back(s);
            s = system_step(std::move(s), sp);
        }
    }

    const std::size_t nbits = static_cast<std::size_t>(st.even_levels());
    for (int c = 0; c < height; ++c) {
        const Word z = sys.orbit(static_cast<std::uint64_t>(c), nbits);
        if (!sys.member(z, params.oracle_budget))
            throw Error(ErrorKind::OracleRejection, "orbit prefix rejected at section " + std::to_string(c));
        Pattern sec(window, section_layers());
        const std::size_t bl = sec.layer_index(kSysbitLayer), cl = sec.layer_index(kChannelLayer);
        auto bit_of = [&](int L) -> int {
            if (L % 2 == 0) return z[static_cast<std::size_t>(L / 2)];
            if (L >= 3) return static_cast<int>(counters[static_cast<std::size_t>(L)][static_cast<std::size_t>(c)].designated());
            return 0;
        };
        for (const auto& cell : g.index.cells()) {
            const Code v = static_cast<Code>(1 + bit_of(cell.order));
            detail::for_border(cell, [&](int x, int y) { sec.set(bl, Pos{x, y, 0}, v); });
        }
        for (const auto& [k, o] : g.organites) {
            const int L = g.cell(k).order;
            if (L % 2 == 0) continue;
            const auto& s = counters[static_cast<std::size_t>(L)][static_cast<std::size_t>(c)];
            detail::write_syscounter(sec, o, s);
            for (const Pos& q : detail::channel_positions(o, L % 4))
                sec.set(cl, q, static_cast<Code>(1 + s.designated()));
        }
        st.sections.push_back(std::move(sec));
    }
    return st;
}

// --- validation -----------------------------------------------------------------------------

namespace detail {

inline void compare_layer(const Pattern& p, std::size_t layer, const std::vector<Code>& want, const char* rule,
                          std::vector<RuleViolation>& out)
{
    const Box& b = p.support();
    const auto& got = p.raw(layer);
    for (int y = b.y0(); y <= b.y1(); ++y)
        for (int x = b.x0(); x <= b.x1(); ++x) {
            const std::size_t i = at_offset(b, x, y);
            if (got[i] != want[i])
                out.push_back({rule, {Pos{x, y, b.z0()}},
                               "expected " + std::to_string(want[i]) + ", found " + std::to_string(got[i])});
        }
}

inline std::optional<LinearCounterState> read_linear(const Pattern& sh, const Organites& o, const CounterParams& lp,
                                                     const Pos& where, std::vector<RuleViolation>& out)
{
    const std::size_t ll = sh.layer_index(kLinearLayer);
    LinearCounterState st;
    std::optional<bool> frozen;
    const Digit D = lp.alphabet();
    for (const auto& s : row_slots(o, {2, 3}, lp.w)) {
        const Code v = sh.at(ll, s.pos);
        if (v < 1 || v > 2 * D) {
            out.push_back({"linear-word", {s.pos}, "not a counter digit"});
            return std::nullopt;
        }
        const bool f = v > D;
        if (frozen && *frozen != f) {
            out.push_back({"linear-word", {s.pos}, "freezing flag differs across the word"});
            return std::nullopt;
        }
        frozen = f;
        st.digits.push_back((v - 1) % D);
    }
    st.frozen = frozen.value_or(false);
    if (st.frozen && !detail::all_equal(st.digits, lp.c_max)) {
        out.push_back({"linear-word", {where}, "frozen word is not maximal"});
        return std::nullopt;
    }
    return st;
}

inline std::optional<SystemCounterState> read_syscounter(const Pattern& sec, const Organites& o,
                                                         const SystemCounterParams& sp, const Pos& where,
                                                         std::vector<RuleViolation>& out)
{
    const std::size_t sl = sec.layer_index(kSyscounterLayer);
    SystemCounterState st;
    bool ok = true;
    auto read = [&](OrganiteCoord u, std::vector<Digit>& word, Digit limit) {
        for (const auto& s : row_slots(o, u, sp.half)) {
            const Code v = sec.at(sl, s.pos);
            if (v < 1 || v > limit) {
                out.push_back({"syscounter-word", {s.pos}, "symbol out of range"});
                ok = false;
                return;
            }
            word.push_back(v - 1);
        }
    };
    read({3, 3}, st.index, sp.pair_symbols());
    read({3, 4}, st.upper, sp.symbols());
    read({4, 3}, st.lower, sp.symbols());
    const Code f = sec.at(sl, o.position({4, 4}, 0, 0));
    if (f != 1 && f != 2) {
        out.push_back({"syscounter-word", {o.position({4, 4}, 0, 0)}, "freezing flag out of range"});
        ok = false;
    }
    st.frozen = f == 2;
    if (!ok) return std::nullopt;
    if (st.frozen && !system_at_max(st, sp)) {
        out.push_back({"syscounter-word", {where}, "frozen counter is not maximal"});
        return std::nullopt;
    }
    return st;
}

} // namespace detail

struct SectionReading {
    std::vector<RuleViolation> violations;
    std::map<int, int> level_bits;                       // first bit read per level
    std::map<int, SystemCounterState> level_counters;    // first counter read per odd level >= 3
};

inline SectionReading validate_section(const StackAssembly& st, const StackGeometry& g, int c)
{
    SectionReading r;
    auto& out = r.violations;
    const Pattern& sec = st.sections[static_cast<std::size_t>(c)];
    const Pattern& sh = st.shared;
    const Box& b = sec.support();
    const int z = b.z0();
    auto at = [&](std::size_t layer, Pos q) { return sec.at(layer, Pos{q.x, q.y, z}); };
    auto here = [&](Pos q) { return Pos{q.x, q.y, c}; };

    // system bits: the south and west border of every cell, one bit per level
    const std::size_t bl = sec.layer_index(kSysbitLayer);
    std::vector<char> mask(b.volume(), 0);
    std::vector<int> cell_bit(g.index.cells().size(), -1);
    for (std::size_t k = 0; k < g.index.cells().size(); ++k) {
        const CellRecord& cell = g.cell(k);
        std::array<std::vector<Pos>, 2> seen;
        detail::for_border(cell, [&](int x, int y) {
            if (!b.contains(Pos{x, y, z})) return;
            mask[detail::at_offset(b, x, y)] = 1;
            const Code v = at(bl, Pos{x, y, 0});
            if (v == 1 || v == 2) seen[static_cast<std::size_t>(v - 1)].push_back(here(Pos{x, y, 0}));
            else out.push_back({"sysbit-localization", {here(Pos{x, y, 0})}, "cell border without a system bit"});
        });
        if (seen[0].empty() && seen[1].empty()) continue;
        const int bit = seen[1].size() > seen[0].size() ? 1 : 0;
        for (const Pos& q : seen[static_cast<std::size_t>(1 - bit)])
            out.push_back({"sysbit-synchronization", {q}, "bit differs from the rest of the cell border"});
        cell_bit[k] = bit;
        auto [it, fresh] = r.level_bits.emplace(cell.order, bit);
        if (!fresh && it->second != bit)
            out.push_back({"sysbit-synchronization", {here(cell.box.origin)},
                           "level " + std::to_string(cell.order) + " cells disagree"});
    }
    for (int y = b.y0(); y <= b.y1(); ++y)
        for (int x = b.x0(); x <= b.x1(); ++x)
            if (!mask[detail::at_offset(b, x, y)] && sec.at(bl, Pos{x, y, z}) != kBlank)
                out.push_back({"sysbit-localization", {here(Pos{x, y, 0})}, "system bit off the cell borders"});

    // system counter and random channels on odd-level cells
    const std::size_t sl = sec.layer_index(kSyscounterLayer), cl = sec.layer_index(kChannelLayer);
    const std::size_t ml = sh.layer_index(kModularityLayer);
    std::fill(mask.begin(), mask.end(), 0);
    std::vector<char> chmask(b.volume(), 0);
    for (const auto& [k, o] : g.organites) {
        const CellRecord& cell = g.cell(k);
        if (cell.order % 2 == 0) continue;
        const auto sp = st.system_params(cell.order);
        for (OrganiteCoord u : {OrganiteCoord{3, 3}, OrganiteCoord{3, 4}, OrganiteCoord{4, 3}})
            for (const auto& s : detail::row_slots(o, u, sp.half)) mask[detail::at_offset(b, s.pos.x, s.pos.y)] = 1;
        const Pos fz = o.position({4, 4}, 0, 0);
        mask[detail::at_offset(b, fz.x, fz.y)] = 1;
        const auto s = detail::read_syscounter(sec, o, sp, here(cell.box.origin), out);
        if (!s) continue;
        auto [it, fresh] = r.level_counters.emplace(cell.order, *s);
        if (!fresh && !(it->second == *s))
            out.push_back({"syscounter-synchronization", {here(cell.box.origin)},
                           "level " + std::to_string(cell.order) + " counters disagree"});
        const int bit = static_cast<int>(s->designated());
        if (cell_bit[k] >= 0 && cell_bit[k] != bit)
            out.push_back({"sysbit-evaluation", {here(cell.box.origin)}, "system bit differs from the counter"});
        const Code mv = sh.at(ml, Pos{cell.box.x1(), cell.box.y1(), sh.support().z0()});
        const int mark = mv >= 5 && mv <= 8 ? mv - 5 : -1;
        for (const Pos& q : detail::channel_positions(o, mark)) {
            chmask[detail::at_offset(b, q.x, q.y)] = 1;
            const Code v = at(cl, q);
            if (v == kBlank) out.push_back({"channel-localization", {here(q)}, "channel without symbol"});
            else if (v != 1 + bit) out.push_back({"channel-synchronization", {here(q)}, "channel differs from the counter"});
        }
    }
    for (int y = b.y0(); y <= b.y1(); ++y)
        for (int x = b.x0(); x <= b.x1(); ++x) {
            const std::size_t i = detail::at_offset(b, x, y);
            if (!mask[i] && sec.at(sl, Pos{x, y, z}) != kBlank)
                out.push_back({"syscounter-localization", {here(Pos{x, y, 0})}, "counter symbol off its sub-units"});
            if (!chmask[i] && sec.at(cl, Pos{x, y, z}) != kBlank)
                out.push_back({"channel-localization", {here(Pos{x, y, 0})}, "symbol off the channel of the mark"});
        }
    return r;
}

inline std::vector<RuleViolation> validate_shared(const StackAssembly& st, const StackGeometry& g, unsigned threads)
{
    const Pattern& sh = st.shared;
    std::vector<RuleViolation> out = check_robinson_rules(sh, threads);
    auto append = [&](std::vector<RuleViolation> v) { out.insert(out.end(), v.begin(), v.end()); };
    append(validate_modularity_layer(sh, g.index.cells()));
    detail::compare_layer(sh, sh.layer_index(kFunctionLayer), detail::expected_function_layer(sh, g.index),
                          "function-area", out);
    for (const auto& [k, o] : g.organites) append(subdivide_cell(g.cell(k), sh, g.index).violations);

    // linear counters: one step per cell eastward, equal northward; machines read them
    const Box& b = sh.support();
    const std::size_t ll = sh.layer_index(kLinearLayer), ml = sh.layer_index(kMachineLayer);
    std::vector<char> lmask(b.volume(), 0), mmask(b.volume(), 0);
    std::map<std::pair<int, int>, std::pair<int, LinearCounterState>> states; // (x0, y0) -> (order, state)
    const MachineSpec wm = witness_machine();
    const LinearDigitLayout lay = st.layout();
    for (const auto& [k, o] : g.organites) {
        const CellRecord& cell = g.cell(k);
        const auto lp = st.linear_params(cell.order);
        for (const auto& s : detail::row_slots(o, {2, 3}, lp.w)) lmask[detail::at_offset(b, s.pos.x, s.pos.y)] = 1;
        for (int y = 0; y < o.block; ++y)
            for (int x = 0; x < o.block; ++x) {
                const Pos q = o.position({6, 5}, x, y);
                mmask[detail::at_offset(b, q.x, q.y)] = 1;
            }
        const auto ls = detail::read_linear(sh, o, lp, cell.box.origin, out);
        if (!ls) continue;
        states.emplace(std::pair{cell.box.x0(), cell.box.y0()}, std::pair{cell.order, *ls});
        const auto area = area_from_digits(ls->digits, lay, wm);
        const auto d = run_area(wm, area);
        for (int y = 0; y < d.height; ++y)
            for (int x = 0; x < d.width; ++x) {
                const Pos q = o.position({6, 5}, x, y);
                const Code want = machine_code(d.at(x, y), wm), got = sh.at(ml, q);
                if (want != got)
                    out.push_back({"machine-rules", {q}, "expected " + std::to_string(want) + ", found " + std::to_string(got)});
            }
        const auto sig = compute_signals(d, area, wm);
        if (!sig.admissible)
            out.push_back({"machine-admissibility", {cell.box.origin}, "error signal meets a well-initialized area"});
    }
    for (const auto& [xy, v] : states) {
        const auto& [L, s] = v;
        const long step = level_period(L);
        const auto east = states.find({xy.first + static_cast<int>(step), xy.second});
        if (east != states.end() && !(east->second.second == linear_step(s, st.linear_params(L))))
            out.push_back({"linear-increment", {Pos{xy.first, xy.second, 0}}, "east neighbour is not the successor"});
        const auto north = states.find({xy.first, xy.second + static_cast<int>(step)});
        if (north != states.end() && !(north->second.second == s))
            out.push_back({"linear-synchronization", {Pos{xy.first, xy.second, 0}}, "north neighbour differs"});
    }
    for (int y = b.y0(); y <= b.y1(); ++y)
        for (int x = b.x0(); x <= b.x1(); ++x) {
            const std::size_t i = detail::at_offset(b, x, y);
            if (!lmask[i] && sh.raw(ll)[i] != kBlank)
                out.push_back({"linear-localization", {Pos{x, y, 0}}, "counter digit off its sub-unit"});
            if (!mmask[i] && sh.raw(ml)[i] != kBlank)
                out.push_back({"machine-localization", {Pos{x, y, 0}}, "machine symbol off the machine sub-unit"});
        }
    return out;
}

// Runs every layer check. Sections are checked concurrently when threads > 1; the result is
// sorted by position then rule id, independent of the thread count.
inline std::vector<RuleViolation> validate_stack(const StackAssembly& st, unsigned threads = 1)
{
    for (const auto& l : shared_layers()) st.shared.layer_index(l);
    for (const auto& s : st.sections)
        for (const auto& l : section_layers()) s.layer_index(l);
    const StackGeometry g(st.shared);
    std::vector<RuleViolation> out = validate_shared(st, g, threads);

    std::vector<SectionReading> readings(st.sections.size());
    threads = std::max(1u, threads);
    if (threads == 1) {
        for (std::size_t c = 0; c < st.sections.size(); ++c) readings[c] = validate_section(st, g, static_cast<int>(c));
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t c = t; c < st.sections.size(); c += threads)
                    readings[c] = validate_section(st, g, static_cast<int>(c));
            });
    }
    for (auto& r : readings) out.insert(out.end(), r.violations.begin(), r.violations.end());

    // counters step once per section along the third axis
    for (std::size_t c = 0; c + 1 < readings.size(); ++c)
        for (const auto& [L, s] : readings[c].level_counters) {
            const auto it = readings[c + 1].level_counters.find(L);
            if (it == readings[c + 1].level_counters.end()) continue;
            if (!(it->second == system_step(s, st.system_params(L))))
                out.push_back({"syscounter-increment", {Pos{0, 0, static_cast<int>(c + 1)}},
                               "level " + std::to_string(L) + " counter is not the successor"});
        }
    sort_violations(out);
    return out;
}

// --- simulation map -------------------------------------------------------------------------

struct SimulationPrefix {
    Word bits;
    std::vector<Pos> provenance; // origin of a cell supplying each bit
};

inline SimulationPrefix phi(const StackAssembly& st, int c, const std::vector<CellRecord>& cells)
{
    if (c < 0 || c >= static_cast<int>(st.sections.size()))
        throw Error(ErrorKind::InvalidArgument, "no section " + std::to_string(c));
    const Pattern& sec = st.sections[static_cast<std::size_t>(c)];
    const std::size_t bl = sec.layer_index(kSysbitLayer);
    std::map<int, std::pair<int, Pos>> by_level;
    for (const auto& cell : cells) {
        if (cell.order % 2 != 0) continue;
        const Code v = sec.at(bl, Pos{cell.box.x0(), cell.box.y0(), sec.support().z0()});
        if (v != 1 && v != 2) throw Error(ErrorKind::InconsistentBits, "cell without a system bit");
        const auto [it, fresh] = by_level.emplace(cell.order / 2, std::pair{v - 1, cell.box.origin});
        if (!fresh && it->second.first != v - 1)
            throw Error(ErrorKind::InconsistentBits, "level " + std::to_string(cell.order) + " cells disagree");
    }
    SimulationPrefix p;
    for (int n = 0; by_level.count(n); ++n) {
        p.bits.push_back(by_level[n].first);
        p.provenance.push_back(by_level[n].second);
    }
    return p;
}

inline SimulationPrefix phi(const StackAssembly& st, int c) { return phi(st, c, detect_cells(st.shared)); }

inline bool check_commuting(const StackAssembly& st)
{
    if (st.sections.size() < 2) return true;
    if (!st.system) throw Error(ErrorKind::InvalidArgument, "stack carries no system oracle");
    const auto cells = detect_cells(st.shared);
    std::optional<SimulationPrefix> prev;
    for (int c = 0; c < static_cast<int>(st.sections.size()); ++c) {
        SimulationPrefix cur;
        try {
            cur = phi(st, c, cells);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::InconsistentBits) return false;
            throw;
        }
        if (prev) {
            const std::size_t n = std::min(prev->bits.size(), cur.bits.size());
            std::vector<std::pair<int, int>> pairs;
            for (std::size_t i = 0; i < n; ++i) pairs.emplace_back(prev->bits[i], cur.bits[i]);
            if (!st.system->graph(pairs, st.params.oracle_budget)) return false;
        }
        prev = std::move(cur);
    }
    return true;
}

// --- three-dimensional form -----------------------------------------------------------------

inline Pattern to_pattern(const StackAssembly& st)
{
    const Box& w = st.shared.support();
    std::vector<std::string> names = shared_layers();
    names.insert(names.end(), section_layers().begin(), section_layers().end());
    Pattern p(Box{{w.x0(), w.y0(), 0}, w.w, w.h, st.height, 3}, names);
    const std::size_t plane = static_cast<std::size_t>(w.w) * static_cast<std::size_t>(w.h);
    for (std::size_t l = 0; l < names.size(); ++l)
        for (int c = 0; c < st.height; ++c) {
            const bool shared = l < shared_layers().size();
            const Pattern& src = shared ? st.shared : st.sections[static_cast<std::size_t>(c)];
            const auto& v = src.raw(src.layer_index(names[l]));
            std::copy(v.begin(), v.end(), p.raw(l).begin() + static_cast<std::ptrdiff_t>(plane * static_cast<std::size_t>(c)));
        }
    return p;
}

// Splits a three-dimensional stack pattern; shared layers that change along the third axis
// are reported as structure-transport violations.
inline StackAssembly stack_from_pattern(const Pattern& p, std::vector<RuleViolation>& transport,
                                        StackParams params = {})
{
    const Box& b = p.support();
    if (b.w != b.h) throw Error(ErrorKind::InvalidWindow, "stack window must be square");
    int order = -1;
    for (int n = 0; n <= 6; ++n)
        if (cell_side(n) == b.w) order = n;
    if (order < 3) throw Error(ErrorKind::InvalidWindow, "window is not the box of an order >= 3 cell");
    StackAssembly st;
    st.order = order;
    st.height = b.d;
    st.params = params;
    const Box plane{{b.x0(), b.y0(), 0}, b.w, b.h, 1, 2};
    const std::size_t n = plane.volume();
    st.shared = Pattern(plane, shared_layers());
    for (const auto& name : shared_layers()) {
        const auto& src = p.raw(p.layer_index(name));
        auto& dst = st.shared.raw(st.shared.layer_index(name));
        std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(n), dst.begin());
        for (int c = 1; c < b.d; ++c)
            for (std::size_t i = 0; i < n; ++i)
                if (src[static_cast<std::size_t>(c) * n + i] != src[i]) {
                    const int x = b.x0() + static_cast<int>(i % static_cast<std::size_t>(b.w));
                    const int y = b.y0() + static_cast<int>(i / static_cast<std::size_t>(b.w));
                    transport.push_back({"structure-transport", {Pos{x, y, c}}, "layer " + name + " changes along the stack"});
                }
    }
    for (int c = 0; c < b.d; ++c) {
        Pattern sec(plane, section_layers());
        for (const auto& name : section_layers()) {
            const auto& src = p.raw(p.layer_index(name));
            auto& dst = sec.raw(sec.layer_index(name));
            std::copy(src.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(c) * n),
                      src.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(c + 1) * n), dst.begin());
        }
        st.sections.push_back(std::move(sec));
    }
    return st;
}

} // namespace sftsim
