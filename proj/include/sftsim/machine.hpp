#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "counters.hpp"
#include "error.hpp"

namespace sftsim {

enum class Move : std::uint8_t { left, right, up };

inline char to_char(Move m) { return m == Move::left ? '<' : m == Move::right ? '>' : '^'; }

struct Transition {
    int letter = 0;
    int state = 0;
    Move move = Move::up;
    friend bool operator==(const Transition&, const Transition&) = default;
};

// A computing machine with initial, error and shadow states. The error and shadow states
// never act: they keep their letter and stay in place.
struct MachineSpec {
    std::vector<std::string> states;
    std::vector<std::string> letters;
    int q0 = 0;
    int qe = 1;
    int qs = 2;
    int blank = 0;
    std::vector<Transition> delta; // index letter * |Q| + state

    int state_count() const { return static_cast<int>(states.size()); }
    int letter_count() const { return static_cast<int>(letters.size()); }

    const Transition& at(int a, int q) const
    {
        return delta[static_cast<std::size_t>(a) * states.size() + static_cast<std::size_t>(q)];
    }
    Transition& at(int a, int q) { return delta[static_cast<std::size_t>(a) * states.size() + static_cast<std::size_t>(q)]; }

    // Inert table: every pair keeps its letter and state and stays.
    static MachineSpec inert(std::vector<std::string> states, std::vector<std::string> letters, int q0, int qe, int qs,
                             int blank)
    {
        MachineSpec m{std::move(states), std::move(letters), q0, qe, qs, blank, {}};
        m.delta.resize(static_cast<std::size_t>(m.state_count() * m.letter_count()));
        for (int a = 0; a < m.letter_count(); ++a)
            for (int q = 0; q < m.state_count(); ++q) m.at(a, q) = Transition{a, q, Move::up};
        return m;
    }

    void validate() const
    {
        const int nq = state_count(), na = letter_count();
        if (nq < 3 || na < 1) throw Error(ErrorKind::InvalidArgument, "machine needs three states and one letter");
        for (int s : {q0, qe, qs})
            if (s < 0 || s >= nq) throw Error(ErrorKind::InvalidArgument, "special state out of range");
        if (q0 == qe || q0 == qs || qe == qs) throw Error(ErrorKind::InvalidArgument, "special states must differ");
        if (blank < 0 || blank >= na) throw Error(ErrorKind::InvalidArgument, "blank out of range");
        if (delta.size() != static_cast<std::size_t>(nq * na))
            throw Error(ErrorKind::DimensionMismatch, "transition table size");
        for (int a = 0; a < na; ++a)
            for (int q = 0; q < nq; ++q) {
                const auto& t = at(a, q);
                if (t.letter < 0 || t.letter >= na || t.state < 0 || t.state >= nq)
                    throw Error(ErrorKind::InvalidArgument, "transition target out of range");
                if ((q == qe || q == qs) && !(t == Transition{a, q, Move::up}))
                    throw Error(ErrorKind::InvalidArgument, "error and shadow states must be inert");
            }
    }

    // Pads letters and states to 2^(2^l) with extras that never act.
    MachineSpec padded(int l) const
    {
        const auto size = static_cast<int>(std::uint64_t{1} << (1u << l));
        if (size < state_count() || size < letter_count())
            throw Error(ErrorKind::InvalidArgument, "padding size below alphabet size");
        auto st = states;
        auto le = letters;
        for (int i = state_count(); i < size; ++i) st.push_back("_q" + std::to_string(i));
        for (int i = letter_count(); i < size; ++i) le.push_back("_a" + std::to_string(i));
        MachineSpec out = inert(st, le, q0, qe, qs, blank);
        for (int a = 0; a < letter_count(); ++a)
            for (int q = 0; q < state_count(); ++q) out.at(a, q) = at(a, q);
        return out;
    }

    static MachineSpec random(std::mt19937_64& rng, int nstates, int nletters)
    {
        std::vector<std::string> st, le;
        for (int i = 0; i < nstates; ++i) st.push_back("q" + std::to_string(i));
        for (int i = 0; i < nletters; ++i) le.push_back(std::to_string(i));
        MachineSpec m = inert(st, le, 0, 1, 2, 0);
        std::uniform_int_distribution<int> qd(0, nstates - 1), ad(0, nletters - 1), md(0, 2);
        for (int a = 0; a < nletters; ++a)
            for (int q = 0; q < nstates; ++q)
                if (q != m.qe && q != m.qs) {
                    int target = qd(rng);
                    if (target == m.qs) target = m.q0; // shadow is never entered on purpose
                    m.at(a, q) = Transition{ad(rng), target, static_cast<Move>(md(rng))};
                }
        return m;
    }
};

struct TapeCell {
    int letter = 0;
    int state = 0;
    friend bool operator==(const TapeCell&, const TapeCell&) = default;
};

struct ComputationArea {
    int width = 1;
    int height = 1;
    std::vector<bool> active_cols;
    std::vector<bool> active_rows;
    std::vector<TapeCell> tape;          // one per active column
    std::vector<int> west;                // entering state per row (shadow when idle)
    std::vector<int> east;
    std::vector<ErrorDirection> arrows;   // per column, above the top row

    // All lines active, blank tape with the initial head on the left, idle sides.
    static ComputationArea well_initialized(const MachineSpec& m, int width, int height)
    {
        ComputationArea a;
        a.width = width;
        a.height = height;
        a.active_cols.assign(static_cast<std::size_t>(width), true);
        a.active_rows.assign(static_cast<std::size_t>(height), true);
        a.tape.assign(static_cast<std::size_t>(width), TapeCell{m.blank, m.qs});
        if (width > 0) a.tape[0].state = m.q0;
        a.west.assign(static_cast<std::size_t>(height), m.qs);
        a.east.assign(static_cast<std::size_t>(height), m.qs);
        a.arrows.assign(static_cast<std::size_t>(width), ErrorDirection::left);
        return a;
    }

    std::vector<int> columns() const
    {
        std::vector<int> c;
        for (int x = 0; x < width; ++x)
            if (active_cols[static_cast<std::size_t>(x)]) c.push_back(x);
        return c;
    }

    void validate() const
    {
        if (width < 1 || height < 1) throw Error(ErrorKind::DimensionMismatch, "area dimensions must be positive");
        const auto w = static_cast<std::size_t>(width), h = static_cast<std::size_t>(height);
        if (active_cols.size() != w || arrows.size() != w) throw Error(ErrorKind::DimensionMismatch, "column data");
        if (active_rows.size() != h || west.size() != h || east.size() != h)
            throw Error(ErrorKind::DimensionMismatch, "row data");
        if (tape.size() != columns().size())
            throw Error(ErrorKind::DimensionMismatch, "tape length differs from active column count");
    }
};

enum class CellKind : std::uint8_t { blank, letter, head, vertical, horizontal };

struct MachineCell {
    CellKind kind = CellKind::blank;
    int letter = -1; // superimposed letter (letter and head cells)
    int state = -1;  // superimposed head state (head cells)
    int up_letter = -1; // upward output at intersections, carried content on vertical cells
    int up_state = -1;  // -1 when the output is a bare letter
    int to_left = -1;   // horizontal traffic on horizontal cells
    int to_right = -1;
};

enum class HeadEvent : std::uint8_t { move, fuse, border_hit };

inline const char* to_string(HeadEvent e)
{
    return e == HeadEvent::move ? "move" : e == HeadEvent::fuse ? "fuse" : "border-hit";
}

struct HeadEventRecord {
    int x = 0;
    int y = 0;
    int state = 0;
    HeadEvent event = HeadEvent::move;
    int inputs = 1; // heads entering the position
};

struct SpaceTimeDiagram {
    int width = 0;
    int height = 0;
    std::vector<MachineCell> cells; // row-major, row 0 at the bottom
    std::vector<HeadEventRecord> events;

    const MachineCell& at(int x, int y) const
    {
        return cells[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
    }
    MachineCell& at(int x, int y)
    {
        return cells[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
    }
};

// Row by row: each computation-active row reads the contents coming from below and the side
// entries. Heads moving sideways reach the next active column of the same row. When a head
// moving right and one moving left would enter each other's position, the right-moving head
// travels and the other position fuses.
inline SpaceTimeDiagram run_area(const MachineSpec& m, const ComputationArea& area)
{
    m.validate();
    area.validate();
    SpaceTimeDiagram d{area.width, area.height,
                       std::vector<MachineCell>(static_cast<std::size_t>(area.width * area.height)), {}};
    const auto cols = area.columns();
    const std::size_t n = cols.size();
    std::vector<TapeCell> below = area.tape;
    const int qs = m.qs;
    auto is_head = [&](int q) { return q >= 0 && q != qs; };

    std::vector<int> rin(n), lin(n), rout(n), lout(n);
    for (int y = 0; y < area.height; ++y) {
        if (!area.active_rows[static_cast<std::size_t>(y)]) {
            for (std::size_t k = 0; k < n; ++k) {
                auto& c = d.at(cols[k], y);
                c.kind = CellKind::vertical;
                c.up_letter = below[k].letter;
                c.up_state = below[k].state == qs ? -1 : below[k].state;
            }
            continue;
        }
        const int w = area.west[static_cast<std::size_t>(y)];
        const int e = area.east[static_cast<std::size_t>(y)];
        auto moves = [&](std::size_t k, Move dir) {
            return is_head(below[k].state) && m.at(below[k].letter, below[k].state).move == dir;
        };
        for (std::size_t k = 0; k < n; ++k) {
            rin[k] = k == 0 ? w : rout[k - 1];
            const Transition& t = m.at(below[k].letter, below[k].state);
            rout[k] = moves(k, Move::right) && k + 1 < n && !is_head(rin[k]) ? t.state : qs;
        }
        for (std::size_t k = n; k-- > 0;) {
            lin[k] = k + 1 == n ? e : lout[k + 1];
            const Transition& t = m.at(below[k].letter, below[k].state);
            lout[k] = moves(k, Move::left) && k > 0 && !is_head(rin[k]) && !is_head(lin[k]) ? t.state : qs;
        }
        for (std::size_t k = 0; k < n; ++k) {
            const int x = cols[k];
            auto& c = d.at(x, y);
            const TapeCell in = below[k];
            const bool bh = is_head(in.state);
            const int count = (bh ? 1 : 0) + (is_head(rin[k]) ? 1 : 0) + (is_head(lin[k]) ? 1 : 0);
            c.letter = in.letter;
            TapeCell up{in.letter, qs};
            if (count >= 2) {
                up.state = m.qe;
                d.events.push_back({x, y, m.qe, HeadEvent::fuse, count});
            } else if (count == 1 && !bh) {
                up.state = is_head(rin[k]) ? rin[k] : lin[k];
            } else if (count == 1) {
                const Transition& t = m.at(in.letter, in.state);
                if (t.move == Move::up) {
                    up = TapeCell{t.letter, t.state};
                } else if ((t.move == Move::right && k + 1 < n) || (t.move == Move::left && k > 0)) {
                    up.letter = t.letter;
                    d.events.push_back({x, y, t.state, HeadEvent::move, 1});
                } else {
                    up.state = m.qe;
                    d.events.push_back({x, y, m.qe, HeadEvent::border_hit, 1});
                }
            }
            if (count == 0) {
                c.kind = CellKind::letter;
            } else {
                c.kind = CellKind::head;
                c.state = count >= 2 || !bh ? up.state : in.state;
            }
            c.up_letter = up.letter;
            c.up_state = up.state == qs ? -1 : up.state;
            below[k] = up;
        }
        // horizontal traffic between active columns
        for (int x = 0; x < area.width; ++x) {
            if (area.active_cols[static_cast<std::size_t>(x)]) continue;
            auto& c = d.at(x, y);
            c.kind = CellKind::horizontal;
            const auto it = std::lower_bound(cols.begin(), cols.end(), x);
            const auto k = static_cast<std::size_t>(it - cols.begin()); // next active column index
            c.to_right = k == 0 ? w : rout[k - 1];
            c.to_left = k == n ? e : lout[k];
        }
    }
    return d;
}

// Content emitted upward by active column k of row y (the tape after that row).
inline std::vector<TapeCell> row_output(const SpaceTimeDiagram& d, const ComputationArea& area, const MachineSpec& m,
                                        int y)
{
    std::vector<TapeCell> out;
    for (int x : area.columns()) {
        const auto& c = d.at(x, y);
        out.push_back(TapeCell{c.up_letter, c.up_state < 0 ? m.qs : c.up_state});
    }
    return out;
}

// Conventional single-head machine on a bounded tape; leaving the tape enters the error state
// without writing.
struct ReferenceMachine {
    const MachineSpec* spec;
    std::vector<int> tape;
    int head = 0;
    int state = 0;

    ReferenceMachine(const MachineSpec& m, std::vector<int> t) : spec(&m), tape(std::move(t)), state(m.q0) {}

    void step()
    {
        const Transition& t = spec->at(tape[static_cast<std::size_t>(head)], state);
        const int target = t.move == Move::left ? head - 1 : t.move == Move::right ? head + 1 : head;
        if (target < 0 || target >= static_cast<int>(tape.size())) {
            state = spec->qe;
            return;
        }
        tape[static_cast<std::size_t>(head)] = t.letter;
        state = t.state;
        head = target;
    }

    std::vector<TapeCell> configuration() const
    {
        std::vector<TapeCell> out;
        for (std::size_t i = 0; i < tape.size(); ++i)
            out.push_back(TapeCell{tape[i], static_cast<int>(i) == head ? state : spec->qs});
        return out;
    }
};

inline bool reference_equivalence(const MachineSpec& m, int width, int steps)
{
    if (width < 1 || steps < 1) throw Error(ErrorKind::InvalidArgument, "width and steps must be positive");
    const auto area = ComputationArea::well_initialized(m, width, steps);
    const auto d = run_area(m, area);
    ReferenceMachine ref(m, std::vector<int>(static_cast<std::size_t>(width), m.blank));
    for (int y = 0; y < steps; ++y) {
        ref.step();
        if (row_output(d, area, m, y) != ref.configuration()) return false;
    }
    return true;
}

// --- error signals --------------------------------------------------------------------------

struct Pos2 {
    int x = 0;
    int y = 0;
    friend bool operator==(const Pos2&, const Pos2&) = default;
};

struct SignalReport {
    int first_error = 0;   // column of the first top-row error, width when none
    int tape_lr = 0;       // first dirty tape column from the left, width when clean
    int tape_rl = 0;       // one past the last dirty tape column, 0 when clean
    int west_split = 0;    // rows from the bottom up to the topmost dirty west entry, 0 when clean
    int east_split = 0;
    std::vector<Pos2> error_path;
    bool admissible = true;

    bool has_error(int width) const { return first_error < width; }
};

inline SignalReport compute_signals(const SpaceTimeDiagram& d, const ComputationArea& area, const MachineSpec& m)
{
    area.validate();
    if (d.width != area.width || d.height != area.height)
        throw Error(ErrorKind::DimensionMismatch, "diagram and area differ");
    const int W = area.width, H = area.height;
    SignalReport r;

    r.first_error = W;
    for (int x = 0; x < W; ++x) {
        const bool off = !area.active_cols[static_cast<std::size_t>(x)];
        const bool err = !off && d.at(x, H - 1).up_state == m.qe;
        if (off || err) {
            r.first_error = x;
            break;
        }
    }

    const auto cols = area.columns();
    auto dirty = [&](std::size_t k) {
        const TapeCell want{m.blank, k == 0 ? m.q0 : m.qs};
        return !(area.tape[k] == want);
    };
    r.tape_lr = W;
    r.tape_rl = 0;
    for (std::size_t k = 0; k < cols.size(); ++k)
        if (dirty(k)) {
            r.tape_lr = std::min(r.tape_lr, cols[k]);
            r.tape_rl = cols[k] + 1;
        }
    if (cols.empty()) r.tape_lr = 0, r.tape_rl = W;

    auto side_split = [&](const std::vector<int>& entries) {
        for (int y = H - 1; y >= 0; --y)
            if (!area.active_rows[static_cast<std::size_t>(y)] || entries[static_cast<std::size_t>(y)] != m.qs)
                return y + 1;
        return 0;
    };
    r.west_split = side_split(area.west);
    r.east_split = side_split(area.east);

    if (r.has_error(W)) {
        const bool right = area.arrows[static_cast<std::size_t>(r.first_error)] == ErrorDirection::right;
        if (right)
            for (int x = r.first_error; x < W; ++x) r.error_path.push_back({x, H - 1});
        else
            for (int x = r.first_error; x >= 0; --x) r.error_path.push_back({x, H - 1});
        const int side = right ? W - 1 : 0;
        for (int y = H - 2; y >= 0; --y) r.error_path.push_back({side, y});
        const bool tape_clean = r.tape_lr == W && r.tape_rl == 0;
        const bool sides_clean = r.west_split == 0 && r.east_split == 0;
        r.admissible = !(tape_clean && sides_clean);
    }
    return r;
}

inline bool active_gating_consistency(const ComputationArea& area, std::span<const Digit> digits,
                                      const LinearDigitLayout& layout)
{
    const auto need = static_cast<std::size_t>(std::max(area.width, area.height));
    if (digits.size() != need)
        throw Error(ErrorKind::LengthMismatch,
                    "expected " + std::to_string(need) + " digits, got " + std::to_string(digits.size()));
    for (std::size_t i = 0; i < need; ++i) {
        const auto dd = decode_digit(digits[i], layout);
        if (i < area.active_cols.size() && area.active_cols[i] != dd.on[0]) return false;
        if (i < area.active_rows.size() && area.active_rows[i] != dd.on[1]) return false;
    }
    return true;
}

} // namespace sftsim
