#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace sftsim {

using Digit = std::uint64_t;

// --- linear counter -------------------------------------------------------------------------

struct CounterParams {
    int k = 0; // alphabet size 2^(2^k)
    int w = 1;
    Digit c_max = 1;
    std::vector<Digit> successor; // empty: d -> d + 1 mod D

    static CounterParams standard(int k, int w)
    {
        if (k < 0 || k > 5) throw Error(ErrorKind::Overflow, "digit exponent " + std::to_string(k));
        if (w < 1) throw Error(ErrorKind::InvalidArgument, "width must be positive");
        CounterParams p;
        p.k = k;
        p.w = w;
        p.c_max = p.alphabet() - 1;
        return p;
    }

    Digit alphabet() const { return Digit{1} << (Digit{1} << k); }

    Digit next(Digit d) const
    {
        if (successor.empty()) return d + 1 == alphabet() ? 0 : d + 1;
        return successor[static_cast<std::size_t>(d)];
    }

    // Digit following c_max: the counter's zero.
    Digit zero() const { return next(c_max); }

    void validate() const
    {
        if (k < 0 || k > 5) throw Error(ErrorKind::Overflow, "digit exponent " + std::to_string(k));
        if (w < 1) throw Error(ErrorKind::InvalidArgument, "width must be positive");
        if (c_max >= alphabet()) throw Error(ErrorKind::InvalidArgument, "c_max outside the alphabet");
        if (successor.empty()) return;
        if (successor.size() != alphabet()) throw Error(ErrorKind::InvalidArgument, "successor size");
        Digit d = 0, len = 0;
        do {
            if (successor[static_cast<std::size_t>(d)] >= alphabet())
                throw Error(ErrorKind::InvalidArgument, "successor image outside the alphabet");
            d = successor[static_cast<std::size_t>(d)];
            ++len;
        } while (d != 0 && len <= alphabet());
        if (len != alphabet()) throw Error(ErrorKind::InvalidArgument, "successor is not a single cycle");
    }
};

struct LinearCounterState {
    std::vector<Digit> digits; // least significant first
    bool frozen = false;

    static LinearCounterState zero(const CounterParams& p)
    {
        return LinearCounterState{std::vector<Digit>(static_cast<std::size_t>(p.w), p.zero()), false};
    }

    friend bool operator==(const LinearCounterState&, const LinearCounterState&) = default;
};

namespace detail {

inline bool all_equal(std::span<const Digit> ds, Digit v)
{
    for (Digit d : ds)
        if (d != v) return false;
    return true;
}

// Adds one through `next`, carrying past `top`; returns true when the word wrapped.
template <class Next>
bool add_one(std::span<Digit> ds, Digit top, Next next)
{
    for (Digit& d : ds) {
        const bool carry = d == top;
        d = next(d);
        if (!carry) return false;
    }
    return true;
}

} // namespace detail

// The maximal word is held for one extra step with the freezing flag raised.
inline LinearCounterState linear_step(LinearCounterState st, const CounterParams& p)
{
    if (st.digits.size() != static_cast<std::size_t>(p.w))
        throw Error(ErrorKind::LengthMismatch, "counter word length " + std::to_string(st.digits.size()));
    if (!st.frozen && detail::all_equal(st.digits, p.c_max)) {
        st.frozen = true;
        return st;
    }
    st.frozen = false;
    detail::add_one(st.digits, p.c_max, [&](Digit d) { return p.next(d); });
    return st;
}

inline std::uint64_t linear_period_formula(const CounterParams& p)
{
    const std::uint64_t bits = (std::uint64_t{1} << p.k) * static_cast<std::uint64_t>(p.w);
    if (bits > 32) throw Error(ErrorKind::Overflow, "alphabet^width exceeds 2^32");
    return (std::uint64_t{1} << bits) + 1;
}

inline std::uint64_t measure_linear_period(const CounterParams& p)
{
    const auto start = LinearCounterState::zero(p);
    auto st = linear_step(start, p);
    std::uint64_t n = 1;
    while (!(st == start)) {
        st = linear_step(std::move(st), p);
        ++n;
    }
    return n;
}

inline std::uint64_t linear_period(const CounterParams& p)
{
    p.validate();
    const std::uint64_t want = linear_period_formula(p);
    const std::uint64_t got = measure_linear_period(p);
    if (got != want)
        throw Error(ErrorKind::InvalidArgument,
                    "measured period " + std::to_string(got) + " differs from " + std::to_string(want));
    return got;
}

// Field layout of one linear-counter digit, least significant field first: letter, the three
// head states, error direction, padding, then the two activity flags (0 = on).
struct LinearDigitLayout {
    int l = 0; // letters and states: 2^(2^l) each

    std::uint64_t letters() const { return std::uint64_t{1} << (1u << l); }
    std::uint64_t padding() const { return letters() * letters() * letters() * letters() / 8; }
    int k() const { return l + 3; }
    std::uint64_t digit_count() const { return letters() * letters() * letters() * letters() * 8 * padding(); }
};

enum class ErrorDirection : std::uint8_t { right, left };

struct DecodedLinearDigit {
    std::uint64_t letter = 0;
    std::array<std::uint64_t, 3> states{};
    ErrorDirection direction = ErrorDirection::right;
    std::uint64_t padding = 0;
    std::array<bool, 2> on{true, true};

    friend bool operator==(const DecodedLinearDigit&, const DecodedLinearDigit&) = default;
};

inline Digit encode_digit(const DecodedLinearDigit& d, const LinearDigitLayout& lay)
{
    const std::uint64_t L = lay.letters();
    if (d.letter >= L || d.padding >= lay.padding()) throw Error(ErrorKind::InvalidArgument, "digit field out of range");
    for (auto s : d.states)
        if (s >= L) throw Error(ErrorKind::InvalidArgument, "state out of range");
    Digit v = d.on[1] ? 0 : 1;
    v = v * 2 + (d.on[0] ? 0 : 1);
    v = v * lay.padding() + d.padding;
    v = v * 2 + static_cast<Digit>(d.direction);
    for (int s = 2; s >= 0; --s) v = v * L + d.states[static_cast<std::size_t>(s)];
    return v * L + d.letter;
}

inline DecodedLinearDigit decode_digit(Digit v, const LinearDigitLayout& lay)
{
    if (v >= lay.digit_count()) throw Error(ErrorKind::InvalidArgument, "digit out of range");
    const std::uint64_t L = lay.letters();
    DecodedLinearDigit d;
    d.letter = v % L;
    v /= L;
    for (auto& s : d.states) {
        s = v % L;
        v /= L;
    }
    d.direction = static_cast<ErrorDirection>(v % 2);
    v /= 2;
    d.padding = v % lay.padding();
    v /= lay.padding();
    d.on[0] = v % 2 == 0;
    d.on[1] = v / 2 == 0;
    return d;
}

// --- system counter -------------------------------------------------------------------------

struct SystemCounterParams {
    int m = 0;      // symbol alphabet size 2^(2^m)
    int half = 1;   // symbols per torus half; also the index word length

    Digit symbols() const { return Digit{1} << (1u << m); }
    Digit pair_symbols() const { return symbols() * symbols(); }

    void validate() const
    {
        if (m < 0 || m > 3) throw Error(ErrorKind::Overflow, "symbol exponent " + std::to_string(m));
        if (half < 1) throw Error(ErrorKind::InvalidArgument, "torus half length must be positive");
        // the index period must be a multiple of the ring length for the rotation to close up
        if ((half & (half - 1)) != 0) throw Error(ErrorKind::InvalidArgument, "torus half length must be a power of two");
    }
};

struct SystemCounterState {
    std::vector<Digit> index; // over symbol pairs, least significant first
    std::vector<Digit> upper; // first torus half, read left to right
    std::vector<Digit> lower; // second torus half, read right to left
    bool frozen = false;

    static SystemCounterState zero(const SystemCounterParams& p)
    {
        const auto n = static_cast<std::size_t>(p.half);
        return SystemCounterState{std::vector<Digit>(n, 0), std::vector<Digit>(n, 0), std::vector<Digit>(n, 0), false};
    }

    // Torus read along the rotation: upper left to right, then lower right to left.
    std::vector<Digit> ring() const
    {
        std::vector<Digit> r(upper);
        r.insert(r.end(), lower.rbegin(), lower.rend());
        return r;
    }

    void set_ring(std::span<const Digit> r)
    {
        const std::size_t c = upper.size();
        for (std::size_t i = 0; i < c; ++i) {
            upper[i] = r[i];
            lower[c - 1 - i] = r[c + i];
        }
    }

    Digit designated() const { return upper.front(); }

    friend bool operator==(const SystemCounterState&, const SystemCounterState&) = default;
};

namespace detail {

inline void check_shape(const SystemCounterState& st, const SystemCounterParams& p)
{
    const auto n = static_cast<std::size_t>(p.half);
    if (st.index.size() != n || st.upper.size() != n || st.lower.size() != n)
        throw Error(ErrorKind::LengthMismatch, "system counter words must have length " + std::to_string(n));
}

} // namespace detail

inline bool system_at_max(const SystemCounterState& st, const SystemCounterParams& p)
{
    return detail::all_equal(st.index, p.pair_symbols() - 1) && detail::all_equal(st.upper, p.symbols() - 1) &&
           detail::all_equal(st.lower, p.symbols() - 1);
}

inline SystemCounterState system_step(SystemCounterState st, const SystemCounterParams& p)
{
    detail::check_shape(st, p);
    if (!st.frozen && system_at_max(st, p)) {
        st.frozen = true;
        return st;
    }
    st.frozen = false;
    auto r = st.ring();
    std::rotate(r.begin(), r.begin() + 1, r.end());
    st.set_ring(r);
    const Digit E = p.symbols(), E2 = p.pair_symbols();
    if (detail::add_one(st.index, E2 - 1, [&](Digit d) { return (d + 1) % E2; })) {
        std::vector<Digit> word(st.upper);
        word.insert(word.end(), st.lower.begin(), st.lower.end());
        detail::add_one(word, E - 1, [&](Digit d) { return (d + 1) % E; });
        std::copy(word.begin(), word.begin() + p.half, st.upper.begin());
        std::copy(word.begin() + p.half, word.end(), st.lower.begin());
    }
    return st;
}

inline std::uint64_t system_period_formula(const SystemCounterParams& p)
{
    const std::uint64_t bits = (std::uint64_t{1} << p.m) * 4 * static_cast<std::uint64_t>(p.half);
    if (bits > 62) throw Error(ErrorKind::Overflow, "system counter period exceeds 64 bits");
    return (std::uint64_t{1} << bits) + 1;
}

inline std::uint64_t measure_system_period(const SystemCounterParams& p, std::uint64_t budget = 1u << 26)
{
    p.validate();
    const auto start = SystemCounterState::zero(p);
    auto st = system_step(start, p);
    std::uint64_t n = 1;
    while (!(st == start)) {
        if (n >= budget) throw Error(ErrorKind::BudgetExceeded, "system counter period beyond budget");
        st = system_step(std::move(st), p);
        ++n;
    }
    return n;
}

// Designated torus symbol at times 0 .. steps-1.
inline std::vector<Digit> system_bit_trace(SystemCounterState st, std::uint64_t steps, const SystemCounterParams& p)
{
    if (steps < 1) throw Error(ErrorKind::InvalidArgument, "steps must be positive");
    std::vector<Digit> out;
    out.reserve(static_cast<std::size_t>(steps));
    for (std::uint64_t t = 0; t < steps; ++t) {
        out.push_back(st.designated());
        if (t + 1 < steps) st = system_step(std::move(st), p);
    }
    return out;
}

// Per-position colours of the maximality detection signals on the three words: true (green)
// when every position from the word's start up to this one holds the maximal symbol.
struct DetectionColoring {
    std::array<std::vector<bool>, 3> green;
};

inline DetectionColoring detection_colorings(const SystemCounterState& st, const SystemCounterParams& p)
{
    detail::check_shape(st, p);
    DetectionColoring out;
    auto scan = [](std::span<const Digit> w, Digit top) {
        std::vector<bool> g(w.size());
        bool all = true;
        for (std::size_t i = 0; i < w.size(); ++i) {
            all = all && w[i] == top;
            g[i] = all;
        }
        return g;
    };
    out.green[0] = scan(st.index, p.pair_symbols() - 1);
    out.green[1] = scan(st.upper, p.symbols() - 1);
    out.green[2] = scan(st.lower, p.symbols() - 1);
    return out;
}

// --- arithmetic -----------------------------------------------------------------------------

inline std::uint64_t fermat(int i)
{
    if (i < 0) throw Error(ErrorKind::InvalidArgument, "negative index");
    if (i > 5) throw Error(ErrorKind::Overflow, "fermat(" + std::to_string(i) + ") exceeds 64 bits");
    return (std::uint64_t{1} << (1u << i)) + 1;
}

inline bool fermat_pairwise_coprime(int up_to)
{
    for (int i = 0; i <= up_to; ++i)
        for (int j = i + 1; j <= up_to; ++j)
            if (std::gcd(fermat(i), fermat(j)) != 1) return false;
    return true;
}

struct OrbitResult {
    bool minimal = false;
    std::uint64_t length = 0;
};

inline constexpr std::uint64_t kMaxOrbitProduct = 10'000'000;

// Orbit of the zero tuple under simultaneous addition of the increments.
inline OrbitResult orbit_is_minimal(std::span<const std::uint64_t> moduli, std::span<const std::uint64_t> increments)
{
    if (moduli.size() != increments.size()) throw Error(ErrorKind::LengthMismatch, "moduli and increments differ");
    std::uint64_t product = 1;
    for (auto m : moduli) {
        if (m == 0) throw Error(ErrorKind::InvalidArgument, "zero modulus");
        if (product > kMaxOrbitProduct / m) throw Error(ErrorKind::ProductTooLarge, "product exceeds 10^7");
        product *= m;
    }
    std::vector<std::uint64_t> v(moduli.size(), 0);
    std::uint64_t n = 0;
    do {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = (v[i] + increments[i]) % moduli[i];
        ++n;
    } while (!std::all_of(v.begin(), v.end(), [](std::uint64_t x) { return x == 0; }));
    return OrbitResult{n == product, n};
}

} // namespace sftsim
