#pragma once

// Independent reference computations used as test oracles. Nothing here calls into the
// library beyond symbol decoding and pattern access.

#include <cstdint>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "sftsim/pattern.hpp"
#include "sftsim/robinson.hpp"

namespace oracle {

using sftsim::Code;
using sftsim::Pattern;

// Kind and rotation only: parity and alignment are phase data.
inline int shape(Code c)
{
    const auto t = sftsim::decode(c);
    return t ? static_cast<int>(t->kind) * 4 + t->rotation : -1;
}

inline bool same_shape_at(const Pattern& big, int bx, int by, const Pattern& small)
{
    for (int y = 0; y < small.height(); ++y)
        for (int x = 0; x < small.width(); ++x)
            if (shape(big.at(0, bx + x, by + y)) != shape(small.at(0, x, y))) return false;
    return true;
}

// Offsets (relative to the pattern origin) where `small` occurs in `big` by shape.
inline std::set<std::pair<int, int>> occurrences(const Pattern& big, const Pattern& small)
{
    std::set<std::pair<int, int>> out;
    for (int y = 0; y + small.height() <= big.height(); ++y)
        for (int x = 0; x + small.width() <= big.width(); ++x)
            if (same_shape_at(big, big.support().x0() + x, big.support().y0() + y, small)) out.insert({x, y});
    return out;
}

// Smallest k with 2^k >= n.
inline int ceil_log2(long n)
{
    int k = 0;
    while ((1L << k) < n) ++k;
    return k;
}

// Blue corners of an order-n supertile: every position whose coordinates are both even.
inline std::set<std::pair<int, int>> supertile_blue(int n)
{
    if (n == 0) return {{0, 0}};
    const auto q = supertile_blue(n - 1);
    const int s = (1 << n); // quadrant side + 1
    std::set<std::pair<int, int>> out;
    for (auto [x, y] : q)
        for (int dx : {0, s})
            for (int dy : {0, s}) out.insert({x + dx, y + dy});
    return out;
}

inline std::uint64_t gcd(std::uint64_t a, std::uint64_t b) { return std::gcd(a, b); }

// Breadth-first reachability of the tuple translation on the product of cyclic groups.
inline std::uint64_t reachable_count(const std::vector<std::uint64_t>& mod, const std::vector<std::uint64_t>& inc)
{
    std::uint64_t total = 1;
    for (auto m : mod) total *= m;
    std::vector<char> seen(total, 0);
    std::vector<std::uint64_t> cur(mod.size(), 0);
    std::uint64_t count = 0;
    for (;;) {
        std::uint64_t key = 0;
        for (std::size_t i = 0; i < mod.size(); ++i) key = key * mod[i] + cur[i];
        if (seen[key]) return count;
        seen[key] = 1;
        ++count;
        for (std::size_t i = 0; i < mod.size(); ++i) cur[i] = (cur[i] + inc[i]) % mod[i];
    }
}

// Binary odometer on a finite prefix, least significant bit first.
inline std::vector<int> odometer_image(std::vector<int> x)
{
    for (auto& b : x) {
        if (b == 0) {
            b = 1;
            return x;
        }
        b = 0;
    }
    return x;
}

} // namespace oracle
