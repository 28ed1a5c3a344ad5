#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "error.hpp"

namespace sftsim {

using Code = std::uint16_t;
inline constexpr Code kBlank = 0;

struct Pos {
    int x = 0;
    int y = 0;
    int z = 0;

    friend bool operator==(const Pos&, const Pos&) = default;
    // row-major order: z, then y, then x
    friend auto operator<=>(const Pos& a, const Pos& b)
    {
        return std::tie(a.z, a.y, a.x) <=> std::tie(b.z, b.y, b.x);
    }
};

struct Box {
    Pos origin;
    int w = 1;
    int h = 1;
    int d = 1;
    int dims = 2;

    static Box square(int x0, int y0, int side) { return Box{{x0, y0, 0}, side, side, 1, 2}; }
    static Box rect(int x0, int y0, int w, int h) { return Box{{x0, y0, 0}, w, h, 1, 2}; }

    int x0() const { return origin.x; }
    int y0() const { return origin.y; }
    int z0() const { return origin.z; }
    int x1() const { return origin.x + w - 1; }
    int y1() const { return origin.y + h - 1; }
    int z1() const { return origin.z + d - 1; }
    std::size_t volume() const
    {
        return static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(d);
    }
    bool contains(Pos p) const
    {
        return p.x >= x0() && p.x <= x1() && p.y >= y0() && p.y <= y1() && p.z >= z0() && p.z <= z1();
    }
    bool contains(const Box& b) const
    {
        return b.x0() >= x0() && b.x1() <= x1() && b.y0() >= y0() && b.y1() <= y1() && b.z0() >= z0() &&
               b.z1() <= z1();
    }

    friend bool operator==(const Box&, const Box&) = default;
};

struct RuleViolation {
    std::string rule;
    std::vector<Pos> positions;
    std::string detail;
};

inline void sort_violations(std::vector<RuleViolation>& v)
{
    std::stable_sort(v.begin(), v.end(), [](const RuleViolation& a, const RuleViolation& b) {
        const Pos pa = a.positions.empty() ? Pos{} : a.positions.front();
        const Pos pb = b.positions.empty() ? Pos{} : b.positions.front();
        if (pa != pb) return pa < pb;
        return a.rule < b.rule;
    });
}

// Dense multi-layer grid over an integer box. Every layer holds one code per position;
// code 0 is that layer's blank.
class Pattern {
public:
    Pattern() = default;

    Pattern(Box support, std::vector<std::string> layers) : support_(support), names_(std::move(layers))
    {
        if (support_.w <= 0 || support_.h <= 0 || support_.d <= 0)
            throw Error(ErrorKind::InvalidWindow, "support extents must be positive");
        if (support_.dims == 2 && support_.d != 1)
            throw Error(ErrorKind::InvalidWindow, "2D support with depth != 1");
        for (std::size_t i = 0; i < names_.size(); ++i)
            for (std::size_t j = i + 1; j < names_.size(); ++j)
                if (names_[i] == names_[j]) throw Error(ErrorKind::InvalidArgument, "duplicate layer " + names_[i]);
        data_.assign(names_.size(), std::vector<Code>(support_.volume(), kBlank));
    }

    const Box& support() const { return support_; }
    const std::vector<std::string>& layers() const { return names_; }
    int width() const { return support_.w; }
    int height() const { return support_.h; }
    int depth() const { return support_.d; }

    bool has_layer(std::string_view name) const
    {
        return std::find(names_.begin(), names_.end(), name) != names_.end();
    }

    std::size_t layer_index(std::string_view name) const
    {
        auto it = std::find(names_.begin(), names_.end(), name);
        if (it == names_.end()) throw Error(ErrorKind::MissingLayer, std::string(name));
        return static_cast<std::size_t>(it - names_.begin());
    }

    std::size_t add_layer(const std::string& name)
    {
        if (has_layer(name)) return layer_index(name);
        names_.push_back(name);
        data_.emplace_back(support_.volume(), kBlank);
        return names_.size() - 1;
    }

    bool contains(Pos p) const { return support_.contains(p); }

    std::size_t offset(Pos p) const
    {
        const auto dx = static_cast<std::size_t>(p.x - support_.x0());
        const auto dy = static_cast<std::size_t>(p.y - support_.y0());
        const auto dz = static_cast<std::size_t>(p.z - support_.z0());
        return (dz * static_cast<std::size_t>(support_.h) + dy) * static_cast<std::size_t>(support_.w) + dx;
    }

    Code at(std::size_t layer, Pos p) const { return data_[layer][offset(p)]; }
    Code at(std::size_t layer, int x, int y, int z = 0) const { return at(layer, Pos{x, y, z}); }
    void set(std::size_t layer, Pos p, Code c) { data_[layer][offset(p)] = c; }
    void set(std::size_t layer, int x, int y, Code c) { set(layer, Pos{x, y, 0}, c); }

    Code at(std::string_view layer, Pos p) const { return at(layer_index(layer), p); }
    void set(std::string_view layer, Pos p, Code c) { set(layer_index(layer), p, c); }

    const std::vector<Code>& raw(std::size_t layer) const { return data_[layer]; }
    std::vector<Code>& raw(std::size_t layer) { return data_[layer]; }

    // Copies a sub-box (in absolute coordinates) into a new pattern with the same layers.
    Pattern crop(const Box& b) const
    {
        if (!support_.contains(b)) throw Error(ErrorKind::InvalidWindow, "crop box outside support");
        Pattern out(b, names_);
        for (std::size_t l = 0; l < names_.size(); ++l)
            for (int z = b.z0(); z <= b.z1(); ++z)
                for (int y = b.y0(); y <= b.y1(); ++y)
                    for (int x = b.x0(); x <= b.x1(); ++x) out.set(l, Pos{x, y, z}, at(l, Pos{x, y, z}));
        return out;
    }

    friend bool operator==(const Pattern&, const Pattern&) = default;

private:
    Box support_{};
    std::vector<std::string> names_;
    std::vector<std::vector<Code>> data_;
};

} // namespace sftsim
