#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "counters.hpp"
#include "hierarchy.hpp"
#include "machine.hpp"
#include "pattern.hpp"
#include "robinson.hpp"
#include "simulation.hpp"

namespace sftsim {

inline constexpr const char* kVersion = "sftsim 1.0.0";
inline constexpr int kColorTableVersion = 1;
inline constexpr const char* kConfigEnv = "SFTSIM_CONFIG";

inline const std::vector<std::string>& known_layers()
{
    static const std::vector<std::string> v = [] {
        std::vector<std::string> all = shared_layers();
        all.insert(all.end(), section_layers().begin(), section_layers().end());
        return all;
    }();
    return v;
}

// --- line reader with positions ---------------------------------------------------------------

namespace detail {

struct Token {
    std::string_view text;
    std::size_t column = 1;
};

class LineReader {
public:
    explicit LineReader(std::string_view src) : src_(src) {}

    bool next()
    {
        if (pos_ >= src_.size()) {
            ++line_;
            tokens_.clear();
            return false;
        }
        const std::size_t end = src_.find('\n', pos_);
        const std::size_t stop = end == std::string_view::npos ? src_.size() : end;
        cur_ = src_.substr(pos_, stop - pos_);
        if (!cur_.empty() && cur_.back() == '\r') cur_.remove_suffix(1);
        pos_ = stop + 1;
        ++line_;
        tokens_.clear();
        for (std::size_t i = 0; i < cur_.size();) {
            if (cur_[i] == ' ' || cur_[i] == '\t') {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < cur_.size() && cur_[j] != ' ' && cur_[j] != '\t') ++j;
            tokens_.push_back({cur_.substr(i, j - i), i + 1});
            i = j;
        }
        return true;
    }

    // Next line with at least one token.
    void expect_line(const char* what)
    {
        while (next())
            if (!tokens_.empty()) return;
        fail(1, std::string("unexpected end of input, expected ") + what);
    }

    const std::vector<Token>& tokens() const { return tokens_; }
    std::size_t line() const { return line_; }
    std::size_t end_column() const { return cur_.size() + 1; }

    [[noreturn]] void fail(std::size_t column, const std::string& what) const { throw ParseError(line_, column, what); }

    void keyword(const char* word)
    {
        if (tokens_.empty() || tokens_[0].text != word) fail(tokens_.empty() ? 1 : tokens_[0].column, std::string("expected '") + word + "'");
    }

    template <class T>
    T number(const Token& t) const
    {
        T v{};
        const auto* b = t.text.data();
        const auto r = std::from_chars(b, b + t.text.size(), v);
        if (r.ec != std::errc{} || r.ptr != b + t.text.size()) fail(t.column, "bad number '" + std::string(t.text) + "'");
        return v;
    }

private:
    std::string_view src_;
    std::string_view cur_;
    std::size_t pos_ = 0;
    std::size_t line_ = 0;
    std::vector<Token> tokens_;
};

inline std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t i = 0;
    for (;;) {
        const std::size_t j = s.find(sep, i);
        out.emplace_back(s.substr(i, j == std::string_view::npos ? std::string_view::npos : j - i));
        if (j == std::string_view::npos) return out;
        i = j + 1;
    }
}

} // namespace detail

// --- pattern format ---------------------------------------------------------------------------

inline Pattern parse_pattern(std::string_view text)
{
    detail::LineReader in(text);
    in.expect_line("header");
    if (in.tokens().size() != 2 || in.tokens()[0].text != "sft-pattern" || in.tokens()[1].text != "v1")
        in.fail(1, "expected 'sft-pattern v1'");

    in.expect_line("support");
    in.keyword("support");
    const auto& st = in.tokens();
    Box box;
    if (st.size() == 5) {
        box = Box::rect(in.number<int>(st[1]), in.number<int>(st[2]), in.number<int>(st[3]), in.number<int>(st[4]));
    } else if (st.size() == 7) {
        box = Box{{in.number<int>(st[1]), in.number<int>(st[2]), in.number<int>(st[3])},
                  in.number<int>(st[4]), in.number<int>(st[5]), in.number<int>(st[6]), 3};
    } else {
        in.fail(st.back().column, "support takes 4 or 6 numbers");
    }
    if (box.w < 1 || box.h < 1 || box.d < 1) in.fail(st[1].column, "support extents must be positive");

    in.expect_line("layers");
    in.keyword("layers");
    if (in.tokens().size() != 2) in.fail(in.end_column(), "layers takes one comma-separated list");
    const auto names = detail::split(in.tokens()[1].text, ',');
    for (const auto& n : names)
        if (std::find(known_layers().begin(), known_layers().end(), n) == known_layers().end())
            in.fail(in.tokens()[1].column, "unknown layer '" + n + "'");
    Pattern p(box, names);

    for (std::size_t l = 0; l < names.size(); ++l) {
        in.expect_line("layer");
        in.keyword("layer");
        if (in.tokens().size() != 2 || in.tokens()[1].text != names[l])
            in.fail(in.tokens().size() > 1 ? in.tokens()[1].column : in.end_column(), "expected 'layer " + names[l] + "'");
        auto& data = p.raw(l);
        std::size_t k = 0;
        for (int z = 0; z < box.d; ++z)
            for (int y = 0; y < box.h; ++y) {
                in.expect_line("row of codes");
                if (in.tokens().size() != static_cast<std::size_t>(box.w))
                    in.fail(in.end_column(), "expected " + std::to_string(box.w) + " codes in row");
                for (const auto& t : in.tokens()) data[k++] = in.number<Code>(t);
            }
    }
    while (in.next())
        if (!in.tokens().empty()) in.fail(in.tokens()[0].column, "trailing content");
    return p;
}

inline std::string write_pattern(const Pattern& p)
{
    const Box& b = p.support();
    std::string s = "sft-pattern v1\nsupport ";
    if (b.dims == 3)
        s += std::to_string(b.x0()) + ' ' + std::to_string(b.y0()) + ' ' + std::to_string(b.z0()) + ' ' +
             std::to_string(b.w) + ' ' + std::to_string(b.h) + ' ' + std::to_string(b.d);
    else
        s += std::to_string(b.x0()) + ' ' + std::to_string(b.y0()) + ' ' + std::to_string(b.w) + ' ' + std::to_string(b.h);
    s += "\nlayers ";
    for (std::size_t l = 0; l < p.layers().size(); ++l) s += (l ? "," : "") + p.layers()[l];
    s += '\n';
    for (std::size_t l = 0; l < p.layers().size(); ++l) {
        s += "layer " + p.layers()[l] + '\n';
        const auto& v = p.raw(l);
        for (std::size_t i = 0; i < v.size(); ++i) {
            s += std::to_string(v[i]);
            s += (i + 1) % static_cast<std::size_t>(b.w) == 0 ? '\n' : ' ';
        }
    }
    return s;
}

// --- machine format ---------------------------------------------------------------------------

inline std::optional<Move> parse_move(std::string_view s)
{
    if (s == "<" || s == "L") return Move::left;
    if (s == ">" || s == "R") return Move::right;
    if (s == "^" || s == "U") return Move::up;
    return std::nullopt;
}

// Pairs without a row stay inert.
inline MachineSpec parse_machine(std::string_view text)
{
    detail::LineReader in(text);
    in.expect_line("header");
    if (in.tokens().size() != 2 || in.tokens()[0].text != "machine" || in.tokens()[1].text != "v1")
        in.fail(1, "expected 'machine v1'");
    std::vector<std::string> states, letters;
    auto list = [&](const char* word, std::vector<std::string>& out) {
        in.expect_line(word);
        in.keyword(word);
        if (in.tokens().size() < 2) in.fail(in.end_column(), std::string(word) + " needs at least one name");
        for (std::size_t i = 1; i < in.tokens().size(); ++i) {
            const std::string n(in.tokens()[i].text);
            if (std::find(out.begin(), out.end(), n) != out.end()) in.fail(in.tokens()[i].column, "duplicate name " + n);
            out.push_back(n);
        }
    };
    list("states", states);
    list("alphabet", letters);
    auto find = [&](const std::vector<std::string>& v, const detail::Token& t) {
        const auto it = std::find(v.begin(), v.end(), t.text);
        if (it == v.end()) in.fail(t.column, "unknown name '" + std::string(t.text) + "'");
        return static_cast<int>(it - v.begin());
    };
    std::array<int, 4> special{};
    const std::array<const char*, 4> words{"init", "error", "shadow", "blank"};
    for (std::size_t i = 0; i < 4; ++i) {
        in.expect_line(words[i]);
        in.keyword(words[i]);
        if (in.tokens().size() != 2) in.fail(in.end_column(), std::string(words[i]) + " takes one name");
        special[i] = find(i == 3 ? letters : states, in.tokens()[1]);
    }
    MachineSpec m = MachineSpec::inert(states, letters, special[0], special[1], special[2], special[3]);
    std::vector<char> seen(m.delta.size(), 0);
    while (in.next()) {
        const auto& t = in.tokens();
        if (t.empty()) continue;
        if (t.size() != 6 || t[2].text != "->") in.fail(t[0].column, "expected 'a q -> a' q' move'");
        const int a = find(letters, t[0]), q = find(states, t[1]);
        const auto mv = parse_move(t[5].text);
        if (!mv) in.fail(t[5].column, "move must be <, > or ^");
        const std::size_t i = static_cast<std::size_t>(a * m.state_count() + q);
        if (seen[i]) in.fail(t[0].column, "duplicate row");
        seen[i] = 1;
        m.at(a, q) = Transition{find(letters, t[3]), find(states, t[4]), *mv};
    }
    try {
        m.validate();
    } catch (const Error& e) {
        throw ParseError(in.line(), 1, e.what());
    }
    return m;
}

inline std::string write_machine(const MachineSpec& m)
{
    std::string s = "machine v1\nstates";
    for (const auto& q : m.states) s += ' ' + q;
    s += "\nalphabet";
    for (const auto& a : m.letters) s += ' ' + a;
    s += "\ninit " + m.states[static_cast<std::size_t>(m.q0)] + "\nerror " + m.states[static_cast<std::size_t>(m.qe)] +
         "\nshadow " + m.states[static_cast<std::size_t>(m.qs)] + "\nblank " + m.letters[static_cast<std::size_t>(m.blank)] + '\n';
    for (int a = 0; a < m.letter_count(); ++a)
        for (int q = 0; q < m.state_count(); ++q) {
            const auto& t = m.at(a, q);
            if (t == Transition{a, q, Move::up}) continue;
            s += m.letters[static_cast<std::size_t>(a)] + ' ' + m.states[static_cast<std::size_t>(q)] + " -> " +
                 m.letters[static_cast<std::size_t>(t.letter)] + ' ' + m.states[static_cast<std::size_t>(t.state)] + ' ' +
                 to_char(t.move) + '\n';
        }
    return s;
}

// Area file: `area v1`, then any of `columns`, `rows` (0/1 per line), `tape` (letter:state per
// active column), `west`, `east` (state per row), `arrows` (< or > per column). Missing lines
// keep the well-initialized defaults.
inline ComputationArea parse_area(std::string_view text, const MachineSpec& m, int width, int height)
{
    ComputationArea a = ComputationArea::well_initialized(m, width, height);
    detail::LineReader in(text);
    in.expect_line("header");
    if (in.tokens().size() != 2 || in.tokens()[0].text != "area" || in.tokens()[1].text != "v1")
        in.fail(1, "expected 'area v1'");
    auto name = [&](const std::vector<std::string>& v, const detail::Token& t) {
        const auto it = std::find(v.begin(), v.end(), t.text);
        if (it == v.end()) in.fail(t.column, "unknown name '" + std::string(t.text) + "'");
        return static_cast<int>(it - v.begin());
    };
    bool tape_given = false;
    while (in.next()) {
        const auto& t = in.tokens();
        if (t.empty()) continue;
        const std::size_t n = t.size() - 1;
        auto need = [&](std::size_t want) {
            if (n != want) in.fail(t[0].column, std::string(t[0].text) + " needs " + std::to_string(want) + " entries");
        };
        if (t[0].text == "columns" || t[0].text == "rows") {
            auto& v = t[0].text == "columns" ? a.active_cols : a.active_rows;
            need(v.size());
            for (std::size_t i = 0; i < n; ++i) {
                if (t[i + 1].text != "0" && t[i + 1].text != "1") in.fail(t[i + 1].column, "expected 0 or 1");
                v[i] = t[i + 1].text == "1";
            }
        } else if (t[0].text == "west" || t[0].text == "east") {
            auto& v = t[0].text == "west" ? a.west : a.east;
            need(v.size());
            for (std::size_t i = 0; i < n; ++i) v[i] = name(m.states, t[i + 1]);
        } else if (t[0].text == "arrows") {
            need(a.arrows.size());
            for (std::size_t i = 0; i < n; ++i) {
                if (t[i + 1].text != "<" && t[i + 1].text != ">") in.fail(t[i + 1].column, "expected < or >");
                a.arrows[i] = t[i + 1].text == ">" ? ErrorDirection::right : ErrorDirection::left;
            }
        } else if (t[0].text == "tape") {
            tape_given = true;
            a.tape.clear();
            for (std::size_t i = 1; i < t.size(); ++i) {
                const auto colon = t[i].text.find(':');
                if (colon == std::string_view::npos) in.fail(t[i].column, "expected letter:state");
                const detail::Token l{t[i].text.substr(0, colon), t[i].column};
                const detail::Token q{t[i].text.substr(colon + 1), t[i].column + colon + 1};
                a.tape.push_back(TapeCell{name(m.letters, l), name(m.states, q)});
            }
        } else {
            in.fail(t[0].column, "unknown area line '" + std::string(t[0].text) + "'");
        }
    }
    if (!tape_given) {
        a.tape.assign(a.columns().size(), TapeCell{m.blank, m.qs});
        if (!a.tape.empty()) a.tape[0].state = m.q0;
    }
    a.validate();
    return a;
}

// --- rendering --------------------------------------------------------------------------------

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Color table, version 1.
inline Rgb robinson_color(Code c)
{
    const auto t = decode(c);
    if (!t) return {0, 0, 0};
    switch (t->kind) {
    case Kind::BlueCorner: return {30, 80, 230};
    case Kind::RedCorner: return {220, 40, 40};
    case Kind::Arrow3: return {235, 235, 235};
    case Kind::Arrow5: return {200, 200, 200};
    case Kind::Arrow4: return {160, 160, 160};
    case Kind::Arrow4Hi: return {140, 140, 170};
    case Kind::Arrow6: return {110, 110, 110};
    case Kind::Arrow6Hi: return {90, 90, 120};
    }
    return {0, 0, 0};
}

inline Rgb palette_color(Code c)
{
    static constexpr std::array<Rgb, 16> pal{{{230, 25, 75},   {60, 180, 75},   {255, 225, 25}, {0, 130, 200},
                                              {245, 130, 48},  {145, 30, 180},  {70, 240, 240}, {240, 50, 230},
                                              {210, 245, 60},  {250, 190, 212}, {0, 128, 128},  {220, 190, 255},
                                              {170, 110, 40},  {255, 250, 200}, {128, 0, 0},    {170, 255, 195}}};
    if (c == kBlank) return {0, 0, 0};
    return pal[static_cast<std::size_t>((c - 1) % 16)];
}

inline std::string render_ppm(const Pattern& p, std::string_view layer = kRobinsonLayer, int section = 0, int scale = 4)
{
    if (p.layers().empty() || p.support().volume() == 0) throw Error(ErrorKind::UnsupportedLayer, "pattern has no layers");
    if (!p.has_layer(layer)) throw Error(ErrorKind::UnsupportedLayer, "no layer '" + std::string(layer) + "'");
    if (scale < 1) throw Error(ErrorKind::InvalidArgument, "scale must be positive");
    const Box& b = p.support();
    if (section < 0 || section >= b.d) throw Error(ErrorKind::InvalidArgument, "section outside the support");
    const std::size_t l = p.layer_index(layer);
    const bool tiles = layer == kRobinsonLayer;
    const int w = b.w * scale, h = b.h * scale;
    std::string out = "P6\n" + std::to_string(w) + ' ' + std::to_string(h) + "\n255\n";
    out.reserve(out.size() + static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
    // image rows run top-down, pattern rows bottom-up
    for (int row = b.h - 1; row >= 0; --row) {
        std::string line;
        for (int x = 0; x < b.w; ++x) {
            const Code c = p.at(l, Pos{b.x0() + x, b.y0() + row, b.z0() + section});
            const Rgb col = tiles ? robinson_color(c) : palette_color(c);
            for (int s = 0; s < scale; ++s) line += {static_cast<char>(col.r), static_cast<char>(col.g), static_cast<char>(col.b)};
        }
        for (int s = 0; s < scale; ++s) out += line;
    }
    return out;
}

// --- configuration ----------------------------------------------------------------------------

struct Config {
    Limits limits;
    std::uint64_t orbit_product_cap = kMaxOrbitProduct;
    StackParams stack;
    int color_table_version = kColorTableVersion;
    int scale = 4;
    std::string output_dir = ".";

    void validate() const
    {
        if (limits.max_supertile_order < 1 || limits.max_window_side < 1 || orbit_product_cap < 1 ||
            stack.oracle_budget < 1 || scale < 1)
            throw Error(ErrorKind::InvalidArgument, "config caps must be positive");
        if (color_table_version != kColorTableVersion)
            throw Error(ErrorKind::InvalidArgument, "unsupported color table version");
    }
};

inline Config parse_config(std::string_view text)
{
    Config c;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(1, e.byte, e.what());
    }
    try {
        c.limits.max_supertile_order = j.value("max_supertile_order", c.limits.max_supertile_order);
        c.limits.max_window_side = j.value("max_window_side", c.limits.max_window_side);
        c.orbit_product_cap = j.value("orbit_product_cap", c.orbit_product_cap);
        c.stack.oracle_budget = j.value("oracle_budget", c.stack.oracle_budget);
        c.stack.linear_l = j.value("linear_l", c.stack.linear_l);
        c.stack.system_m = j.value("system_m", c.stack.system_m);
        c.stack.linear_phase = j.value("linear_phase", c.stack.linear_phase);
        c.stack.system_phase = j.value("system_phase", c.stack.system_phase);
        c.color_table_version = j.value("color_table_version", c.color_table_version);
        c.scale = j.value("scale", c.scale);
        c.output_dir = j.value("output_dir", c.output_dir);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(1, 1, e.what());
    }
    c.validate();
    return c;
}

inline std::string read_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::NotFound, "cannot open " + path);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

inline void write_file(const std::string& path, std::string_view bytes)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::NotFound, "cannot write " + path);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error(ErrorKind::NotFound, "write failed for " + path);
}

// Explicit path first, then the environment variable, then defaults.
inline Config load_config(const std::string& path = {})
{
    std::string p = path;
    if (p.empty())
        if (const char* env = std::getenv(kConfigEnv)) p = env;
    if (p.empty()) return Config{};
    return parse_config(read_file(p));
}

// --- code tables ------------------------------------------------------------------------------

inline std::string codes_table()
{
    std::ostringstream s;
    s << "# " << kVersion << " symbol codes, color table v" << kColorTableVersion << "\n"
      << "# code 0 is blank in every layer\n\n";
    s << "layer robinson\n";
    for (Code c = 1; c <= kMaxRobinsonCode; ++c) {
        const auto t = decode(c);
        if (!t) continue;
        const Parity pa = t->effective_parity();
        const Rgb col = robinson_color(c);
        s << c << ' ' << to_string(t->kind) << " rot=" << int(t->rotation) << " i=" << int(pa.i) << " j=" << int(pa.j)
          << " rgb=" << int(col.r) << ',' << int(col.g) << ',' << int(col.b) << '\n';
    }
    s << "\nlayer modularity\n";
    for (int m = 0; m < 4; ++m) s << modularity_code(m) << " mark=" << m << " north segment\n";
    for (int m = 0; m < 4; ++m) s << modularity_pair_code(m) << " mark=" << m << " north-east corner\n";
    s << "\nlayer function\n";
    for (auto f : {AreaFunction::computation, AreaFunction::transfer_h, AreaFunction::transfer_v, AreaFunction::none})
        s << 1 + static_cast<int>(f) << ' ' << to_string(f) << '\n';
    s << "\nlayer organite\n";
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
            const OrganiteCoord c{i, j};
            s << address_code(c) << " unit=(" << i << ',' << j << ')';
            for (auto f : organite_functions(c)) s << ' ' << to_string(f);
            s << '\n';
        }
    s << kGrayAddress << " gray\n";
    const CounterParams lp = CounterParams::standard(3, 1);
    s << "\nlayer linear\n1+d digit d in [0," << lp.alphabet() << "), frozen adds " << lp.alphabet() << '\n';
    const MachineSpec wm = witness_machine();
    s << "\nlayer machine (witness machine)\n";
    for (int a = 0; a < wm.letter_count(); ++a) s << 1 + a << " letter " << wm.letters[static_cast<std::size_t>(a)] << '\n';
    for (int a = 0; a < wm.letter_count(); ++a)
        for (int q = 0; q < wm.state_count(); ++q)
            s << 1 + wm.letter_count() + a * wm.state_count() + q << " head " << wm.letters[static_cast<std::size_t>(a)]
              << ' ' << wm.states[static_cast<std::size_t>(q)] << '\n';
    for (int l = 0; l < wm.state_count(); ++l)
        for (int r = 0; r < wm.state_count(); ++r)
            s << 1 + wm.letter_count() * (1 + wm.state_count()) + l * wm.state_count() + r << " horizontal left="
              << wm.states[static_cast<std::size_t>(l)] << " right=" << wm.states[static_cast<std::size_t>(r)] << '\n';
    s << "\nlayer sysbit\n1 bit 0\n2 bit 1\n";
    s << "\nlayer syscounter\n1+e symbol e of the index or torus word\n1 running\n2 frozen\n";
    s << "\nlayer channel\n1 bit 0\n2 bit 1\n";
    s << "\nlayer alignment\n";
    for (auto o : {Orientation::sw, Orientation::se, Orientation::ne, Orientation::nw})
        s << alignment_code(o) << " supertile corner " << to_string(o) << '\n';
    return s.str();
}

} // namespace sftsim
