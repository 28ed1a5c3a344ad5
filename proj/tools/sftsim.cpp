#include <chrono>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sftsim/io.hpp"

using namespace sftsim;

namespace {

enum Exit { kClean = 0, kViolations = 1, kUsage = 2 };

Orientation corner_arg(const std::string& s)
{
    const auto o = parse_orientation(s);
    if (!o) throw Error(ErrorKind::InvalidArgument, "corner must be sw, se, ne or nw");
    return *o;
}

void emit(const std::string& out, const std::string& bytes)
{
    if (out.empty() || out == "-") std::cout << bytes;
    else write_file(out, bytes);
}

std::string pos_text(const Pos& p, bool three)
{
    std::string s = std::to_string(p.x) + ',' + std::to_string(p.y);
    if (three) s += ',' + std::to_string(p.z);
    return s;
}

int report_violations(const std::vector<RuleViolation>& v, bool three)
{
    for (const auto& r : v) {
        std::cout << "violation " << r.rule;
        for (const auto& p : r.positions) std::cout << ' ' << pos_text(p, three);
        if (!r.detail.empty()) std::cout << " : " << r.detail;
        std::cout << '\n';
    }
    std::cout << "violations " << v.size() << '\n';
    return v.empty() ? kClean : kViolations;
}

// Digits in memory order, least significant first.
std::string hex_word(std::span<const Digit> ds, int width)
{
    std::ostringstream s;
    s << std::hex;
    for (Digit d : ds) s << std::setw(width) << std::setfill('0') << d;
    return s.str();
}

// Structure layers of a plain two-dimensional pattern; stacks go through validate_stack.
std::vector<RuleViolation> validate_plain(const Pattern& p, unsigned threads)
{
    auto v = check_robinson_rules(p, threads);
    if (!p.has_layer(kModularityLayer) && !p.has_layer(kFunctionLayer) && !p.has_layer(kOrganiteLayer)) return v;
    const CellIndex idx(detect_cells(p));
    if (p.has_layer(kModularityLayer)) {
        auto m = validate_modularity_layer(p, idx.cells());
        v.insert(v.end(), m.begin(), m.end());
    }
    if (p.has_layer(kFunctionLayer))
        detail::compare_layer(p, p.layer_index(kFunctionLayer), detail::expected_function_layer(p, idx), "function-area", v);
    if (p.has_layer(kOrganiteLayer))
        for (const auto& c : idx.cells())
            if (c.order >= 3) {
                auto s = subdivide_cell(c, p, idx).violations;
                v.insert(v.end(), s.begin(), s.end());
            }
    sort_violations(v);
    return v;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Robinson hierarchy and effective-system stack toolkit"};
    app.require_subcommand(1);
    std::string config_path;
    unsigned threads = 1;
    app.add_option("--config", config_path, "JSON config file (default: $" + std::string(kConfigEnv) + ")");
    app.add_option("--threads", threads, "worker threads for validation")->check(CLI::PositiveNumber);
    app.set_version_flag("--version", kVersion);

    std::string corner = "sw", in_path, out_path, layer = kRobinsonLayer, spec_path, sides_path, tape, kind = "linear",
                system = "odometer";
    int order = 0, x0 = 0, y0 = 0, w = 0, h = 0, k = 0, width = 1, height = 1, section = 0, scale = 0;
    std::uint64_t steps = 1, seed = 0;

    auto* gen = app.add_subcommand("generate-supertile", "write the supertile of a given order and corner");
    gen->add_option("--corner", corner)->default_val("sw");
    gen->add_option("--order", order)->required();
    gen->add_option("--out", out_path);

    auto* plane = app.add_subcommand("tile-plane", "write a window of the quarter-plane tiling");
    plane->add_option("--order", order)->default_val(0);
    plane->add_option("--x0", x0)->default_val(0);
    plane->add_option("--y0", y0)->default_val(0);
    plane->add_option("--width", w)->required();
    plane->add_option("--height", h)->required();
    plane->add_option("--out", out_path);

    auto* val = app.add_subcommand("validate", "check a pattern or stack file against every local rule");
    val->add_option("--in", in_path)->required();

    auto* pet = app.add_subcommand("petals", "list the petals of a pattern");
    pet->add_option("--in", in_path)->required();

    auto* cel = app.add_subcommand("cells", "list the cells of a pattern with their modularity marks");
    cel->add_option("--in", in_path)->required();

    auto* ctr = app.add_subcommand("counter-trace", "print successive counter states");
    ctr->add_option("--kind", kind)->check(CLI::IsMember({"linear", "system"}))->default_val("linear");
    ctr->add_option("--k", k, "digit exponent (linear) or symbol exponent (system)")->default_val(0);
    ctr->add_option("--w", w, "digit count (linear) or index length (system)")->default_val(1);
    ctr->add_option("--steps", steps)->default_val(1);

    auto* mr = app.add_subcommand("machine-run", "run a machine on a computation area");
    mr->add_option("--spec", spec_path)->required();
    mr->add_option("--width", width)->required();
    mr->add_option("--height", height)->required();
    mr->add_option("--tape", tape, "letters of the active columns, comma-separated or one character each");
    mr->add_option("--sides", sides_path, "area file overriding gating, tape, sides and arrows");
    mr->add_option("--out", out_path);

    auto* sim = app.add_subcommand("simulate", "assemble and check a simulation stack");
    sim->add_option("--system", system)->check(CLI::IsMember({"odometer"}))->default_val("odometer");
    sim->add_option("--order", order)->required();
    sim->add_option("--height", height)->required();
    sim->add_option("--seed", seed, "designated point, least significant bit first")->default_val(0);
    sim->add_option("--out", out_path, "stack pattern file");

    auto* ren = app.add_subcommand("render", "render one layer as a binary PPM image");
    ren->add_option("--in", in_path)->required();
    ren->add_option("--layer", layer)->default_val(kRobinsonLayer);
    ren->add_option("--section", section)->default_val(0);
    ren->add_option("--scale", scale);
    ren->add_option("--out", out_path)->required();

    auto* cod = app.add_subcommand("codes", "print the generated symbol code table");
    cod->add_option("--out", out_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kClean : kUsage;
    }

    const auto t0 = std::chrono::steady_clock::now();
    int rc = kClean;
    try {
        const Config cfg = load_config(config_path);
        const bool raw_stdout = (out_path.empty() || out_path == "-") && (*gen || *plane || *mr || *cod);
        if (!raw_stdout) std::cout << "# " << kVersion << ' ' << app.get_subcommands().front()->get_name() << '\n';

        if (*gen) {
            const Pattern p = generate_supertile(corner_arg(corner), order, cfg.limits);
            emit(out_path, write_pattern(p));
            if (!out_path.empty()) std::cout << "supertile " << order << ' ' << corner << ' ' << p.width() << '\n';
        } else if (*plane) {
            const Pattern p = tile_plane(order, Box::rect(x0, y0, w, h), cfg.limits);
            emit(out_path, write_pattern(p));
            if (!out_path.empty()) std::cout << "window " << x0 << ' ' << y0 << ' ' << w << ' ' << h << '\n';
        } else if (*val) {
            const Pattern p = parse_pattern(read_file(in_path));
            if (p.has_layer(kSysbitLayer)) {
                std::vector<RuleViolation> v;
                StackAssembly st = stack_from_pattern(p, v, cfg.stack);
                auto more = validate_stack(st, threads);
                v.insert(v.end(), more.begin(), more.end());
                sort_violations(v);
                rc = report_violations(v, true);
            } else {
                rc = report_violations(validate_plain(p, threads), p.support().dims == 3);
            }
        } else if (*pet) {
            for (const auto& pt : extract_petals(parse_pattern(read_file(in_path))))
                std::cout << "petal " << pt.order << ' ' << pt.box.x0() << ' ' << pt.box.y0() << ' ' << pt.box.w << ' '
                          << to_string(pt.role) << '\n';
        } else if (*cel) {
            const auto r = modularity_marks(detect_cells(parse_pattern(read_file(in_path))));
            for (const auto& c : r.cells)
                std::cout << "cell " << c.order << ' ' << c.box.x0() << ' ' << c.box.y0() << ' ' << c.box.w << ' '
                          << *c.modularity << '\n';
        } else if (*ctr) {
            if (kind == "linear") {
                const auto p = CounterParams::standard(k, w);
                const int hw = std::max(1, (1 << k) / 4);
                auto st = LinearCounterState::zero(p);
                for (std::uint64_t i = 0; i < steps; ++i) {
                    std::cout << hex_word(st.digits, hw) << ' ' << (st.frozen ? 'F' : '.') << '\n';
                    st = linear_step(std::move(st), p);
                }
            } else {
                const SystemCounterParams p{k, w};
                p.validate();
                const int hw = std::max(1, (2 << k) / 4);
                auto st = SystemCounterState::zero(p);
                for (std::uint64_t i = 0; i < steps; ++i) {
                    std::cout << hex_word(st.index, hw) << ' ' << hex_word(st.upper, hw) << ' ' << hex_word(st.lower, hw)
                              << ' ' << (st.frozen ? 'F' : '.') << '\n';
                    st = system_step(std::move(st), p);
                }
            }
        } else if (*mr) {
            const MachineSpec m = parse_machine(read_file(spec_path));
            ComputationArea area = sides_path.empty() ? ComputationArea::well_initialized(m, width, height)
                                                      : parse_area(read_file(sides_path), m, width, height);
            if (!tape.empty()) {
                const auto words = tape.find(',') != std::string::npos ? detail::split(tape, ',') : [&] {
                    std::vector<std::string> v;
                    for (char c : tape) v.emplace_back(1, c);
                    return v;
                }();
                if (words.size() != area.tape.size())
                    throw Error(ErrorKind::LengthMismatch, "tape length differs from active column count");
                for (std::size_t i = 0; i < words.size(); ++i) {
                    const auto it = std::find(m.letters.begin(), m.letters.end(), words[i]);
                    if (it == m.letters.end()) throw Error(ErrorKind::InvalidArgument, "unknown letter " + words[i]);
                    area.tape[i].letter = static_cast<int>(it - m.letters.begin());
                }
            }
            const auto d = run_area(m, area);
            Pattern p(Box::rect(0, 0, width, height), {kMachineLayer});
            for (int y = 0; y < height; ++y)
                for (int x = 0; x < width; ++x) p.set(0, x, y, machine_code(d.at(x, y), m));
            emit(out_path, write_pattern(p));
            for (const auto& e : d.events)
                std::cout << "event " << to_string(e.event) << ' ' << e.x << ' ' << e.y << ' '
                          << m.states[static_cast<std::size_t>(e.state)] << ' ' << e.inputs << '\n';
            const auto s = compute_signals(d, area, m);
            std::cout << "first_error " << s.first_error << "\ntape_lr " << s.tape_lr << "\ntape_rl " << s.tape_rl
                      << "\nwest_split " << s.west_split << "\neast_split " << s.east_split << "\nerror_path "
                      << s.error_path.size() << "\nadmissible " << (s.admissible ? 1 : 0) << '\n';
            rc = s.admissible ? kClean : kViolations;
        } else if (*sim) {
            StackParams sp = cfg.stack;
            const StackAssembly st = assemble_stack(odometer_system(seed), order, height, sp, cfg.limits);
            if (!out_path.empty()) write_file(out_path, write_pattern(to_pattern(st)));
            const auto cells = detect_cells(st.shared);
            for (int c = 0; c < height; ++c) {
                const auto p = phi(st, c, cells);
                std::cout << "phi " << c << ' ';
                for (int b : p.bits) std::cout << b;
                std::cout << '\n';
            }
            const bool commuting = check_commuting(st);
            const auto v = validate_stack(st, threads);
            std::cout << "commuting " << (commuting ? "true" : "false") << '\n';
            rc = report_violations(v, true);
            if (!commuting) rc = kViolations;
        } else if (*ren) {
            const Pattern p = parse_pattern(read_file(in_path));
            write_file(out_path, render_ppm(p, layer, section, scale > 0 ? scale : cfg.scale));
            std::cout << "image " << out_path << '\n';
        } else if (*cod) {
            emit(out_path, codes_table());
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "elapsed " << std::fixed << std::setprecision(1) << ms << " ms\n";
    return rc;
}
