#pragma once

// Command-line front end: parses a document, dispatches one subcommand and
// writes a deterministic report. Exit codes:
//
//   0  relation holds / check ok
//   1  relation fails / violation found
//   2  usage or parse error
//   3  unsupported query
//   4  resource budget exceeded

#include <arboreal/comonads.hpp>
#include <arboreal/document.hpp>
#include <arboreal/equivalences.hpp>
#include <arboreal/errors.hpp>
#include <arboreal/forest.hpp>
#include <arboreal/games.hpp>
#include <arboreal/oracles.hpp>
#include <arboreal/structure.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace arboreal::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_fails = 1,
    exit_usage = 2,
    exit_unsupported = 3,
    exit_budget = 4,
};

namespace detail {

class usage_error : public error {
public:
    using error::error;
};

inline InputDocument load(const std::string & path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw usage_error("cannot read " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_input(text);
}

inline const Structure & structure_named(const InputDocument & doc, const std::string & name)
{
    const Structure * s = doc.find_structure(name);
    if (!s)
        throw usage_error("unknown structure " + name);
    return *s;
}

inline PointedStructure pointed_named(const InputDocument & doc, const std::string & name)
{
    const Structure & s = structure_named(doc, name);
    auto p = doc.find_point(name);
    if (!p)
        throw usage_error("structure " + name + " has no point declaration");
    return PointedStructure{s, *p};
}

inline void write_file(const std::string & path, const std::string & text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw usage_error("cannot write " + path);
    out << text;
}

inline GameVariant parse_variant(const std::string & v)
{
    if (v == "g")
        return GameVariant::bisimulation;
    if (v == "e")
        return GameVariant::existential;
    return GameVariant::existential_positive;
}

inline std::string path_name(const ForestStructure & x, PathRep p)
{
    return p.empty() ? std::string("()") : x.base.element_name(p.top);
}

struct Options {
    std::size_t budget = default_node_budget;
    std::string dot;
    std::string file;
    std::string a, b;
    std::string comonad = "ef";
    int k = 1;
    std::string flavor;
    bool eq = false;
    std::string kind;
    int k_max = 0;
    std::string variant = "g";
    bool trace = false;
};

inline int cmd_check(const Options & o, std::ostream & out)
{
    const InputDocument doc = load(o.file);
    bool ok = true;
    for (const auto & s : doc.structures) {
        Report r = validate_structure(s.structure);
        out << "structure " << s.name << ": " << (r.ok() ? "ok" : "violation") << '\n';
        for (const auto & v : r.violations)
            out << "  " << v << '\n';
        ok = ok && r.ok();
    }
    for (const auto & f : doc.forests) {
        Report r;
        try {
            r = validate_object(f.forest);
        } catch (const precondition_failed & e) {
            r.add(e.what());
        }
        out << "forest " << f.name << " (" << to_string(f.forest.tag);
        if (f.forest.bound)
            out << ", k=" << *f.forest.bound;
        out << "): " << (r.ok() ? "ok" : "violation") << '\n';
        for (const auto & v : r.violations)
            out << "  " << v << '\n';
        ok = ok && r.ok();
    }
    for (const auto & p : doc.points)
        out << "point " << p.structure << ": " << structure_named(doc, p.structure).element_name(p.element) << '\n';
    return ok ? exit_ok : exit_fails;
}

inline int cmd_equiv(const Options & o, std::ostream & out)
{
    const InputDocument doc = load(o.file);
    RelationQuery q;
    q.comonad = *parse_comonad(o.comonad);
    q.k = o.k;
    q.flavor = *parse_flavor(o.flavor);
    q.with_equality = o.eq;
    q.budget = o.budget;
    RelationResult r = q.comonad == ComonadKind::modal
        ? decide(pointed_named(doc, o.a), pointed_named(doc, o.b), q)
        : decide(structure_named(doc, o.a), structure_named(doc, o.b), q);
    out << (r.holds ? "holds" : "fails") << '\n';
    out << "query: " << to_string(q.comonad) << " k=" << q.k << ' ' << to_string(q.flavor)
        << (q.with_equality ? " with equality" : "") << ", " << o.a << " vs " << o.b << '\n';
    out << "witness: " << r.witness << '\n';
    return r.holds ? exit_ok : exit_fails;
}

inline int cmd_param(const Options & o, std::ostream & out)
{
    const InputDocument doc = load(o.file);
    auto show = [](std::optional<int> v) { return v ? std::to_string(*v) : std::string("none"); };
    std::optional<int> search, reference;
    std::string note;
    if (o.kind == "modal-depth") {
        const PointedStructure p = pointed_named(doc, o.a);
        const int k_max = o.k_max > 0 ? o.k_max : std::max(1, p.base.size);
        search = coalgebra_number(p, k_max, o.budget);
        reference = oracle::modal_tree_height(p);
        if (reference && *reference > k_max)
            reference.reset();
    } else {
        const Structure & s = structure_named(doc, o.a);
        const int k_max = o.k_max > 0 ? o.k_max : std::max(1, s.size);
        if (o.kind == "tree-depth") {
            search = coalgebra_number(s, ComonadKind::ef, k_max, o.budget);
            reference = std::max(1, oracle::tree_depth(s));
        } else {
            search = coalgebra_number(s, ComonadKind::pebble, k_max, o.budget);
            const int tw = oracle::tree_width(s);
            reference = std::max(1, tw + 1);
            note = " (tree-width " + std::to_string(tw) + " + 1)";
        }
        if (reference && *reference > k_max)
            reference.reset();
    }
    out << o.kind << ' ' << o.a << ": coalgebra " << show(search) << "  oracle " << show(reference) << note << '\n';
    if (search != reference) {
        out << "mismatch between coalgebra search and oracle\n";
        return exit_fails;
    }
    return exit_ok;
}

inline ForestStructure carrier(const InputDocument & doc, const Options & o, const std::string & name)
{
    if (o.comonad == "modal") {
        if (o.eq)
            throw unsupported_query("the modal comonad has no equality variant");
        return modal_build(pointed_named(doc, name), o.k, o.budget).carrier;
    }
    Structure s = structure_named(doc, name);
    if (o.eq)
        s = expand_identity(s, fresh_symbol_name(doc.vocab));
    return ef_build(s, o.k, o.budget).carrier;
}

inline int cmd_game(const Options & o, std::ostream & out)
{
    const InputDocument doc = load(o.file);
    const GameVariant v = parse_variant(o.variant);
    if (o.comonad == "pebble") {
        if (!o.dot.empty())
            throw unsupported_query("--dot is not available for the pebble placement game");
        Structure a = structure_named(doc, o.a), b = structure_named(doc, o.b);
        if (o.eq) {
            const std::string name = fresh_symbol_name(doc.vocab);
            a = expand_identity(a, name);
            b = expand_identity(b, name);
        }
        PlacementGame g(a, b, o.k, v, o.budget);
        out << (g.duplicator_wins() ? "Duplicator wins" : "Spoiler wins") << '\n';
        out << "region: " << g.winning_positions() << " of " << g.positions() << " positions ("
            << to_string(v) << ", " << g.rounds() << " refinement rounds)\n";
        if (o.trace)
            for (const auto & m : g.play_out()) {
                out << "round " << m.round << ": Spoiler";
                if (m.lifted)
                    out << " lifts (" << a.element_name(m.lifted->first) << ',' << b.element_name(m.lifted->second)
                        << ") and";
                out << " pebbles " << (m.challenge_on_left ? a : b).element_name(m.element)
                    << (m.challenge_on_left ? " on the left" : " on the right");
                if (m.response)
                    out << "; Duplicator answers " << (m.challenge_on_left ? b : a).element_name(*m.response)
                        << (m.winning ? " (winning)" : m.condition_holds ? " (losing)" : " (condition broken)");
                else
                    out << "; Duplicator cannot answer";
                out << '\n';
            }
        return g.duplicator_wins() ? exit_ok : exit_fails;
    }
    const ForestStructure x = carrier(doc, o, o.a);
    const ForestStructure y = carrier(doc, o, o.b);
    const WinningRegion r = solve_game(x, y, v);
    out << (r.duplicator_wins ? "Duplicator wins" : "Spoiler wins") << '\n';
    out << "region: " << r.positions.size() << " of " << r.total_positions << " positions (" << to_string(v)
        << ", carriers of sizes " << x.size() << " and " << y.size() << ")\n";
    if (o.trace)
        for (const auto & m : play_out(x, y, v)) {
            const ForestStructure & from = m.challenge_on_left ? x : y;
            const ForestStructure & to = m.challenge_on_left ? y : x;
            out << "round " << m.round << ": Spoiler plays " << path_name(from, m.challenge)
                << (m.challenge_on_left ? " on the left" : " on the right");
            if (m.response)
                out << "; Duplicator answers " << path_name(to, *m.response)
                    << (m.winning ? " (winning)" : m.condition_holds ? " (losing)" : " (condition broken)");
            else
                out << "; Duplicator cannot answer";
            out << '\n';
        }
    if (!o.dot.empty())
        write_file(o.dot, to_dot(r, x, y));
    return r.duplicator_wins ? exit_ok : exit_fails;
}

inline int cmd_materialize(const Options & o, std::ostream & out)
{
    const InputDocument doc = load(o.file);
    if (o.comonad == "pebble")
        throw unsupported_query("the pebbling carrier is infinite and cannot be materialised");
    const std::string prefix = (o.comonad == "modal" ? "M" : "E") + std::to_string(o.k) + "_" + o.a;
    std::optional<int> point;
    if (o.comonad == "modal")
        point = 0;
    const ForestStructure x = carrier(doc, o, o.a);
    out << emit(forest_document(prefix, prefix + "_order", x, point));
    if (!o.dot.empty())
        write_file(o.dot, to_dot(x, prefix));
    return exit_ok;
}

inline int cmd_span(const Options & o, std::ostream & out)
{
    const InputDocument doc = load(o.file);
    const ForestStructure * fa = doc.find_forest(o.a);
    const ForestStructure * fb = doc.find_forest(o.b);
    if ((fa == nullptr) != (fb == nullptr))
        throw usage_error("span needs two forests or two structures");
    ForestStructure x, y;
    if (fa) {
        x = *fa;
        y = *fb;
    } else {
        if (o.comonad == "pebble")
            throw unsupported_query("the pebbling carrier is infinite; spans need materialised forests");
        x = carrier(doc, o, o.a);
        y = carrier(doc, o, o.b);
    }
    const WinningRegion r = solve_game(x, y, GameVariant::bisimulation);
    if (!r.duplicator_wins) {
        out << "no bisimulation: Duplicator loses the bisimulation game\n";
        return exit_fails;
    }
    const BFSystem sys = extract_bf_system(r, x, y);
    const Span s = build_span(x, y, sys);
    if (!check_bisimulation_span(s)) {
        out << "span verification failed\n";
        return exit_fails;
    }
    out << "# bisimulation span between " << o.a << " and " << o.b << ": " << s.apex.size() << " elements, "
        << sys.pairs.size() << " back-and-forth pairs, both legs open pathwise embeddings\n";
    const InputDocument z = forest_document("Z", "Z_order", s.apex);
    for (int e = 0; e < s.apex.size(); ++e)
        out << "# " << z.structures[0].structure.element_name(e) << " -> " << x.base.element_name(s.to_left[e])
            << " , " << y.base.element_name(s.to_right[e]) << '\n';
    out << emit(z);
    if (!o.dot.empty())
        write_file(o.dot, to_dot(s.apex, "Z"));
    return exit_ok;
}

} // namespace detail

/// Runs one command; `args` excludes the program name.
inline int run(const std::vector<std::string> & args, std::ostream & out, std::ostream & err)
{
    using namespace detail;
    Options o;
    CLI::App app{"Arboreal games, comonads and resource-indexed equivalences over finite structures", "arboreal"};
    app.require_subcommand(1);
    app.fallthrough();
    app.option_defaults()->always_capture_default();
    app.add_option("--budget", o.budget, "Cap on materialised nodes and search steps")->check(CLI::PositiveNumber);
    app.add_option("--dot", o.dot, "Write a Graphviz rendering to FILE");

    const std::vector<std::string> comonads{"ef", "pebble", "modal"};
    auto * check = app.add_subcommand("check", "Validate every structure, forest and point in FILE");
    check->add_option("FILE", o.file)->required();

    auto * equiv = app.add_subcommand("equiv", "Decide a resource-indexed relation between A and B");
    equiv->add_option("--comonad", o.comonad)->required()->check(CLI::IsMember(comonads));
    equiv->add_option("--k", o.k)->required()->check(CLI::PositiveNumber);
    equiv->add_option("--flavor", o.flavor)->required()->check(CLI::IsMember({"arrow", "hom", "strong", "bisim", "iso"}));
    equiv->add_flag("--eq", o.eq, "Include equality (σ^I expansion)");
    equiv->add_option("FILE", o.file)->required();
    equiv->add_option("A", o.a)->required();
    equiv->add_option("B", o.b)->required();

    auto * param = app.add_subcommand("param", "Coalgebra number next to its combinatorial oracle");
    param->add_option("--kind", o.kind)->required()->check(CLI::IsMember({"tree-depth", "tree-width", "modal-depth"}));
    param->add_option("--k-max", o.k_max, "Largest resource index searched (default: universe size)")
        ->check(CLI::PositiveNumber);
    param->add_option("FILE", o.file)->required();
    param->add_option("A", o.a)->required();

    auto * game = app.add_subcommand("game", "Solve the game between the carriers of A and B");
    game->add_option("--comonad", o.comonad)->required()->check(CLI::IsMember(comonads));
    game->add_option("--k", o.k)->required()->check(CLI::PositiveNumber);
    game->add_option("--variant", o.variant, "g, e or ep")->check(CLI::IsMember({"g", "e", "ep"}));
    game->add_flag("--eq", o.eq, "Include equality (σ^I expansion)");
    game->add_flag("--trace", o.trace, "Print one optimal line of play");
    game->add_option("FILE", o.file)->required();
    game->add_option("A", o.a)->required();
    game->add_option("B", o.b)->required();

    auto * materialize = app.add_subcommand("materialize", "Emit the comonad's carrier on A as a forest block");
    materialize->add_option("--comonad", o.comonad)->required()->check(CLI::IsMember(comonads));
    materialize->add_option("--k", o.k)->required()->check(CLI::PositiveNumber);
    materialize->add_flag("--eq", o.eq, "Include equality (σ^I expansion)");
    materialize->add_option("FILE", o.file)->required();
    materialize->add_option("A", o.a)->required();

    auto * span = app.add_subcommand("span", "Build and verify a bisimulation span between A and B");
    span->add_option("--k", o.k)->required()->check(CLI::PositiveNumber);
    span->add_option("--comonad", o.comonad, "Carrier used when A and B are structures")
        ->check(CLI::IsMember(comonads));
    span->add_option("FILE", o.file)->required();
    span->add_option("A", o.a)->required();
    span->add_option("B", o.b)->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError & e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (check->parsed())
            return cmd_check(o, out);
        if (equiv->parsed())
            return cmd_equiv(o, out);
        if (param->parsed())
            return cmd_param(o, out);
        if (game->parsed())
            return cmd_game(o, out);
        if (materialize->parsed())
            return cmd_materialize(o, out);
        if (span->parsed())
            return cmd_span(o, out);
    } catch (const parse_error & e) {
        err << "parse error: " << o.file << ": " << e.what() << '\n';
        return exit_usage;
    } catch (const unsupported_query & e) {
        err << "unsupported: " << e.what() << '\n';
        return exit_unsupported;
    } catch (const budget_exceeded & e) {
        err << "budget exceeded: " << e.what() << '\n';
        return exit_budget;
    } catch (const error & e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
    return exit_usage;
}

} // namespace arboreal::cli
