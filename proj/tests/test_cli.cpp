#include <arboreal/cli.hpp>

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace arboreal;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    Outcome o;
    o.code = cli::run(args, out, err);
    o.out = out.str();
    o.err = err.str();
    return o;
}

std::string corpus(const std::string & name) { return std::string(ARBOREAL_CORPUS_DIR) + "/" + name; }

/// A scratch file removed when the test ends.
class ScratchFile {
public:
    explicit ScratchFile(const std::string & name, const std::string & text = {}) :
        path_(std::filesystem::temp_directory_path() / ("arboreal_test_" + name))
    {
        if (!text.empty())
            std::ofstream(path_) << text;
    }
    ~ScratchFile() { std::filesystem::remove(path_); }
    std::string path() const { return path_.string(); }
    std::string read() const
    {
        std::ifstream in(path_);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

private:
    std::filesystem::path path_;
};

std::string first_line(const std::string & s) { return s.substr(0, s.find('\n')); }

} // namespace

TEST_CASE("check")
{
    for (const char * name : {"graphs.arb", "forests.arb", "kripke.arb"}) {
        const Outcome o = run({"check", corpus(name)});
        CAPTURE(name, o.out, o.err);
        CHECK(o.code == cli::exit_ok);
        CHECK(o.out.find("violation") == std::string::npos);
    }
    const Outcome k = run({"check", corpus("kripke.arb")});
    CHECK(k.out.find("point Late: s") != std::string::npos);
    const Outcome f = run({"check", corpus("forests.arb")});
    CHECK(f.out.find("forest P3_pebbled (RP, k=2): ok") != std::string::npos);

    const ScratchFile bad("violation.arb", "vocabulary\nE 2\nstructure A\nelements a b\nE a b\n"
                                           "forest F over A k 2 tag RE\n");
    const Outcome v = run({"check", bad.path()});
    CHECK(v.code == cli::exit_fails);
    CHECK(v.out.find("forest F (RE, k=2): violation") != std::string::npos);
    CHECK(v.out.find("(E)") != std::string::npos);
}

TEST_CASE("usage and parse errors exit with 2")
{
    CHECK(run({}).code == cli::exit_usage);
    CHECK(run({"frobnicate"}).code == cli::exit_usage);
    CHECK(run({"equiv", "--comonad", "ef", "--k", "2", corpus("graphs.arb"), "C4"}).code == cli::exit_usage);
    CHECK(run({"equiv", "--comonad", "ef", "--k", "0", "--flavor", "bisim", corpus("graphs.arb"), "C4", "C5"}).code
        == cli::exit_usage);
    CHECK(run({"equiv", "--comonad", "xy", "--k", "1", "--flavor", "bisim", corpus("graphs.arb"), "C4", "C5"}).code
        == cli::exit_usage);
    CHECK(run({"--budget", "0", "check", corpus("graphs.arb")}).code == cli::exit_usage);

    const Outcome missing = run({"check", "/nonexistent/file.arb"});
    CHECK(missing.code == cli::exit_usage);
    CHECK_FALSE(missing.err.empty());

    const ScratchFile broken("broken.arb", "vocabulary\nE 2\nstructure A\nelements a\nE a z\n");
    const Outcome p = run({"check", broken.path()});
    CHECK(p.code == cli::exit_usage);
    CHECK(p.err.find("line 5, column 5") != std::string::npos);

    const Outcome unknown = run({"equiv", "--comonad", "ef", "--k", "1", "--flavor", "bisim", corpus("graphs.arb"),
        "C4", "Nope"});
    CHECK(unknown.code == cli::exit_usage);
    CHECK(unknown.err.find("Nope") != std::string::npos);

    CHECK(run({"--help"}).code == cli::exit_ok);
}

TEST_CASE("equiv")
{
    const std::string graphs = corpus("graphs.arb"), kripke = corpus("kripke.arb");
    const Outcome holds = run({"equiv", "--comonad", "ef", "--k", "2", "--flavor", "bisim", graphs, "C4", "C5"});
    CHECK(holds.code == cli::exit_ok);
    CHECK(first_line(holds.out) == "holds");
    CHECK(holds.out.find("query: ef k=2 bisim, C4 vs C5") != std::string::npos);
    CHECK(holds.out.find("witness: ") != std::string::npos);

    const Outcome fails = run({"equiv", "--comonad", "ef", "--k", "3", "--flavor", "bisim", "--eq", graphs, "K2", "K3"});
    CHECK(fails.code == cli::exit_fails);
    CHECK(first_line(fails.out) == "fails");
    CHECK(fails.out.find("with equality") != std::string::npos);

    CHECK(run({"equiv", "--comonad", "pebble", "--k", "2", "--flavor", "hom", graphs, "C4", "C5"}).code == cli::exit_ok);
    CHECK(run({"equiv", "--comonad", "pebble", "--k", "3", "--flavor", "arrow", graphs, "C5", "C4"}).code
        == cli::exit_fails);
    CHECK(run({"equiv", "--comonad", "modal", "--k", "2", "--flavor", "bisim", kripke, "Late", "Early"}).code
        == cli::exit_ok);
    CHECK(run({"equiv", "--comonad", "modal", "--k", "3", "--flavor", "bisim", kripke, "Late", "Early"}).code
        == cli::exit_fails);

    CHECK(run({"equiv", "--comonad", "modal", "--k", "2", "--flavor", "bisim", "--eq", kripke, "Late", "Early"}).code
        == cli::exit_unsupported);
    CHECK(run({"equiv", "--comonad", "pebble", "--k", "2", "--flavor", "iso", graphs, "C4", "C5"}).code
        == cli::exit_unsupported);
    CHECK(run({"--budget", "10", "equiv", "--comonad", "ef", "--k", "3", "--flavor", "bisim", graphs, "C4", "C5"}).code
        == cli::exit_budget);
}

TEST_CASE("param")
{
    const std::string graphs = corpus("graphs.arb"), kripke = corpus("kripke.arb");
    const Outcome td = run({"param", "--kind", "tree-depth", graphs, "K3"});
    CHECK(td.code == cli::exit_ok);
    CHECK(td.out == "tree-depth K3: coalgebra 3  oracle 3\n");
    const Outcome tw = run({"param", "--kind", "tree-width", graphs, "P4"});
    CHECK(tw.code == cli::exit_ok);
    CHECK(tw.out == "tree-width P4: coalgebra 2  oracle 2 (tree-width 1 + 1)\n");
    const Outcome md = run({"param", "--kind", "modal-depth", kripke, "Line"});
    CHECK(md.code == cli::exit_ok);
    CHECK(md.out == "modal-depth Line: coalgebra 3  oracle 3\n");
    const Outcome cyc = run({"param", "--kind", "modal-depth", kripke, "Cycle"});
    CHECK(cyc.code == cli::exit_ok);
    CHECK(cyc.out == "modal-depth Cycle: coalgebra none  oracle none\n");
    CHECK(run({"param", "--kind", "tree-depth", "--k-max", "1", graphs, "K3"}).out
        == "tree-depth K3: coalgebra none  oracle none\n");
    CHECK(run({"param", "--kind", "girth", graphs, "K3"}).code == cli::exit_usage);
}

TEST_CASE("game")
{
    const std::string graphs = corpus("graphs.arb");
    const Outcome win = run({"game", "--comonad", "ef", "--k", "2", "--trace", graphs, "C4", "C5"});
    CHECK(win.code == cli::exit_ok);
    CHECK(first_line(win.out) == "Duplicator wins");
    CHECK(win.out.find("round 1: Spoiler plays") != std::string::npos);
    CHECK(win.out.find("round 2: Spoiler plays") != std::string::npos);

    const Outcome lose = run({"game", "--comonad", "ef", "--k", "3", "--eq", "--trace", graphs, "K3", "K2"});
    CHECK(lose.code == cli::exit_fails);
    CHECK(first_line(lose.out) == "Spoiler wins");
    CHECK(lose.out.find("(winning)") == std::string::npos);

    const Outcome pebbles = run({"game", "--comonad", "pebble", "--k", "3", "--variant", "ep", "--trace", graphs, "C5", "C4"});
    CHECK(pebbles.code == cli::exit_fails);
    CHECK(pebbles.out.find("round 1: Spoiler pebbles") != std::string::npos);

    const ScratchFile dot("game.dot");
    const Outcome rendered = run({"--dot", dot.path(), "game", "--comonad", "ef", "--k", "1", graphs, "K2", "K3"});
    CHECK(rendered.code == cli::exit_ok);
    CHECK(dot.read().rfind("digraph game {", 0) == 0);

    CHECK(run({"--dot", dot.path(), "game", "--comonad", "pebble", "--k", "2", graphs, "K2", "K3"}).code
        == cli::exit_unsupported);
    CHECK(run({"game", "--comonad", "ef", "--k", "1", "--variant", "x", graphs, "K2", "K3"}).code == cli::exit_usage);
}

TEST_CASE("materialize")
{
    const std::string graphs = corpus("graphs.arb");
    const Outcome m = run({"materialize", "--comonad", "ef", "--k", "2", graphs, "K2"});
    REQUIRE(m.code == cli::exit_ok);
    const InputDocument doc = parse_input(m.out);
    const ForestStructure * f = doc.find_forest("E2_K2_order");
    REQUIRE(f);
    CHECK(f->size() == 6);
    CHECK(validate_object(*f).ok());

    const Outcome modal = run({"materialize", "--comonad", "modal", "--k", "3", corpus("kripke.arb"), "Cycle"});
    REQUIRE(modal.code == cli::exit_ok);
    const InputDocument md = parse_input(modal.out);
    CHECK(md.find_point("M3_Cycle") == 0);
    CHECK(md.find_forest("M3_Cycle_order")->tag == Tag::RM);

    CHECK(run({"materialize", "--comonad", "pebble", "--k", "2", graphs, "K2"}).code == cli::exit_unsupported);
    const Outcome budget = run({"--budget", "10", "materialize", "--comonad", "ef", "--k", "3", graphs, "C5"});
    CHECK(budget.code == cli::exit_budget);
    CHECK(budget.err.find("budget exceeded") != std::string::npos);

    const ScratchFile dot("carrier.dot");
    CHECK(run({"--dot", dot.path(), "materialize", "--comonad", "ef", "--k", "1", graphs, "K2"}).code == cli::exit_ok);
    CHECK(dot.read().find("digraph") == 0);
}

TEST_CASE("span")
{
    const std::string graphs = corpus("graphs.arb"), forests = corpus("forests.arb");
    const Outcome same = run({"span", "--k", "2", forests, "P3_depth", "P3_depth"});
    REQUIRE(same.code == cli::exit_ok);
    const InputDocument z = parse_input(same.out);
    CHECK(validate_object(*z.find_forest("Z_order")).ok());
    // root pair plus all four pairs of the interchangeable leaves
    CHECK(z.find_structure("Z")->size == 5);

    const Outcome structures = run({"span", "--k", "2", graphs, "C4", "C5"});
    REQUIRE(structures.code == cli::exit_ok);
    CHECK(structures.out.find("both legs open pathwise embeddings") != std::string::npos);
    CHECK(validate_object(*parse_input(structures.out).find_forest("Z_order")).ok());

    const Outcome none = run({"span", "--k", "3", graphs, "K2", "K3"});
    CHECK(none.code == cli::exit_fails);
    CHECK(none.out.find("no bisimulation") != std::string::npos);

    CHECK(run({"span", "--k", "2", forests, "P3_depth", "P3"}).code == cli::exit_usage);
    CHECK(run({"span", "--k", "2", "--comonad", "pebble", graphs, "C4", "C5"}).code == cli::exit_unsupported);
}

TEST_CASE("output is deterministic")
{
    const std::vector<std::string> args{"game", "--comonad", "ef", "--k", "2", "--trace", corpus("graphs.arb"), "P4", "C4"};
    const Outcome first = run(args);
    for (int i = 0; i < 3; ++i) {
        const Outcome again = run(args);
        CHECK(again.code == first.code);
        CHECK(again.out == first.out);
    }
}
