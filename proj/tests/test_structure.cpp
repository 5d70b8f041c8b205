#include "support.hpp"

#include <arboreal/structure.hpp>

#include <catch_amalgamated.hpp>

using namespace arboreal;
using namespace support;

namespace {

Structure loop1() { return digraph(1, {{0, 0}}); }
Structure loop_free(int n) { return digraph(n, {}); }

bool exists_map(const Structure & a, const Structure & b, bool embedding)
{
    bool found = false;
    for_each_map(a.size, b.size, [&](const ElementMap & f) {
        if (!found)
            found = embedding ? is_embedding(f, a, b) && a.tuple_count() == b.tuple_count() && a.size == b.size
                              : is_homomorphism(f, a, b);
    });
    return found || (a.size == 0 && (!embedding || b.size == 0));
}

} // namespace

TEST_CASE("validate_structure accepts well-formed structures and reports violations")
{
    CHECK(validate_structure(empty_structure(graph_vocab())).ok());
    CHECK(validate_structure(complete_graph(3)).ok());

    Structure bad = complete_graph(3);
    bad.relations[0].push_back({0, 5});
    const Report r = validate_structure(bad);
    REQUIRE_FALSE(r.ok());
    CHECK(r.violations.front().find("out of range") != std::string::npos);

    Structure wrong_arity = complete_graph(2);
    wrong_arity.relations[0].push_back({0});
    CHECK_FALSE(validate_structure(wrong_arity).ok());
}

TEST_CASE("make_structure keeps relations sorted and duplicate-free")
{
    Structure s = make_structure(graph_vocab(), 2, {{{1, 0}, {0, 1}, {1, 0}}});
    CHECK(s.relations[0] == Relation{{0, 1}, {1, 0}});
    CHECK(s.holds(0, {1, 0}));
    CHECK_FALSE(s.holds(0, {0, 0}));
}

TEST_CASE("check_morphism on the specified examples")
{
    const Structure k3 = complete_graph(3), k2 = complete_graph(2);
    CHECK(check_morphism(Morphism{k3, k3, identity_map(3)}, MorphismKind::hom));
    CHECK(check_morphism(Morphism{k3, k3, identity_map(3)}, MorphismKind::embedding));
    CHECK(check_morphism(Morphism{k2, k3, {0, 1}}, MorphismKind::embedding));
    CHECK_FALSE(check_morphism(Morphism{k2, loop_free(1), {0, 0}}, MorphismKind::hom));
    CHECK(check_morphism(Morphism{k2, loop1(), {0, 0}}, MorphismKind::hom));
    CHECK_FALSE(check_morphism(Morphism{k2, loop1(), {0, 0}}, MorphismKind::embedding));

    const Structure other = make_structure(Vocabulary{{"F", 2}}, 2, {});
    CHECK_THROWS_AS(check_morphism(Morphism{k2, other, {0, 1}}, MorphismKind::hom), vocabulary_mismatch);
}

TEST_CASE("factorize splits a homomorphism into a surjection and an embedding")
{
    SECTION("identity")
    {
        const Structure k3 = complete_graph(3);
        const Factorization f = factorize(Morphism{k3, k3, identity_map(3)});
        CHECK(f.quotient.map == identity_map(3));
        CHECK(f.embedding.map == identity_map(3));
        CHECK(f.image == k3);
    }
    SECTION("constant map into a loop")
    {
        const Factorization f = factorize(Morphism{loop_free(2), loop1(), {0, 0}});
        CHECK(f.quotient.map == ElementMap{0, 0});
        CHECK(f.embedding.map == ElementMap{0});
        CHECK(f.image.relations[0] == Relation{{0, 0}});
        CHECK(check_morphism(f.embedding, MorphismKind::embedding));
    }
    SECTION("inclusion of an edge into a triangle")
    {
        const Factorization f = factorize(Morphism{complete_graph(2), complete_graph(3), {0, 1}});
        CHECK(f.image == complete_graph(2));
        CHECK(f.embedding.map == ElementMap{0, 1});
    }
    SECTION("invalid input")
    {
        CHECK_THROWS_AS(factorize(Morphism{complete_graph(2), loop_free(1), {0, 0}}), precondition_failed);
    }
}

TEST_CASE("factorization property over random homomorphisms")
{
    std::mt19937_64 rng(11);
    int checked = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const Structure a = random_structure(graph_vocab(), 1 + trial % 4, 0.25, rng);
        const Structure b = random_structure(graph_vocab(), 1 + (trial / 4) % 4, 0.6, rng);
        auto h = hom_search(a, b);
        if (!h)
            continue;
        ++checked;
        const Factorization f = factorize(*h);
        CHECK(compose(f.embedding.map, f.quotient.map) == h->map);
        CHECK(is_surjective(f.quotient.map, f.image.size));
        CHECK(check_morphism(f.quotient, MorphismKind::hom));
        CHECK(check_morphism(f.embedding, MorphismKind::embedding));
    }
    CHECK(checked > 50);
}

TEST_CASE("gaifman_graph")
{
    const Graph g = gaifman_graph(complete_graph(3));
    CHECK(g.edge_count() == 3);
    CHECK(g.adjacent(0, 2));

    const Structure ternary = make_structure(Vocabulary{{"T", 3}}, 3, {{{0, 1, 2}}});
    CHECK(gaifman_graph(ternary).edge_count() == 3);
    CHECK(gaifman_graph(loop_free(4)).edge_count() == 0);
    CHECK(gaifman_graph(loop1()).edge_count() == 0);

    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
        const Structure s = random_structure(graph_vocab(), 5, 0.3, rng);
        const Graph h = gaifman_graph(s);
        for (int x = 0; x < s.size; ++x) {
            CHECK_FALSE(h.adjacent(x, x));
            for (int y = 0; y < s.size; ++y)
                CHECK(h.adjacent(x, y) == h.adjacent(y, x));
        }
    }
    CHECK(gaifman_components(graph(4, {{0, 1}, {2, 3}})).size() == 2);
}

TEST_CASE("products and coproducts")
{
    const Structure k2 = complete_graph(2);
    const Product p = product_struct(k2, k2);
    CHECK(p.structure.size == 4);
    CHECK(p.structure.relations[0].size() == 4);
    CHECK(check_morphism(p.left, MorphismKind::hom));
    CHECK(check_morphism(p.right, MorphismKind::hom));

    const Structure k3 = complete_graph(3);
    CHECK(iso_search(product_struct(k3, loop1()).structure, k3).has_value());
    CHECK(product_struct(k3, empty_structure(graph_vocab())).structure.size == 0);

    const Coproduct c = coproduct_struct(k2, k2);
    CHECK(iso_search(c.structure, graph(4, {{0, 1}, {2, 3}})).has_value());
    CHECK(check_morphism(c.left, MorphismKind::embedding));
    CHECK(check_morphism(c.right, MorphismKind::embedding));
    CHECK(coproduct_struct(k3, empty_structure(graph_vocab())).structure == k3);
    CHECK(coproduct_struct(loop1(), loop1()).structure.relations[0].size() == 2);
}

TEST_CASE("identity expansion and quotient")
{
    const Structure k2i = expand_identity(complete_graph(2));
    CHECK(k2i.vocab.size() == 2);
    CHECK(k2i.relations[1] == Relation{{0, 0}, {1, 1}});
    CHECK(expand_identity(empty_structure(graph_vocab())).size == 0);
    CHECK_THROWS_AS(expand_identity(k2i), precondition_failed);
    CHECK(fresh_symbol_name(k2i.vocab) == "I'");

    const Structure three = make_structure(Vocabulary{{"E", 2}, {"I", 2}}, 3, {{}, {{0, 1}}});
    CHECK(quotient_by_identity(three).size == 2);

    const Structure collapsed = quotient_by_identity(make_structure(Vocabulary{{"E", 2}, {"I", 2}}, 2,
        {{{0, 1}, {1, 0}}, {{0, 1}}}));
    CHECK(collapsed.size == 1);
    CHECK(collapsed.relations[0] == Relation{{0, 0}});

    for (const auto & a : structures_up_to_iso(graph_vocab(), 4))
        CHECK(iso_search(quotient_by_identity(expand_identity(a)), a).has_value());
}

TEST_CASE("hom_search and iso_search examples")
{
    const Structure k2 = complete_graph(2), k3 = complete_graph(3);
    CHECK(hom_search(k3, k3)->map == identity_map(3));
    CHECK_FALSE(hom_search(k3, k2).has_value());
    CHECK(hom_search(k2, k3)->map == ElementMap{0, 1});
    CHECK(hom_search(k2, k3, {{0, 2}})->map == ElementMap{2, 0});
    CHECK_THROWS_AS(hom_search(k2, k3, {{0, 7}}), precondition_failed);

    CHECK(iso_search(k3, k3).has_value());
    CHECK_FALSE(iso_search(k2, loop_free(2)).has_value());
    const Structure relabelled = digraph(3, {{2, 1}, {1, 2}, {1, 0}, {0, 1}, {2, 0}, {0, 2}});
    auto w = iso_search(k3, relabelled);
    REQUIRE(w);
    CHECK(is_embedding(w->map, k3, relabelled));
}

TEST_CASE("searches are sound and complete against exhaustive enumeration")
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = trial % 6, m = (trial / 6) % 6;
        const Structure a = random_structure(graph_vocab(), n, 0.2, rng);
        const Structure b = random_structure(graph_vocab(), m, 0.5, rng);
        auto h = hom_search(a, b);
        if (h)
            CHECK(is_homomorphism(h->map, a, b));
        CHECK(h.has_value() == exists_map(a, b, false));

        const Structure c = trial % 2 ? a : flip_tuple(a.size ? a : b, rng);
        if (c.size != a.size)
            continue;
        auto iso = iso_search(a, c);
        if (iso) {
            CHECK(is_embedding(iso->map, a, c));
            CHECK(is_surjective(iso->map, c.size));
        }
        CHECK(iso.has_value() == exists_map(a, c, true));
    }
}
