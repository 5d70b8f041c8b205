#pragma once

// The Ehrenfeucht-Fraïssé comonad E_k and the modal comonad M_k,
// materialised as forest-ordered structures over plays, together with
// their counits and comultiplications, the comonad and coalgebra laws,
// the coalgebra ↔ forest cover correspondence, and coalgebra numbers.
//
// The pebbling comonad's carrier is infinite and never built here; its
// coalgebra number is computed directly through pebbled forest covers.

#include <arboreal/errors.hpp>
#include <arboreal/forest.hpp>
#include <arboreal/structure.hpp>

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace arboreal {

enum class ComonadKind { ef, pebble, modal };

inline std::string_view to_string(ComonadKind k)
{
    switch (k) {
    case ComonadKind::ef: return "ef";
    case ComonadKind::pebble: return "pebble";
    case ComonadKind::modal: return "modal";
    }
    return "?";
}

/// Default cap on materialised carrier sizes.
inline constexpr std::size_t default_node_budget = 2'000'000;

/// A non-empty sequence of elements, at most k long.
using Play = std::vector<int>;

struct EFStructure {
    Structure origin;
    int k = 0;
    std::vector<Play> plays; ///< carrier element i is plays[i]
    ForestStructure carrier; ///< tag RE, bound k

    int index_of(const Play & p) const
    {
        auto it = lookup.find(p);
        return it == lookup.end() ? -1 : it->second;
    }

    std::map<Play, int> lookup;
};

namespace detail {

inline std::string join_names(const Structure & a, const Play & p, const char * sep = ".")
{
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i)
            s += sep;
        s += a.element_name(p[i]);
    }
    return s;
}

inline std::size_t play_count(int n, int k, std::size_t budget)
{
    std::size_t total = 0, level = 1;
    for (int j = 1; j <= k; ++j) {
        if (n != 0 && level > budget / static_cast<std::size_t>(n))
            throw budget_exceeded("carrier exceeds node budget of " + std::to_string(budget));
        level *= static_cast<std::size_t>(n);
        total += level;
        if (total > budget)
            throw budget_exceeded("carrier exceeds node budget of " + std::to_string(budget));
    }
    return total;
}

} // namespace detail

/// Plays of length ≤ k ordered by (length, lexicographic); parent = drop last.
/// R(s1..sn) holds iff the s_i are pairwise prefix-comparable and
/// R(last(s1)..last(sn)) holds in A.
inline EFStructure ef_build(const Structure & a, int k, std::size_t budget = default_node_budget)
{
    if (k < 1)
        throw precondition_failed("ef_build: k must be positive");
    detail::play_count(a.size, k, budget);
    EFStructure e;
    e.origin = a;
    e.k = k;
    std::vector<int> parent;
    std::size_t level_begin = 0;
    for (int x = 0; x < a.size; ++x) {
        e.plays.push_back({x});
        parent.push_back(-1);
    }
    for (int len = 2; len <= k; ++len) {
        const std::size_t level_end = e.plays.size();
        for (std::size_t i = level_begin; i < level_end; ++i)
            for (int x = 0; x < a.size; ++x) {
                Play p = e.plays[i];
                p.push_back(x);
                e.plays.push_back(std::move(p));
                parent.push_back(static_cast<int>(i));
            }
        level_begin = level_end;
    }
    const int n = static_cast<int>(e.plays.size());
    for (int i = 0; i < n; ++i)
        e.lookup.emplace(e.plays[i], i);

    // chain[i][j] = carrier index of the prefix of length j+1
    std::vector<std::vector<int>> chain(n);
    for (int i = 0; i < n; ++i) {
        if (parent[i] != -1)
            chain[i] = chain[parent[i]];
        chain[i].push_back(i);
    }
    std::vector<Relation> rels(a.vocab.size());
    for (int s = 0; s < a.vocab.size(); ++s)
        for (int i = 0; i < n; ++i) {
            const Play & p = e.plays[i];
            const int top = static_cast<int>(p.size()) - 1;
            for (const auto & t : a.relations[s]) {
                // choose, for every entry, a position of the play carrying it;
                // at least one position must be the top (each tuple counted once)
                Tuple u(t.size());
                std::function<void(std::size_t, bool)> pick = [&](std::size_t j, bool uses_top) {
                    if (j == t.size()) {
                        if (uses_top)
                            rels[s].push_back(u);
                        return;
                    }
                    for (int pos = 0; pos <= top; ++pos)
                        if (p[pos] == t[j]) {
                            u[j] = chain[i][pos];
                            pick(j + 1, uses_top || pos == top);
                        }
                };
                pick(0, false);
            }
        }
    std::vector<std::string> names;
    for (const auto & p : e.plays)
        names.push_back(detail::join_names(a, p));
    e.carrier = ForestStructure{make_structure(a.vocab, n, std::move(rels), std::move(names)), std::move(parent), {},
        k, Tag::RE};
    return e;
}

/// ε: the last element of the play.
inline int ef_counit(const Play & s)
{
    if (s.empty())
        throw precondition_failed("ef_counit: empty play");
    return s.back();
}

/// δ: the sequence of non-empty prefixes.
inline std::vector<Play> ef_comult(const Play & s)
{
    if (s.empty())
        throw precondition_failed("ef_comult: empty play");
    std::vector<Play> out;
    for (std::size_t j = 1; j <= s.size(); ++j)
        out.emplace_back(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(j));
    return out;
}

struct ModalStep {
    int label = 0; ///< binary symbol index
    int state = 0;

    friend auto operator<=>(const ModalStep &, const ModalStep &) = default;
};

/// A path a0 R_{α1} a1 … through a Kripke structure.
struct ModalPath {
    int start = 0;
    std::vector<ModalStep> steps;

    int last() const { return steps.empty() ? start : steps.back().state; }
    int length() const { return static_cast<int>(steps.size()) + 1; }

    friend auto operator<=>(const ModalPath &, const ModalPath &) = default;
};

struct ModalStructure {
    PointedStructure origin;
    int k = 0;
    std::vector<ModalPath> paths; ///< carrier element i is paths[i]; element 0 is the root
    ForestStructure carrier;      ///< tag RM, bound k

    int index_of(const ModalPath & p) const
    {
        auto it = lookup.find(p);
        return it == lookup.end() ? -1 : it->second;
    }

    std::map<ModalPath, int> lookup;
};

namespace detail {

inline void require_modal_vocabulary(const Vocabulary & v)
{
    for (int s = 0; s < v.size(); ++s)
        if (v.arity(s) > 2)
            throw unsupported_query("modal structures allow only unary labels and binary transitions; "
                + v.name(s) + " has arity " + std::to_string(v.arity(s)));
}

inline void require_point(const PointedStructure & p)
{
    if (p.base.size < 1 || p.point < 0 || p.point >= p.base.size)
        throw precondition_failed("pointed structure needs a point inside a non-empty universe");
}

} // namespace detail

/// Unravelling from the point: paths with at most k states, children per
/// (transition symbol, successor) in ascending order; unary labels are
/// copied from the last state.
inline ModalStructure modal_build(const PointedStructure & p, int k, std::size_t budget = default_node_budget)
{
    if (k < 1)
        throw precondition_failed("modal_build: k must be positive");
    detail::require_point(p);
    const Structure & a = p.base;
    detail::require_modal_vocabulary(a.vocab);

    std::vector<std::vector<ModalStep>> succ(a.size);
    for (int s = 0; s < a.vocab.size(); ++s)
        if (a.vocab.arity(s) == 2)
            for (const auto & t : a.relations[s])
                succ[t[0]].push_back({s, t[1]});
    for (auto & v : succ)
        std::sort(v.begin(), v.end());

    ModalStructure m;
    m.origin = p;
    m.k = k;
    std::vector<int> parent;
    std::vector<Relation> rels(a.vocab.size());
    m.paths.push_back(ModalPath{p.point, {}});
    parent.push_back(-1);
    for (std::size_t i = 0; i < m.paths.size(); ++i) {
        if (m.paths[i].length() >= k)
            continue;
        for (const auto & step : succ[m.paths[i].last()]) {
            if (m.paths.size() >= budget)
                throw budget_exceeded("unravelling exceeds node budget of " + std::to_string(budget));
            ModalPath q = m.paths[i];
            q.steps.push_back(step);
            rels[step.label].push_back({static_cast<int>(i), static_cast<int>(m.paths.size())});
            m.paths.push_back(std::move(q));
            parent.push_back(static_cast<int>(i));
        }
    }
    const int n = static_cast<int>(m.paths.size());
    for (int s = 0; s < a.vocab.size(); ++s)
        if (a.vocab.arity(s) == 1)
            for (int i = 0; i < n; ++i)
                if (a.holds(s, {m.paths[i].last()}))
                    rels[s].push_back({i});
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) {
        const auto & q = m.paths[i];
        std::string nm = a.element_name(q.start);
        for (const auto & st : q.steps)
            nm += "." + a.vocab.name(st.label) + "." + a.element_name(st.state);
        names.push_back(std::move(nm));
        m.lookup.emplace(q, i);
    }
    m.carrier = ForestStructure{make_structure(a.vocab, n, std::move(rels), std::move(names)), std::move(parent), {},
        k, Tag::RM};
    return m;
}

namespace detail {

// Checks, on the materialised carriers, that ε and δ are homomorphisms and
// that the counit and coassociativity laws hold elementwise. `prefixes`
// returns the carrier indices of the prefix chain of a node, `relabel`
// rebuilds a GA-node from a chain of images.
template <typename Counit, typename Comult, typename ApplyG>
bool comonad_laws_hold(const ForestStructure & ga, const ForestStructure & gga, const Structure & a, Counit counit,
    Comult comult, ApplyG apply_g_to_counit)
{
    const int n = ga.size();
    ElementMap eps(n), delta(n);
    for (int s = 0; s < n; ++s) {
        eps[s] = counit(s);
        delta[s] = comult(s);
        if (delta[s] < 0)
            return false;
    }
    if (!is_homomorphism(eps, ga.base, a) || !is_homomorphism(delta, ga.base, gga.base))
        return false;
    ForestIndex ig(ga), igg(gga);
    for (int s = 0; s < n; ++s) {
        const auto & dchain = igg.chain(delta[s]);
        // ε_{GA} ∘ δ_A = id : the last entry of δ(s) is s itself
        if (dchain.size() != ig.chain(s).size())
            return false;
        for (std::size_t j = 0; j < dchain.size(); ++j)
            if (ig.chain(s)[j] != apply_g_to_counit.entry(dchain[j]))
                return false;
        if (apply_g_to_counit.entry(dchain.back()) != s)
            return false;
        // G(ε_A) ∘ δ_A = id
        if (apply_g_to_counit.counit_image(delta[s]) != s)
            return false;
        // δ_{GA} ∘ δ_A = G(δ_A) ∘ δ_A, compared as sequences over GGA:
        // the prefix chain of δ(s) in GGA versus δ applied to each entry.
        for (std::size_t j = 0; j < dchain.size(); ++j)
            if (dchain[j] != delta[apply_g_to_counit.entry(dchain[j])])
                return false;
    }
    return true;
}

} // namespace detail

/// Counit and coassociativity laws for E_k on A, checked elementwise on
/// E_k A and E_k E_k A.
inline bool check_comonad_laws(const Structure & a, int k, std::size_t budget = default_node_budget)
{
    EFStructure ga = ef_build(a, k, budget);
    EFStructure gga = ef_build(ga.carrier.base, k, budget);
    struct Apply {
        const EFStructure & ga;
        const EFStructure & gga;
        // the GA element that a GGA play ends in
        int entry(int node) const { return gga.plays[node].back(); }
        int counit_image(int node) const
        {
            Play p;
            for (int e : gga.plays[node])
                p.push_back(ga.plays[e].back());
            return ga.index_of(p);
        }
    } apply{ga, gga};
    auto counit = [&](int s) { return ef_counit(ga.plays[s]); };
    ForestIndex idx(ga.carrier);
    auto comult = [&](int s) {
        Play d;
        for (int e : idx.chain(s))
            d.push_back(e);
        return gga.index_of(d);
    };
    return detail::comonad_laws_hold(ga.carrier, gga.carrier, a, counit, comult, apply);
}

/// Same laws for M_k on a pointed structure; additionally ε and δ preserve
/// the distinguished point.
inline bool check_comonad_laws(const PointedStructure & p, int k, std::size_t budget = default_node_budget)
{
    ModalStructure ga = modal_build(p, k, budget);
    ModalStructure gga = modal_build(PointedStructure{ga.carrier.base, 0}, k, budget);
    struct Apply {
        const ModalStructure & ga;
        const ModalStructure & gga;
        int entry(int node) const { return gga.paths[node].last(); }
        int counit_image(int node) const
        {
            const auto & q = gga.paths[node];
            ModalPath r{ga.paths[q.start].last(), {}};
            for (const auto & st : q.steps)
                r.steps.push_back({st.label, ga.paths[st.state].last()});
            return ga.index_of(r);
        }
    } apply{ga, gga};
    auto counit = [&](int s) { return ga.paths[s].last(); };
    ForestIndex idx(ga.carrier);
    auto comult = [&](int s) {
        ModalPath d{0, {}};
        const auto & ch = idx.chain(s);
        for (std::size_t j = 1; j < ch.size(); ++j)
            d.steps.push_back({ga.paths[ch[j]].steps.back().label, ch[j]});
        return gga.index_of(d);
    };
    if (counit(0) != p.point || comult(0) != 0)
        return false;
    return detail::comonad_laws_hold(ga.carrier, gga.carrier, p.base, counit, comult, apply);
}

/// α: A → E_k A, stored as the play assigned to each element.
struct EFCoalgebra {
    Structure base;
    int k = 0;
    std::vector<Play> alpha;
};

/// α: (A, a) → M_k(A, a), stored as the path assigned to each state.
struct ModalCoalgebra {
    PointedStructure base;
    int k = 0;
    std::vector<ModalPath> alpha;
};

inline bool is_coalgebra(const EFCoalgebra & c)
{
    const Structure & a = c.base;
    if (c.k < 1 || static_cast<int>(c.alpha.size()) != a.size)
        return false;
    for (int x = 0; x < a.size; ++x) {
        const Play & p = c.alpha[x];
        if (p.empty() || static_cast<int>(p.size()) > c.k)
            return false;
        for (int e : p)
            if (e < 0 || e >= a.size)
                return false;
        if (ef_counit(p) != x) // ε ∘ α = id
            return false;
        // E_k(α) ∘ α = δ ∘ α : α of every entry is the matching prefix
        for (std::size_t j = 0; j < p.size(); ++j)
            if (c.alpha[p[j]] != Play(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(j) + 1))
                return false;
    }
    auto prefix_comparable = [](const Play & s, const Play & t) {
        const auto & shorter = s.size() <= t.size() ? s : t;
        const auto & longer = s.size() <= t.size() ? t : s;
        return std::equal(shorter.begin(), shorter.end(), longer.begin());
    };
    // homomorphism into E_k A (relations as in ef_build)
    for (int s = 0; s < a.vocab.size(); ++s)
        for (const auto & t : a.relations[s])
            for (std::size_t i = 0; i < t.size(); ++i)
                for (std::size_t j = i + 1; j < t.size(); ++j)
                    if (!prefix_comparable(c.alpha[t[i]], c.alpha[t[j]]))
                        return false;
    return true;
}

inline bool is_coalgebra(const ModalCoalgebra & c)
{
    const Structure & a = c.base.base;
    if (c.k < 1 || static_cast<int>(c.alpha.size()) != a.size || c.base.point < 0 || c.base.point >= a.size)
        return false;
    for (int s = 0; s < a.vocab.size(); ++s)
        if (a.vocab.arity(s) > 2)
            return false;
    for (int x = 0; x < a.size; ++x) {
        const ModalPath & p = c.alpha[x];
        if (p.start != c.base.point || p.length() > c.k || p.last() != x)
            return false;
        int cur = p.start;
        ModalPath prefix{p.start, {}};
        if (!(c.alpha[cur] == prefix))
            return false;
        for (const auto & st : p.steps) {
            if (st.label < 0 || st.label >= a.vocab.size() || a.vocab.arity(st.label) != 2)
                return false;
            if (st.state < 0 || st.state >= a.size || !a.holds(st.label, {cur, st.state}))
                return false;
            prefix.steps.push_back(st);
            if (!(c.alpha[st.state] == prefix)) // coassociativity
                return false;
            cur = st.state;
        }
    }
    if (!c.alpha[c.base.point].steps.empty())
        return false;
    // R(x, y) must map to a one-step extension labelled R
    for (int s = 0; s < a.vocab.size(); ++s) {
        if (a.vocab.arity(s) != 2)
            continue;
        for (const auto & t : a.relations[s]) {
            ModalPath ext = c.alpha[t[0]];
            ext.steps.push_back({s, t[1]});
            if (!(c.alpha[t[1]] == ext))
                return false;
        }
    }
    return true;
}

/// α(a) = the chain ↓a read from its root.
inline EFCoalgebra cover_to_coalgebra(const ForestStructure & cover)
{
    if (cover.tag != Tag::RE || !validate_object(cover).ok())
        throw precondition_failed("cover_to_coalgebra: expected a valid RE forest cover");
    ForestIndex idx(cover);
    EFCoalgebra c{cover.base, *cover.bound, {}};
    for (int x = 0; x < cover.size(); ++x)
        c.alpha.push_back(idx.chain(x));
    return c;
}

/// parent(a) = ε of the longest proper prefix of α(a).
inline ForestStructure coalgebra_to_cover(const EFCoalgebra & c)
{
    if (!is_coalgebra(c))
        throw precondition_failed("coalgebra_to_cover: not a coalgebra");
    std::vector<int> parent;
    for (const auto & p : c.alpha)
        parent.push_back(p.size() >= 2 ? p[p.size() - 2] : -1);
    return ForestStructure{c.base, std::move(parent), {}, c.k, Tag::RE};
}

inline ModalCoalgebra modal_cover_to_coalgebra(const ForestStructure & cover)
{
    if (cover.tag != Tag::RM || !validate_object(cover).ok())
        throw precondition_failed("modal_cover_to_coalgebra: expected a valid RM forest cover");
    ForestIndex idx(cover);
    const int root = idx.roots().front();
    ModalCoalgebra c{PointedStructure{cover.base, root}, *cover.bound, {}};
    const auto & vocab = cover.base.vocab;
    for (int x = 0; x < cover.size(); ++x) {
        ModalPath p{root, {}};
        const auto & ch = idx.chain(x);
        for (std::size_t j = 1; j < ch.size(); ++j)
            for (int s = 0; s < vocab.size(); ++s)
                if (vocab.arity(s) == 2 && cover.base.holds(s, {ch[j - 1], ch[j]}))
                    p.steps.push_back({s, ch[j]});
        c.alpha.push_back(std::move(p));
    }
    return c;
}

inline ForestStructure coalgebra_to_cover(const ModalCoalgebra & c)
{
    if (!is_coalgebra(c))
        throw precondition_failed("coalgebra_to_cover: not a coalgebra");
    std::vector<int> parent;
    for (const auto & p : c.alpha)
        parent.push_back(p.steps.size() >= 1 ? (p.steps.size() >= 2 ? p.steps[p.steps.size() - 2].state : p.start)
                                             : -1);
    return ForestStructure{c.base.base, std::move(parent), {}, c.k, Tag::RM};
}

namespace detail {

// Enumerates parent functions: element v takes its parent from
// candidates[v] (-1 = root), skipping assignments that close a cycle.
inline void for_each_forest(const std::vector<std::vector<int>> & candidates,
    const std::function<void(const std::vector<int> &)> & visit, std::size_t budget)
{
    std::size_t steps = 0;
    const int n = static_cast<int>(candidates.size());
    std::vector<int> parent(n, -2);
    auto closes_cycle = [&](int v) {
        int u = parent[v];
        for (int steps = 0; u >= 0 && steps <= n; ++steps) {
            if (u == v)
                return true;
            u = parent[u];
        }
        return false;
    };
    std::function<void(int)> rec = [&](int v) {
        if (v == n) {
            visit(parent);
            return;
        }
        for (int p : candidates[v]) {
            if (++steps > budget)
                throw budget_exceeded("forest cover search exceeds node budget of " + std::to_string(budget));
            parent[v] = p;
            if (!closes_cycle(v))
                rec(v + 1);
        }
        parent[v] = -2;
    };
    rec(0);
}

// Least number of pebbles for a fixed forest order, or -1 above `limit`.
inline int min_pebbles(const ForestStructure & f, const ForestIndex & idx, const Graph & g, int limit)
{
    const int n = f.size();
    std::vector<std::vector<int>> conflict(n);
    for (int a = 0; a < n; ++a)
        for (int b : g.adjacency[a])
            if (idx.below_or_equal(a, b))
                for (int h = idx.height(a) + 1; h <= idx.height(b); ++h) {
                    int x = idx.ancestor_at(b, h);
                    conflict[a].push_back(x);
                    conflict[x].push_back(a);
                }
    for (int k = (n == 0 ? 0 : 1); k <= limit; ++k) {
        std::vector<int> colour(n, 0);
        std::function<bool(int)> rec = [&](int v) {
            if (v == n)
                return true;
            for (int c = 1; c <= k; ++c) {
                bool ok = true;
                for (int u : conflict[v])
                    if (u < v && colour[u] == c) {
                        ok = false;
                        break;
                    }
                if (!ok)
                    continue;
                colour[v] = c;
                if (rec(v + 1))
                    return true;
            }
            colour[v] = 0;
            return false;
        };
        if (rec(0))
            return k;
    }
    return -1;
}

} // namespace detail

/// A forest cover witnessing the least coalgebra number ≤ k_max, if any.
/// ef: (E)-forest of least height; pebble: (E)-forest plus pebbling with the
/// fewest pebbles.
inline std::optional<ForestStructure> minimal_cover(const Structure & a, ComonadKind kind, int k_max,
    std::size_t budget = default_node_budget)
{
    if (k_max < 1)
        throw precondition_failed("coalgebra_number: k_max must be positive");
    if (kind == ComonadKind::modal)
        throw precondition_failed("modal coalgebra numbers need a pointed structure");
    const int n = a.size;
    Graph g = gaifman_graph(a);
    std::vector<std::vector<int>> candidates(n);
    for (int v = 0; v < n; ++v) {
        candidates[v].push_back(-1);
        for (int u = 0; u < n; ++u)
            if (u != v)
                candidates[v].push_back(u);
    }
    std::optional<ForestStructure> best;
    int best_k = k_max + 1;
    detail::for_each_forest(candidates, [&](const std::vector<int> & parent) {
        ForestStructure f{a, parent, {}, std::nullopt, Tag::R};
        ForestIndex idx(f);
        if (kind == ComonadKind::ef && idx.max_height() >= best_k)
            return;
        for (int x = 0; x < n; ++x)
            for (int y : g.adjacency[x])
                if (!idx.comparable(x, y))
                    return;
        if (kind == ComonadKind::ef) {
            best_k = std::max(idx.max_height(), 1);
            best = ForestStructure{a, parent, {}, best_k, Tag::RE};
            return;
        }
        int k = detail::min_pebbles(f, idx, g, best_k - 1);
        if (k == -1)
            return;
        k = std::max(k, 1);
        // recover the pebbling for the witness
        ForestStructure w{a, parent, std::vector<int>(n, 1), k, Tag::RP};
        std::vector<int> colour(n, 0);
        std::function<bool(int)> rec = [&](int v) {
            if (v == n)
                return validate_object(ForestStructure{a, parent, colour, k, Tag::RP}).ok();
            for (int c = 1; c <= k; ++c) {
                colour[v] = c;
                if (rec(v + 1))
                    return true;
            }
            return false;
        };
        if (n == 0 || rec(0)) {
            w.pebble = n == 0 ? std::vector<int>{} : colour;
            best_k = k;
            best = std::move(w);
        }
    }, budget);
    return best;
}

inline std::optional<int> coalgebra_number(const Structure & a, ComonadKind kind, int k_max,
    std::size_t budget = default_node_budget)
{
    auto cover = minimal_cover(a, kind, k_max, budget);
    if (!cover)
        return std::nullopt;
    return *cover->bound;
}

/// Tree order rooted at the point satisfying (M), with the least height.
inline std::optional<ForestStructure> minimal_modal_cover(const PointedStructure & p, int k_max,
    std::size_t budget = default_node_budget)
{
    if (k_max < 1)
        throw precondition_failed("coalgebra_number: k_max must be positive");
    detail::require_point(p);
    const Structure & a = p.base;
    detail::require_modal_vocabulary(a.vocab);
    const int n = a.size;
    // under (M) a parent must be a transition predecessor
    std::vector<std::vector<int>> candidates(n);
    for (int v = 0; v < n; ++v) {
        if (v == p.point) {
            candidates[v].push_back(-1);
            continue;
        }
        for (int s = 0; s < a.vocab.size(); ++s)
            if (a.vocab.arity(s) == 2)
                for (const auto & t : a.relations[s])
                    if (t[1] == v)
                        candidates[v].push_back(t[0]);
        std::sort(candidates[v].begin(), candidates[v].end());
        candidates[v].erase(std::unique(candidates[v].begin(), candidates[v].end()), candidates[v].end());
    }
    std::optional<ForestStructure> best;
    int best_k = k_max + 1;
    detail::for_each_forest(candidates, [&](const std::vector<int> & parent) {
        ForestStructure f{a, parent, {}, n, Tag::RM};
        if (!validate_object(f).ok())
            return;
        int h = ForestIndex(f).max_height();
        if (h < best_k) {
            best_k = h;
            f.bound = h;
            best = std::move(f);
        }
    }, budget);
    return best;
}

inline std::optional<int> coalgebra_number(const PointedStructure & p, int k_max,
    std::size_t budget = default_node_budget)
{
    auto cover = minimal_modal_cover(p, k_max, budget);
    if (!cover)
        return std::nullopt;
    return *cover->bound;
}

} // namespace arboreal
