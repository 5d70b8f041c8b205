#pragma once

// Shared fixtures for the unit and acceptance tests: small named structures
// and exhaustive enumerators of structures and forest objects up to
// isomorphism.

#include <arboreal/comonads.hpp>
#include <arboreal/forest.hpp>
#include <arboreal/structure.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace support {

using namespace arboreal;

inline Vocabulary graph_vocab() { return Vocabulary{{"E", 2}}; }

/// `relations` binary transition symbols R, S, … followed by `labels` unary P, Q, …
inline Vocabulary kripke_vocab(int relations, int labels)
{
    static const char * transitions[] = {"R", "S", "T"};
    static const char * props[] = {"P", "Q"};
    std::vector<Symbol> s;
    for (int i = 0; i < relations; ++i)
        s.push_back({transitions[i], 2});
    for (int i = 0; i < labels; ++i)
        s.push_back({props[i], 1});
    return Vocabulary(std::move(s));
}

/// Directed graph with the listed arcs.
inline Structure digraph(int n, const std::vector<std::pair<int, int>> & arcs)
{
    Relation e;
    for (auto [a, b] : arcs)
        e.push_back({a, b});
    return make_structure(graph_vocab(), n, {e});
}

/// Undirected graph: every edge is stored in both directions.
inline Structure graph(int n, const std::vector<std::pair<int, int>> & edges)
{
    std::vector<std::pair<int, int>> arcs;
    for (auto [a, b] : edges) {
        arcs.push_back({a, b});
        arcs.push_back({b, a});
    }
    return digraph(n, arcs);
}

inline Structure complete_graph(int n)
{
    std::vector<std::pair<int, int>> e;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            e.push_back({a, b});
    return graph(n, e);
}

inline Structure path_graph(int n)
{
    std::vector<std::pair<int, int>> e;
    for (int a = 0; a + 1 < n; ++a)
        e.push_back({a, a + 1});
    return graph(n, e);
}

inline Structure cycle_graph(int n)
{
    std::vector<std::pair<int, int>> e;
    for (int a = 0; a < n; ++a)
        e.push_back({a, (a + 1) % n});
    return graph(n, e);
}

/// The bit layout used by the enumerators: one slot per possible tuple,
/// symbol by symbol, tuples in lexicographic order.
class SlotLayout {
public:
    SlotLayout(const Vocabulary & v, int n) : vocab_(v), n_(n)
    {
        for (int s = 0; s < v.size(); ++s) {
            std::size_t count = 1;
            for (int i = 0; i < v.arity(s); ++i)
                count *= n;
            offset_.push_back(total_);
            total_ += count;
        }
    }

    std::size_t slots() const noexcept { return total_; }

    Structure decode(std::uint64_t mask) const
    {
        std::vector<Relation> rels(vocab_.size());
        for (int s = 0; s < vocab_.size(); ++s)
            for (std::size_t i = 0; i < count(s); ++i)
                if ((mask >> (offset_[s] + i)) & 1u)
                    rels[s].push_back(tuple(s, i));
        return make_structure(vocab_, n_, std::move(rels));
    }

    /// Image of every slot under the element permutation `perm`.
    std::vector<int> permute_slots(const std::vector<int> & perm) const
    {
        std::vector<int> out(total_);
        for (int s = 0; s < vocab_.size(); ++s)
            for (std::size_t i = 0; i < count(s); ++i) {
                Tuple t = tuple(s, i);
                std::size_t j = 0;
                for (int x : t)
                    j = j * n_ + perm[x];
                out[offset_[s] + i] = static_cast<int>(offset_[s] + j);
            }
        return out;
    }

private:
    std::size_t count(int s) const
    {
        std::size_t c = 1;
        for (int i = 0; i < vocab_.arity(s); ++i)
            c *= n_;
        return c;
    }

    Tuple tuple(int s, std::size_t i) const
    {
        Tuple t(vocab_.arity(s));
        for (int j = vocab_.arity(s) - 1; j >= 0; --j) {
            t[j] = static_cast<int>(i % n_);
            i /= n_;
        }
        return t;
    }

    Vocabulary vocab_;
    int n_;
    std::vector<std::size_t> offset_;
    std::size_t total_ = 0;
};

inline std::uint64_t apply(const std::vector<int> & slot_perm, std::uint64_t mask)
{
    std::uint64_t out = 0;
    for (std::size_t i = 0; i < slot_perm.size(); ++i)
        if ((mask >> i) & 1u)
            out |= std::uint64_t{1} << slot_perm[i];
    return out;
}

/// Permutations of 0..n-1; with `fix_zero` only those fixing element 0.
inline std::vector<std::vector<int>> permutations(int n, bool fix_zero = false)
{
    std::vector<std::vector<int>> out;
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    do
        if (!fix_zero || p[0] == 0)
            out.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    return out;
}

namespace detail {

inline std::vector<std::uint64_t> canonical_masks(const SlotLayout & layout, int n, bool fix_zero,
    const std::function<bool(std::uint64_t)> & keep)
{
    std::vector<std::vector<int>> slot_perms;
    for (const auto & p : permutations(n, fix_zero))
        slot_perms.push_back(layout.permute_slots(p));
    std::vector<std::uint64_t> out;
    const std::uint64_t limit = std::uint64_t{1} << layout.slots();
    for (std::uint64_t m = 0; m < limit; ++m) {
        if (!keep(m))
            continue;
        bool minimal = true;
        for (const auto & sp : slot_perms)
            if (apply(sp, m) < m) {
                minimal = false;
                break;
            }
        if (minimal)
            out.push_back(m);
    }
    return out;
}

} // namespace detail

/// One representative of every isomorphism class of σ-structures with at
/// most `max_size` elements (including the empty structure when
/// `include_empty`).
inline std::vector<Structure> structures_up_to_iso(const Vocabulary & v, int max_size, bool include_empty = true)
{
    std::vector<Structure> out;
    for (int n = include_empty ? 0 : 1; n <= max_size; ++n) {
        SlotLayout layout(v, n);
        for (std::uint64_t m : detail::canonical_masks(layout, n, false, [](std::uint64_t) { return true; }))
            out.push_back(layout.decode(m));
    }
    return out;
}

/// Representatives of the pointed structures with 1..max_size elements up
/// to point-preserving isomorphism; the point is always element 0.
inline std::vector<PointedStructure> pointed_up_to_iso(const Vocabulary & v, int max_size)
{
    std::vector<PointedStructure> out;
    for (int n = 1; n <= max_size; ++n) {
        SlotLayout layout(v, n);
        for (std::uint64_t m : detail::canonical_masks(layout, n, true, [](std::uint64_t) { return true; }))
            out.push_back(PointedStructure{layout.decode(m), 0});
    }
    return out;
}

/// Simple undirected graphs (symmetric, loop-free) up to isomorphism.
inline std::vector<Structure> simple_graphs(int max_size, bool connected_only, bool include_empty = false)
{
    std::vector<Structure> out;
    for (int n = include_empty ? 0 : 1; n <= max_size; ++n) {
        SlotLayout layout(graph_vocab(), n);
        auto simple = [n](std::uint64_t m) {
            for (int a = 0; a < n; ++a) {
                if ((m >> (a * n + a)) & 1u)
                    return false;
                for (int b = 0; b < n; ++b)
                    if (((m >> (a * n + b)) & 1u) != ((m >> (b * n + a)) & 1u))
                        return false;
            }
            return true;
        };
        for (std::uint64_t m : detail::canonical_masks(layout, n, false, simple)) {
            Structure s = layout.decode(m);
            if (!connected_only || gaifman_components(s).size() == 1)
                out.push_back(std::move(s));
        }
    }
    return out;
}

/// Every parent array on n elements that describes a forest.
inline std::vector<std::vector<int>> forest_shapes(int n)
{
    std::vector<std::vector<int>> out;
    std::vector<int> parent(n, -1);
    std::function<void(int)> rec = [&](int v) {
        if (v == n) {
            if (arboreal::detail::parent_is_acyclic(parent))
                out.push_back(parent);
            return;
        }
        for (int p = -1; p < n; ++p) {
            if (p == v)
                continue;
            parent[v] = p;
            rec(v + 1);
        }
    };
    rec(0);
    return out;
}

/// Which ordered pairs of a forest may carry a tuple of the binary symbol.
enum class Placement {
    comparable, ///< any comparable pair, loops included (the (E) condition)
    covering,   ///< only parent → child pairs
};

/// Valid forest objects over {E/2} with 1..max_size elements, one per
/// isomorphism class of (order, relation).
inline std::vector<ForestStructure> forest_objects(int max_size, Tag tag, int bound, Placement placement)
{
    std::vector<ForestStructure> out;
    for (int n = 1; n <= max_size; ++n) {
        const auto perms = permutations(n);
        std::set<std::pair<std::vector<int>, std::uint64_t>> seen;
        for (const auto & parent : forest_shapes(n)) {
            ForestStructure shape{empty_structure(graph_vocab(), n), parent, {}, bound, tag};
            ForestIndex idx(shape);
            if (tag != Tag::R && idx.max_height() > bound)
                continue;
            std::vector<int> slots;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    const bool ok = placement == Placement::comparable ? idx.comparable(a, b) : parent[b] == a;
                    if (ok)
                        slots.push_back(a * n + b);
                }
            for (std::uint64_t sub = 0; sub < (std::uint64_t{1} << slots.size()); ++sub) {
                std::uint64_t mask = 0;
                for (std::size_t i = 0; i < slots.size(); ++i)
                    if ((sub >> i) & 1u)
                        mask |= std::uint64_t{1} << slots[i];
                std::pair<std::vector<int>, std::uint64_t> best{parent, mask};
                for (const auto & p : perms) {
                    std::vector<int> pp(n);
                    for (int v = 0; v < n; ++v)
                        pp[p[v]] = parent[v] < 0 ? -1 : p[parent[v]];
                    std::uint64_t pm = 0;
                    for (int a = 0; a < n; ++a)
                        for (int b = 0; b < n; ++b)
                            if ((mask >> (a * n + b)) & 1u)
                                pm |= std::uint64_t{1} << (p[a] * n + p[b]);
                    best = std::min(best, std::pair{pp, pm});
                }
                if (!seen.insert(best).second)
                    continue;
                ForestStructure x{SlotLayout(graph_vocab(), n).decode(best.second), best.first, {}, bound, tag};
                if (validate_object(x).ok())
                    out.push_back(std::move(x));
            }
        }
    }
    return out;
}

/// Every total map from an n-element set to an m-element set.
template <typename Visit>
void for_each_map(int n, int m, Visit visit)
{
    if (n > 0 && m == 0)
        return;
    ElementMap f(n, 0);
    while (true) {
        visit(f);
        int i = 0;
        while (i < n && ++f[i] == m)
            f[i++] = 0;
        if (i == n)
            return;
    }
}

/// A random σ-structure in which every possible tuple is present with
/// probability `density`.
inline Structure random_structure(const Vocabulary & v, int n, double density, std::mt19937_64 & rng)
{
    SlotLayout layout(v, n);
    std::bernoulli_distribution coin(density);
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < layout.slots(); ++i)
        if (coin(rng))
            mask |= std::uint64_t{1} << i;
    return layout.decode(mask);
}

/// Adds a copy of `state` with the same labels and outgoing transitions and
/// redirects a random subset of its incoming transitions to the copy. The
/// result is bisimilar to the input at every state.
inline PointedStructure split_state(const PointedStructure & p, int state, std::mt19937_64 & rng)
{
    const Structure & a = p.base;
    const int copy = a.size;
    std::bernoulli_distribution coin(0.5);
    std::vector<Relation> rels(a.vocab.size());
    for (int s = 0; s < a.vocab.size(); ++s)
        for (const auto & t : a.relations[s]) {
            if (t.size() == 1) {
                rels[s].push_back(t);
                if (t[0] == state)
                    rels[s].push_back({copy});
                continue;
            }
            Tuple u = t;
            if (u[1] == state && coin(rng))
                u[1] = copy;
            rels[s].push_back(u);
            if (t[0] == state)
                rels[s].push_back({copy, u[1]});
        }
    return PointedStructure{make_structure(a.vocab, a.size + 1, std::move(rels)), p.point};
}

/// Toggles one random tuple of one random symbol.
inline Structure flip_tuple(const Structure & a, std::mt19937_64 & rng)
{
    SlotLayout layout(a.vocab, a.size);
    std::uniform_int_distribution<std::size_t> pick(0, layout.slots() - 1);
    const std::size_t target = pick(rng);
    std::vector<Relation> rels = a.relations;
    // Locate the symbol and tuple of the chosen slot by decoding a single bit.
    Structure single = layout.decode(std::uint64_t{1} << target);
    for (int s = 0; s < a.vocab.size(); ++s)
        for (const auto & t : single.relations[s]) {
            auto it = std::find(rels[s].begin(), rels[s].end(), t);
            if (it == rels[s].end())
                rels[s].push_back(t);
            else
                rels[s].erase(it);
        }
    return make_structure(a.vocab, a.size, std::move(rels));
}

/// Every arboreal morphism X → Y, by backtracking along the forest order:
/// roots go to roots and children to children of the parent's image.
inline std::vector<ElementMap> arboreal_morphisms(const ForestStructure & x, const ForestStructure & y)
{
    ForestIndex ix(x), iy(y);
    std::vector<ElementMap> out;
    ElementMap f(x.size(), -1);
    const auto & order = ix.order();
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == order.size()) {
            if (is_homomorphism(f, x.base, y.base))
                out.push_back(f);
            return;
        }
        const int v = order[i];
        const auto & options = x.parent[v] < 0 ? iy.roots() : iy.children(f[x.parent[v]]);
        for (int w : options) {
            f[v] = w;
            rec(i + 1);
        }
        f[v] = -1;
    };
    rec(0);
    return out;
}

/// All down-closed subsets of X, by bitmask.
inline std::vector<EmbeddingRep> down_sets(const ForestStructure & x)
{
    std::vector<EmbeddingRep> out;
    for (unsigned mask = 0; mask < (1u << x.size()); ++mask) {
        EmbeddingRep d;
        for (int v = 0; v < x.size(); ++v)
            if ((mask >> v) & 1u)
                d.members.push_back(v);
        if (is_down_closed(x, d))
            out.push_back(std::move(d));
    }
    return out;
}

} // namespace support
