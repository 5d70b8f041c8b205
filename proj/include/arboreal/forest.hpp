#pragma once

// Forest-ordered structures and the concrete arboreal categories R, R^E_k,
// R^P_k and R^M_k: validation, arboreal morphisms, path trees, pathwise
// embeddings, open maps, synchronous products and the transport of
// down-closed subsets along morphisms.

#include <arboreal/errors.hpp>
#include <arboreal/structure.hpp>

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace arboreal {

enum class Tag { R, RE, RP, RM };

inline std::string_view to_string(Tag t)
{
    switch (t) {
    case Tag::R: return "R";
    case Tag::RE: return "RE";
    case Tag::RP: return "RP";
    case Tag::RM: return "RM";
    }
    return "?";
}

inline std::optional<Tag> parse_tag(std::string_view s)
{
    if (s == "R")
        return Tag::R;
    if (s == "RE")
        return Tag::RE;
    if (s == "RP")
        return Tag::RP;
    if (s == "RM")
        return Tag::RM;
    return std::nullopt;
}

struct ForestStructure {
    Structure base;
    std::vector<int> parent; ///< -1 marks a root
    std::vector<int> pebble; ///< empty unless tag is RP; values in 1..k
    /// Resource index k. Bounds heights for RE and RM and the pebble range
    /// for RP; unbounded for plain R.
    std::optional<int> bound;
    Tag tag = Tag::R;

    int size() const noexcept { return base.size; }

    friend bool operator==(const ForestStructure &, const ForestStructure &) = default;
};

/// Derived data of a (valid, acyclic) forest: heights, children, roots,
/// ancestor tables. Heights count elements, so roots have height 1.
class ForestIndex {
public:
    explicit ForestIndex(const ForestStructure & x) :
        height_(x.size(), 0), children_(x.size())
    {
        const int n = x.size();
        for (int v = 0; v < n; ++v) {
            if (x.parent[v] == -1)
                roots_.push_back(v);
            else
                children_[x.parent[v]].push_back(v);
        }
        std::vector<int> stack(roots_.rbegin(), roots_.rend());
        for (int r : roots_)
            height_[r] = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            order_.push_back(v);
            for (int c : children_[v]) {
                height_[c] = height_[v] + 1;
                stack.push_back(c);
            }
        }
        if (static_cast<int>(order_.size()) != n)
            throw precondition_failed("forest order contains a cycle");
        std::stable_sort(order_.begin(), order_.end(),
            [&](int a, int b) { return height_[a] < height_[b] || (height_[a] == height_[b] && a < b); });
        max_height_ = 0;
        for (int h : height_)
            max_height_ = std::max(max_height_, h);
        ancestors_.assign(n, {});
        for (int v : order_) {
            auto & a = ancestors_[v];
            if (x.parent[v] != -1)
                a = ancestors_[x.parent[v]];
            a.push_back(v);
        }
    }

    int height(int v) const { return height_[v]; }
    int max_height() const noexcept { return max_height_; }
    const std::vector<int> & children(int v) const { return children_[v]; }
    const std::vector<int> & roots() const noexcept { return roots_; }
    /// Elements sorted by (height, index); parents precede children.
    const std::vector<int> & order() const noexcept { return order_; }
    /// The chain ↓v listed from its root down to v.
    const std::vector<int> & chain(int v) const { return ancestors_[v]; }
    /// Ancestor-or-self of v at the given height (1-based).
    int ancestor_at(int v, int h) const { return ancestors_[v][h - 1]; }
    bool below_or_equal(int a, int b) const
    {
        return height_[a] <= height_[b] && ancestors_[b][height_[a] - 1] == a;
    }
    bool comparable(int a, int b) const { return below_or_equal(a, b) || below_or_equal(b, a); }

private:
    std::vector<int> height_;
    std::vector<std::vector<int>> children_;
    std::vector<int> roots_;
    std::vector<int> order_;
    std::vector<std::vector<int>> ancestors_;
    int max_height_ = 0;
};

namespace detail {

inline bool parent_is_acyclic(const std::vector<int> & parent)
{
    const int n = static_cast<int>(parent.size());
    std::vector<int> state(n, 0); // 0 unseen, 1 on path, 2 done
    for (int v = 0; v < n; ++v) {
        std::vector<int> path;
        int u = v;
        while (u != -1 && state[u] == 0) {
            state[u] = 1;
            path.push_back(u);
            u = parent[u];
        }
        if (u != -1 && state[u] == 1)
            return false;
        for (int p : path)
            state[p] = 2;
    }
    return true;
}

} // namespace detail

/// Checks the tag-specific conditions (E), (P), (M), height bound and root
/// count. Pebble values outside 1..k are a precondition failure.
inline Report validate_object(const ForestStructure & x)
{
    Report rep = validate_structure(x.base);
    if (!rep.ok())
        return rep;
    const int n = x.size();
    if (static_cast<int>(x.parent.size()) != n) {
        rep.add("parent list length differs from universe size");
        return rep;
    }
    for (int p : x.parent)
        if (p < -1 || p >= n) {
            rep.add("parent out of range");
            return rep;
        }
    if (!detail::parent_is_acyclic(x.parent)) {
        rep.add("parent relation contains a cycle");
        return rep;
    }
    if (x.tag != Tag::R && (!x.bound || *x.bound < 1)) {
        rep.add("tag " + std::string(to_string(x.tag)) + " requires a positive bound k");
        return rep;
    }
    if (!x.pebble.empty()) {
        if (x.tag != Tag::RP)
            rep.add("pebbling function on a forest not tagged RP");
        if (static_cast<int>(x.pebble.size()) != n)
            rep.add("(P): pebbling function is not total");
        for (int p : x.pebble)
            if (x.bound && (p < 1 || p > *x.bound))
                throw precondition_failed("pebble value outside 1.." + std::to_string(*x.bound));
    }
    if (!rep.ok())
        return rep;

    ForestIndex idx(x);
    if ((x.tag == Tag::RE || x.tag == Tag::RM) && idx.max_height() > *x.bound)
        rep.add("height " + std::to_string(idx.max_height()) + " exceeds bound " + std::to_string(*x.bound));

    if (x.tag == Tag::RE || x.tag == Tag::RP) {
        Graph g = gaifman_graph(x.base);
        bool reported = false;
        for (int a = 0; a < n && !reported; ++a)
            for (int b : g.adjacency[a])
                if (!idx.comparable(a, b)) {
                    rep.add("(E): adjacent elements " + x.base.element_name(a) + " and " + x.base.element_name(b)
                        + " are incomparable");
                    reported = true;
                    break;
                }
        if (x.tag == Tag::RP) {
            if (x.pebble.empty())
                rep.add("(P): pebbling function is missing");
            else
                for (int a = 0; a < n; ++a)
                    for (int b : g.adjacency[a]) {
                        if (!idx.below_or_equal(a, b) || a == b)
                            continue;
                        const auto & ch = idx.chain(b);
                        for (int h = idx.height(a) + 1; h <= idx.height(b); ++h)
                            if (x.pebble[ch[h - 1]] == x.pebble[a]) {
                                rep.add("(P): pebble " + std::to_string(x.pebble[a]) + " of "
                                    + x.base.element_name(a) + " reused below its neighbour "
                                    + x.base.element_name(b));
                                break;
                            }
                    }
        }
    }
    if (x.tag == Tag::RM) {
        if (n == 0)
            rep.add("(M): modal objects are non-empty");
        if (idx.roots().size() > 1)
            rep.add("(M): more than one root");
        for (int s = 0; s < x.base.vocab.size(); ++s)
            if (x.base.vocab.arity(s) > 2)
                rep.add("(M): symbol " + x.base.vocab.name(s) + " has arity above 2");
        std::map<std::pair<int, int>, int> labels;
        for (int s = 0; s < x.base.vocab.size(); ++s) {
            if (x.base.vocab.arity(s) != 2)
                continue;
            for (const auto & t : x.base.relations[s]) {
                if (x.parent[t[1]] != t[0])
                    rep.add("(M): " + x.base.vocab.name(s) + " relates " + x.base.element_name(t[0]) + " to "
                        + x.base.element_name(t[1]) + " outside the covering relation");
                ++labels[{t[0], t[1]}];
            }
        }
        for (int v = 0; v < n; ++v) {
            if (x.parent[v] == -1)
                continue;
            auto it = labels.find({x.parent[v], v});
            int count = it == labels.end() ? 0 : it->second;
            if (count != 1)
                rep.add("(M): covering pair " + x.base.element_name(x.parent[v]) + " < " + x.base.element_name(v)
                    + " carries " + std::to_string(count) + " transition relations");
        }
    }
    return rep;
}

namespace detail {

inline void require_compatible(const ForestStructure & x, const ForestStructure & y)
{
    if (x.tag != y.tag)
        throw precondition_failed("tag mismatch between forest structures");
    require_same_vocabulary(x.base, y.base);
}

} // namespace detail

inline bool check_arboreal_morphism(const ElementMap & f, const ForestStructure & x, const ForestStructure & y)
{
    detail::require_compatible(x, y);
    if (!is_homomorphism(f, x.base, y.base))
        return false;
    for (int v = 0; v < x.size(); ++v) {
        const int pv = x.parent[v];
        if (pv == -1) {
            if (y.parent[f[v]] != -1)
                return false;
        } else if (y.parent[f[v]] != f[pv]) {
            return false;
        }
        if (x.tag == Tag::RP && x.pebble[v] != y.pebble[f[v]])
            return false;
    }
    return true;
}

/// A path embedding into X, represented by its top element: the induced
/// chain ↓top. `top == -1` is the empty path.
struct PathRep {
    int top = -1;

    bool empty() const noexcept { return top < 0; }
    static PathRep empty_path() { return PathRep{-1}; }
    static PathRep at(int x) { return PathRep{x}; }

    friend auto operator<=>(const PathRep &, const PathRep &) = default;
};

struct PathTree {
    /// Root first when the empty path is present, then TopElem(x) by index.
    std::vector<PathRep> nodes;
    std::vector<int> parent; ///< node index of the cover predecessor, -1 at the root
    bool has_empty = true;
    int root = 0;

    int size() const noexcept { return static_cast<int>(nodes.size()); }
    int index_of(PathRep p) const { return has_empty ? p.top + 1 : p.top; }

    std::vector<int> children(int node) const
    {
        std::vector<int> c;
        for (int i = 0; i < size(); ++i)
            if (parent[i] == node)
                c.push_back(i);
        return c;
    }

    /// Number of elements of the path's domain.
    int height(int node) const
    {
        int h = has_empty ? -1 : 0;
        for (int i = node; i != -1; i = parent[i])
            ++h;
        return h;
    }
};

inline bool has_empty_path(Tag t) { return t != Tag::RM; }

inline PathTree path_tree(const ForestStructure & x)
{
    PathTree t;
    t.has_empty = has_empty_path(x.tag);
    if (t.has_empty) {
        t.nodes.push_back(PathRep::empty_path());
        t.parent.push_back(-1);
    }
    for (int v = 0; v < x.size(); ++v) {
        t.nodes.push_back(PathRep::at(v));
        if (x.parent[v] != -1)
            t.parent.push_back(t.index_of(PathRep::at(x.parent[v])));
        else
            t.parent.push_back(t.has_empty ? 0 : -1);
    }
    if (t.has_empty)
        t.root = 0;
    else
        for (int v = 0; v < x.size(); ++v)
            if (x.parent[v] == -1)
                t.root = v;
    return t;
}

/// Morphism part of the path functor, as a map between path-tree node indices.
inline std::vector<int> path_functor_map(const ElementMap & f, const ForestStructure & x, const ForestStructure & y)
{
    if (!check_arboreal_morphism(f, x, y))
        throw precondition_failed("path_functor_map: not an arboreal morphism");
    PathTree tx = path_tree(x), ty = path_tree(y);
    std::vector<int> out(tx.size());
    for (int i = 0; i < tx.size(); ++i) {
        PathRep p = tx.nodes[i];
        out[i] = p.empty() ? ty.root : ty.index_of(PathRep::at(f[p.top]));
    }
    return out;
}

/// Restriction of f to every chain ↓x preserves and reflects all relations.
inline bool is_pathwise_embedding(const ElementMap & f, const ForestStructure & x, const ForestStructure & y)
{
    if (!check_arboreal_morphism(f, x, y))
        throw precondition_failed("is_pathwise_embedding: not an arboreal morphism");
    ForestIndex ix(x), iy(y);
    Tuple pre;
    for (int v = 0; v < x.size(); ++v) {
        const int w = f[v];
        for (int s = 0; s < y.base.vocab.size(); ++s)
            for (const auto & t : y.base.relations[s]) {
                // tuples of Y lying on ↓w that contain w (lower ones are handled at their own tops)
                if (std::find(t.begin(), t.end(), w) == t.end())
                    continue;
                bool on_chain = std::all_of(t.begin(), t.end(), [&](int e) { return iy.below_or_equal(e, w); });
                if (!on_chain)
                    continue;
                pre.resize(t.size());
                for (std::size_t i = 0; i < t.size(); ++i)
                    pre[i] = ix.ancestor_at(v, iy.height(t[i]));
                if (!x.base.holds(s, pre))
                    return false;
            }
    }
    return true;
}

enum class OpenCheck { open, not_open, not_pathwise_embedding };

/// Open iff the induced path-tree map sends every up-set ↑m onto ↑Pf(m).
inline OpenCheck classify_open(const ElementMap & f, const ForestStructure & x, const ForestStructure & y)
{
    if (!is_pathwise_embedding(f, x, y))
        return OpenCheck::not_pathwise_embedding;
    PathTree tx = path_tree(x), ty = path_tree(y);
    std::vector<int> pf = path_functor_map(f, x, y);
    auto up_set = [](const PathTree & t, int node) {
        std::vector<char> in(t.size(), 0);
        for (int i = 0; i < t.size(); ++i)
            for (int j = i; j != -1; j = t.parent[j])
                if (j == node) {
                    in[i] = 1;
                    break;
                }
        return in;
    };
    for (int m = 0; m < tx.size(); ++m) {
        auto up_x = up_set(tx, m);
        auto up_y = up_set(ty, pf[m]);
        std::vector<char> image(ty.size(), 0);
        for (int i = 0; i < tx.size(); ++i)
            if (up_x[i])
                image[pf[i]] = 1;
        if (image != up_y)
            return OpenCheck::not_open;
    }
    return OpenCheck::open;
}

inline bool is_open(const ElementMap & f, const ForestStructure & x, const ForestStructure & y)
{
    switch (classify_open(f, x, y)) {
    case OpenCheck::open: return true;
    case OpenCheck::not_open: return false;
    case OpenCheck::not_pathwise_embedding: break;
    }
    throw precondition_failed("is_open: not a pathwise embedding");
}

struct ForestProduct {
    ForestStructure structure;
    ElementMap left;
    ElementMap right;
    std::vector<std::pair<int, int>> pairs;
};

/// Synchronous product: equal-height pairs (for RP, pairs whose chains carry
/// equal pebbles at every level), componentwise order and relations. For RM
/// only pairs reachable from the root pair along commonly-labelled
/// transitions are kept.
inline ForestProduct synchronous_product(const ForestStructure & x, const ForestStructure & y)
{
    detail::require_compatible(x, y);
    if (x.bound != y.bound)
        throw precondition_failed("synchronous_product: bound mismatch");
    ForestIndex ix(x), iy(y);
    const int nx = x.size(), ny = y.size();
    std::vector<int> slot(static_cast<std::size_t>(nx) * ny, -1);
    std::vector<std::pair<int, int>> pairs;

    // A pair belongs to the product when its whole chain pairs up level by
    // level; for RP the pebbles must agree at every level.
    auto admissible = [&](int a, int b) { return x.tag != Tag::RP || x.pebble[a] == y.pebble[b]; };
    if (x.tag == Tag::RM) {
        if (nx == 0 || ny == 0)
            throw precondition_failed("synchronous_product: modal objects are non-empty");
        const auto & vocab = x.base.vocab;
        std::vector<std::pair<int, int>> frontier{{ix.roots()[0], iy.roots()[0]}};
        std::vector<std::pair<int, int>> kept;
        while (!frontier.empty()) {
            auto [a, b] = frontier.back();
            frontier.pop_back();
            kept.emplace_back(a, b);
            for (int ca : ix.children(a))
                for (int cb : iy.children(b)) {
                    bool shared = false;
                    for (int s = 0; s < vocab.size() && !shared; ++s)
                        shared = vocab.arity(s) == 2 && x.base.holds(s, {a, ca}) && y.base.holds(s, {b, cb});
                    if (shared)
                        frontier.emplace_back(ca, cb);
                }
        }
        std::sort(kept.begin(), kept.end());
        pairs = std::move(kept);
    } else {
        std::vector<std::pair<int, int>> frontier;
        for (int a : ix.roots())
            for (int b : iy.roots())
                if (admissible(a, b))
                    frontier.emplace_back(a, b);
        while (!frontier.empty()) {
            auto [a, b] = frontier.back();
            frontier.pop_back();
            pairs.emplace_back(a, b);
            for (int ca : ix.children(a))
                for (int cb : iy.children(b))
                    if (admissible(ca, cb))
                        frontier.emplace_back(ca, cb);
        }
        std::sort(pairs.begin(), pairs.end());
    }
    for (std::size_t i = 0; i < pairs.size(); ++i)
        slot[static_cast<std::size_t>(pairs[i].first) * ny + pairs[i].second] = static_cast<int>(i);

    const int n = static_cast<int>(pairs.size());
    std::vector<Relation> rels(x.base.vocab.size());
    for (int s = 0; s < x.base.vocab.size(); ++s)
        for (const auto & t : x.base.relations[s])
            for (const auto & u : y.base.relations[s]) {
                Tuple p(t.size());
                bool ok = true;
                for (std::size_t i = 0; i < t.size() && ok; ++i) {
                    p[i] = slot[static_cast<std::size_t>(t[i]) * ny + u[i]];
                    ok = p[i] != -1;
                }
                if (ok)
                    rels[s].push_back(std::move(p));
            }
    std::vector<std::string> names;
    std::vector<int> parent(n, -1), pebble;
    ElementMap left(n), right(n);
    for (int i = 0; i < n; ++i) {
        auto [a, b] = pairs[i];
        names.push_back("(" + x.base.element_name(a) + "," + y.base.element_name(b) + ")");
        left[i] = a;
        right[i] = b;
        if (x.parent[a] != -1)
            parent[i] = slot[static_cast<std::size_t>(x.parent[a]) * ny + y.parent[b]];
        if (x.tag == Tag::RP)
            pebble.push_back(x.pebble[a]);
    }
    ForestStructure p{make_structure(x.base.vocab, n, std::move(rels), std::move(names)), std::move(parent),
        std::move(pebble), x.bound, x.tag};
    return ForestProduct{std::move(p), std::move(left), std::move(right), std::move(pairs)};
}

/// A down-closed subset D of X, standing for the embedding of the induced
/// sub-forest on D. Members are sorted.
struct EmbeddingRep {
    std::vector<int> members;

    bool contains(int v) const { return std::binary_search(members.begin(), members.end(), v); }
    bool subset_of(const EmbeddingRep & o) const
    {
        return std::includes(o.members.begin(), o.members.end(), members.begin(), members.end());
    }

    friend bool operator==(const EmbeddingRep &, const EmbeddingRep &) = default;
};

inline bool is_down_closed(const ForestStructure & x, const EmbeddingRep & d)
{
    return std::all_of(d.members.begin(), d.members.end(),
        [&](int v) { return x.parent[v] == -1 || d.contains(x.parent[v]); });
}

/// Supremum of a set of paths: the union of their down-sets.
inline EmbeddingRep sup_paths(const ForestStructure & x, const std::vector<PathRep> & paths)
{
    std::vector<char> in(x.size(), 0);
    for (PathRep p : paths)
        for (int v = p.top; v != -1; v = x.parent[v])
            in[v] = 1;
    if (x.tag == Tag::RM)
        for (int v = 0; v < x.size(); ++v)
            if (x.parent[v] == -1)
                in[v] = 1;
    EmbeddingRep d;
    for (int v = 0; v < x.size(); ++v)
        if (in[v])
            d.members.push_back(v);
    return d;
}

enum class Transport { image, pullback };

/// ∃_f (image) and f* (preimage, for surjective f) on down-closed subsets.
inline EmbeddingRep transport_embedding(const ElementMap & f, const ForestStructure & x, const ForestStructure & y,
    const EmbeddingRep & m, Transport direction)
{
    if (!check_arboreal_morphism(f, x, y))
        throw precondition_failed("transport_embedding: not an arboreal morphism");
    EmbeddingRep out;
    if (direction == Transport::image) {
        for (int v : m.members)
            out.members.push_back(f[v]);
        std::sort(out.members.begin(), out.members.end());
        out.members.erase(std::unique(out.members.begin(), out.members.end()), out.members.end());
        return out;
    }
    if (!is_surjective(f, y.size()))
        throw precondition_failed("transport_embedding: pullback requires a surjective morphism");
    for (int v = 0; v < x.size(); ++v)
        if (m.contains(f[v]))
            out.members.push_back(v);
    return out;
}

struct InducedForest {
    ForestStructure forest;
    ElementMap inclusion; ///< element of the sub-forest ↦ element of X
};

/// Induced sub-forest on a down-closed subset.
inline InducedForest induced_forest(const ForestStructure & x, const EmbeddingRep & d)
{
    if (!is_down_closed(x, d))
        throw precondition_failed("induced_forest: subset is not down-closed");
    std::vector<int> slot(x.size(), -1);
    for (std::size_t i = 0; i < d.members.size(); ++i)
        slot[d.members[i]] = static_cast<int>(i);
    std::vector<Relation> rels(x.base.vocab.size());
    for (int s = 0; s < x.base.vocab.size(); ++s)
        for (const auto & t : x.base.relations[s]) {
            Tuple u(t.size());
            bool in = true;
            for (std::size_t i = 0; i < t.size() && in; ++i) {
                u[i] = slot[t[i]];
                in = u[i] != -1;
            }
            if (in)
                rels[s].push_back(std::move(u));
        }
    std::vector<std::string> names;
    std::vector<int> parent, pebble;
    for (int v : d.members) {
        names.push_back(x.base.element_name(v));
        parent.push_back(x.parent[v] == -1 ? -1 : slot[x.parent[v]]);
        if (!x.pebble.empty())
            pebble.push_back(x.pebble[v]);
    }
    ForestStructure f{make_structure(x.base.vocab, static_cast<int>(d.members.size()), std::move(rels),
                          std::move(names)),
        std::move(parent), std::move(pebble), x.bound, x.tag};
    return InducedForest{std::move(f), d.members};
}

/// Per-element chain signatures: for every x, the sorted encodings of the
/// tuples lying on ↓x whose topmost entry is x, each entry replaced by its
/// height (plus the pebble of x for RP). Two equal-height chains are
/// isomorphic under the height-aligned bijection iff their signatures
/// agree at every level; inclusion at every level means the bijection is a
/// homomorphism.
class ChainSignatures {
public:
    // code = heights (6 bits each) << 8 | (symbol + 1); pebbles use symbol field 0
    static constexpr int height_bits = 6;
    static constexpr int symbol_bits = 8;

    explicit ChainSignatures(const ForestStructure & x) : index_(x), sig_(x.size())
    {
        const auto & vocab = x.base.vocab;
        if (vocab.size() >= (1 << symbol_bits) - 1 || index_.max_height() >= (1 << height_bits)
            || symbol_bits + height_bits * vocab.max_arity() > 64)
            throw unsupported_query("chain signatures: vocabulary or height too large to encode");
        for (int s = 0; s < vocab.size(); ++s)
            for (const auto & t : x.base.relations[s]) {
                int top = t[0];
                for (int e : t)
                    if (index_.height(e) > index_.height(top))
                        top = e;
                bool chain = std::all_of(t.begin(), t.end(), [&](int e) { return index_.below_or_equal(e, top); });
                if (!chain)
                    continue;
                std::uint64_t code = 0;
                for (int e : t)
                    code = (code << height_bits) | static_cast<std::uint64_t>(index_.height(e));
                sig_[top].push_back((code << symbol_bits) | static_cast<std::uint64_t>(s + 1));
            }
        if (x.tag == Tag::RP)
            for (int v = 0; v < x.size(); ++v)
                sig_[v].push_back(static_cast<std::uint64_t>(x.pebble[v]) << symbol_bits);
        for (auto & s : sig_)
            std::sort(s.begin(), s.end());
    }

    const ForestIndex & index() const noexcept { return index_; }
    const std::vector<std::uint64_t> & operator[](int v) const { return sig_[v]; }

private:
    ForestIndex index_;
    std::vector<std::vector<std::uint64_t>> sig_;
};

/// Order-, pebble- and relation-preserving bijection between two forests.
/// Subtree types (signature plus multiset of child types) prune the search.
inline std::optional<ElementMap> forest_iso_search(const ForestStructure & x, const ForestStructure & y)
{
    detail::require_compatible(x, y);
    if (x.size() != y.size())
        return std::nullopt;
    for (int s = 0; s < x.base.vocab.size(); ++s)
        if (x.base.relations[s].size() != y.base.relations[s].size())
            return std::nullopt;
    ChainSignatures sx(x), sy(y);
    std::map<std::pair<std::vector<std::uint64_t>, std::vector<int>>, int> interner;
    auto types = [&](const ForestStructure & f, const ChainSignatures & sig) {
        std::vector<int> type(f.size(), -1);
        const auto & order = sig.index().order();
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            std::vector<int> kids;
            for (int c : sig.index().children(*it))
                kids.push_back(type[c]);
            std::sort(kids.begin(), kids.end());
            auto key = std::make_pair(sig[*it], std::move(kids));
            auto found = interner.find(key);
            if (found == interner.end())
                found = interner.emplace(std::move(key), static_cast<int>(interner.size())).first;
            type[*it] = found->second;
        }
        return type;
    };
    std::vector<int> tx = types(x, sx), ty = types(y, sy);
    auto root_types = [](const ChainSignatures & s, const std::vector<int> & t) {
        std::vector<int> r;
        for (int v : s.index().roots())
            r.push_back(t[v]);
        std::sort(r.begin(), r.end());
        return r;
    };
    if (root_types(sx, tx) != root_types(sy, ty))
        return std::nullopt;

    // Match children with equal types; backtrack over equal-type siblings
    // only if a final verification fails (relations off the chains).
    const auto & order = sx.index().order();
    ElementMap f(x.size(), -1);
    std::vector<char> used(y.size(), 0);
    auto verify = [&] {
        if (!check_arboreal_morphism(f, x, y))
            return false;
        return is_embedding(f, x.base, y.base);
    };
    std::function<bool(std::size_t)> assign = [&](std::size_t i) -> bool {
        if (i == order.size())
            return verify();
        const int v = order[i];
        const auto & cands = x.parent[v] == -1 ? sy.index().roots() : sy.index().children(f[x.parent[v]]);
        for (int w : cands) {
            if (used[w] || ty[w] != tx[v])
                continue;
            used[w] = 1;
            f[v] = w;
            if (assign(i + 1))
                return true;
            used[w] = 0;
            f[v] = -1;
        }
        return false;
    };
    // Types fix the shape; when every tuple lies on a chain the first
    // type-respecting assignment already verifies.
    if (!assign(0))
        return std::nullopt;
    return f;
}

/// Graphviz rendering of the forest order; relations are listed in labels.
inline std::string to_dot(const ForestStructure & x, std::string_view name = "forest")
{
    std::ostringstream out;
    out << "digraph \"" << name << "\" {\n";
    for (int v = 0; v < x.size(); ++v) {
        out << "  n" << v << " [label=\"" << x.base.element_name(v);
        if (!x.pebble.empty())
            out << " p" << x.pebble[v];
        out << "\"];\n";
    }
    for (int v = 0; v < x.size(); ++v)
        if (x.parent[v] != -1)
            out << "  n" << x.parent[v] << " -> n" << v << ";\n";
    out << "}\n";
    return out.str();
}

inline std::string to_dot(const PathTree & t, const ForestStructure & x, std::string_view name = "paths")
{
    std::ostringstream out;
    out << "digraph \"" << name << "\" {\n";
    ForestIndex idx(x);
    for (int i = 0; i < t.size(); ++i) {
        out << "  p" << i << " [label=\"";
        if (t.nodes[i].empty())
            out << "[]";
        else {
            out << "[";
            const auto & ch = idx.chain(t.nodes[i].top);
            for (std::size_t j = 0; j < ch.size(); ++j) {
                out << (j ? "," : "") << x.base.element_name(ch[j]);
                if (!x.pebble.empty())
                    out << " p" << x.pebble[ch[j]];
            }
            out << "]";
        }
        out << "\"];\n";
    }
    for (int i = 0; i < t.size(); ++i)
        if (t.parent[i] != -1)
            out << "  p" << t.parent[i] << " -> p" << i << ";\n";
    out << "}\n";
    return out.str();
}

} // namespace arboreal
