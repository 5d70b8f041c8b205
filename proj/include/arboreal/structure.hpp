#pragma once

// Finite relational structures over a purely relational vocabulary, their
// morphisms, and the basic constructions on them (image factorisation,
// Gaifman graph, products, disjoint unions, the equality expansion and its
// quotient, and backtracking search for homomorphisms and isomorphisms).

#include <arboreal/errors.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace arboreal {

struct Symbol {
    std::string name;
    int arity = 0;

    friend bool operator==(const Symbol &, const Symbol &) = default;
};

class Vocabulary {
public:
    Vocabulary() = default;
    Vocabulary(std::initializer_list<Symbol> symbols) : symbols_(symbols) {}
    explicit Vocabulary(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {}

    const std::vector<Symbol> & symbols() const noexcept { return symbols_; }
    int size() const noexcept { return static_cast<int>(symbols_.size()); }
    const Symbol & operator[](int i) const { return symbols_.at(i); }
    int arity(int i) const { return symbols_.at(i).arity; }
    const std::string & name(int i) const { return symbols_.at(i).name; }

    /// Index of the symbol called `name`, or -1.
    int find(std::string_view name) const
    {
        for (int i = 0; i < size(); ++i)
            if (symbols_[i].name == name)
                return i;
        return -1;
    }

    int max_arity() const
    {
        int m = 0;
        for (const auto & s : symbols_)
            m = std::max(m, s.arity);
        return m;
    }

    Vocabulary with(Symbol s) const
    {
        auto copy = symbols_;
        copy.push_back(std::move(s));
        return Vocabulary{std::move(copy)};
    }

    friend bool operator==(const Vocabulary &, const Vocabulary &) = default;

private:
    std::vector<Symbol> symbols_;
};

using Tuple = std::vector<int>;
/// Sorted, duplicate-free list of tuples.
using Relation = std::vector<Tuple>;
/// A total function on a universe 0..n-1, stored by value.
using ElementMap = std::vector<int>;

struct Structure {
    Vocabulary vocab;
    int size = 0;
    /// Optional display names; either empty or exactly `size` entries.
    std::vector<std::string> names;
    /// One relation per vocabulary symbol, in vocabulary order.
    std::vector<Relation> relations;

    const Relation & relation(int sym) const { return relations.at(sym); }

    bool holds(int sym, std::span<const int> t) const
    {
        const auto & r = relations.at(sym);
        auto less = [](const Tuple & a, std::span<const int> b) {
            return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
        };
        auto it = std::lower_bound(r.begin(), r.end(), t, less);
        return it != r.end() && std::equal(it->begin(), it->end(), t.begin(), t.end());
    }

    bool holds(int sym, std::initializer_list<int> t) const
    {
        return holds(sym, std::span<const int>(t.begin(), t.size()));
    }

    std::string element_name(int e) const
    {
        if (e >= 0 && e < static_cast<int>(names.size()))
            return names[e];
        return std::to_string(e);
    }

    std::size_t tuple_count() const
    {
        std::size_t n = 0;
        for (const auto & r : relations)
            n += r.size();
        return n;
    }

    friend bool operator==(const Structure &, const Structure &) = default;
};

inline void canonicalize(Relation & r)
{
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
}

/// Builds a structure with relations sorted and deduplicated.
inline Structure make_structure(Vocabulary vocab, int size, std::vector<Relation> relations,
    std::vector<std::string> names = {})
{
    relations.resize(vocab.size());
    for (auto & r : relations)
        canonicalize(r);
    return Structure{std::move(vocab), size, std::move(names), std::move(relations)};
}

inline Structure empty_structure(Vocabulary vocab, int size = 0)
{
    return make_structure(std::move(vocab), size, {});
}

struct PointedStructure {
    Structure base;
    int point = 0;
};

struct Morphism {
    Structure source;
    Structure target;
    ElementMap map;
};

enum class MorphismKind { hom, embedding };

/// Violations are data: an empty list means the object is valid.
struct Report {
    std::vector<std::string> violations;

    bool ok() const noexcept { return violations.empty(); }
    void add(std::string v) { violations.push_back(std::move(v)); }
    void append(const Report & other)
    {
        violations.insert(violations.end(), other.violations.begin(), other.violations.end());
    }
};

inline Report validate_structure(const Structure & s)
{
    Report rep;
    for (int i = 0; i < s.vocab.size(); ++i) {
        if (s.vocab.arity(i) < 1)
            rep.add("symbol " + s.vocab.name(i) + ": arity must be positive");
        for (int j = 0; j < i; ++j)
            if (s.vocab.name(i) == s.vocab.name(j))
                rep.add("duplicate symbol " + s.vocab.name(i));
    }
    if (s.size < 0)
        rep.add("negative universe size");
    if (!s.names.empty() && static_cast<int>(s.names.size()) != s.size)
        rep.add("name list length differs from universe size");
    if (static_cast<int>(s.relations.size()) != s.vocab.size()) {
        rep.add("relation count differs from vocabulary size");
        return rep;
    }
    for (int i = 0; i < s.vocab.size(); ++i) {
        const auto & r = s.relations[i];
        for (const auto & t : r) {
            if (static_cast<int>(t.size()) != s.vocab.arity(i))
                rep.add("symbol " + s.vocab.name(i) + ": tuple length differs from arity");
            for (int e : t)
                if (e < 0 || e >= s.size) {
                    rep.add("symbol " + s.vocab.name(i) + ": entry out of range");
                    break;
                }
        }
        if (!std::is_sorted(r.begin(), r.end()) || std::adjacent_find(r.begin(), r.end()) != r.end())
            rep.add("symbol " + s.vocab.name(i) + ": tuples not in canonical order");
    }
    return rep;
}

inline void require_same_vocabulary(const Structure & a, const Structure & b)
{
    if (!(a.vocab == b.vocab))
        throw vocabulary_mismatch("structures are over different vocabularies");
}

/// Dense membership table for repeated lookups. Holds a pointer to the
/// structure it was built from; the structure must outlive the table.
class RelationIndex {
public:
    explicit RelationIndex(const Structure & s) : s_(&s)
    {
        tables_.resize(s.vocab.size());
        for (int i = 0; i < s.vocab.size(); ++i) {
            std::uint64_t cells = 1;
            bool dense = true;
            for (int a = 0; a < s.vocab.arity(i); ++a) {
                cells *= static_cast<std::uint64_t>(std::max(1, s.size));
                if (cells > (std::uint64_t{1} << 24)) {
                    dense = false;
                    break;
                }
            }
            if (!dense)
                continue;
            auto & tab = tables_[i];
            tab.assign(cells, 0);
            for (const auto & t : s.relations[i])
                tab[offset(t)] = 1;
        }
    }

    bool holds(int sym, std::span<const int> t) const
    {
        const auto & tab = tables_[sym];
        if (tab.empty())
            return s_->holds(sym, t);
        return tab[offset(t)] != 0;
    }

    const Structure & structure() const noexcept { return *s_; }

private:
    std::size_t offset(std::span<const int> t) const
    {
        std::size_t o = 0;
        for (int e : t)
            o = o * static_cast<std::size_t>(std::max(1, s_->size)) + static_cast<std::size_t>(e);
        return o;
    }

    const Structure * s_;
    std::vector<std::vector<std::uint8_t>> tables_;
};

namespace detail {

inline void require_total(const ElementMap & f, const Structure & a, const Structure & b)
{
    if (static_cast<int>(f.size()) != a.size)
        throw precondition_failed("map is not total on the source universe");
    for (int x : f)
        if (x < 0 || x >= b.size)
            throw precondition_failed("map value outside the target universe");
}

} // namespace detail

inline bool is_homomorphism(const ElementMap & f, const Structure & a, const Structure & b)
{
    require_same_vocabulary(a, b);
    detail::require_total(f, a, b);
    Tuple img;
    for (int s = 0; s < a.vocab.size(); ++s)
        for (const auto & t : a.relations[s]) {
            img.resize(t.size());
            for (std::size_t i = 0; i < t.size(); ++i)
                img[i] = f[t[i]];
            if (!b.holds(s, img))
                return false;
        }
    return true;
}

inline bool is_embedding(const ElementMap & f, const Structure & a, const Structure & b)
{
    if (!is_homomorphism(f, a, b))
        return false;
    std::vector<int> inverse(b.size, -1);
    for (int x = 0; x < a.size; ++x) {
        if (inverse[f[x]] != -1)
            return false;
        inverse[f[x]] = x;
    }
    Tuple pre;
    for (int s = 0; s < b.vocab.size(); ++s)
        for (const auto & t : b.relations[s]) {
            pre.resize(t.size());
            bool inside = true;
            for (std::size_t i = 0; i < t.size() && inside; ++i) {
                pre[i] = inverse[t[i]];
                inside = pre[i] != -1;
            }
            if (inside && !a.holds(s, pre))
                return false;
        }
    return true;
}

inline bool check_morphism(const Morphism & f, MorphismKind mode)
{
    return mode == MorphismKind::hom ? is_homomorphism(f.map, f.source, f.target)
                                     : is_embedding(f.map, f.source, f.target);
}

inline bool is_surjective(const ElementMap & f, int target_size)
{
    std::vector<char> hit(target_size, 0);
    for (int x : f)
        hit[x] = 1;
    return std::all_of(hit.begin(), hit.end(), [](char c) { return c != 0; });
}

inline ElementMap compose(const ElementMap & g, const ElementMap & f)
{
    ElementMap r(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        r[i] = g[f[i]];
    return r;
}

inline ElementMap identity_map(int n)
{
    ElementMap r(n);
    std::iota(r.begin(), r.end(), 0);
    return r;
}

struct Factorization {
    Morphism quotient;  ///< surjective homomorphism onto the image
    Structure image;
    Morphism embedding; ///< image ↪ target
};

/// (surjection, embedding) factorisation: the image is the substructure of
/// the target induced on the range of f.
inline Factorization factorize(const Morphism & f)
{
    if (!check_morphism(f, MorphismKind::hom))
        throw precondition_failed("factorize: map is not a homomorphism");
    std::vector<int> values = f.map;
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    std::vector<int> slot(f.target.size, -1);
    for (std::size_t i = 0; i < values.size(); ++i)
        slot[values[i]] = static_cast<int>(i);

    std::vector<Relation> rels(f.target.vocab.size());
    for (int s = 0; s < f.target.vocab.size(); ++s)
        for (const auto & t : f.target.relations[s]) {
            Tuple u(t.size());
            bool inside = true;
            for (std::size_t i = 0; i < t.size() && inside; ++i) {
                u[i] = slot[t[i]];
                inside = u[i] >= 0;
            }
            if (inside)
                rels[s].push_back(std::move(u));
        }
    std::vector<std::string> names;
    if (!f.target.names.empty())
        for (int v : values)
            names.push_back(f.target.names[v]);
    Structure image = make_structure(f.source.vocab, static_cast<int>(values.size()), std::move(rels), std::move(names));

    ElementMap e(f.source.size);
    for (int x = 0; x < f.source.size; ++x)
        e[x] = slot[f.map[x]];
    return Factorization{Morphism{f.source, image, std::move(e)}, image, Morphism{image, f.target, values}};
}

struct Graph {
    int size = 0;
    std::vector<std::vector<int>> adjacency; ///< sorted neighbour lists

    bool adjacent(int a, int b) const
    {
        const auto & n = adjacency.at(a);
        return std::binary_search(n.begin(), n.end(), b);
    }

    std::size_t edge_count() const
    {
        std::size_t n = 0;
        for (const auto & a : adjacency)
            n += a.size();
        return n / 2;
    }
};

inline Graph gaifman_graph(const Structure & s)
{
    Graph g{s.size, std::vector<std::vector<int>>(s.size)};
    for (const auto & r : s.relations)
        for (const auto & t : r)
            for (std::size_t i = 0; i < t.size(); ++i)
                for (std::size_t j = 0; j < t.size(); ++j)
                    if (t[i] != t[j])
                        g.adjacency[t[i]].push_back(t[j]);
    for (auto & n : g.adjacency) {
        std::sort(n.begin(), n.end());
        n.erase(std::unique(n.begin(), n.end()), n.end());
    }
    return g;
}

/// Connected components of the Gaifman graph, each sorted ascending, ordered
/// by smallest member.
inline std::vector<std::vector<int>> gaifman_components(const Structure & s)
{
    Graph g = gaifman_graph(s);
    std::vector<int> comp(s.size, -1);
    std::vector<std::vector<int>> out;
    for (int v = 0; v < s.size; ++v) {
        if (comp[v] != -1)
            continue;
        std::vector<int> members{v}, stack{v};
        comp[v] = static_cast<int>(out.size());
        while (!stack.empty()) {
            int x = stack.back();
            stack.pop_back();
            for (int y : g.adjacency[x])
                if (comp[y] == -1) {
                    comp[y] = comp[v];
                    members.push_back(y);
                    stack.push_back(y);
                }
        }
        std::sort(members.begin(), members.end());
        out.push_back(std::move(members));
    }
    return out;
}

struct Product {
    Structure structure;
    Morphism left;
    Morphism right;
};

/// Categorical product: universe A×B (pair (a,b) at index a*|B|+b),
/// relations componentwise.
inline Product product_struct(const Structure & a, const Structure & b)
{
    require_same_vocabulary(a, b);
    const int n = a.size * b.size;
    std::vector<Relation> rels(a.vocab.size());
    for (int s = 0; s < a.vocab.size(); ++s)
        for (const auto & t : a.relations[s])
            for (const auto & u : b.relations[s]) {
                Tuple p(t.size());
                for (std::size_t i = 0; i < t.size(); ++i)
                    p[i] = t[i] * b.size + u[i];
                rels[s].push_back(std::move(p));
            }
    std::vector<std::string> names;
    ElementMap pl(n), pr(n);
    for (int x = 0; x < a.size; ++x)
        for (int y = 0; y < b.size; ++y) {
            names.push_back("(" + a.element_name(x) + "," + b.element_name(y) + ")");
            pl[x * b.size + y] = x;
            pr[x * b.size + y] = y;
        }
    Structure p = make_structure(a.vocab, n, std::move(rels), std::move(names));
    return Product{p, Morphism{p, a, std::move(pl)}, Morphism{p, b, std::move(pr)}};
}

struct Coproduct {
    Structure structure;
    Morphism left;
    Morphism right;
};

/// Disjoint union: A's elements first, then B's.
inline Coproduct coproduct_struct(const Structure & a, const Structure & b)
{
    require_same_vocabulary(a, b);
    std::vector<Relation> rels(a.vocab.size());
    for (int s = 0; s < a.vocab.size(); ++s) {
        rels[s] = a.relations[s];
        for (auto t : b.relations[s]) {
            for (int & e : t)
                e += a.size;
            rels[s].push_back(std::move(t));
        }
    }
    std::vector<std::string> names;
    if (!a.names.empty() || !b.names.empty()) {
        for (int x = 0; x < a.size; ++x)
            names.push_back("1:" + a.element_name(x));
        for (int y = 0; y < b.size; ++y)
            names.push_back("2:" + b.element_name(y));
    }
    Structure c = make_structure(a.vocab, a.size + b.size, std::move(rels), std::move(names));
    ElementMap il = identity_map(a.size), ir(b.size);
    for (int y = 0; y < b.size; ++y)
        ir[y] = a.size + y;
    return Coproduct{c, Morphism{a, c, std::move(il)}, Morphism{b, c, std::move(ir)}};
}

/// Adds a binary symbol interpreted as the identity relation.
inline Structure expand_identity(const Structure & a, const std::string & name = "I")
{
    if (a.vocab.find(name) != -1)
        throw precondition_failed("expand_identity: symbol " + name + " already in vocabulary");
    auto rels = a.relations;
    Relation id;
    for (int x = 0; x < a.size; ++x)
        id.push_back({x, x});
    rels.push_back(std::move(id));
    return make_structure(a.vocab.with({name, 2}), a.size, std::move(rels), a.names);
}

/// Picks a symbol name not used by the vocabulary, preferring "I".
inline std::string fresh_symbol_name(const Vocabulary & v, std::string base = "I")
{
    std::string name = base;
    while (v.find(name) != -1)
        name += "'";
    return name;
}

/// Class index of every element under the equivalence generated by the
/// binary symbol `sym`; classes are numbered by their least member.
inline ElementMap identity_classes(const Structure & a, int sym)
{
    std::vector<int> parent = identity_map(a.size);
    std::function<int(int)> root = [&](int x) { return parent[x] == x ? x : parent[x] = root(parent[x]); };
    for (const auto & t : a.relations.at(sym)) {
        int r0 = root(t[0]), r1 = root(t[1]);
        if (r0 != r1)
            parent[std::max(r0, r1)] = std::min(r0, r1);
    }
    ElementMap cls(a.size, -1);
    std::vector<int> id_of_root(a.size, -1);
    int next = 0;
    for (int x = 0; x < a.size; ++x) {
        int r = root(x);
        if (id_of_root[r] == -1)
            id_of_root[r] = next++;
        cls[x] = id_of_root[r];
    }
    return cls;
}

/// Quotient of the σ-reduct by the equivalence generated by the symbol `name`.
inline Structure quotient_by_identity(const Structure & a, const std::string & name = "I")
{
    const int sym = a.vocab.find(name);
    if (sym == -1 || a.vocab.arity(sym) != 2)
        throw precondition_failed("quotient_by_identity: no binary symbol " + name);
    ElementMap cls = identity_classes(a, sym);
    const int n = a.size == 0 ? 0 : *std::max_element(cls.begin(), cls.end()) + 1;

    std::vector<Symbol> syms;
    std::vector<Relation> rels;
    for (int s = 0; s < a.vocab.size(); ++s) {
        if (s == sym)
            continue;
        syms.push_back(a.vocab[s]);
        Relation r;
        for (const auto & t : a.relations[s]) {
            Tuple u(t.size());
            for (std::size_t i = 0; i < t.size(); ++i)
                u[i] = cls[t[i]];
            r.push_back(std::move(u));
        }
        rels.push_back(std::move(r));
    }
    std::vector<std::string> names;
    if (!a.names.empty()) {
        names.assign(n, "");
        for (int x = a.size - 1; x >= 0; --x)
            names[cls[x]] = a.names[x];
    }
    return make_structure(Vocabulary{std::move(syms)}, n, std::move(rels), std::move(names));
}

namespace detail {

// Backtracking over the elements of `a` in the given order. A tuple is
// checked as soon as its last (in order) entry is assigned.
class MapSearch {
public:
    MapSearch(const Structure & a, const Structure & b, std::vector<int> order, bool injective) :
        a_(a), b_(b), index_(b), order_(std::move(order)), injective_(injective)
    {
        std::vector<int> rank(a.size, -1);
        for (std::size_t i = 0; i < order_.size(); ++i)
            rank[order_[i]] = static_cast<int>(i);
        checks_.resize(a.size);
        for (int s = 0; s < a.vocab.size(); ++s)
            for (std::size_t ti = 0; ti < a.relations[s].size(); ++ti) {
                const auto & t = a.relations[s][ti];
                int last = t[0];
                for (int e : t)
                    if (rank[e] > rank[last])
                        last = e;
                if (rank[last] >= 0)
                    checks_[last].push_back({s, static_cast<int>(ti)});
            }
        candidates_.assign(a.size, {});
        for (int x = 0; x < a.size; ++x)
            for (int y = 0; y < b.size; ++y)
                candidates_[x].push_back(y);
    }

    void restrict_candidates(int x, std::vector<int> allowed) { candidates_[x] = std::move(allowed); }

    /// Extends `map` (entries -1 for the elements in the order) to a solution.
    bool run(ElementMap & map)
    {
        map_ = &map;
        used_.assign(b_.size, 0);
        if (injective_)
            for (int v : map)
                if (v >= 0)
                    used_[v] = 1;
        return descend(0);
    }

private:
    struct Check {
        int sym;
        int tuple;
    };

    bool consistent(int x) const
    {
        Tuple img;
        for (const auto & c : checks_[x]) {
            const auto & t = a_.relations[c.sym][c.tuple];
            img.resize(t.size());
            for (std::size_t i = 0; i < t.size(); ++i)
                img[i] = (*map_)[t[i]];
            if (!index_.holds(c.sym, img))
                return false;
        }
        return true;
    }

    bool descend(std::size_t depth)
    {
        if (depth == order_.size())
            return true;
        const int x = order_[depth];
        for (int y : candidates_[x]) {
            if (injective_ && used_[y])
                continue;
            (*map_)[x] = y;
            if (consistent(x)) {
                if (injective_)
                    used_[y] = 1;
                if (descend(depth + 1))
                    return true;
                if (injective_)
                    used_[y] = 0;
            }
        }
        (*map_)[x] = -1;
        return false;
    }

    const Structure & a_;
    const Structure & b_;
    RelationIndex index_;
    std::vector<int> order_;
    bool injective_;
    std::vector<std::vector<Check>> checks_;
    std::vector<std::vector<int>> candidates_;
    std::vector<char> used_;
    ElementMap * map_ = nullptr;
};

// Occurrence counts per (symbol, position); equal for elements related by
// an isomorphism.
inline std::vector<std::vector<int>> degree_signatures(const Structure & s)
{
    std::vector<std::vector<int>> sig(s.size);
    int width = 0;
    for (int i = 0; i < s.vocab.size(); ++i)
        width += s.vocab.arity(i);
    for (auto & v : sig)
        v.assign(width + 1, 0);
    int base = 0;
    for (int i = 0; i < s.vocab.size(); ++i) {
        for (const auto & t : s.relations[i])
            for (std::size_t p = 0; p < t.size(); ++p)
                ++sig[t[p]][base + p];
        base += s.vocab.arity(i);
    }
    return sig;
}

} // namespace detail

/// First homomorphism in ascending-index backtracking order. Gaifman
/// components are solved independently.
/// `pinned` fixes the images of some elements (e.g. distinguished points).
inline std::optional<Morphism> hom_search(const Structure & a, const Structure & b,
    const std::vector<std::pair<int, int>> & pinned = {})
{
    require_same_vocabulary(a, b);
    ElementMap map(a.size, -1);
    if (a.size > 0 && b.size == 0)
        return std::nullopt;
    for (const auto & comp : gaifman_components(a)) {
        detail::MapSearch search(a, b, comp, false);
        for (const auto & [x, y] : pinned) {
            if (x < 0 || x >= a.size || y < 0 || y >= b.size)
                throw precondition_failed("hom_search: pinned pair out of range");
            search.restrict_candidates(x, {y});
        }
        if (!search.run(map))
            return std::nullopt;
    }
    return Morphism{a, b, std::move(map)};
}

inline std::optional<Morphism> iso_search(const Structure & a, const Structure & b)
{
    require_same_vocabulary(a, b);
    if (a.size != b.size)
        return std::nullopt;
    for (int s = 0; s < a.vocab.size(); ++s)
        if (a.relations[s].size() != b.relations[s].size())
            return std::nullopt;
    auto sa = detail::degree_signatures(a), sb = detail::degree_signatures(b);
    detail::MapSearch search(a, b, identity_map(a.size), true);
    for (int x = 0; x < a.size; ++x) {
        std::vector<int> allowed;
        for (int y = 0; y < b.size; ++y)
            if (sa[x] == sb[y])
                allowed.push_back(y);
        if (allowed.empty())
            return std::nullopt;
        search.restrict_candidates(x, std::move(allowed));
    }
    ElementMap map(a.size, -1);
    if (!search.run(map))
        return std::nullopt;
    // injective + preserving + equal tuple counts ⇒ reflecting
    return Morphism{a, b, std::move(map)};
}

} // namespace arboreal
