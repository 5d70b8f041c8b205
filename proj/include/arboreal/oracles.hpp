#pragma once

// Independent reference procedures. Nothing here touches the forest, game
// or comonad code: each relation is decided by its classical textbook
// characterisation, directly on the structures.
//
//   classical_rank_relation     k-round Ehrenfeucht–Fraïssé recursion on assignments
//   classical_pebble_relation   k-pebble game on indexed placements (greatest fixpoint)
//   classical_modal_relation    depth-bounded (bi)simulation by dynamic programming
//   bijection_game_equiv        k-round bijection game (counting quantifiers)
//   tree_depth, tree_width      of the Gaifman graph, by subset recursion
//   separating_sentence         explicit formulas from the matching logic

#include <arboreal/errors.hpp>
#include <arboreal/formula.hpp>
#include <arboreal/structure.hpp>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace arboreal::oracle {

/// Which half of the game Spoiler may play, and how strict the condition is.
enum class Mode {
    forth_positive, ///< Spoiler plays in A only; the partial map preserves atoms
    forth,          ///< Spoiler plays in A only; the partial map is a partial isomorphism
    back_and_forth, ///< Spoiler plays on either side; partial isomorphism
};

namespace detail {

// Atomic compatibility of two equal-length assignments.
inline bool compatible(const Structure & a, const Structure & b, const std::vector<int> & as,
    const std::vector<int> & bs, Mode mode, bool with_equality)
{
    const int m = static_cast<int>(as.size());
    if (with_equality)
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j) {
                const bool ea = as[i] == as[j], eb = bs[i] == bs[j];
                if (ea && !eb)
                    return false;
                if (eb && !ea && mode != Mode::forth_positive)
                    return false;
            }
    for (int s = 0; s < a.vocab.size(); ++s) {
        const int r = a.vocab.arity(s);
        if (r > 0 && m == 0)
            continue;
        std::vector<int> pick(r, 0);
        Tuple ta(r), tb(r);
        for (;;) {
            for (int i = 0; i < r; ++i) {
                ta[i] = as[pick[i]];
                tb[i] = bs[pick[i]];
            }
            const bool ha = a.holds(s, ta), hb = b.holds(s, tb);
            if (ha && !hb)
                return false;
            if (hb && !ha && mode != Mode::forth_positive)
                return false;
            int i = 0;
            while (i < r && ++pick[i] == m)
                pick[i++] = 0;
            if (i == r)
                break;
        }
    }
    return true;
}

} // namespace detail

/// Duplicator survives k rounds of the classical game from the empty
/// assignment.
inline bool classical_rank_relation(const Structure & a, const Structure & b, int k, Mode mode,
    bool with_equality = false)
{
    require_same_vocabulary(a, b);
    std::vector<int> as, bs;
    std::function<bool(int)> wins = [&](int rounds) {
        if (!detail::compatible(a, b, as, bs, mode, with_equality))
            return false;
        if (rounds == 0)
            return true;
        for (int x = 0; x < a.size; ++x) {
            bool answered = false;
            as.push_back(x);
            for (int y = 0; y < b.size && !answered; ++y) {
                bs.push_back(y);
                answered = wins(rounds - 1);
                bs.pop_back();
            }
            as.pop_back();
            if (!answered)
                return false;
        }
        if (mode == Mode::back_and_forth)
            for (int y = 0; y < b.size; ++y) {
                bool answered = false;
                bs.push_back(y);
                for (int x = 0; x < a.size && !answered; ++x) {
                    as.push_back(x);
                    answered = wins(rounds - 1);
                    as.pop_back();
                }
                bs.pop_back();
                if (!answered)
                    return false;
            }
        return true;
    };
    return wins(k);
}

/// Classical k-pebble game. A position records, for each pebble index,
/// either nothing or the pair (a, b) it marks; Spoiler moves any pebble.
inline bool classical_pebble_relation(const Structure & a, const Structure & b, int k, Mode mode,
    bool with_equality = false, std::size_t budget = 4'000'000)
{
    require_same_vocabulary(a, b);
    if (k < 1)
        throw precondition_failed("classical_pebble_relation: k must be positive");
    const std::size_t cells = static_cast<std::size_t>(a.size) * b.size + 1; // 0 = unplaced
    std::size_t states = 1;
    for (int i = 0; i < k; ++i) {
        if (states > budget / cells)
            throw budget_exceeded("pebble oracle exceeds its state budget");
        states *= cells;
    }
    auto decode = [&](std::size_t s, std::vector<int> & as, std::vector<int> & bs) {
        as.clear();
        bs.clear();
        for (int i = 0; i < k; ++i, s /= cells) {
            const std::size_t c = s % cells;
            if (c != 0) {
                as.push_back(static_cast<int>((c - 1) / b.size));
                bs.push_back(static_cast<int>((c - 1) % b.size));
            }
        }
    };
    std::vector<std::size_t> power(k, 1);
    for (int i = 1; i < k; ++i)
        power[i] = power[i - 1] * cells;

    std::vector<char> alive(states);
    {
        std::vector<int> as, bs;
        for (std::size_t s = 0; s < states; ++s) {
            decode(s, as, bs);
            alive[s] = detail::compatible(a, b, as, bs, mode, with_equality);
        }
    }
    auto moved = [&](std::size_t s, int pebble, int x, int y) {
        const std::size_t old = (s / power[pebble]) % cells;
        const std::size_t now = static_cast<std::size_t>(x) * b.size + y + 1;
        return s - old * power[pebble] + now * power[pebble];
    };
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t s = 0; s < states; ++s) {
            if (!alive[s])
                continue;
            bool ok = true;
            for (int p = 0; p < k && ok; ++p) {
                for (int x = 0; x < a.size && ok; ++x) {
                    bool answered = false;
                    for (int y = 0; y < b.size && !answered; ++y)
                        answered = alive[moved(s, p, x, y)];
                    ok = answered;
                }
                if (mode == Mode::back_and_forth)
                    for (int y = 0; y < b.size && ok; ++y) {
                        bool answered = false;
                        for (int x = 0; x < a.size && !answered; ++x)
                            answered = alive[moved(s, p, x, y)];
                        ok = answered;
                    }
            }
            if (!ok) {
                alive[s] = 0;
                changed = true;
            }
        }
    }
    return alive[0];
}

/// Depth-bounded simulation/bisimulation between pointed Kripke structures:
/// the points are related after k-1 refinement steps (paths of at most k
/// states). forth_positive: labels of the left state hold on the right;
/// forth and back_and_forth: labels agree.
inline bool classical_modal_relation(const PointedStructure & a, const PointedStructure & b, int k, Mode mode)
{
    require_same_vocabulary(a.base, b.base);
    const Structure & sa = a.base;
    const Structure & sb = b.base;
    for (int s = 0; s < sa.vocab.size(); ++s)
        if (sa.vocab.arity(s) > 2)
            throw unsupported_query("modal oracle: arity above two");
    if (k < 1)
        throw precondition_failed("classical_modal_relation: k must be positive");
    const int na = sa.size, nb = sb.size;
    std::vector<char> rel(static_cast<std::size_t>(na) * nb, 1);
    auto at = [&](int x, int y) -> char & { return rel[static_cast<std::size_t>(x) * nb + y]; };
    for (int x = 0; x < na; ++x)
        for (int y = 0; y < nb; ++y)
            for (int s = 0; s < sa.vocab.size(); ++s)
                if (sa.vocab.arity(s) == 1) {
                    const bool ha = sa.holds(s, {x}), hb = sb.holds(s, {y});
                    if ((ha && !hb) || (hb && !ha && mode != Mode::forth_positive))
                        at(x, y) = 0;
                }
    for (int step = 1; step < k; ++step) {
        std::vector<char> next = rel;
        for (int x = 0; x < na; ++x)
            for (int y = 0; y < nb; ++y) {
                if (!at(x, y))
                    continue;
                bool ok = true;
                for (int s = 0; s < sa.vocab.size() && ok; ++s) {
                    if (sa.vocab.arity(s) != 2)
                        continue;
                    for (const auto & t : sa.relation(s)) {
                        if (t[0] != x)
                            continue;
                        bool answered = false;
                        for (const auto & u : sb.relation(s))
                            if (u[0] == y && at(t[1], u[1])) {
                                answered = true;
                                break;
                            }
                        if (!answered) {
                            ok = false;
                            break;
                        }
                    }
                    if (ok && mode == Mode::back_and_forth)
                        for (const auto & u : sb.relation(s)) {
                            if (u[0] != y)
                                continue;
                            bool answered = false;
                            for (const auto & t : sa.relation(s))
                                if (t[0] == x && at(t[1], u[1])) {
                                    answered = true;
                                    break;
                                }
                            if (!answered) {
                                ok = false;
                                break;
                            }
                        }
                }
                next[static_cast<std::size_t>(x) * nb + y] = ok;
            }
        rel = std::move(next);
    }
    return at(a.point, b.point);
}

namespace detail {

// Kuhn's augmenting paths on an |A|×|B| bipartite graph.
inline bool has_perfect_matching(const std::vector<std::vector<char>> & edge, int n)
{
    std::vector<int> match_right(n, -1);
    std::vector<char> seen;
    std::function<bool(int)> augment = [&](int x) {
        for (int y = 0; y < n; ++y)
            if (edge[x][y] && !seen[y]) {
                seen[y] = 1;
                if (match_right[y] == -1 || augment(match_right[y])) {
                    match_right[y] = x;
                    return true;
                }
            }
        return false;
    };
    for (int x = 0; x < n; ++x) {
        seen.assign(n, 0);
        if (!augment(x))
            return false;
    }
    return true;
}

} // namespace detail

/// k-round bijection game: each round Duplicator commits to a bijection
/// A → B and Spoiler picks an element; the assignments must stay partial
/// isomorphisms. Equivalent to agreement on sentences of quantifier rank k
/// with counting quantifiers.
inline bool bijection_game_equiv(const Structure & a, const Structure & b, int k, bool with_equality = false)
{
    require_same_vocabulary(a, b);
    std::vector<int> as, bs;
    std::function<bool(int)> wins = [&](int rounds) {
        if (!detail::compatible(a, b, as, bs, Mode::back_and_forth, with_equality))
            return false;
        if (rounds == 0)
            return true;
        if (a.size != b.size)
            return false;
        std::vector<std::vector<char>> edge(a.size, std::vector<char>(b.size, 0));
        for (int x = 0; x < a.size; ++x)
            for (int y = 0; y < b.size; ++y) {
                as.push_back(x);
                bs.push_back(y);
                edge[x][y] = wins(rounds - 1);
                as.pop_back();
                bs.pop_back();
            }
        return detail::has_perfect_matching(edge, a.size);
    };
    return wins(k);
}

namespace detail {

inline std::vector<std::uint32_t> adjacency_masks(const Structure & s)
{
    if (s.size > 31)
        throw precondition_failed("width oracles handle at most 31 elements");
    std::vector<std::uint32_t> adj(s.size, 0);
    for (const auto & r : s.relations)
        for (const auto & t : r)
            for (int x : t)
                for (int y : t)
                    if (x != y)
                        adj[x] |= 1u << y;
    return adj;
}

inline std::uint32_t component_of(const std::vector<std::uint32_t> & adj, std::uint32_t within, int start)
{
    std::uint32_t comp = 1u << start, frontier = comp;
    while (frontier) {
        std::uint32_t next = 0;
        for (std::uint32_t f = frontier; f; f &= f - 1)
            next |= adj[std::countr_zero(f)];
        next &= within & ~comp;
        comp |= next;
        frontier = next;
    }
    return comp;
}

} // namespace detail

/// Tree-depth of the Gaifman graph: td(∅) = 0, a disconnected set takes the
/// maximum over its components, a connected set 1 + min over removed vertices.
inline int tree_depth(const Structure & s)
{
    const auto adj = detail::adjacency_masks(s);
    std::unordered_map<std::uint32_t, int> memo;
    std::function<int(std::uint32_t)> td = [&](std::uint32_t set) -> int {
        if (set == 0)
            return 0;
        if (auto it = memo.find(set); it != memo.end())
            return it->second;
        const std::uint32_t comp = detail::component_of(adj, set, std::countr_zero(set));
        int result;
        if (comp != set) {
            result = std::max(td(comp), td(set & ~comp));
        } else {
            result = 1 << 30;
            for (std::uint32_t f = set; f; f &= f - 1)
                result = std::min(result, 1 + td(set & ~(1u << std::countr_zero(f))));
        }
        memo.emplace(set, result);
        return result;
    };
    return td((s.size == 32 ? 0u : (1u << s.size)) - 1u);
}

/// Tree-width of the Gaifman graph by dynamic programming over elimination
/// orderings: TW(S) = min over v in S of max(TW(S \ v), |Q(S \ v, v)|), where
/// Q(S, v) are the vertices outside S ∪ {v} reachable from v through S.
/// An empty structure has tree-width -1.
inline int tree_width(const Structure & s)
{
    const auto adj = detail::adjacency_masks(s);
    const int n = s.size;
    if (n == 0)
        return -1;
    if (n > 24)
        throw precondition_failed("tree_width oracle handles at most 24 elements");
    const std::uint32_t full = (1u << n) - 1u;
    auto q = [&](std::uint32_t set, int v) {
        const std::uint32_t reach = detail::component_of(adj, set | (1u << v), v);
        std::uint32_t out = 0;
        for (std::uint32_t f = reach; f; f &= f - 1)
            out |= adj[std::countr_zero(f)];
        out &= ~(set | (1u << v));
        return std::popcount(out);
    };
    std::vector<int> tw(static_cast<std::size_t>(full) + 1, 1 << 30);
    tw[0] = -1;
    for (std::uint32_t set = 1; set <= full; ++set)
        for (std::uint32_t f = set; f; f &= f - 1) {
            const int v = std::countr_zero(f);
            const std::uint32_t rest = set & ~(1u << v);
            tw[set] = std::min(tw[set], std::max(tw[rest], q(rest, v)));
        }
    return std::max(tw[full], 0);
}

/// Modal depth of a tree-shaped pointed Kripke structure: the point has no
/// incoming transition, every other state exactly one (over all transition
/// symbols), every state is reachable, and the depth counts states on the
/// longest path from the point. Nothing for structures that are not trees.
inline std::optional<int> modal_tree_height(const PointedStructure & p)
{
    const Structure & s = p.base;
    if (s.size == 0 || p.point < 0 || p.point >= s.size)
        throw precondition_failed("modal_tree_height: point outside the universe");
    std::vector<int> incoming(s.size, 0);
    std::vector<std::vector<int>> next(s.size);
    for (int sym = 0; sym < s.vocab.size(); ++sym) {
        if (s.vocab.arity(sym) > 2)
            throw unsupported_query("modal_tree_height: arity above two");
        if (s.vocab.arity(sym) != 2)
            continue;
        for (const auto & t : s.relation(sym)) {
            ++incoming[t[1]];
            next[t[0]].push_back(t[1]);
        }
    }
    for (int v = 0; v < s.size; ++v)
        if (incoming[v] != (v == p.point ? 0 : 1))
            return std::nullopt;
    std::vector<int> depth(s.size, 0);
    std::vector<int> queue{p.point};
    depth[p.point] = 1;
    int reached = 0, height = 0;
    for (std::size_t i = 0; i < queue.size(); ++i) {
        const int v = queue[i];
        ++reached;
        height = std::max(height, depth[v]);
        for (int w : next[v]) {
            depth[w] = depth[v] + 1;
            queue.push_back(w);
        }
    }
    if (reached != s.size)
        return std::nullopt;
    return height;
}

// ---------------------------------------------------------------------------
// Separating sentences

/// Logical constructs available besides ∧, ∨ and the quantifier.
enum class Logic {
    full,       ///< negation anywhere
    existential,///< negation on atoms only
    positive,   ///< no negation
    counting,   ///< negation plus counting quantifiers
};

/// How the fragment is stratified.
enum class Resource { quantifier_rank, variables };

namespace detail {

class Bits {
public:
    Bits() = default;
    explicit Bits(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}

    void set(std::size_t i) { w_[i / 64] |= std::uint64_t{1} << (i % 64); }
    bool test(std::size_t i) const { return (w_[i / 64] >> (i % 64)) & 1u; }
    std::size_t size() const noexcept { return n_; }

    friend bool operator==(const Bits &, const Bits &) = default;
    friend auto operator<=>(const Bits &, const Bits &) = default;

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> w_;
};

struct Definable {
    FormulaPtr formula;
    Bits extension;
};

struct Budget {
    std::size_t limit;
    std::size_t used = 0;

    void charge(std::size_t n = 1)
    {
        used += n;
        if (used > limit)
            throw budget_exceeded("formula enumeration exceeds its budget of " + std::to_string(limit));
    }
};

// Turns generators into a basis: cells of the induced partition (full,
// counting) or principal up-sets of the induced preorder (existential,
// positive). Each basis formula is a greedily shortened conjunction of
// generator literals with exactly the intended extension.
inline std::vector<Definable> basis(const std::vector<Definable> & gens, std::size_t n, bool negation, Budget & budget)
{
    std::vector<Definable> lits = gens;
    if (negation)
        for (const auto & g : gens) {
            Bits e(n);
            for (std::size_t i = 0; i < n; ++i)
                if (!g.extension.test(i))
                    e.set(i);
            lits.push_back({formula::negation(g.formula), std::move(e)});
        }
    // profile[i] = set of literals true at item i
    std::vector<Bits> profile(n, Bits(lits.size()));
    for (std::size_t l = 0; l < lits.size(); ++l)
        for (std::size_t i = 0; i < n; ++i)
            if (lits[l].extension.test(i))
                profile[i].set(l);
    auto covers = [&](std::size_t t, std::size_t u) { // every literal true at t is true at u
        for (std::size_t l = 0; l < lits.size(); ++l)
            if (profile[t].test(l) && !profile[u].test(l))
                return false;
        return true;
    };
    std::map<Bits, std::size_t> seen;
    std::vector<Definable> out;
    for (std::size_t t = 0; t < n; ++t) {
        Bits target(n);
        for (std::size_t u = 0; u < n; ++u)
            if (covers(t, u))
                target.set(u);
        if (seen.count(target))
            continue;
        budget.charge();
        seen.emplace(target, out.size());
        std::vector<std::size_t> outside;
        for (std::size_t u = 0; u < n; ++u)
            if (!target.test(u))
                outside.push_back(u);
        std::vector<FormulaPtr> chosen;
        while (!outside.empty()) {
            std::size_t best = lits.size(), best_kill = 0;
            for (std::size_t l = 0; l < lits.size(); ++l) {
                if (!profile[t].test(l))
                    continue;
                std::size_t kill = 0;
                for (std::size_t u : outside)
                    kill += !lits[l].extension.test(u);
                if (kill > best_kill) {
                    best_kill = kill;
                    best = l;
                }
            }
            chosen.push_back(lits[best].formula);
            std::erase_if(outside, [&](std::size_t u) { return !lits[best].extension.test(u); });
        }
        out.push_back({formula::conjunction(std::move(chosen)), std::move(target)});
    }
    return out;
}

// Items: assignments of `arity` variables in A (first) and in B.
struct Items {
    int arity;
    int na, nb;
    std::size_t count_a, count_b;

    Items(int d, int a, int b) : arity(d), na(a), nb(b), count_a(power(a, d)), count_b(power(b, d)) {}

    static std::size_t power(int base, int e)
    {
        std::size_t p = 1;
        for (int i = 0; i < e; ++i)
            p *= static_cast<std::size_t>(base);
        return p;
    }

    std::size_t size() const noexcept { return count_a + count_b; }
    bool in_a(std::size_t i) const noexcept { return i < count_a; }

    std::vector<int> values(std::size_t i) const
    {
        const int base = in_a(i) ? na : nb;
        std::size_t code = in_a(i) ? i : i - count_a;
        std::vector<int> v(arity);
        for (int j = arity - 1; j >= 0; --j, code /= static_cast<std::size_t>(base))
            v[j] = static_cast<int>(code % static_cast<std::size_t>(base));
        return v;
    }

    std::size_t index(bool left, const std::vector<int> & v) const
    {
        const int base = left ? na : nb;
        std::size_t code = 0;
        for (int x : v)
            code = code * static_cast<std::size_t>(base) + static_cast<std::size_t>(x);
        return left ? code : count_a + code;
    }
};

inline std::vector<Definable> atoms(const Structure & a, const Structure & b, const Items & items, bool with_equality,
    bool negated_atoms, Budget & budget)
{
    std::vector<Definable> out;
    auto add = [&](FormulaPtr f, auto && truth) {
        budget.charge();
        Bits e(items.size()), ne(items.size());
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (truth(items.in_a(i), items.values(i)))
                e.set(i);
            else
                ne.set(i);
        }
        if (negated_atoms)
            out.push_back({formula::negation(f), std::move(ne)});
        out.push_back({std::move(f), std::move(e)});
    };
    const int d = items.arity;
    for (int s = 0; s < a.vocab.size(); ++s) {
        const int r = a.vocab.arity(s);
        if (r > 0 && d == 0)
            continue;
        std::vector<int> pick(r, 0);
        for (;;) {
            add(formula::atom(s, pick), [&](bool left, const std::vector<int> & v) {
                Tuple t;
                for (int p : pick)
                    t.push_back(v[p]);
                return (left ? a : b).holds(s, t);
            });
            int i = r - 1;
            while (i >= 0 && ++pick[i] == d)
                pick[i--] = 0;
            if (i < 0)
                break;
        }
    }
    if (with_equality)
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j)
                add(formula::equal(i, j), [&](bool, const std::vector<int> & v) { return v[i] == v[j]; });
    return out;
}

// ∃x_var β (or ∃^{≥c}) over `inner` items, as generators over `outer` items.
// `extend(outer_values, x)` gives the inner assignment.
template <typename Extend>
void quantify(const std::vector<Definable> & basis_items, const Items & outer, const Items & inner, int var,
    bool counting, Extend extend, std::vector<Definable> & out, Budget & budget)
{
    const int max_count = counting ? std::max(outer.na, outer.nb) : 1;
    for (const auto & beta : basis_items) {
        std::vector<int> hits(outer.size(), 0);
        for (std::size_t i = 0; i < outer.size(); ++i) {
            const bool left = outer.in_a(i);
            const auto v = outer.values(i);
            const int n = left ? outer.na : outer.nb;
            for (int x = 0; x < n; ++x)
                if (beta.extension.test(inner.index(left, extend(v, x))))
                    ++hits[i];
        }
        for (int c = 1; c <= max_count; ++c) {
            budget.charge();
            Bits e(outer.size());
            bool any = false;
            for (std::size_t i = 0; i < outer.size(); ++i)
                if (hits[i] >= c) {
                    e.set(i);
                    any = true;
                }
            if (!any && c > 1)
                break;
            out.push_back({formula::exists_at_least(c, var, beta.formula), std::move(e)});
        }
    }
}

inline std::optional<FormulaPtr> separate_at_root(const std::vector<Definable> & gens, bool negation)
{
    // items 0 (A) and 1 (B)
    for (const auto & g : gens)
        if (g.extension.test(0) && !g.extension.test(1))
            return g.formula;
    if (negation)
        for (const auto & g : gens)
            if (!g.extension.test(0) && g.extension.test(1))
                return formula::negation(g.formula);
    return std::nullopt;
}

} // namespace detail

/// A sentence of the fragment (logic, resource ≤ k) true in A and false in
/// B, or nothing if every such sentence true in A is true in B. The result
/// is verified by direct model checking before it is returned.
inline std::optional<FormulaPtr> separating_sentence(const Structure & a, const Structure & b, Logic logic,
    Resource resource, int k, bool with_equality = false, std::size_t budget_limit = 200'000)
{
    using namespace detail;
    require_same_vocabulary(a, b);
    if (k < 1)
        throw precondition_failed("separating_sentence: k must be positive");
    const bool negation = logic == Logic::full || logic == Logic::counting;
    const bool counting = logic == Logic::counting;
    const bool negated_atoms = logic == Logic::existential;
    Budget budget{budget_limit};
    std::optional<FormulaPtr> found;

    if (resource == Resource::quantifier_rank) {
        std::vector<Definable> below; // basis one level down
        for (int d = k; d >= 0; --d) {
            Items items(d, a.size, b.size);
            budget.charge(items.size());
            auto gens = atoms(a, b, items, with_equality, negated_atoms, budget);
            if (d < k) {
                Items inner(d + 1, a.size, b.size);
                quantify(below, items, inner, d, counting,
                    [](std::vector<int> v, int x) {
                        v.push_back(x);
                        return v;
                    },
                    gens, budget);
            }
            if (d == 0) {
                found = separate_at_root(gens, negation);
                break;
            }
            below = basis(gens, items.size(), negation, budget);
        }
    } else {
        Items items(k, a.size, b.size);
        budget.charge(items.size());
        const auto base_gens = atoms(a, b, items, with_equality, negated_atoms, budget);
        std::vector<Definable> current = basis(base_gens, items.size(), negation, budget);
        for (;;) {
            auto gens = base_gens;
            for (int var = 0; var < k; ++var)
                quantify(current, items, items, var, counting,
                    [var](std::vector<int> v, int x) {
                        v[var] = x;
                        return v;
                    },
                    gens, budget);
            auto next = basis(gens, items.size(), negation, budget);
            // refinement is monotone: stop once no new extension appears
            std::vector<Bits> before, after;
            for (const auto & d : current)
                before.push_back(d.extension);
            for (const auto & d : next)
                after.push_back(d.extension);
            std::sort(before.begin(), before.end());
            std::sort(after.begin(), after.end());
            current = std::move(next);
            if (before == after)
                break;
        }
        // sentences ∃x1…∃xk β
        auto close = [&](FormulaPtr f) {
            for (int var = k - 1; var >= 0; --var)
                f = formula::exists(var, f);
            return f;
        };
        auto realised = [&](const Bits & e, bool left) {
            const std::size_t from = left ? 0 : items.count_a, to = left ? items.count_a : items.size();
            for (std::size_t i = from; i < to; ++i)
                if (e.test(i))
                    return true;
            return false;
        };
        for (const auto & beta : current) {
            if (realised(beta.extension, true) && !realised(beta.extension, false)) {
                found = close(beta.formula);
                break;
            }
            if (negation && !realised(beta.extension, true) && realised(beta.extension, false)) {
                found = formula::negation(close(beta.formula));
                break;
            }
        }
    }
    if (found && !(evaluate_sentence(**found, a) && !evaluate_sentence(**found, b)))
        throw std::logic_error("separating_sentence: produced formula does not separate");
    return found;
}

/// Modal formula of depth ≤ k-1 true at A's point and false at B's point.
inline std::optional<FormulaPtr> separating_sentence(const PointedStructure & a, const PointedStructure & b,
    Logic logic, int k, std::size_t budget_limit = 200'000)
{
    using namespace detail;
    require_same_vocabulary(a.base, b.base);
    const Structure & sa = a.base;
    const Structure & sb = b.base;
    const auto & vocab = sa.vocab;
    for (int s = 0; s < vocab.size(); ++s)
        if (vocab.arity(s) > 2)
            throw unsupported_query("modal formulas need unary and binary symbols only");
    if (k < 1)
        throw precondition_failed("separating_sentence: k must be positive");
    const bool negation = logic == Logic::full || logic == Logic::counting;
    const bool counting = logic == Logic::counting;
    const std::size_t n = static_cast<std::size_t>(sa.size) + sb.size;
    Budget budget{budget_limit};
    auto state = [&](std::size_t i) { return i < static_cast<std::size_t>(sa.size) ? static_cast<int>(i) : static_cast<int>(i - sa.size); };
    auto side = [&](std::size_t i) -> const Structure & { return i < static_cast<std::size_t>(sa.size) ? sa : sb; };
    std::vector<Definable> labels;
    for (int s = 0; s < vocab.size(); ++s)
        if (vocab.arity(s) == 1) {
            budget.charge();
            Bits e(n), ne(n);
            for (std::size_t i = 0; i < n; ++i)
                (side(i).holds(s, {state(i)}) ? e : ne).set(i);
            if (logic == Logic::existential)
                labels.push_back({formula::negation(formula::atom(s, {0})), std::move(ne)});
            labels.push_back({formula::atom(s, {0}), std::move(e)});
        }
    std::vector<Definable> gens = labels;
    for (int depth = 1; depth < k; ++depth) {
        auto cells = basis(gens, n, negation, budget);
        gens = labels;
        const int max_count = counting ? std::max(sa.size, sb.size) : 1;
        for (int s = 0; s < vocab.size(); ++s) {
            if (vocab.arity(s) != 2)
                continue;
            for (const auto & beta : cells) {
                std::vector<int> hits(n, 0);
                for (std::size_t i = 0; i < n; ++i) {
                    const bool left = i < static_cast<std::size_t>(sa.size);
                    for (const auto & t : side(i).relation(s))
                        if (t[0] == state(i) && beta.extension.test(left ? t[1] : sa.size + t[1]))
                            ++hits[i];
                }
                for (int c = 1; c <= max_count; ++c) {
                    budget.charge();
                    Bits e(n);
                    bool any = false;
                    for (std::size_t i = 0; i < n; ++i)
                        if (hits[i] >= c) {
                            e.set(i);
                            any = true;
                        }
                    if (!any && c > 1)
                        break;
                    gens.push_back({formula::diamond(s, beta.formula, c), std::move(e)});
                }
            }
        }
    }
    const std::size_t pa = static_cast<std::size_t>(a.point), pb = sa.size + static_cast<std::size_t>(b.point);
    std::optional<FormulaPtr> found;
    for (const auto & g : gens)
        if (g.extension.test(pa) && !g.extension.test(pb)) {
            found = g.formula;
            break;
        }
    if (!found && negation)
        for (const auto & g : gens)
            if (!g.extension.test(pa) && g.extension.test(pb)) {
                found = formula::negation(g.formula);
                break;
            }
    if (found && !(evaluate_modal(**found, sa, a.point) && !evaluate_modal(**found, sb, b.point)))
        throw std::logic_error("separating_sentence: produced modal formula does not separate");
    return found;
}

/// Every sentence of the fragment true in A is true in B.
inline bool fragment_preserved(const Structure & a, const Structure & b, Logic logic, Resource resource, int k,
    bool with_equality = false, std::size_t budget = 200'000)
{
    return !separating_sentence(a, b, logic, resource, k, with_equality, budget).has_value();
}

/// A and B agree on all sentences of the fragment.
inline bool fragment_equivalent(const Structure & a, const Structure & b, Logic logic, Resource resource, int k,
    bool with_equality = false, std::size_t budget = 200'000)
{
    return fragment_preserved(a, b, logic, resource, k, with_equality, budget)
        && fragment_preserved(b, a, logic, resource, k, with_equality, budget);
}

} // namespace arboreal::oracle
