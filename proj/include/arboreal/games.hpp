#pragma once

// Arboreal games played on the path trees of two forest-ordered structures:
// the bisimulation game G, the existential game ∃ and the existential-positive
// game ∃⁺. Positions are equal-height pairs of paths; Duplicator keeps a
// position alive when the height-aligned bijection between the two chains is
// an isomorphism (G, ∃) or a homomorphism (∃⁺).
//
// Also: a generic greatest-fixpoint solver for finite safety games, back-and-
// forth systems, bisimulation spans and morphisms extracted from strategies.

#include <arboreal/errors.hpp>
#include <arboreal/forest.hpp>
#include <arboreal/structure.hpp>

#include <algorithm>
#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace arboreal {

enum class GameVariant { bisimulation, existential, existential_positive };

inline std::string_view to_string(GameVariant v)
{
    switch (v) {
    case GameVariant::bisimulation: return "G";
    case GameVariant::existential: return "E";
    case GameVariant::existential_positive: return "E+";
    }
    return "?";
}

struct Position {
    PathRep left;
    PathRep right;

    friend auto operator<=>(const Position &, const Position &) = default;
};

struct WinningRegion {
    GameVariant variant = GameVariant::bisimulation;
    std::vector<Position> positions; ///< sorted
    std::size_t total_positions = 0; ///< equal-height pairs considered
    bool duplicator_wins = false;

    bool contains(Position p) const { return std::binary_search(positions.begin(), positions.end(), p); }
};

/// Result of a greatest-fixpoint computation over positions 0..n-1.
/// removed_in[i] is 0 for positions outside the initial set, r ≥ 1 for
/// positions discarded in round r, and -1 for survivors.
struct FixpointResult {
    std::vector<char> alive;
    std::vector<int> removed_in;
    int rounds = 0;
};

/// Iterates "keep positions that survive against the current set" until
/// stable. Each round is evaluated against the previous round's set, so
/// removed_in is the rank at which Spoiler can force a loss.
template <typename Survives>
FixpointResult greatest_fixpoint(std::vector<char> initial, Survives survives)
{
    FixpointResult r;
    const std::size_t n = initial.size();
    r.removed_in.assign(n, -1);
    for (std::size_t i = 0; i < n; ++i)
        if (!initial[i])
            r.removed_in[i] = 0;
    r.alive = std::move(initial);
    for (;;) {
        std::vector<std::size_t> dropped;
        for (std::size_t i = 0; i < n; ++i)
            if (r.alive[i] && !survives(i, r.alive))
                dropped.push_back(i);
        if (dropped.empty())
            break;
        ++r.rounds;
        for (std::size_t i : dropped) {
            r.alive[i] = 0;
            r.removed_in[i] = r.rounds;
        }
    }
    return r;
}

namespace detail {

inline bool requires_back(GameVariant v) { return v == GameVariant::bisimulation; }

inline bool signatures_match(const std::vector<std::uint64_t> & left, const std::vector<std::uint64_t> & right,
    GameVariant v)
{
    if (v == GameVariant::existential_positive)
        return std::includes(right.begin(), right.end(), left.begin(), left.end());
    return left == right;
}

// Path nodes of a forest grouped by height; level 0 holds the empty path.
struct Levels {
    std::vector<std::vector<int>> members; ///< members[h] = elements of height h (h ≥ 1)
    std::vector<int> slot;                 ///< element ↦ index within its level

    Levels(const ForestIndex & idx, int n, int height) : members(static_cast<std::size_t>(height) + 1), slot(n, -1)
    {
        for (int v : idx.order()) {
            auto & m = members[idx.height(v)];
            slot[v] = static_cast<int>(m.size());
            m.push_back(v);
        }
    }
};

// Bottom-up local winning relation L and top-down chain-iso relation W.
struct Solved {
    ChainSignatures sx, sy;
    Levels lx, ly;
    int height;
    bool has_empty;
    GameVariant variant;
    std::vector<std::vector<char>> local; ///< L per level, row-major |X_h|×|Y_h|
    std::vector<std::vector<char>> chain; ///< W per level
    char local_empty = 0;

    Solved(const ForestStructure & x, const ForestStructure & y, GameVariant v) :
        sx(x),
        sy(y),
        lx(sx.index(), x.size(), std::max(sx.index().max_height(), sy.index().max_height())),
        ly(sy.index(), y.size(), std::max(sx.index().max_height(), sy.index().max_height())),
        height(std::max(sx.index().max_height(), sy.index().max_height())),
        has_empty(has_empty_path(x.tag)),
        variant(v),
        local(static_cast<std::size_t>(height) + 1),
        chain(static_cast<std::size_t>(height) + 1)
    {
        const ForestIndex & ix = sx.index();
        const ForestIndex & iy = sy.index();
        auto children_ok = [&](const std::vector<int> & cx, const std::vector<int> & cy, int h) {
            // h = height of the children
            if (h > height)
                return cx.empty() && cy.empty();
            const auto & lv = local[h];
            const std::size_t w = ly.members[h].size();
            for (int a : cx) {
                bool found = false;
                for (int b : cy)
                    if (lv[lx.slot[a] * w + ly.slot[b]]) {
                        found = true;
                        break;
                    }
                if (!found)
                    return false;
            }
            if (requires_back(variant))
                for (int b : cy) {
                    bool found = false;
                    for (int a : cx)
                        if (lv[lx.slot[a] * w + ly.slot[b]]) {
                            found = true;
                            break;
                        }
                    if (!found)
                        return false;
                }
            return true;
        };
        for (int h = height; h >= 1; --h) {
            const auto & mx = lx.members[h];
            const auto & my = ly.members[h];
            auto & lv = local[h];
            lv.assign(mx.size() * my.size(), 0);
            for (std::size_t i = 0; i < mx.size(); ++i)
                for (std::size_t j = 0; j < my.size(); ++j)
                    lv[i * my.size() + j] = signatures_match(sx[mx[i]], sy[my[j]], variant)
                        && children_ok(ix.children(mx[i]), iy.children(my[j]), h + 1);
        }
        local_empty = children_ok(ix.roots(), iy.roots(), 1);
        for (int h = 1; h <= height; ++h) {
            const auto & mx = lx.members[h];
            const auto & my = ly.members[h];
            auto & cv = chain[h];
            cv.assign(mx.size() * my.size(), 0);
            for (std::size_t i = 0; i < mx.size(); ++i)
                for (std::size_t j = 0; j < my.size(); ++j) {
                    const int a = mx[i], b = my[j];
                    bool above = true;
                    if (h > 1) {
                        const int pa = x_parent(a), pb = y_parent(b);
                        above = chain[h - 1][lx.slot[pa] * ly.members[h - 1].size() + ly.slot[pb]];
                    }
                    cv[i * my.size() + j] = above && signatures_match(sx[a], sy[b], variant);
                }
        }
    }

    int x_parent(int a) const { return sx.index().chain(a).size() >= 2 ? sx.index().chain(a).end()[-2] : -1; }
    int y_parent(int b) const { return sy.index().chain(b).size() >= 2 ? sy.index().chain(b).end()[-2] : -1; }

    bool in_local(int a, int b) const
    {
        const int h = sx.index().height(a);
        if (h != sy.index().height(b))
            return false;
        return local[h][lx.slot[a] * ly.members[h].size() + ly.slot[b]];
    }

    bool in_chain(int a, int b) const
    {
        const int h = sx.index().height(a);
        if (h != sy.index().height(b))
            return false;
        return chain[h][lx.slot[a] * ly.members[h].size() + ly.slot[b]];
    }

    bool in_region(Position p) const
    {
        if (p.left.empty() || p.right.empty())
            return p.left.empty() && p.right.empty() && has_empty && local_empty;
        return in_chain(p.left.top, p.right.top) && in_local(p.left.top, p.right.top);
    }

    bool chain_ok(Position p) const
    {
        if (p.left.empty() || p.right.empty())
            return p.left.empty() && p.right.empty() && has_empty;
        return in_chain(p.left.top, p.right.top);
    }
};

inline Position root_position(const ForestStructure & x, const ForestStructure & y)
{
    if (has_empty_path(x.tag))
        return {PathRep::empty_path(), PathRep::empty_path()};
    ForestIndex ix(x), iy(y);
    if (ix.roots().size() != 1 || iy.roots().size() != 1)
        throw precondition_failed("modal forests must have exactly one root");
    return {PathRep::at(ix.roots().front()), PathRep::at(iy.roots().front())};
}

inline std::vector<int> path_children(const ForestIndex & idx, PathRep p)
{
    return p.empty() ? idx.roots() : idx.children(p.top);
}

} // namespace detail

/// Literal winning condition: equal heights, and the height-aligned
/// bijection between the chains is an isomorphism (G, ∃) or a homomorphism
/// (∃⁺) preserving pebbles.
inline bool winning_condition(const ForestStructure & x, const ForestStructure & y, Position pos, GameVariant v)
{
    detail::require_compatible(x, y);
    if (pos.left.empty() || pos.right.empty())
        return pos.left.empty() && pos.right.empty() && has_empty_path(x.tag);
    ForestIndex ix(x), iy(y);
    const auto & cx = ix.chain(pos.left.top);
    const auto & cy = iy.chain(pos.right.top);
    if (cx.size() != cy.size())
        return false;
    std::vector<int> to_y(x.size(), -1), to_x(y.size(), -1);
    for (std::size_t i = 0; i < cx.size(); ++i) {
        to_y[cx[i]] = cy[i];
        to_x[cy[i]] = cx[i];
        if (x.tag == Tag::RP && x.pebble[cx[i]] != y.pebble[cy[i]])
            return false;
    }
    auto preserved = [](const Structure & from, const Structure & to, const std::vector<int> & map) {
        for (int s = 0; s < from.vocab.size(); ++s)
            for (const auto & t : from.relations[s]) {
                Tuple u(t.size());
                bool inside = true;
                for (std::size_t i = 0; i < t.size() && inside; ++i) {
                    u[i] = map[t[i]];
                    inside = u[i] != -1;
                }
                if (inside && !to.holds(s, u))
                    return false;
            }
        return true;
    };
    if (!preserved(x.base, y.base, to_y))
        return false;
    return v == GameVariant::existential_positive || preserved(y.base, x.base, to_x);
}

/// Duplicator's winning region: positions from which she survives forever
/// under the variant's challenge rules, with the condition holding at every
/// position visited.
inline WinningRegion solve_game(const ForestStructure & x, const ForestStructure & y, GameVariant v)
{
    detail::require_compatible(x, y);
    detail::Solved s(x, y, v);
    WinningRegion r;
    r.variant = v;
    if (s.has_empty) {
        r.total_positions = 1;
        if (s.local_empty)
            r.positions.push_back({PathRep::empty_path(), PathRep::empty_path()});
    }
    for (int h = 1; h <= s.height; ++h) {
        const auto & mx = s.lx.members[h];
        const auto & my = s.ly.members[h];
        r.total_positions += mx.size() * my.size();
        for (std::size_t i = 0; i < mx.size(); ++i)
            for (std::size_t j = 0; j < my.size(); ++j)
                if (s.local[h][i * my.size() + j] && s.chain[h][i * my.size() + j])
                    r.positions.push_back({PathRep::at(mx[i]), PathRep::at(my[j])});
    }
    std::sort(r.positions.begin(), r.positions.end());
    r.duplicator_wins = r.contains(detail::root_position(x, y));
    return r;
}

/// A set of equal-height path pairs closed under forth (and back).
struct BFSystem {
    std::vector<Position> pairs; ///< sorted
    bool strong = true;          ///< closed under taking parents

    bool contains(Position p) const { return std::binary_search(pairs.begin(), pairs.end(), p); }
};

/// The winning positions reachable from the root position through winning
/// positions; strong by construction.
inline BFSystem extract_bf_system(const WinningRegion & region, const ForestStructure & x, const ForestStructure & y)
{
    if (!region.duplicator_wins)
        throw precondition_failed("extract_bf_system: Duplicator does not win from the root");
    ForestIndex ix(x), iy(y);
    BFSystem b;
    std::vector<Position> frontier{detail::root_position(x, y)};
    std::set<Position> seen(frontier.begin(), frontier.end());
    while (!frontier.empty()) {
        Position p = frontier.back();
        frontier.pop_back();
        for (int a : detail::path_children(ix, p.left))
            for (int c : detail::path_children(iy, p.right)) {
                Position q{PathRep::at(a), PathRep::at(c)};
                if (region.contains(q) && seen.insert(q).second)
                    frontier.push_back(q);
            }
    }
    b.pairs.assign(seen.begin(), seen.end());
    return b;
}

/// Root pair present, every pair satisfies the G condition, forth and back
/// hold, and (when strong) parents of pairs are pairs.
inline bool check_bf_system(const BFSystem & b, const ForestStructure & x, const ForestStructure & y)
{
    detail::require_compatible(x, y);
    ForestIndex ix(x), iy(y);
    const Position root = detail::root_position(x, y);
    if (!b.contains(root))
        return false;
    for (const Position & p : b.pairs) {
        if (!winning_condition(x, y, p, GameVariant::bisimulation))
            return false;
        const auto cx = detail::path_children(ix, p.left);
        const auto cy = detail::path_children(iy, p.right);
        for (int a : cx)
            if (std::none_of(cy.begin(), cy.end(), [&](int c) { return b.contains({PathRep::at(a), PathRep::at(c)}); }))
                return false;
        for (int c : cy)
            if (std::none_of(cx.begin(), cx.end(), [&](int a) { return b.contains({PathRep::at(a), PathRep::at(c)}); }))
                return false;
        if (b.strong && p != root) {
            auto up = [](const ForestStructure & f, PathRep q) {
                return f.parent[q.top] == -1 ? PathRep::empty_path() : PathRep::at(f.parent[q.top]);
            };
            if (!b.contains({up(x, p.left), up(y, p.right)}))
                return false;
        }
    }
    return true;
}

/// X ← Z → Y with both legs open pathwise embeddings.
struct Span {
    ForestStructure left;
    ForestStructure right;
    ForestStructure apex;
    ElementMap to_left;
    ElementMap to_right;
};

/// The sub-forest of the synchronous product induced by the non-empty pairs
/// of a strong back-and-forth system.
inline Span build_span(const ForestStructure & x, const ForestStructure & y, const BFSystem & b)
{
    if (!b.strong || !check_bf_system(b, x, y))
        throw precondition_failed("build_span: expected a strong back-and-forth system");
    ForestProduct prod = synchronous_product(x, y);
    std::vector<int> slot(static_cast<std::size_t>(x.size()) * y.size(), -1);
    for (std::size_t i = 0; i < prod.pairs.size(); ++i)
        slot[static_cast<std::size_t>(prod.pairs[i].first) * y.size() + prod.pairs[i].second] = static_cast<int>(i);
    EmbeddingRep d;
    for (const Position & p : b.pairs) {
        if (p.left.empty())
            continue;
        int s = slot[static_cast<std::size_t>(p.left.top) * y.size() + p.right.top];
        if (s < 0)
            throw precondition_failed("build_span: pair missing from the synchronous product");
        d.members.push_back(s);
    }
    std::sort(d.members.begin(), d.members.end());
    InducedForest z = induced_forest(prod.structure, d);
    Span sp{x, y, std::move(z.forest), {}, {}};
    for (int e : z.inclusion) {
        sp.to_left.push_back(prod.left[e]);
        sp.to_right.push_back(prod.right[e]);
    }
    return sp;
}

inline bool check_bisimulation_span(const Span & s)
{
    return check_arboreal_morphism(s.to_left, s.apex, s.left) && check_arboreal_morphism(s.to_right, s.apex, s.right)
        && classify_open(s.to_left, s.apex, s.left) == OpenCheck::open
        && classify_open(s.to_right, s.apex, s.right) == OpenCheck::open;
}

/// Builds X → Y level by level: each element goes to the first child of its
/// parent's image that keeps the pair in the winning region. The region
/// must be closed under forth (any variant is).
inline ElementMap morphism_from_forth_strategy(const ForestStructure & x, const ForestStructure & y,
    const WinningRegion & region)
{
    if (!region.duplicator_wins)
        throw precondition_failed("morphism_from_forth_strategy: Duplicator does not win from the root");
    ForestIndex ix(x), iy(y);
    ElementMap f(x.size(), -1);
    const Position root = detail::root_position(x, y);
    if (!root.left.empty())
        f[root.left.top] = root.right.top;
    for (int a : ix.order()) {
        if (f[a] != -1)
            continue;
        const PathRep up = x.parent[a] == -1 ? PathRep::empty_path() : PathRep::at(f[x.parent[a]]);
        for (int c : detail::path_children(iy, up))
            if (region.contains({PathRep::at(a), PathRep::at(c)})) {
                f[a] = c;
                break;
            }
        if (f[a] == -1)
            throw precondition_failed("morphism_from_forth_strategy: region is not closed under forth");
    }
    return f;
}

/// One round of an explicit line of play.
struct GameMove {
    int round = 0;
    bool challenge_on_left = true;
    PathRep challenge;
    std::optional<PathRep> response;
    bool condition_holds = false; ///< winning condition at the resulting position
    bool winning = false;         ///< resulting position lies in Duplicator's region
};

/// An optimal line of play from the root. When Duplicator wins, Spoiler
/// extends the leftmost branch and Duplicator answers inside her region.
/// When Spoiler wins, he plays a challenge with no winning answer and
/// Duplicator answers with the best available (condition-preserving) move.
inline std::vector<GameMove> play_out(const ForestStructure & x, const ForestStructure & y, GameVariant v)
{
    detail::require_compatible(x, y);
    detail::Solved s(x, y, v);
    const ForestIndex & ix = s.sx.index();
    const ForestIndex & iy = s.sy.index();
    std::vector<GameMove> moves;
    Position cur = detail::root_position(x, y);
    if (!s.chain_ok(cur))
        return moves;
    for (int round = 1;; ++round) {
        const auto cx = detail::path_children(ix, cur.left);
        const auto cy = detail::path_children(iy, cur.right);
        std::optional<GameMove> chosen;
        auto answer = [&](int c, bool left) {
            GameMove m{round, left, PathRep::at(c), std::nullopt, false, false};
            const auto & options = left ? cy : cx;
            for (int pass = 0; pass < 2 && !m.response; ++pass)
                for (int o : options) {
                    Position q = left ? Position{PathRep::at(c), PathRep::at(o)} : Position{PathRep::at(o), PathRep::at(c)};
                    if (pass == 0 ? s.in_region(q) : s.chain_ok(q)) {
                        m.response = PathRep::at(o);
                        m.condition_holds = s.chain_ok(q);
                        m.winning = s.in_region(q);
                        break;
                    }
                }
            if (!m.response && !options.empty()) {
                m.response = PathRep::at(options.front());
                Position q = left ? Position{PathRep::at(c), m.response.value()} : Position{m.response.value(), PathRep::at(c)};
                m.condition_holds = s.chain_ok(q);
            }
            return m;
        };
        const bool winning_here = s.in_region(cur);
        for (int c : cx) {
            GameMove m = answer(c, true);
            if (winning_here || !m.winning) {
                chosen = m;
                break;
            }
        }
        if (!chosen && detail::requires_back(v))
            for (int c : cy) {
                GameMove m = answer(c, false);
                if (winning_here || !m.winning) {
                    chosen = m;
                    break;
                }
            }
        if (!chosen)
            break;
        moves.push_back(*chosen);
        if (!chosen->response || !chosen->condition_holds)
            break;
        cur = chosen->challenge_on_left ? Position{chosen->challenge, *chosen->response}
                                        : Position{*chosen->response, chosen->challenge};
    }
    return moves;
}

/// Graphviz rendering of the winning region: positions as nodes, one-round
/// extensions between winning positions as edges.
inline std::string to_dot(const WinningRegion & region, const ForestStructure & x, const ForestStructure & y,
    std::string_view name = "game")
{
    auto label = [&](Position p) {
        auto side = [](const ForestStructure & f, PathRep q) {
            return q.empty() ? std::string("()") : f.base.element_name(q.top);
        };
        return side(x, p.left) + " | " + side(y, p.right);
    };
    std::ostringstream out;
    out << "digraph " << name << " {\n";
    for (std::size_t i = 0; i < region.positions.size(); ++i)
        out << "  p" << i << " [label=\"" << label(region.positions[i]) << "\"];\n";
    for (std::size_t i = 0; i < region.positions.size(); ++i)
        for (std::size_t j = 0; j < region.positions.size(); ++j) {
            const Position & p = region.positions[i];
            const Position & q = region.positions[j];
            auto up = [](const ForestStructure & f, PathRep r) {
                return r.empty() || f.parent[r.top] == -1 ? PathRep::empty_path() : PathRep::at(f.parent[r.top]);
            };
            if (!q.left.empty() && !q.right.empty() && up(x, q.left) == p.left && up(y, q.right) == p.right
                && (p.left.empty() ? x.parent[q.left.top] == -1 : true))
                out << "  p" << i << " -> p" << j << ";\n";
        }
    out << "}\n";
    return out.str();
}

} // namespace arboreal
