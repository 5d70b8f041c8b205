#pragma once

// Resource-indexed relations between structures, decided through the
// comonads' carriers and the arboreal games:
//
//   arrow      Duplicator wins the existential-positive game from A to B
//   hom_eq     arrow in both directions
//   strong_eq  the existential game in both directions
//   bisim      the bisimulation game
//   iso        the forest-ordered carriers are isomorphic
//
// The pebbling comonad's carrier is infinite, so its games are played as a
// finite placement game over sets of pebbled pairs.

#include <arboreal/comonads.hpp>
#include <arboreal/errors.hpp>
#include <arboreal/forest.hpp>
#include <arboreal/games.hpp>
#include <arboreal/structure.hpp>

#include <algorithm>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace arboreal {

enum class Flavor { arrow, hom_eq, strong_eq, bisim, iso };

inline std::string_view to_string(Flavor f)
{
    switch (f) {
    case Flavor::arrow: return "arrow";
    case Flavor::hom_eq: return "hom";
    case Flavor::strong_eq: return "strong";
    case Flavor::bisim: return "bisim";
    case Flavor::iso: return "iso";
    }
    return "?";
}

inline std::optional<Flavor> parse_flavor(std::string_view s)
{
    for (Flavor f : {Flavor::arrow, Flavor::hom_eq, Flavor::strong_eq, Flavor::bisim, Flavor::iso})
        if (to_string(f) == s)
            return f;
    return std::nullopt;
}

inline std::optional<ComonadKind> parse_comonad(std::string_view s)
{
    for (ComonadKind k : {ComonadKind::ef, ComonadKind::pebble, ComonadKind::modal})
        if (to_string(k) == s)
            return k;
    return std::nullopt;
}

struct RelationQuery {
    ComonadKind comonad = ComonadKind::ef;
    int k = 1;
    Flavor flavor = Flavor::bisim;
    bool with_equality = false;
    std::size_t budget = default_node_budget;
};

struct RelationResult {
    bool holds = false;
    std::string witness; ///< one-line human-readable summary of the evidence
};

/// One move of the placement game: optionally lift a pebbled pair, then
/// place a pebble on an element of one side; Duplicator answers on the other.
struct PlacementMove {
    int round = 0;
    std::optional<std::pair<int, int>> lifted;
    bool challenge_on_left = true;
    int element = 0;
    std::optional<int> response;
    bool condition_holds = false;
    bool winning = false;
};

/// The k-pebble game between A and B. Positions are sets of at most k pairs
/// (a, b); the condition is that the relation induced by the set is a partial
/// isomorphism (G, ∃) or a partial homomorphism (∃⁺). Spoiler may challenge
/// on both sides only in G.
class PlacementGame {
public:
    PlacementGame(const Structure & a, const Structure & b, int k, GameVariant v,
        std::size_t budget = default_node_budget) :
        a_(a), b_(b), ia_(a), ib_(b), k_(k), variant_(v)
    {
        require_same_vocabulary(a, b);
        if (k < 1)
            throw precondition_failed("placement game: k must be positive");
        pairs_ = static_cast<std::size_t>(a.size) * static_cast<std::size_t>(b.size);
        std::size_t keys = 1;
        for (int i = 0; i < k; ++i) {
            if (keys > budget / (pairs_ + 1))
                throw budget_exceeded("placement game exceeds node budget of " + std::to_string(budget));
            keys *= pairs_ + 1;
        }
        slot_.assign(keys, -1);
        std::vector<int> cur;
        enumerate(cur, 0);
        std::vector<char> initial(sets_.size());
        for (std::size_t i = 0; i < sets_.size(); ++i)
            initial[i] = condition(sets_[i]);
        fix_ = greatest_fixpoint(std::move(initial),
            [&](std::size_t id, const std::vector<char> & alive) { return survives(id, alive); });
    }

    bool duplicator_wins() const { return fix_.alive[0]; }
    std::size_t positions() const noexcept { return sets_.size(); }
    std::size_t winning_positions() const
    {
        return static_cast<std::size_t>(std::count(fix_.alive.begin(), fix_.alive.end(), 1));
    }
    int rounds() const noexcept { return fix_.rounds; }

    /// A line of play from the empty position, as in play_out for forests.
    std::vector<PlacementMove> play_out() const
    {
        std::vector<PlacementMove> moves;
        std::size_t cur = 0;
        const int max_rounds = duplicator_wins() ? k_ : static_cast<int>(sets_.size());
        for (int round = 1; round <= max_rounds; ++round) {
            std::optional<PlacementMove> chosen;
            const bool winning_here = fix_.alive[cur];
            for_each_challenge(sets_[cur], [&](const std::vector<int> & rest, std::optional<int> lifted, bool left, int e) {
                if (chosen)
                    return;
                PlacementMove m{round, std::nullopt, left, e, std::nullopt, false, false};
                if (lifted)
                    m.lifted = decode(*lifted);
                std::optional<std::size_t> best;
                int best_response = -1;
                const int other = left ? b_.size : a_.size;
                for (int o = 0; o < other; ++o) {
                    const std::size_t next = successor(rest, left ? e : o, left ? o : e);
                    if (!best || better(next, *best)) {
                        best = next;
                        best_response = o;
                    }
                    if (fix_.alive[*best])
                        break;
                }
                if (best) {
                    m.response = best_response;
                    m.condition_holds = fix_.removed_in[*best] != 0;
                    m.winning = fix_.alive[*best];
                }
                // Spoiler must make progress: every answer was already lost
                // in an earlier refinement round
                if (winning_here || !best || rank(*best) < rank(cur)) {
                    chosen = m;
                    next_ = best.value_or(cur);
                }
            });
            if (!chosen)
                break;
            moves.push_back(*chosen);
            if (!chosen->response || !chosen->condition_holds)
                break;
            cur = next_;
        }
        return moves;
    }

private:
    std::pair<int, int> decode(int code) const { return {code / b_.size, code % b_.size}; }

    int rank(std::size_t i) const { return fix_.removed_in[i] == -1 ? 1 << 30 : fix_.removed_in[i]; }

    // a later removal round (or survival) is better for Duplicator
    bool better(std::size_t p, std::size_t q) const { return rank(p) > rank(q); }

    void enumerate(std::vector<int> & cur, int from)
    {
        slot_[key(cur)] = static_cast<int>(sets_.size());
        sets_.push_back(cur);
        if (static_cast<int>(cur.size()) == k_)
            return;
        for (int c = from; c < static_cast<int>(pairs_); ++c) {
            cur.push_back(c);
            enumerate(cur, c + 1);
            cur.pop_back();
        }
    }

    std::size_t key(const std::vector<int> & set) const
    {
        std::size_t kk = 0;
        for (auto it = set.rbegin(); it != set.rend(); ++it)
            kk = kk * (pairs_ + 1) + static_cast<std::size_t>(*it) + 1;
        return kk;
    }

    bool condition(const std::vector<int> & set) const
    {
        const int m = static_cast<int>(set.size());
        std::vector<int> as(m), bs(m);
        for (int i = 0; i < m; ++i)
            std::tie(as[i], bs[i]) = decode(set[i]);
        for (int s = 0; s < a_.vocab.size(); ++s) {
            const int r = a_.vocab.arity(s);
            std::vector<int> pick(r, 0);
            Tuple ta(r), tb(r);
            for (bool more = m > 0 || r == 0; more;) {
                for (int i = 0; i < r; ++i) {
                    ta[i] = as[pick[i]];
                    tb[i] = bs[pick[i]];
                }
                const bool ha = ia_.holds(s, ta), hb = ib_.holds(s, tb);
                if (ha && !hb)
                    return false;
                if (hb && !ha && variant_ != GameVariant::existential_positive)
                    return false;
                more = false;
                for (int i = 0; i < r; ++i) {
                    if (++pick[i] < m) {
                        more = true;
                        break;
                    }
                    pick[i] = 0;
                }
            }
        }
        return true;
    }

    template <typename Visit>
    void for_each_challenge(const std::vector<int> & set, Visit visit) const
    {
        const int m = static_cast<int>(set.size());
        auto sides = [&](const std::vector<int> & rest, std::optional<int> lifted) {
            for (int e = 0; e < a_.size; ++e)
                visit(rest, lifted, true, e);
            if (variant_ == GameVariant::bisimulation)
                for (int e = 0; e < b_.size; ++e)
                    visit(rest, lifted, false, e);
        };
        if (m < k_)
            sides(set, std::nullopt);
        for (int i = 0; i < m; ++i) {
            std::vector<int> rest = set;
            rest.erase(rest.begin() + i);
            sides(rest, set[i]);
        }
    }

    std::size_t successor(const std::vector<int> & rest, int a, int b) const
    {
        const int code = a * b_.size + b;
        std::vector<int> next = rest;
        auto it = std::lower_bound(next.begin(), next.end(), code);
        if (it == next.end() || *it != code)
            next.insert(it, code);
        return static_cast<std::size_t>(slot_[key(next)]);
    }

    bool survives(std::size_t id, const std::vector<char> & alive) const
    {
        bool ok = true;
        for_each_challenge(sets_[id], [&](const std::vector<int> & rest, std::optional<int>, bool left, int e) {
            if (!ok)
                return;
            const int other = left ? b_.size : a_.size;
            for (int o = 0; o < other; ++o)
                if (alive[successor(rest, left ? e : o, left ? o : e)])
                    return;
            ok = false;
        });
        return ok;
    }

    const Structure & a_;
    const Structure & b_;
    RelationIndex ia_, ib_;
    int k_;
    GameVariant variant_;
    std::size_t pairs_ = 0;
    std::vector<std::vector<int>> sets_; ///< sets_[0] is the empty position
    std::vector<int> slot_;
    FixpointResult fix_;
    mutable std::size_t next_ = 0;
};

namespace detail {

struct Prepared {
    Structure a;
    Structure b;
};

inline Prepared prepare(const Structure & a, const Structure & b, bool with_equality)
{
    require_same_vocabulary(a, b);
    if (!with_equality)
        return {a, b};
    const std::string name = fresh_symbol_name(a.vocab);
    return {expand_identity(a, name), expand_identity(b, name)};
}

inline std::string region_summary(const WinningRegion & r, const ForestStructure & x, const ForestStructure & y)
{
    std::ostringstream out;
    out << to_string(r.variant) << " game on carriers of sizes " << x.size() << " and " << y.size() << ": "
        << r.positions.size() << " of " << r.total_positions << " positions winning, Duplicator "
        << (r.duplicator_wins ? "wins" : "loses");
    return out.str();
}

inline std::string placement_summary(const PlacementGame & g, GameVariant v)
{
    std::ostringstream out;
    out << to_string(v) << " placement game: " << g.winning_positions() << " of " << g.positions()
        << " positions winning after " << g.rounds() << " refinement rounds, Duplicator "
        << (g.duplicator_wins() ? "wins" : "loses");
    return out.str();
}

inline GameVariant variant_for(Flavor f)
{
    switch (f) {
    case Flavor::arrow:
    case Flavor::hom_eq: return GameVariant::existential_positive;
    case Flavor::strong_eq: return GameVariant::existential;
    default: return GameVariant::bisimulation;
    }
}

// Runs the forest game(s) demanded by the flavor on materialised carriers.
inline RelationResult decide_on_carriers(const ForestStructure & x, const ForestStructure & y, Flavor f)
{
    if (f == Flavor::iso) {
        auto iso = forest_iso_search(x, y);
        return {iso.has_value(),
            iso ? "carriers of size " + std::to_string(x.size()) + " are isomorphic"
                : "carriers of sizes " + std::to_string(x.size()) + " and " + std::to_string(y.size())
                    + " are not isomorphic"};
    }
    const GameVariant v = variant_for(f);
    WinningRegion there = solve_game(x, y, v);
    if (f == Flavor::arrow || f == Flavor::bisim || !there.duplicator_wins)
        return {there.duplicator_wins, region_summary(there, x, y)};
    WinningRegion back = solve_game(y, x, v);
    return {back.duplicator_wins, region_summary(there, x, y) + "; converse: " + region_summary(back, y, x)};
}

} // namespace detail

inline RelationResult decide(const Structure & a, const Structure & b, const RelationQuery & q)
{
    if (q.k < 1)
        throw precondition_failed("resource index k must be positive");
    if (q.comonad == ComonadKind::modal)
        throw unsupported_query("the modal comonad relates pointed structures");
    auto [pa, pb] = detail::prepare(a, b, q.with_equality);
    if (q.comonad == ComonadKind::ef)
        return detail::decide_on_carriers(ef_build(pa, q.k, q.budget).carrier, ef_build(pb, q.k, q.budget).carrier,
            q.flavor);
    if (q.flavor == Flavor::iso)
        throw unsupported_query("isomorphism of pebbling carriers is not supported (infinite carriers)");
    const GameVariant v = detail::variant_for(q.flavor);
    PlacementGame there(pa, pb, q.k, v, q.budget);
    if (q.flavor == Flavor::arrow || q.flavor == Flavor::bisim || !there.duplicator_wins())
        return {there.duplicator_wins(), detail::placement_summary(there, v)};
    PlacementGame back(pb, pa, q.k, v, q.budget);
    return {back.duplicator_wins(),
        detail::placement_summary(there, v) + "; converse: " + detail::placement_summary(back, v)};
}

inline RelationResult decide(const PointedStructure & a, const PointedStructure & b, const RelationQuery & q)
{
    if (q.k < 1)
        throw precondition_failed("resource index k must be positive");
    if (q.comonad != ComonadKind::modal)
        throw unsupported_query("pointed structures are related through the modal comonad");
    if (q.with_equality)
        throw unsupported_query("the modal comonad has no equality variant");
    require_same_vocabulary(a.base, b.base);
    return detail::decide_on_carriers(modal_build(a, q.k, q.budget).carrier, modal_build(b, q.k, q.budget).carrier,
        q.flavor);
}

inline bool relate(const Structure & a, const Structure & b, const RelationQuery & q) { return decide(a, b, q).holds; }

inline bool relate(const PointedStructure & a, const PointedStructure & b, const RelationQuery & q)
{
    return decide(a, b, q).holds;
}

/// A → B in the co-Kleisli category: a homomorphism E_k A → B.
inline bool arrow_via_cokleisli(const Structure & a, const Structure & b, int k,
    std::size_t budget = default_node_budget)
{
    require_same_vocabulary(a, b);
    return hom_search(ef_build(a, k, budget).carrier.base, b).has_value();
}

struct LemmaCheck {
    bool self_equivalent = false;   ///< A and its carrier are hom-equivalent
    bool hom_implies_arrow = false; ///< any homomorphism A → B yields an arrow

    bool ok() const { return self_equivalent && hom_implies_arrow; }
};

inline LemmaCheck lemma_properties_check(const Structure & a, const Structure & b, int k, ComonadKind kind,
    std::size_t budget = default_node_budget)
{
    if (kind == ComonadKind::modal)
        throw unsupported_query("the modal comonad relates pointed structures");
    if (kind == ComonadKind::pebble)
        throw unsupported_query("the pebbling carrier is infinite; use the ef comonad");
    RelationQuery q{kind, k, Flavor::hom_eq, false, budget};
    LemmaCheck c;
    c.self_equivalent = relate(a, ef_build(a, k, budget).carrier.base, q);
    q.flavor = Flavor::arrow;
    c.hom_implies_arrow = !hom_search(a, b).has_value() || relate(a, b, q);
    return c;
}

inline LemmaCheck lemma_properties_check(const PointedStructure & a, const PointedStructure & b, int k,
    std::size_t budget = default_node_budget)
{
    RelationQuery q{ComonadKind::modal, k, Flavor::hom_eq, false, budget};
    LemmaCheck c;
    c.self_equivalent = relate(a, PointedStructure{modal_build(a, k, budget).carrier.base, 0}, q);
    q.flavor = Flavor::arrow;
    c.hom_implies_arrow = !hom_search(a.base, b.base, {{a.point, b.point}}).has_value() || relate(a, b, q);
    return c;
}

} // namespace arboreal
