#pragma once

// First-order, counting and (multi-)modal formulas over a relational
// vocabulary: construction helpers, a printer and a direct model checker.
// Variables are numbered from 0 and printed as x1, x2, …

#include <arboreal/errors.hpp>
#include <arboreal/structure.hpp>

#include <algorithm>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace arboreal {

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    enum class Kind { top, bottom, atom, equal, negation, conjunction, disjunction, exists, forall, exists_at_least, diamond };

    Kind kind = Kind::top;
    int symbol = -1;       ///< atom and diamond: symbol index
    std::vector<int> vars; ///< atom: arguments; equal: two variables; quantifiers: the bound variable
    int count = 0;         ///< exists_at_least: threshold
    std::vector<FormulaPtr> children;
};

namespace formula {

inline FormulaPtr top() { return std::make_shared<const Formula>(Formula{Formula::Kind::top, -1, {}, 0, {}}); }
inline FormulaPtr bottom() { return std::make_shared<const Formula>(Formula{Formula::Kind::bottom, -1, {}, 0, {}}); }

inline FormulaPtr atom(int symbol, std::vector<int> vars)
{
    return std::make_shared<const Formula>(Formula{Formula::Kind::atom, symbol, std::move(vars), 0, {}});
}

inline FormulaPtr equal(int x, int y) { return std::make_shared<const Formula>(Formula{Formula::Kind::equal, -1, {x, y}, 0, {}}); }

inline FormulaPtr negation(FormulaPtr f)
{
    return std::make_shared<const Formula>(Formula{Formula::Kind::negation, -1, {}, 0, {std::move(f)}});
}

inline FormulaPtr conjunction(std::vector<FormulaPtr> fs)
{
    if (fs.empty())
        return top();
    if (fs.size() == 1)
        return fs.front();
    return std::make_shared<const Formula>(Formula{Formula::Kind::conjunction, -1, {}, 0, std::move(fs)});
}

inline FormulaPtr disjunction(std::vector<FormulaPtr> fs)
{
    if (fs.empty())
        return bottom();
    if (fs.size() == 1)
        return fs.front();
    return std::make_shared<const Formula>(Formula{Formula::Kind::disjunction, -1, {}, 0, std::move(fs)});
}

inline FormulaPtr exists(int var, FormulaPtr body)
{
    return std::make_shared<const Formula>(Formula{Formula::Kind::exists, -1, {var}, 0, {std::move(body)}});
}

inline FormulaPtr forall(int var, FormulaPtr body)
{
    return std::make_shared<const Formula>(Formula{Formula::Kind::forall, -1, {var}, 0, {std::move(body)}});
}

/// ∃^{≥count} var. body; count 1 is plain ∃.
inline FormulaPtr exists_at_least(int count, int var, FormulaPtr body)
{
    if (count <= 1)
        return exists(var, std::move(body));
    return std::make_shared<const Formula>(Formula{Formula::Kind::exists_at_least, -1, {var}, count, {std::move(body)}});
}

/// ◇_symbol body, or the graded ◇^{≥count} when count > 1.
inline FormulaPtr diamond(int symbol, FormulaPtr body, int count = 1)
{
    return std::make_shared<const Formula>(Formula{Formula::Kind::diamond, symbol, {}, count, {std::move(body)}});
}

} // namespace formula

inline std::string to_string(const Formula & f, const Vocabulary & vocab)
{
    auto var = [](int v) { return "x" + std::to_string(v + 1); };
    auto join = [&](const char * op) {
        std::string s = "(";
        for (std::size_t i = 0; i < f.children.size(); ++i) {
            if (i)
                s += op;
            s += to_string(*f.children[i], vocab);
        }
        return s + ")";
    };
    switch (f.kind) {
    case Formula::Kind::top: return "true";
    case Formula::Kind::bottom: return "false";
    case Formula::Kind::atom: {
        std::string s = vocab.name(f.symbol) + "(";
        for (std::size_t i = 0; i < f.vars.size(); ++i)
            s += (i ? "," : "") + var(f.vars[i]);
        return s + ")";
    }
    case Formula::Kind::equal: return var(f.vars[0]) + " = " + var(f.vars[1]);
    case Formula::Kind::negation: return "~" + to_string(*f.children[0], vocab);
    case Formula::Kind::conjunction: return join(" & ");
    case Formula::Kind::disjunction: return join(" | ");
    case Formula::Kind::exists: return "exists " + var(f.vars[0]) + ". " + to_string(*f.children[0], vocab);
    case Formula::Kind::forall: return "forall " + var(f.vars[0]) + ". " + to_string(*f.children[0], vocab);
    case Formula::Kind::exists_at_least:
        return "exists>=" + std::to_string(f.count) + " " + var(f.vars[0]) + ". " + to_string(*f.children[0], vocab);
    case Formula::Kind::diamond:
        return "<" + vocab.name(f.symbol) + (f.count > 1 ? ">=" + std::to_string(f.count) : "") + ">"
            + to_string(*f.children[0], vocab);
    }
    return "?";
}

/// First-order satisfaction under an assignment (indexed by variable).
inline bool evaluate(const Formula & f, const Structure & s, std::vector<int> & assignment)
{
    auto quantified = [&](int threshold) {
        const int v = f.vars[0];
        if (static_cast<int>(assignment.size()) <= v)
            assignment.resize(v + 1, -1);
        const int saved = assignment[v];
        int hits = 0;
        for (int x = 0; x < s.size && hits < threshold; ++x) {
            assignment[v] = x;
            if (evaluate(*f.children[0], s, assignment))
                ++hits;
        }
        assignment[v] = saved;
        return hits >= threshold;
    };
    auto value = [&](int v) {
        if (v >= static_cast<int>(assignment.size()) || assignment[v] < 0)
            throw precondition_failed("evaluate: free variable x" + std::to_string(v + 1) + " is unassigned");
        return assignment[v];
    };
    switch (f.kind) {
    case Formula::Kind::top: return true;
    case Formula::Kind::bottom: return false;
    case Formula::Kind::atom: {
        Tuple t;
        for (int v : f.vars)
            t.push_back(value(v));
        return s.holds(f.symbol, t);
    }
    case Formula::Kind::equal: return value(f.vars[0]) == value(f.vars[1]);
    case Formula::Kind::negation: return !evaluate(*f.children[0], s, assignment);
    case Formula::Kind::conjunction:
        for (const auto & c : f.children)
            if (!evaluate(*c, s, assignment))
                return false;
        return true;
    case Formula::Kind::disjunction:
        for (const auto & c : f.children)
            if (evaluate(*c, s, assignment))
                return true;
        return false;
    case Formula::Kind::exists: return quantified(1);
    case Formula::Kind::exists_at_least: return quantified(f.count);
    case Formula::Kind::forall: {
        const int v = f.vars[0];
        if (static_cast<int>(assignment.size()) <= v)
            assignment.resize(v + 1, -1);
        const int saved = assignment[v];
        bool all = true;
        for (int x = 0; x < s.size && all; ++x) {
            assignment[v] = x;
            all = evaluate(*f.children[0], s, assignment);
        }
        assignment[v] = saved;
        return all;
    }
    case Formula::Kind::diamond:
        throw precondition_failed("evaluate: modal operator in a first-order formula");
    }
    return false;
}

inline bool evaluate_sentence(const Formula & f, const Structure & s)
{
    std::vector<int> assignment;
    return evaluate(f, s, assignment);
}

/// Modal satisfaction at a state: unary atoms are labels, ◇_R follows R.
inline bool evaluate_modal(const Formula & f, const Structure & s, int state)
{
    switch (f.kind) {
    case Formula::Kind::top: return true;
    case Formula::Kind::bottom: return false;
    case Formula::Kind::atom:
        if (s.vocab.arity(f.symbol) != 1)
            throw precondition_failed("evaluate_modal: atoms must be unary labels");
        return s.holds(f.symbol, {state});
    case Formula::Kind::negation: return !evaluate_modal(*f.children[0], s, state);
    case Formula::Kind::conjunction:
        for (const auto & c : f.children)
            if (!evaluate_modal(*c, s, state))
                return false;
        return true;
    case Formula::Kind::disjunction:
        for (const auto & c : f.children)
            if (evaluate_modal(*c, s, state))
                return true;
        return false;
    case Formula::Kind::diamond: {
        int hits = 0;
        for (const auto & t : s.relation(f.symbol))
            if (t[0] == state && evaluate_modal(*f.children[0], s, t[1]))
                ++hits;
        return hits >= std::max(f.count, 1);
    }
    default: throw precondition_failed("evaluate_modal: first-order construct in a modal formula");
    }
}

/// Quantifier rank (modal depth for modal formulas).
inline int depth(const Formula & f)
{
    int d = 0;
    for (const auto & c : f.children)
        d = std::max(d, depth(*c));
    const bool binder = f.kind == Formula::Kind::exists || f.kind == Formula::Kind::forall
        || f.kind == Formula::Kind::exists_at_least || f.kind == Formula::Kind::diamond;
    return d + (binder ? 1 : 0);
}

/// Largest variable index used, plus one.
inline int variable_span(const Formula & f)
{
    int m = 0;
    for (int v : f.vars)
        m = std::max(m, v + 1);
    for (const auto & c : f.children)
        m = std::max(m, variable_span(*c));
    return m;
}

} // namespace arboreal
