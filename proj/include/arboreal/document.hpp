#pragma once

// Line-oriented text format for vocabularies, structures, forest orders and
// distinguished points.
//
//   # comment
//   vocabulary
//   E 2
//   structure K2
//   elements a b
//   E a b
//   E b a
//   forest F over K2 k 2 tag RE
//   parent b a
//   point K2 a
//
// A forest block may add `pebble elem value` lines (tag RP only). Elements
// without a `parent` line are roots.

#include <arboreal/errors.hpp>
#include <arboreal/forest.hpp>
#include <arboreal/structure.hpp>

#include <algorithm>
#include <charconv>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace arboreal {

struct NamedStructure {
    std::string name;
    Structure structure;

    friend bool operator==(const NamedStructure &, const NamedStructure &) = default;
};

struct NamedForest {
    std::string name;
    std::string over; ///< name of the underlying structure
    ForestStructure forest;

    friend bool operator==(const NamedForest &, const NamedForest &) = default;
};

struct PointDeclaration {
    std::string structure;
    int element = 0;

    friend bool operator==(const PointDeclaration &, const PointDeclaration &) = default;
};

struct InputDocument {
    Vocabulary vocab;
    std::vector<NamedStructure> structures;
    std::vector<NamedForest> forests;
    std::vector<PointDeclaration> points;

    const Structure * find_structure(std::string_view name) const
    {
        for (const auto & s : structures)
            if (s.name == name)
                return &s.structure;
        return nullptr;
    }

    const ForestStructure * find_forest(std::string_view name) const
    {
        for (const auto & f : forests)
            if (f.name == name)
                return &f.forest;
        return nullptr;
    }

    std::optional<int> find_point(std::string_view structure) const
    {
        for (const auto & p : points)
            if (p.structure == structure)
                return p.element;
        return std::nullopt;
    }

    friend bool operator==(const InputDocument &, const InputDocument &) = default;
};

namespace detail {

struct Token {
    std::string_view text;
    int column; ///< 1-based
};

inline std::vector<Token> tokenize(std::string_view line)
{
    std::vector<Token> out;
    if (auto hash = line.find('#'); hash != std::string_view::npos)
        line = line.substr(0, hash);
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
            ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r')
            ++i;
        if (i > start)
            out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
    }
    return out;
}

inline std::optional<int> parse_int(std::string_view s)
{
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

struct PendingForest {
    std::string name;
    std::string over;
    std::optional<int> bound;
    Tag tag = Tag::R;
    int line = 0;
    std::vector<std::pair<Token, Token>> parents; ///< (child, parent)
    std::vector<std::pair<Token, int>> pebbles;
    std::vector<int> parent_lines, pebble_lines;
};

struct PendingPoint {
    Token structure, element;
    int line;
};

} // namespace detail

inline InputDocument parse_input(std::string_view text)
{
    using detail::Token;
    enum class Block { none, vocabulary, structure, forest };
    Block block = Block::none;
    bool seen_vocabulary = false;
    std::vector<Symbol> symbols;
    struct PendingStructure {
        std::string name;
        bool has_elements = false;
        std::vector<std::string> names;
        std::map<std::string, int, std::less<>> index;
        std::vector<Relation> relations;
    };
    std::vector<PendingStructure> structures;
    std::vector<detail::PendingForest> forests;
    std::vector<detail::PendingPoint> points;

    Vocabulary vocab;
    auto vocabulary_ready = [&](int line, int column) {
        if (!seen_vocabulary)
            throw parse_error(line, column, "a vocabulary block must come first");
        vocab = Vocabulary{symbols};
    };
    auto used_name = [&](std::string_view name) {
        return std::any_of(structures.begin(), structures.end(), [&](const auto & s) { return s.name == name; })
            || std::any_of(forests.begin(), forests.end(), [&](const auto & f) { return f.name == name; });
    };

    const std::string_view all = text;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= all.size()) {
        const std::size_t end = std::min(all.find('\n', pos), all.size());
        const std::string_view line = all.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        const auto tok = detail::tokenize(line);
        if (tok.empty()) {
            if (end == all.size())
                break;
            continue;
        }
        const std::string_view head = tok[0].text;
        auto expect_count = [&](std::size_t n, const char * usage) {
            if (tok.size() != n)
                throw parse_error(line_no, tok[0].column, std::string("expected `") + usage + "`");
        };
        if (head == "vocabulary") {
            expect_count(1, "vocabulary");
            if (seen_vocabulary)
                throw parse_error(line_no, tok[0].column, "duplicate vocabulary block");
            seen_vocabulary = true;
            block = Block::vocabulary;
        } else if (head == "structure") {
            expect_count(2, "structure NAME");
            vocabulary_ready(line_no, tok[0].column);
            if (used_name(tok[1].text))
                throw parse_error(line_no, tok[1].column, "duplicate name " + std::string(tok[1].text));
            structures.push_back({std::string(tok[1].text), false, {}, {}, std::vector<Relation>(vocab.size())});
            block = Block::structure;
        } else if (head == "forest") {
            vocabulary_ready(line_no, tok[0].column);
            if (tok.size() < 4 || tok[2].text != "over")
                throw parse_error(line_no, tok[0].column, "expected `forest NAME over STRUCT [k K] [tag T]`");
            if (used_name(tok[1].text))
                throw parse_error(line_no, tok[1].column, "duplicate name " + std::string(tok[1].text));
            detail::PendingForest f;
            f.name = std::string(tok[1].text);
            f.over = std::string(tok[3].text);
            f.line = line_no;
            for (std::size_t i = 4; i < tok.size(); i += 2) {
                if (i + 1 >= tok.size())
                    throw parse_error(line_no, tok[i].column, "option without a value");
                if (tok[i].text == "k") {
                    auto v = detail::parse_int(tok[i + 1].text);
                    if (!v || *v < 1)
                        throw parse_error(line_no, tok[i + 1].column, "k must be a positive integer");
                    f.bound = *v;
                } else if (tok[i].text == "tag") {
                    auto t = parse_tag(tok[i + 1].text);
                    if (!t)
                        throw parse_error(line_no, tok[i + 1].column, "unknown tag " + std::string(tok[i + 1].text));
                    f.tag = *t;
                } else {
                    throw parse_error(line_no, tok[i].column, "unknown forest option " + std::string(tok[i].text));
                }
            }
            forests.push_back(std::move(f));
            block = Block::forest;
        } else if (head == "point") {
            expect_count(3, "point STRUCT elem");
            vocabulary_ready(line_no, tok[0].column);
            points.push_back({tok[1], tok[2], line_no});
            block = Block::none;
        } else if (head == "elements") {
            if (block != Block::structure)
                throw parse_error(line_no, tok[0].column, "`elements` outside a structure block");
            auto & s = structures.back();
            if (s.has_elements)
                throw parse_error(line_no, tok[0].column, "duplicate elements line");
            s.has_elements = true;
            for (std::size_t i = 1; i < tok.size(); ++i) {
                std::string name(tok[i].text);
                if (!s.index.emplace(name, static_cast<int>(s.names.size())).second)
                    throw parse_error(line_no, tok[i].column, "duplicate element " + name);
                s.names.push_back(std::move(name));
            }
        } else if (head == "parent" || head == "pebble") {
            if (block != Block::forest)
                throw parse_error(line_no, tok[0].column, "`" + std::string(head) + "` outside a forest block");
            auto & f = forests.back();
            if (head == "parent") {
                expect_count(3, "parent child parentElem");
                f.parents.push_back({tok[1], tok[2]});
                f.parent_lines.push_back(line_no);
            } else {
                expect_count(3, "pebble elem value");
                if (f.tag != Tag::RP)
                    throw parse_error(line_no, tok[0].column, "pebble line in a forest not tagged RP");
                auto v = detail::parse_int(tok[2].text);
                if (!v)
                    throw parse_error(line_no, tok[2].column, "pebble value must be an integer");
                if (*v < 1 || (f.bound && *v > *f.bound))
                    throw parse_error(line_no, tok[2].column, "pebble value outside 1..k");
                f.pebbles.push_back({tok[1], *v});
                f.pebble_lines.push_back(line_no);
            }
        } else if (block == Block::vocabulary) {
            expect_count(2, "NAME ARITY");
            auto arity = detail::parse_int(tok[1].text);
            if (!arity || *arity < 0)
                throw parse_error(line_no, tok[1].column, "arity must be a non-negative integer");
            std::string name(head);
            if (std::any_of(symbols.begin(), symbols.end(), [&](const Symbol & s) { return s.name == name; }))
                throw parse_error(line_no, tok[0].column, "duplicate symbol " + name);
            symbols.push_back({std::move(name), *arity});
        } else if (block == Block::structure) {
            auto & s = structures.back();
            const int sym = vocab.find(head);
            if (sym == -1)
                throw parse_error(line_no, tok[0].column, "unknown relation symbol " + std::string(head));
            if (!s.has_elements)
                throw parse_error(line_no, tok[0].column, "relation line before the elements line");
            if (static_cast<int>(tok.size()) - 1 != vocab.arity(sym))
                throw parse_error(line_no, tok[0].column,
                    std::string(head) + " expects " + std::to_string(vocab.arity(sym)) + " arguments");
            Tuple t;
            for (std::size_t i = 1; i < tok.size(); ++i) {
                auto it = s.index.find(tok[i].text);
                if (it == s.index.end())
                    throw parse_error(line_no, tok[i].column, "unknown element " + std::string(tok[i].text));
                t.push_back(it->second);
            }
            s.relations[sym].push_back(std::move(t));
        } else {
            throw parse_error(line_no, tok[0].column, "unexpected `" + std::string(head) + "`");
        }
        if (end == all.size())
            break;
    }
    if (!seen_vocabulary)
        throw parse_error(1, 1, "missing vocabulary block");
    vocab = Vocabulary{symbols};

    InputDocument doc;
    doc.vocab = vocab;
    for (auto & s : structures) {
        const int n = static_cast<int>(s.names.size());
        doc.structures.push_back({s.name, make_structure(vocab, n, std::move(s.relations), s.names)});
    }
    auto structure_index = [&](std::string_view name) -> const PendingStructure * {
        for (const auto & s : structures)
            if (s.name == name)
                return &s;
        return nullptr;
    };
    for (auto & f : forests) {
        const PendingStructure * s = structure_index(f.over);
        if (!s)
            throw parse_error(f.line, 1, "forest " + f.name + " refers to unknown structure " + f.over);
        const Structure & base = *doc.find_structure(f.over);
        auto element = [&](const Token & t, int line) {
            auto it = s->index.find(t.text);
            if (it == s->index.end())
                throw parse_error(line, t.column, "unknown element " + std::string(t.text) + " of " + f.over);
            return it->second;
        };
        std::vector<int> parent(base.size, -1);
        for (std::size_t i = 0; i < f.parents.size(); ++i) {
            const int c = element(f.parents[i].first, f.parent_lines[i]);
            const int p = element(f.parents[i].second, f.parent_lines[i]);
            if (parent[c] != -1)
                throw parse_error(f.parent_lines[i], f.parents[i].first.column,
                    "element " + std::string(f.parents[i].first.text) + " already has a parent");
            parent[c] = p;
        }
        if (!detail::parent_is_acyclic(parent))
            throw parse_error(f.line, 1, "forest " + f.name + ": parent lines form a cycle");
        std::vector<int> pebble;
        if (f.tag == Tag::RP) {
            pebble.assign(base.size, 0);
            for (std::size_t i = 0; i < f.pebbles.size(); ++i) {
                const int e = element(f.pebbles[i].first, f.pebble_lines[i]);
                if (pebble[e] != 0)
                    throw parse_error(f.pebble_lines[i], f.pebbles[i].first.column,
                        "element " + std::string(f.pebbles[i].first.text) + " already has a pebble");
                pebble[e] = f.pebbles[i].second;
            }
            for (int e = 0; e < base.size; ++e)
                if (pebble[e] == 0)
                    throw parse_error(f.line, 1, "forest " + f.name + ": element " + base.element_name(e)
                            + " has no pebble");
        }
        if (f.tag != Tag::R && !f.bound)
            throw parse_error(f.line, 1, "forest " + f.name + ": tag " + std::string(to_string(f.tag)) + " needs k");
        doc.forests.push_back({f.name, f.over, ForestStructure{base, std::move(parent), std::move(pebble), f.bound, f.tag}});
    }
    for (const auto & p : points) {
        const PendingStructure * s = structure_index(p.structure.text);
        if (!s)
            throw parse_error(p.line, p.structure.column, "point refers to unknown structure "
                    + std::string(p.structure.text));
        auto it = s->index.find(p.element.text);
        if (it == s->index.end())
            throw parse_error(p.line, p.element.column, "unknown element " + std::string(p.element.text));
        if (doc.find_point(p.structure.text))
            throw parse_error(p.line, p.structure.column, "duplicate point for " + std::string(p.structure.text));
        doc.points.push_back({std::string(p.structure.text), it->second});
    }
    return doc;
}

namespace detail {

inline void emit_structure(std::ostream & out, const std::string & name, const Structure & s)
{
    out << "structure " << name << "\nelements";
    for (int e = 0; e < s.size; ++e)
        out << ' ' << s.element_name(e);
    out << '\n';
    for (int sym = 0; sym < s.vocab.size(); ++sym)
        for (const auto & t : s.relations[sym]) {
            out << s.vocab.name(sym);
            for (int e : t)
                out << ' ' << s.element_name(e);
            out << '\n';
        }
}

inline void emit_forest(std::ostream & out, const NamedForest & f)
{
    const ForestStructure & x = f.forest;
    out << "forest " << f.name << " over " << f.over;
    if (x.bound)
        out << " k " << *x.bound;
    out << " tag " << to_string(x.tag) << '\n';
    for (int e = 0; e < x.size(); ++e)
        if (x.parent[e] != -1)
            out << "parent " << x.base.element_name(e) << ' ' << x.base.element_name(x.parent[e]) << '\n';
    if (x.tag == Tag::RP)
        for (int e = 0; e < x.size(); ++e)
            out << "pebble " << x.base.element_name(e) << ' ' << x.pebble[e] << '\n';
}

} // namespace detail

/// Canonical text: vocabulary, then structures, forests and points in
/// document order, separated by blank lines.
inline std::string emit(const InputDocument & doc)
{
    std::ostringstream out;
    out << "vocabulary\n";
    for (const auto & s : doc.vocab.symbols())
        out << s.name << ' ' << s.arity << '\n';
    for (const auto & s : doc.structures) {
        out << '\n';
        detail::emit_structure(out, s.name, s.structure);
    }
    for (const auto & f : doc.forests) {
        out << '\n';
        detail::emit_forest(out, f);
    }
    if (!doc.points.empty())
        out << '\n';
    for (const auto & p : doc.points) {
        const Structure * s = doc.find_structure(p.structure);
        out << "point " << p.structure << ' ' << (s ? s->element_name(p.element) : std::to_string(p.element)) << '\n';
    }
    return out.str();
}

/// Document holding one structure, one forest order on it and (for modal
/// carriers) the point at the root. Element names are made unique tokens.
inline InputDocument forest_document(const std::string & structure_name, const std::string & forest_name,
    const ForestStructure & x, std::optional<int> point = {})
{
    InputDocument doc;
    doc.vocab = x.base.vocab;
    ForestStructure f = x;
    f.base.names.resize(f.size());
    std::map<std::string, int> used;
    for (int e = 0; e < f.size(); ++e) {
        std::string nm = x.base.element_name(e);
        for (char & c : nm)
            if (c == ' ' || c == '\t' || c == '#')
                c = '_';
        if (nm.empty())
            nm = "_";
        std::string unique = nm;
        for (int i = 2; used.count(unique); ++i)
            unique = nm + "~" + std::to_string(i);
        used[unique] = e;
        f.base.names[e] = unique;
    }
    doc.structures.push_back({structure_name, f.base});
    doc.forests.push_back({forest_name, structure_name, std::move(f)});
    if (point)
        doc.points.push_back({structure_name, *point});
    return doc;
}

} // namespace arboreal
