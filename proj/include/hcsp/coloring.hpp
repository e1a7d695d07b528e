#pragma once

// Colorings of relational structures and the generalized chromatic number.
//
// A coloring is improper when a single color j has, in every relation, a
// tuple all of whose entries are colored j. Colors are 0-based here.

#include "hcsp/structure.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace hcsp {

struct Coloring {
    std::vector<std::size_t> colors;
    std::size_t num_colors = 0;
};

struct ImproperCheck {
    bool improper = false;
    /// Smallest color witnessing impropriety.
    std::optional<std::size_t> witness;
};

/// Whether every entry of t has color j.
inline bool monochromatic(const Tuple& t, const std::vector<std::size_t>& colors, std::size_t j)
{
    for (auto e : t)
        if (colors[e] != j)
            return false;
    return true;
}

/// True iff relation i holds a tuple monochromatic in color j.
inline bool has_monochromatic_tuple(
    const RelationalStructure& s, std::size_t i, const std::vector<std::size_t>& colors, std::size_t j)
{
    for (const auto& t : s.relation(i))
        if (monochromatic(t, colors, j))
            return true;
    return false;
}

inline ImproperCheck is_improper(const RelationalStructure& s, const Coloring& c)
{
    if (c.colors.size() != s.universe_size())
        throw std::invalid_argument("coloring is not total on the universe");
    for (auto col : c.colors)
        if (col >= c.num_colors)
            throw std::invalid_argument("color out of range");
    for (std::size_t j = 0; j < c.num_colors; ++j) {
        bool all = true;
        for (std::size_t i = 0; i < s.num_relations() && all; ++i)
            all = has_monochromatic_tuple(s, i, c.colors, j);
        if (all)
            return {true, j};
    }
    return {};
}

struct ChromaticResult {
    enum class Kind { Finite, Infinite, AboveBound };
    Kind kind = Kind::Finite;
    /// Chromatic number for Finite, the exhausted bound for AboveBound.
    std::size_t value = 0;

    static ChromaticResult finite(std::size_t v) { return {Kind::Finite, v}; }
    static ChromaticResult infinite() { return {Kind::Infinite, 0}; }
    static ChromaticResult above(std::size_t b) { return {Kind::AboveBound, b}; }

    [[nodiscard]] std::string str() const
    {
        switch (kind) {
        case Kind::Finite:
            return "Finite(" + std::to_string(value) + ")";
        case Kind::Infinite:
            return "Infinite";
        case Kind::AboveBound:
            return "AboveBound(" + std::to_string(value) + ")";
        }
        return {};
    }
    friend bool operator==(const ChromaticResult&, const ChromaticResult&) = default;
};

namespace detail {

    // Improper under the partial assignment of elements 0..upto-1 when some
    // color already has a fully assigned monochromatic tuple in every relation.
    // Assigning more elements can only add monochromatic tuples.
    inline bool partially_improper(const RelationalStructure& s, const std::vector<std::size_t>& colors,
        std::size_t upto, std::size_t used)
    {
        for (std::size_t j = 0; j < used; ++j) {
            bool all = true;
            for (std::size_t i = 0; i < s.num_relations() && all; ++i) {
                bool found = false;
                for (const auto& t : s.relation(i)) {
                    bool ok = true;
                    for (auto e : t)
                        if (e >= upto || colors[e] != j) {
                            ok = false;
                            break;
                        }
                    if (ok) {
                        found = true;
                        break;
                    }
                }
                all = found;
            }
            if (all)
                return true;
        }
        return false;
    }

    // Restricted-growth enumeration: element v may use colors 0..used, so the
    // first occurrence of color j follows the first occurrence of j-1.
    inline bool proper_search(const RelationalStructure& s, std::size_t max_colors, std::vector<std::size_t>& colors,
        std::size_t v, std::size_t used)
    {
        if (v == s.universe_size())
            return !partially_improper(s, colors, v, used);
        std::size_t limit = std::min(used + 1, max_colors);
        for (std::size_t j = 0; j < limit; ++j) {
            colors[v] = j;
            std::size_t nused = std::max(used, j + 1);
            if (partially_improper(s, colors, v + 1, nused))
                continue;
            if (proper_search(s, max_colors, colors, v + 1, nused))
                return true;
        }
        return false;
    }

}  // namespace detail

/// First proper coloring with at most n colors in restricted-growth order.
inline std::optional<Coloring> find_proper_coloring(const RelationalStructure& s, std::size_t n)
{
    if (n == 0)
        return s.universe_size() == 0 ? std::optional<Coloring>(Coloring{{}, 0}) : std::nullopt;
    std::vector<std::size_t> colors(s.universe_size(), 0);
    if (!detail::proper_search(s, n, colors, 0, 0))
        return std::nullopt;
    return Coloring{colors, n};
}

/// True iff no proper coloring with n colors exists.
inline bool chromatic_exceeds(const RelationalStructure& s, std::size_t n)
{
    return !find_proper_coloring(s, n).has_value();
}

/// Some element v has the constant tuple (v,...,v) in every relation.
inline std::optional<Element> constant_tuple_witness(const RelationalStructure& s)
{
    Tuple t;
    for (Element v = 0; v < s.universe_size(); ++v) {
        bool all = true;
        for (std::size_t i = 0; i < s.num_relations() && all; ++i) {
            t.assign(s.arity(i), v);
            all = s.contains(i, t);
        }
        if (all)
            return v;
    }
    return std::nullopt;
}

/// Generalized chromatic number. max_colors defaults to |V|, which suffices
/// whenever the result is finite.
inline ChromaticResult chromatic_number(const RelationalStructure& s, std::optional<std::size_t> max_colors = {})
{
    if (constant_tuple_witness(s))
        return ChromaticResult::infinite();
    std::size_t bound = max_colors.value_or(std::max<std::size_t>(s.universe_size(), 1));
    for (std::size_t m = 1; m <= bound; ++m)
        if (find_proper_coloring(s, m))
            return ChromaticResult::finite(m);
    return ChromaticResult::above(bound);
}

}  // namespace hcsp
