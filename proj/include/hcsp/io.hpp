#pragma once

// Line-based text formats for structures, languages (with optional lifted
// provenance), instances and operation tables. '#' starts a comment; tokens
// are separated by whitespace. Values are integers, p/q or INF.

#include "hcsp/lifting.hpp"
#include "hcsp/polymorphisms.hpp"
#include "hcsp/structure.hpp"
#include "hcsp/vcsp.hpp"

#include <cctype>
#include <charconv>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hcsp {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line), column_(column), message_(what)
    {
    }
    [[nodiscard]] std::size_t line() const { return line_; }
    [[nodiscard]] std::size_t column() const { return column_; }
    /// The message without the position prefix.
    [[nodiscard]] const std::string& message() const { return message_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string message_;
};

namespace detail {

    struct Token {
        std::string text;
        std::size_t line = 0;
        std::size_t col = 0;
    };

    class TokenLines {
    public:
        explicit TokenLines(std::string_view text)
        {
            std::size_t lineno = 0;
            std::size_t start = 0;
            while (start <= text.size()) {
                auto end = text.find('\n', start);
                if (end == std::string_view::npos)
                    end = text.size();
                ++lineno;
                auto line = text.substr(start, end - start);
                if (auto h = line.find('#'); h != std::string_view::npos)
                    line = line.substr(0, h);
                std::vector<Token> toks;
                std::size_t i = 0;
                while (i < line.size()) {
                    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
                        ++i;
                    std::size_t j = i;
                    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])))
                        ++j;
                    if (j > i)
                        toks.push_back({std::string(line.substr(i, j - i)), lineno, i + 1});
                    i = j;
                }
                if (!toks.empty())
                    lines_.push_back(std::move(toks));
                last_line_ = lineno;
                if (end == text.size())
                    break;
                start = end + 1;
            }
        }

        [[nodiscard]] bool done() const { return pos_ >= lines_.size(); }

        const std::vector<Token>& next(const char* expecting)
        {
            if (done())
                throw ParseError(last_line_, 1, std::string("unexpected end of input, expected ") + expecting);
            return lines_[pos_++];
        }

        [[nodiscard]] const std::vector<Token>& peek(const char* expecting) const
        {
            if (done())
                throw ParseError(last_line_, 1, std::string("unexpected end of input, expected ") + expecting);
            return lines_[pos_];
        }

    private:
        std::vector<std::vector<Token>> lines_;
        std::size_t pos_ = 0;
        std::size_t last_line_ = 0;
    };

    [[noreturn]] inline void fail(const Token& t, const std::string& what) { throw ParseError(t.line, t.col, what); }

    inline void expect_count(const std::vector<Token>& line, std::size_t n, const char* what)
    {
        if (line.size() != n) {
            const auto& t = line.size() > n ? line[n] : line.back();
            fail(t, std::string("expected ") + std::to_string(n) + " tokens in " + what + " line");
        }
    }

    inline void expect_word(const Token& t, const char* word)
    {
        if (t.text != word)
            fail(t, std::string("expected '") + word + "', found '" + t.text + "'");
    }

    inline std::uint64_t parse_uint(const Token& t)
    {
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || p != t.text.data() + t.text.size())
            fail(t, "expected a nonnegative integer, found '" + t.text + "'");
        return v;
    }

    inline CostValue parse_value(const Token& t)
    {
        try {
            return CostValue::parse(t.text);
        } catch (const std::exception& e) {
            fail(t, std::string("bad value '") + t.text + "': " + e.what());
        }
    }

    inline Rational parse_weight(const Token& t)
    {
        if (t.text == "INF" || t.text == "inf")
            fail(t, "weight must be finite");
        Rational w;
        try {
            w = Rational::parse(t.text);
        } catch (const std::exception& e) {
            fail(t, std::string("bad weight '") + t.text + "': " + e.what());
        }
        if (w.sign() <= 0)
            fail(t, "weight must be strictly positive");
        return w;
    }

    inline void check_name(const Token& t)
    {
        for (char c : t.text)
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == '@' || c == ','))
                fail(t, "invalid character in name '" + t.text + "'");
    }

    inline std::string join_values(const std::vector<Value>& x)
    {
        std::string s;
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (j)
                s += ' ';
            s += std::to_string(x[j]);
        }
        return s;
    }

}  // namespace detail

// ---------------------------------------------------------------------------
// STRUCTURE

struct StructureDoc {
    RelationalStructure structure;
    std::vector<std::string> relation_names;
};

inline std::string default_relation_name(std::size_t i) { return "r" + std::to_string(i + 1); }

inline StructureDoc parse_structure(std::string_view text)
{
    detail::TokenLines in(text);
    auto& head = in.next("STRUCTURE");
    detail::expect_word(head[0], "STRUCTURE");
    detail::expect_count(head, 1, "STRUCTURE");
    auto& el = in.next("ELEMENTS");
    detail::expect_word(el[0], "ELEMENTS");
    detail::expect_count(el, 2, "ELEMENTS");
    const auto n = detail::parse_uint(el[1]);
    if (n > UINT32_MAX)
        detail::fail(el[1], "too many elements");

    std::vector<std::size_t> arities;
    std::vector<std::vector<Tuple>> rels;
    std::vector<std::string> names;
    while (true) {
        auto& line = in.next("REL or END");
        if (line[0].text == "END") {
            detail::expect_count(line, 1, "END");
            break;
        }
        detail::expect_word(line[0], "REL");
        detail::expect_count(line, 4, "REL");
        detail::check_name(line[1]);
        detail::expect_word(line[2], "ARITY");
        const auto a = detail::parse_uint(line[3]);
        if (a == 0)
            detail::fail(line[3], "arity must be positive");
        for (const auto& nm : names)
            if (nm == line[1].text)
                detail::fail(line[1], "duplicate relation name '" + nm + "'");
        names.push_back(line[1].text);
        arities.push_back(a);
        rels.emplace_back();
        while (!in.done()) {
            const auto& row = in.peek("tuple");
            if (row[0].text == "REL" || row[0].text == "END")
                break;
            in.next("tuple");
            if (row.size() != a)
                detail::fail(row.size() > a ? row[a] : row.back(), "tuple length differs from arity");
            Tuple t(a);
            for (std::size_t j = 0; j < a; ++j) {
                auto v = detail::parse_uint(row[j]);
                if (v >= n)
                    detail::fail(row[j], "tuple entry " + row[j].text + " is not below ELEMENTS");
                t[j] = static_cast<Element>(v);
            }
            rels.back().push_back(std::move(t));
        }
    }
    if (!in.done())
        detail::fail(in.peek("end of input")[0], "content after END");
    if (arities.empty())
        throw ParseError(1, 1, "structure needs at least one relation");
    return {RelationalStructure(n, Signature{arities}, std::move(rels)), names};
}

inline std::string serialize_structure(const RelationalStructure& s, const std::vector<std::string>& names = {})
{
    std::ostringstream os;
    os << "STRUCTURE\nELEMENTS " << s.universe_size() << "\n";
    for (std::size_t i = 0; i < s.num_relations(); ++i) {
        os << "REL " << (i < names.size() ? names[i] : default_relation_name(i)) << " ARITY " << s.arity(i) << "\n";
        for (const auto& t : s.relation(i))
            os << detail::join_values(t) << "\n";
    }
    os << "END\n";
    return os.str();
}

inline std::string serialize_structure(const StructureDoc& d) { return serialize_structure(d.structure, d.relation_names); }

// ---------------------------------------------------------------------------
// LANGUAGE

struct LanguageDoc {
    ValuedLanguage language;
    /// Present for lifted languages.
    std::optional<LiftedDomain> lifted_domain;
    std::vector<Provenance> provenance;

    [[nodiscard]] bool lifted() const { return lifted_domain.has_value(); }

    [[nodiscard]] LiftedLanguage as_lifted() const
    {
        if (!lifted())
            throw std::invalid_argument("language has no LIFTED section");
        return {*lifted_domain, std::make_shared<ValuedLanguage>(language), provenance};
    }
};

inline LanguageDoc parse_language(std::string_view text)
{
    detail::TokenLines in(text);
    auto& head = in.next("LANGUAGE");
    detail::expect_word(head[0], "LANGUAGE");
    detail::expect_count(head, 1, "LANGUAGE");
    auto& dl = in.next("DOMAIN");
    detail::expect_word(dl[0], "DOMAIN");
    detail::expect_count(dl, 2, "DOMAIN");
    const auto d = detail::parse_uint(dl[1]);
    if (d == 0)
        detail::fail(dl[1], "domain must be nonempty");

    LanguageDoc doc;
    doc.language.domain_size = d;
    while (true) {
        auto& line = in.next("FUNC, LIFTED or END");
        if (line[0].text == "END" || line[0].text == "LIFTED") {
            if (line[0].text == "END") {
                detail::expect_count(line, 1, "END");
                break;
            }
            detail::expect_count(line, 5, "LIFTED");
            detail::expect_word(line[1], "BASEDOMAIN");
            detail::expect_word(line[3], "VERTICES");
            const auto b = detail::parse_uint(line[2]);
            const auto nv = detail::parse_uint(line[4]);
            if (b == 0 || b * nv != d)
                detail::fail(line[2], "BASEDOMAIN * VERTICES must equal DOMAIN");
            doc.lifted_domain = LiftedDomain(b, nv);
            doc.provenance.assign(doc.language.size(), Provenance{});
            std::vector<char> seen(doc.language.size(), 0);
            while (true) {
                auto& pl = in.next("PROV or END");
                if (pl[0].text == "END") {
                    detail::expect_count(pl, 1, "END");
                    break;
                }
                detail::expect_word(pl[0], "PROV");
                if (pl.size() < 3)
                    detail::fail(pl.back(), "incomplete PROV line");
                auto idx = doc.language.find(pl[1].text);
                if (!idx)
                    detail::fail(pl[1], "unknown function '" + pl[1].text + "'");
                if (seen[*idx])
                    detail::fail(pl[1], "duplicate provenance for '" + pl[1].text + "'");
                seen[*idx] = 1;
                Provenance p;
                const auto ar = doc.language.functions[*idx].arity();
                if (pl[2].text == "LIFT") {
                    detail::expect_count(pl, 4 + ar, "PROV LIFT");
                    p.kind = Provenance::Kind::Lifted;
                    p.relation = detail::parse_uint(pl[3]);
                    for (std::size_t j = 0; j < ar; ++j) {
                        auto v = detail::parse_uint(pl[4 + j]);
                        if (v >= nv)
                            detail::fail(pl[4 + j], "vertex out of range");
                        p.vertices.push_back(static_cast<Element>(v));
                    }
                } else if (pl[2].text == "COPY") {
                    detail::expect_count(pl, 4, "PROV COPY");
                    if (ar != 1)
                        detail::fail(pl[2], "COPY provenance needs a unary function");
                    p.kind = Provenance::Kind::Copy;
                    auto v = detail::parse_uint(pl[3]);
                    if (v >= nv)
                        detail::fail(pl[3], "vertex out of range");
                    p.vertices.push_back(static_cast<Element>(v));
                } else if (pl[2].text == "DELTA") {
                    detail::expect_count(pl, 3, "PROV DELTA");
                    if (ar != 1)
                        detail::fail(pl[2], "DELTA provenance needs a unary function");
                    p.kind = Provenance::Kind::Delta;
                } else {
                    detail::fail(pl[2], "expected LIFT, COPY or DELTA");
                }
                doc.provenance[*idx] = std::move(p);
            }
            for (std::size_t i = 0; i < seen.size(); ++i)
                if (!seen[i])
                    detail::fail(line[0], "function '" + doc.language.name(i) + "' lacks provenance");
            break;
        }
        detail::expect_word(line[0], "FUNC");
        detail::expect_count(line, 6, "FUNC");
        detail::check_name(line[1]);
        if (doc.language.find(line[1].text))
            detail::fail(line[1], "duplicate function name '" + line[1].text + "'");
        detail::expect_word(line[2], "ARITY");
        detail::expect_word(line[4], "DEFAULT");
        const auto a = detail::parse_uint(line[3]);
        if (a == 0)
            detail::fail(line[3], "arity must be positive");
        auto size = checked_power(d, a);
        if (!size)
            detail::fail(line[3], "table size overflows");
        const auto fill = detail::parse_value(line[5]);
        std::map<std::uint64_t, CostValue> cells;
        std::vector<Value> x(a);
        while (true) {
            auto& row = in.next("table row or ENDFUNC");
            if (row[0].text == "ENDFUNC") {
                detail::expect_count(row, 1, "ENDFUNC");
                break;
            }
            if (row.size() != a + 1)
                detail::fail(row.back(), "table row needs " + std::to_string(a) + " entries and a value");
            for (std::size_t j = 0; j < a; ++j) {
                auto v = detail::parse_uint(row[j]);
                if (v >= d)
                    detail::fail(row[j], "entry outside domain");
                x[j] = static_cast<Value>(v);
            }
            auto code = encode_tuple(x, d);
            if (!cells.emplace(code, detail::parse_value(row[a])).second)
                detail::fail(row[0], "duplicate table row");
        }
        if (*size <= kDenseLimit) {
            std::vector<CostValue> t(*size, fill);
            for (const auto& [i, c] : cells)
                t[i] = c;
            doc.language.functions.push_back(CostFunction::dense(d, a, std::move(t)));
        } else {
            doc.language.functions.push_back(
                CostFunction::sparse(d, a, fill, std::vector<std::pair<std::uint64_t, CostValue>>(cells.begin(), cells.end())));
        }
        doc.language.names.push_back(line[1].text);
    }
    if (!in.done())
        detail::fail(in.peek("end of input")[0], "content after END");
    return doc;
}

inline std::string serialize_language(const ValuedLanguage& lang, const std::optional<LiftedDomain>& ld = {},
    const std::vector<Provenance>& prov = {})
{
    std::ostringstream os;
    os << "LANGUAGE\nDOMAIN " << lang.domain_size << "\n";
    std::vector<Value> x;
    for (std::size_t i = 0; i < lang.size(); ++i) {
        const auto& f = lang.functions[i];
        auto [fill, cells] = f.canonical_cells();
        os << "FUNC " << lang.name(i) << " ARITY " << f.arity() << " DEFAULT " << fill << "\n";
        x.resize(f.arity());
        for (const auto& [code, c] : cells) {
            decode_tuple(code, f.domain_size(), x);
            os << detail::join_values(x) << " " << c << "\n";
        }
        os << "ENDFUNC\n";
    }
    if (ld) {
        if (prov.size() != lang.size())
            throw std::invalid_argument("serialize_language: provenance count differs from function count");
        os << "LIFTED BASEDOMAIN " << ld->base_size() << " VERTICES " << ld->num_vertices() << "\n";
        for (std::size_t i = 0; i < lang.size(); ++i) {
            const auto& p = prov[i];
            os << "PROV " << lang.name(i);
            switch (p.kind) {
            case Provenance::Kind::Lifted:
                os << " LIFT " << p.relation << " " << detail::join_values(p.vertices);
                break;
            case Provenance::Kind::Copy:
                os << " COPY " << p.vertices.at(0);
                break;
            case Provenance::Kind::Delta:
                os << " DELTA";
                break;
            }
            os << "\n";
        }
    }
    os << "END\n";
    return os.str();
}

inline std::string serialize_language(const LanguageDoc& d)
{
    return serialize_language(d.language, d.lifted_domain, d.provenance);
}

inline std::string serialize_language(const LiftedLanguage& l)
{
    return serialize_language(*l.language, l.domain, l.provenance);
}

// ---------------------------------------------------------------------------
// INSTANCE

struct InstanceDoc {
    struct Cons {
        std::string function;
        Rational weight{1};
        std::vector<std::size_t> vars;
        std::size_t line = 0;
    };
    std::string language_name;
    std::size_t num_vars = 0;
    std::vector<Cons> constraints;
};

inline InstanceDoc parse_instance(std::string_view text)
{
    detail::TokenLines in(text);
    auto& head = in.next("INSTANCE");
    detail::expect_word(head[0], "INSTANCE");
    detail::expect_count(head, 1, "INSTANCE");
    auto& ll = in.next("LANGUAGE");
    detail::expect_word(ll[0], "LANGUAGE");
    detail::expect_count(ll, 2, "LANGUAGE");
    detail::check_name(ll[1]);
    auto& vl = in.next("VARS");
    detail::expect_word(vl[0], "VARS");
    detail::expect_count(vl, 2, "VARS");
    InstanceDoc doc;
    doc.language_name = ll[1].text;
    doc.num_vars = detail::parse_uint(vl[1]);
    while (true) {
        auto& line = in.next("CONS or END");
        if (line[0].text == "END") {
            detail::expect_count(line, 1, "END");
            break;
        }
        detail::expect_word(line[0], "CONS");
        if (line.size() < 4)
            detail::fail(line.back(), "CONS needs a function, a weight and at least one variable");
        InstanceDoc::Cons c{line[1].text, detail::parse_weight(line[2]), {}, line[0].line};
        for (std::size_t j = 3; j < line.size(); ++j) {
            auto v = detail::parse_uint(line[j]);
            if (v >= doc.num_vars)
                detail::fail(line[j], "variable out of range");
            c.vars.push_back(v);
        }
        doc.constraints.push_back(std::move(c));
    }
    if (!in.done())
        detail::fail(in.peek("end of input")[0], "content after END");
    return doc;
}

/// Resolves function names against a language.
inline Instance bind_instance(const InstanceDoc& doc, std::shared_ptr<const ValuedLanguage> lang)
{
    Instance inst{lang, doc.num_vars, {}};
    for (const auto& c : doc.constraints) {
        auto idx = lang->find(c.function);
        if (!idx)
            throw ParseError(c.line, 1, "unknown function '" + c.function + "'");
        if (lang->functions[*idx].arity() != c.vars.size())
            throw ParseError(c.line, 1, "scope length differs from the arity of '" + c.function + "'");
        inst.constraints.push_back({*idx, c.vars, c.weight});
    }
    return inst;
}

inline std::string serialize_instance(const Instance& inst, const std::string& language_name = "L")
{
    std::ostringstream os;
    os << "INSTANCE\nLANGUAGE " << language_name << "\nVARS " << inst.num_vars << "\n";
    for (const auto& c : inst.constraints) {
        os << "CONS " << inst.language->name(c.function) << " " << c.weight;
        for (auto v : c.vars)
            os << " " << v;
        os << "\n";
    }
    os << "END\n";
    return os.str();
}

inline std::string serialize_instance(const InstanceDoc& doc)
{
    std::ostringstream os;
    os << "INSTANCE\nLANGUAGE " << doc.language_name << "\nVARS " << doc.num_vars << "\n";
    for (const auto& c : doc.constraints) {
        os << "CONS " << c.function << " " << c.weight;
        for (auto v : c.vars)
            os << " " << v;
        os << "\n";
    }
    os << "END\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// OPERATION blocks and STP/MJN files

namespace detail {

    inline Operation parse_operation_block(TokenLines& in, const std::vector<Token>& head, std::string& name)
    {
        expect_word(head[0], "OPERATION");
        expect_count(head, 6, "OPERATION");
        check_name(head[1]);
        name = head[1].text;
        expect_word(head[2], "ARITY");
        expect_word(head[4], "DOMAIN");
        const auto m = parse_uint(head[3]);
        const auto d = parse_uint(head[5]);
        if (m == 0 || d == 0)
            fail(head[3], "arity and domain must be positive");
        auto size = checked_power(d, m);
        if (!size || *size > kDenseLimit)
            fail(head[3], "operation table too large");
        Operation op{d, m, {}};
        while (true) {
            auto& row = in.next("operation row or ENDOP");
            if (row[0].text == "ENDOP") {
                expect_count(row, 1, "ENDOP");
                break;
            }
            if (row.size() != d)
                fail(row.back(), "operation rows hold DOMAIN entries");
            for (const auto& t : row) {
                auto v = parse_uint(t);
                if (v >= d)
                    fail(t, "operation value outside domain");
                op.table.push_back(static_cast<Value>(v));
            }
        }
        if (op.table.size() != *size)
            fail(head[0], "operation table has " + std::to_string(op.table.size()) + " entries, expected "
                    + std::to_string(*size));
        return op;
    }

}  // namespace detail

inline std::string serialize_operation(const Operation& op, const std::string& name)
{
    std::ostringstream os;
    os << "OPERATION " << name << " ARITY " << op.arity << " DOMAIN " << op.domain_size << "\n";
    for (std::size_t i = 0; i < op.table.size(); i += op.domain_size) {
        for (std::size_t j = 0; j < op.domain_size; ++j)
            os << (j ? " " : "") << op.table[i + j];
        os << "\n";
    }
    os << "ENDOP\n";
    return os.str();
}

/// Sequence of OPERATION blocks.
inline std::vector<std::pair<std::string, Operation>> parse_operations(std::string_view text)
{
    detail::TokenLines in(text);
    std::vector<std::pair<std::string, Operation>> out;
    while (!in.done()) {
        auto& head = in.next("OPERATION");
        std::string name;
        auto op = detail::parse_operation_block(in, head, name);
        out.emplace_back(name, std::move(op));
    }
    return out;
}

/// STPMJN / DOMAIN d / PAIRS a b ... / five OPERATION blocks
/// (meet, join, mjn1, mjn2, mjn3) / END
inline std::string serialize_stpmjn(const StpMjn& t)
{
    std::ostringstream os;
    os << "STPMJN\nDOMAIN " << t.meet.domain_size << "\nPAIRS";
    for (auto [a, b] : t.pairs.pairs())
        os << " " << a << " " << b;
    os << "\n";
    os << serialize_operation(t.meet, "meet") << serialize_operation(t.join, "join");
    for (std::size_t o = 0; o < 3; ++o)
        os << serialize_operation(t.mjn[o], "mjn" + std::to_string(o + 1));
    os << "END\n";
    return os.str();
}

inline StpMjn parse_stpmjn(std::string_view text)
{
    detail::TokenLines in(text);
    auto& head = in.next("STPMJN");
    detail::expect_word(head[0], "STPMJN");
    detail::expect_count(head, 1, "STPMJN");
    auto& dl = in.next("DOMAIN");
    detail::expect_word(dl[0], "DOMAIN");
    detail::expect_count(dl, 2, "DOMAIN");
    const auto d = detail::parse_uint(dl[1]);
    auto& pl = in.next("PAIRS");
    detail::expect_word(pl[0], "PAIRS");
    if (pl.size() % 2 == 0)
        detail::fail(pl.back(), "PAIRS needs an even number of entries");
    StpMjn t;
    t.pairs = SymmetricPairSet(d);
    for (std::size_t j = 1; j < pl.size(); j += 2) {
        auto a = detail::parse_uint(pl[j]);
        auto b = detail::parse_uint(pl[j + 1]);
        if (a >= d || b >= d || a == b)
            detail::fail(pl[j], "pair entries must be distinct domain values");
        t.pairs.insert(static_cast<Value>(a), static_cast<Value>(b));
    }
    const char* names[] = {"meet", "join", "mjn1", "mjn2", "mjn3"};
    Operation* slots[] = {&t.meet, &t.join, &t.mjn[0], &t.mjn[1], &t.mjn[2]};
    const std::size_t arities[] = {2, 2, 3, 3, 3};
    for (std::size_t k = 0; k < 5; ++k) {
        auto& h = in.next("OPERATION");
        std::string name;
        *slots[k] = detail::parse_operation_block(in, h, name);
        if (name != names[k])
            detail::fail(h[1], std::string("expected operation '") + names[k] + "'");
        if (slots[k]->arity != arities[k] || slots[k]->domain_size != d)
            detail::fail(h[3], "operation shape does not match");
    }
    auto& end = in.next("END");
    detail::expect_word(end[0], "END");
    if (!in.done())
        detail::fail(in.peek("end of input")[0], "content after END");
    return t;
}

}  // namespace hcsp
