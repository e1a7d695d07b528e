#pragma once

// Finite-domain backtracking with forward checking over extensional
// (table) constraints. Variables are branched in index order and values in
// ascending order, so the first solution found is the lexicographically least.
//
// Shared by homomorphism search and the Siggers-operation quotient CSP.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace hcsp {

struct TableConstraint {
    std::vector<std::size_t> scope;
    /// Index into TableCsp::tables; tuples have the scope's length.
    std::size_t table = 0;
};

struct SearchStats {
    std::uint64_t nodes = 0;
    std::uint64_t failures = 0;
};

class TableCsp {
public:
    using Value = std::uint32_t;
    using Table = std::vector<std::vector<Value>>;

    TableCsp(std::size_t num_vars, std::size_t domain_size)
        : domain_size_(domain_size), domains_(num_vars, std::vector<char>(domain_size, 1)), watch_(num_vars)
    {
    }

    [[nodiscard]] std::size_t num_vars() const { return domains_.size(); }
    [[nodiscard]] std::size_t num_constraints() const { return constraints_.size(); }

    std::size_t add_table(Table tuples)
    {
        tables_.push_back(std::move(tuples));
        return tables_.size() - 1;
    }

    void add_constraint(std::vector<std::size_t> scope, std::size_t table)
    {
        if (table >= tables_.size())
            throw std::out_of_range("unknown constraint table");
        for (auto v : scope)
            if (v >= num_vars())
                throw std::out_of_range("constraint variable out of range");
        std::size_t id = constraints_.size();
        constraints_.push_back({std::move(scope), table});
        std::vector<std::size_t> seen;
        for (auto v : constraints_.back().scope) {
            bool dup = false;
            for (auto s : seen)
                dup |= s == v;
            if (!dup) {
                watch_[v].push_back(id);
                seen.push_back(v);
            }
        }
    }

    /// Restricts the initial domain of a variable to a single value.
    void pin(std::size_t var, Value value)
    {
        for (std::size_t a = 0; a < domain_size_; ++a)
            if (a != value)
                domains_.at(var)[a] = 0;
    }

    /// Lexicographically least solution, if any.
    std::optional<std::vector<Value>> solve(SearchStats* stats = nullptr) const
    {
        SearchStats local;
        SearchStats& st = stats ? *stats : local;
        auto domains = domains_;
        std::vector<Value> assignment(num_vars(), 0);
        std::vector<char> assigned(num_vars(), 0);

        // Initial consistency pass over every constraint.
        for (std::size_t c = 0; c < constraints_.size(); ++c)
            if (!filter(c, domains, assignment, assigned)) {
                ++st.failures;
                return std::nullopt;
            }
        if (search(0, domains, assignment, assigned, st))
            return assignment;
        return std::nullopt;
    }

private:
    std::size_t domain_size_;
    std::vector<std::vector<char>> domains_;
    std::vector<Table> tables_;
    std::vector<TableConstraint> constraints_;
    std::vector<std::vector<std::size_t>> watch_;

    bool search(std::size_t var, std::vector<std::vector<char>>& domains, std::vector<Value>& assignment,
        std::vector<char>& assigned, SearchStats& st) const
    {
        if (var == num_vars())
            return true;
        for (Value a = 0; a < domain_size_; ++a) {
            if (!domains[var][a])
                continue;
            ++st.nodes;
            auto saved = domains;
            assignment[var] = a;
            assigned[var] = 1;
            for (std::size_t b = 0; b < domain_size_; ++b)
                domains[var][b] = b == a;
            bool ok = true;
            for (auto c : watch_[var])
                if (!filter(c, domains, assignment, assigned)) {
                    ok = false;
                    break;
                }
            if (ok && search(var + 1, domains, assignment, assigned, st))
                return true;
            if (!ok)
                ++st.failures;
            assigned[var] = 0;
            domains = std::move(saved);
        }
        return false;
    }

    // Removes unsupported values from the unassigned variables of constraint c.
    // Returns false if some variable is wiped out or no tuple is compatible.
    bool filter(std::size_t c, std::vector<std::vector<char>>& domains, const std::vector<Value>& assignment,
        const std::vector<char>& assigned) const
    {
        const auto& con = constraints_[c];
        const auto& table = tables_[con.table];
        const std::size_t arity = con.scope.size();
        std::vector<std::vector<char>> support;
        std::vector<std::size_t> free_vars;
        for (auto v : con.scope)
            if (!assigned[v]) {
                bool dup = false;
                for (auto f : free_vars)
                    dup |= f == v;
                if (!dup)
                    free_vars.push_back(v);
            }
        support.assign(free_vars.size(), std::vector<char>(domain_size_, 0));
        bool any = false;
        for (const auto& t : table) {
            bool compatible = true;
            for (std::size_t p = 0; p < arity && compatible; ++p) {
                auto v = con.scope[p];
                if (t[p] >= domain_size_ || !domains[v][t[p]])
                    compatible = false;
                else if (assigned[v] && assignment[v] != t[p])
                    compatible = false;
                else
                    for (std::size_t q = 0; q < p; ++q)
                        if (con.scope[q] == v && t[q] != t[p]) {
                            compatible = false;
                            break;
                        }
            }
            if (!compatible)
                continue;
            any = true;
            for (std::size_t p = 0; p < arity; ++p) {
                auto v = con.scope[p];
                if (assigned[v])
                    continue;
                for (std::size_t f = 0; f < free_vars.size(); ++f)
                    if (free_vars[f] == v)
                        support[f][t[p]] = 1;
            }
        }
        if (!any)
            return false;
        for (std::size_t f = 0; f < free_vars.size(); ++f) {
            auto& dom = domains[free_vars[f]];
            bool nonempty = false;
            for (std::size_t a = 0; a < domain_size_; ++a) {
                dom[a] = dom[a] && support[f][a];
                nonempty |= dom[a] != 0;
            }
            if (!nonempty)
                return false;
        }
        return true;
    }
};

}  // namespace hcsp
