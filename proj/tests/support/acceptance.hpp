#pragma once

// The acceptance suite: twelve criteria, each checked against brute-force
// oracles under a wall-clock limit. Shared by the acceptance binary and the
// CLI selftest.

#include "hcsp/hcsp.hpp"
#include "oracles.hpp"

#include <chrono>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace acceptance {

using namespace hcsp;

struct CriterionResult {
    int id = 0;
    std::string title;
    bool checks_ok = false;
    double seconds = 0;
    /// Wall-clock limit in seconds; 0 means none.
    double limit = 0;
    std::string detail;

    [[nodiscard]] bool passed() const { return checks_ok && (limit <= 0 || seconds < limit); }

    [[nodiscard]] std::string line() const
    {
        std::ostringstream os;
        os << (passed() ? "PASS" : "FAIL") << " [" << id << "] " << title << " :: " << detail;
        os.setf(std::ios::fixed);
        os.precision(3);
        os << " (" << seconds << " s";
        if (limit > 0)
            os << ", limit " << limit << " s";
        os << ")";
        return os.str();
    }
};

// Collects failures with a short description; the first few are reported.
class Checker {
public:
    void expect(bool ok, const std::string& what)
    {
        ++checks_;
        if (!ok) {
            ++failures_;
            if (notes_.size() < 3)
                notes_.push_back(what);
        }
    }
    [[nodiscard]] bool ok() const { return failures_ == 0; }
    [[nodiscard]] std::string summary(const std::string& extra) const
    {
        std::string s = std::to_string(checks_ - failures_) + "/" + std::to_string(checks_) + " checks";
        if (!extra.empty())
            s += ", " + extra;
        for (const auto& n : notes_)
            s += "; failed: " + n;
        return s;
    }

private:
    std::size_t checks_ = 0;
    std::size_t failures_ = 0;
    std::vector<std::string> notes_;
};

template <typename Body>
CriterionResult timed(int id, std::string title, double limit, Body&& body)
{
    CriterionResult r{id, std::move(title), false, 0, limit, {}};
    auto t0 = std::chrono::steady_clock::now();
    try {
        Checker c;
        std::string extra = body(c);
        r.checks_ok = c.ok();
        r.detail = c.summary(extra);
    } catch (const std::exception& e) {
        r.checks_ok = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline std::shared_ptr<const ValuedLanguage> shared(ValuedLanguage l) { return std::make_shared<const ValuedLanguage>(std::move(l)); }

inline CostFunction cut_function()
{
    return CostFunction::dense(2, 2, {CostValue(0), CostValue(1), CostValue(1), CostValue(0)});
}

inline CostFunction one_in_three()
{
    return CostFunction::from_relation(2, 3, {{0, 0, 1}, {0, 1, 0}, {1, 0, 0}});
}

// ---------------------------------------------------------------------------

inline CriterionResult chromatic_generalization()
{
    return timed(1, "chromatic number generalizes graph coloring", 5.0, [](Checker& c) {
        struct Case {
            std::string name;
            Graph g;
            std::size_t expected;
        };
        std::vector<Case> cases;
        for (std::size_t n = 2; n <= 6; ++n)
            cases.push_back({"K" + std::to_string(n), complete_graph(n), n});
        cases.push_back({"C5", cycle_graph(5), 3});
        cases.push_back({"C4", cycle_graph(4), 2});
        cases.push_back({"C6", cycle_graph(6), 2});
        cases.push_back({"P5", Graph::make(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}), 2});
        cases.push_back({"K2,3", Graph::make(5, {{0, 2}, {0, 3}, {0, 4}, {1, 2}, {1, 3}, {1, 4}}), 2});
        cases.push_back({"K1,4", Graph::make(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}), 2});
        SplitMix64 rng(2024);
        for (int t = 0; t < 5; ++t) {
            const std::size_t a = rng.between(1, 3), b = rng.between(1, 3);
            std::vector<std::pair<Element, Element>> e;
            for (Element u = 0; u < a; ++u)
                for (Element v = 0; v < b; ++v)
                    if (rng.chance(1, 2) || (u == 0 && v == 0))
                        e.emplace_back(u, static_cast<Element>(a + v));
            cases.push_back({"bipartite#" + std::to_string(t), Graph::make(a + b, e), 2});
        }
        for (const auto& k : cases) {
            auto got = chromatic_number(k.g.symmetric_structure());
            auto ref = oracle::graph_chromatic_number(k.g.n, k.g.edges);
            c.expect(ref == k.expected, k.name + " oracle");
            c.expect(got == ChromaticResult::finite(ref), k.name + " = " + got.str());
        }
        return std::to_string(cases.size()) + " graphs";
    });
}

inline CriterionResult infinite_chromatic()
{
    return timed(2, "infinite chromatic number criterion", 0, [](Checker& c) {
        RelationalStructure single(1, Signature{{1}}, {{{0}}});
        c.expect(chromatic_number(single) == ChromaticResult::infinite(), "single unary structure");
        std::size_t infinite = 0;
        for (std::uint64_t seed = 1; seed <= 500; ++seed) {
            SplitMix64 rng(seed);
            auto s = random_structure(rng, 5, Signature{{1, 2}}, 1, 3);
            bool criterion = constant_tuple_witness(s).has_value();
            auto ref = oracle::generalized_chromatic(s, 5);
            c.expect(criterion == !ref.has_value(), "seed " + std::to_string(seed));
            auto got = chromatic_number(s);
            c.expect(ref ? got == ChromaticResult::finite(*ref) : got == ChromaticResult::infinite(),
                "chromatic_number seed " + std::to_string(seed));
            infinite += criterion;
        }
        return std::to_string(infinite) + "/500 infinite";
    });
}

inline CriterionResult ordered_witnesses()
{
    return timed(3, "ordered witnesses exceed n colors", 10.0, [](Checker& c) {
        for (auto [n, m] : std::vector<std::pair<std::size_t, std::size_t>>{{2, 2}, {3, 2}, {2, 3}, {3, 3}}) {
            auto s = ordered_witness(n, m);
            c.expect(s.universe_size() == n * (m - 1) + 1, "universe size");
            c.expect(chromatic_exceeds(s, n), "(" + std::to_string(n) + "," + std::to_string(m) + ")");
            c.expect(!chromatic_exceeds(s, n + 1), "n+1 colors suffice");
        }
        return std::string("4 parameter pairs");
    });
}

inline CriterionResult lifted_reduction(std::uint64_t trials = 200, std::uint64_t base = 0)
{
    return timed(4, "lifted instances reduce to the base language", 60.0, [=](Checker& c) {
        std::size_t infeasible = 0, reduced = 0;
        for (std::uint64_t seed = 1; seed <= trials; ++seed) {
            SplitMix64 rng(base + seed);
            auto t = random_lifted_trial(rng);
            auto opt = solve_bruteforce(t.instance);
            auto res = reduce_lifted_instance(t.lifted, t.base, t.r, t.instance);
            const auto tag = "seed " + std::to_string(seed);
            if (auto* ti = std::get_if<TriviallyInfeasible>(&res)) {
                ++infeasible;
                c.expect(opt.value.is_infinite(), tag + " conflict but finite optimum");
                (void)ti;
                continue;
            }
            ++reduced;
            const auto& cert = std::get<ReductionCertificate>(res);
            c.expect(cert.hom_check.ok, tag + " phi is not a homomorphism");
            auto red = solve_bruteforce(cert.reduced);
            c.expect(opt.value == red.value + cert.preprocessing.offset, tag + " optima differ");
            auto h = pull_back_solution(cert, t.lifted.domain, red.assignment);
            c.expect(evaluate(t.instance, h) == opt.value, tag + " pulled-back cost");
        }
        return std::to_string(reduced) + " reduced, " + std::to_string(infeasible) + " trivially infeasible";
    });
}

inline CriterionResult unary_folding(std::uint64_t trials = 100, std::uint64_t base = 1000)
{
    return timed(5, "folding unaries preserves the optimum", 30.0, [=](Checker& c) {
        std::size_t finite = 0;
        for (std::uint64_t seed = 1; seed <= trials; ++seed) {
            SplitMix64 rng(base + seed);
            auto t = random_fold_trial(rng);
            auto folded = fold_unaries(t.lifted, t.extended, *t.base, t.r, t.instance);
            const auto tag = "seed " + std::to_string(seed);
            bool only_lifted = true;
            for (const auto& con : folded.constraints)
                only_lifted = only_lifted && con.function < t.lifted.size();
            c.expect(only_lifted, tag + " folded instance leaves the lifted language");
            auto a = solve_bruteforce(t.instance);
            auto b = solve_bruteforce(folded);
            c.expect(a.value == b.value, tag + " optima differ");
            finite += a.value.is_finite();
        }
        return std::to_string(finite) + " finite optima";
    });
}

inline CriterionResult siggers_machinery()
{
    return timed(6, "Siggers operations and pairs", 10.0, [](Checker& c) {
        c.expect(is_siggers_operation(boolean_and(6), {0, 1}), "AND6");
        c.expect(!is_siggers_operation(Operation::projection(2, 6, 0), {0, 1}), "projection rejected");

        auto neq = make_language(2, {neq_relation(2)}, {"neq"});
        auto s1 = find_siggers_pair(neq);
        c.expect(s1.pair.has_value() && is_admitted_pair(*s1.pair, neq), "neq2 pair");

        auto full = make_language(2, {CostFunction::constant(2, 2, CostValue(0))}, {"full"});
        auto s2 = find_siggers_pair(full);
        c.expect(s2.pair.has_value() && is_admitted_pair(*s2.pair, full), "full relation pair");

        auto hard = make_language(2, {one_in_three()}, {"one_in_three"});
        auto s3 = find_siggers_pair(hard);
        c.expect(!s3.pair.has_value(), "one-in-three refuted");
        c.expect(s3.attempts.size() == 1 && s3.attempts[0].tuples == 64 && s3.attempts[0].raw_constraints == 729,
            "one-in-three quotient shape");
        std::string extra;
        if (!s3.attempts.empty())
            extra = "one-in-three: " + std::to_string(s3.attempts[0].classes) + " classes, "
                + std::to_string(s3.attempts[0].constraints) + " distinct constraints, "
                + std::to_string(s3.attempts[0].stats.nodes) + " nodes";
        return extra;
    });
}

inline CriterionResult conservative_classification()
{
    return timed(7, "conservative classification", 10.0, [](Checker& c) {
        auto cut = conservative_language(2, {cut_function()});
        auto res = classify_conservative(*cut);
        c.expect(res.tractable() && res.witness.has_value(), "cut language tractable");
        if (res.witness) {
            const auto& w = *res.witness;
            c.expect(is_stp(w.meet, w.join, w.pairs), "STP verified");
            c.expect(is_mjn(w.mjn[0], w.mjn[1], w.mjn[2], w.pairs.complement()), "MJN verified");
            c.expect(is_fractional_polymorphism(w.sigma(), *cut).ok, "sigma fractional polymorphism");
            c.expect(is_fractional_polymorphism(w.mu(), *cut).ok, "mu fractional polymorphism");
            c.expect(w.pairs == SymmetricPairSet::full(2) && w.meet == op_min(2) && w.join == op_max(2),
                "first witness is (min,max) on P");
        }
        auto mw = classify_conservative(*mwis_language());
        c.expect(!mw.tractable(), "independent-set language hard");
        c.expect(exhaustion_complete(mw), "exhaustion transcript complete");
        std::size_t pruned = 0;
        for (const auto& a : mw.attempts)
            pruned += a.stp.pruned.size() + (a.mjn ? a.mjn->pruned.size() : 0);
        return std::to_string(pruned) + " pruned families in the hardness transcript";
    });
}

inline CriterionResult mwis_equivalence(std::uint64_t trials = 100, std::uint64_t base = 5000)
{
    return timed(8, "independent set and VCSP are equivalent", 30.0, [=](Checker& c) {
        std::uint64_t matches = 0;
        for (std::uint64_t seed = 1; seed <= trials; ++seed) {
            SplitMix64 rng(base + seed);
            auto g = random_weighted_graph(rng, rng.between(1, 8));
            const auto tag = "seed " + std::to_string(seed);
            auto best = oracle::mwis(g.graph.n, g.graph.edges, g.weights);
            auto enc = mwis_to_vcsp(g);
            auto sol = solve_bruteforce(enc.instance);
            c.expect(sol.value + CostValue(enc.offset) == CostValue(-best), tag + " forward");
            auto back = solve_via_mwis(enc.instance);
            c.expect(back.value + CostValue(enc.offset) == CostValue(-best), tag + " backward");
            Rational w(0);
            bool indep = true;
            for (auto [u, v] : g.graph.edges)
                indep = indep && !(back.assignment[u] == 1 && back.assignment[v] == 1);
            for (std::size_t v = 0; v < g.graph.n; ++v)
                if (back.assignment[v] == 1)
                    w += g.weights[v];
            c.expect(indep && w == best, tag + " assembled set");
            matches += sol.value + CostValue(enc.offset) == CostValue(-best) && back.value == sol.value && indep && w == best;
        }
        return std::to_string(matches) + "/" + std::to_string(trials) + " optimum matches";
    });
}

inline CriterionResult hard_language_demo(std::uint64_t trials = 50, std::uint64_t base = 9000)
{
    return timed(9, "hard language gadget and coloring witness", 30.0, [=](Checker& c) {
        for (const auto& ar : std::vector<std::vector<std::size_t>>{{2}, {1, 2}}) {
            auto h = build_hard_language(ar, 3);
            auto rho = neq_gadget(h);
            auto dp = gadget_support(h);
            auto in_dp = [&](Value x) { return std::find(dp.begin(), dp.end(), x) != dp.end(); };
            const auto d = h.language->domain_size;
            bool same = true;
            for (Value x = 0; x < d; ++x)
                for (Value y = 0; y < d; ++y) {
                    CostValue want = in_dp(x) && in_dp(y) && x != y ? CostValue(0) : CostValue::infinity();
                    same = same && rho({x, y}) == want;
                }
            c.expect(same, "gadget table");
            c.expect(express(neq_gadget_instance(h), {0, 1}) == rho, "expressed gadget");
        }
        std::size_t resampled = 0;
        for (std::uint64_t seed = 1; seed <= trials; ++seed) {
            SplitMix64 rng(base + seed);
            std::vector<std::size_t> ar = seed % 2 ? std::vector<std::size_t>{2} : std::vector<std::size_t>{1, 2};
            auto h = build_hard_language(ar, 3);
            RelationalStructure s;
            while (true) {
                s = random_ordered_structure(rng, rng.between(3, 6), Signature{ar}, 1, 2);
                if (find_proper_coloring(s, 3))
                    break;
                ++resampled;
            }
            const auto tag = "seed " + std::to_string(seed);
            auto w = coloring_feasibility_witness(s, h);
            auto* cw = std::get_if<ColorWitness>(&w);
            c.expect(cw != nullptr, tag + " witness");
            if (!cw)
                continue;
            auto inst = instance_from_structure(s, h.language);
            std::vector<std::size_t> asg(cw->assignment.begin(), cw->assignment.end());
            c.expect(cw->value == CostValue(0) && oracle::evaluate(inst, asg) == CostValue(0), tag + " value 0");
            c.expect(solve_bruteforce(inst).value == CostValue(0), tag + " brute-force optimum");
        }
        return std::to_string(resampled) + " non-3-colorable samples redrawn";
    });
}

inline CriterionResult transfer_demo(std::uint64_t trials = 20, std::uint64_t base = 7000)
{
    return timed(10, "STP/MJN transfer from the lifted domain", 30.0, [=](Checker& c) {
        std::size_t redrawn = 0;
        for (std::uint64_t seed = 1; seed <= trials; ++seed) {
            SplitMix64 rng(base + seed);
            std::shared_ptr<const ValuedLanguage> lang;
            std::optional<StpMjn> base;
            while (true) {
                lang = conservative_language(2, {random_cost_function(rng, 2, 2, 1, 5)});
                auto cls = classify_conservative(*lang);
                if (cls.tractable()) {
                    base = cls.witness;
                    break;
                }
                ++redrawn;
            }
            auto r = random_nonempty_structure(rng, rng.between(1, 4), lang->signature(), 1, 3);
            LiftedDomain ld(2, r.universe_size());
            auto lifted = blockwise_uniform(*base, ld);
            const auto tag = "seed " + std::to_string(seed);
            for (Element v = 0; v < r.universe_size(); ++v) {
                auto p = project_ops(lifted, ld, v);
                c.expect(p.stp_ok && p.mjn_ok, tag + " projection re-verifies");
                c.expect(p.triple().key() == base->key(), tag + " projection returns the base triple");
            }
            auto res = transfer_tractability(*lang, r, lifted);
            auto* tr = std::get_if<Transferred>(&res);
            c.expect(tr && tr->sigma_verified && tr->mu_verified, tag + " transferred triple verified");
        }
        return std::to_string(redrawn) + " hard languages redrawn";
    });
}

inline CriterionResult siggers_closure()
{
    return timed(11, "Siggers pairs survive gadget expression", 5.0, [](Checker& c) {
        auto neq = shared(make_language(2, {neq_relation(2)}, {"neq"}));
        auto search = find_siggers_pair(*neq, false);
        c.expect(!search.all_pairs.empty(), "pairs found");
        Instance path{neq, 4, {{0, {0, 1}, Rational(1)}, {0, {1, 2}, Rational(1)}, {0, {2, 3}, Rational(1)}}};
        Instance unary{neq, 2, {{0, {0, 1}, Rational(1)}}};
        for (const auto& p : search.all_pairs) {
            auto a = check_siggers_closure(p, *neq, path, {0, 3});
            c.expect(a.ok, "path gadget closure");
            c.expect(a.expressed == neq_relation(2), "path gadget expresses neq");
            auto b = check_siggers_closure(p, *neq, unary, {0});
            c.expect(b.ok && b.g_image_in_b.value_or(false) && b.s_image_in_b.value_or(false), "unary closure");
        }
        return std::to_string(search.all_pairs.size()) + " admitted pairs";
    });
}

/// Deterministic text summary of a few seeded computations.
inline std::string seeded_report(std::uint64_t seed)
{
    std::ostringstream os;
    SplitMix64 rng(seed);
    auto t = random_lifted_trial(rng);
    os << serialize_language(t.lifted) << serialize_structure(t.r) << serialize_instance(t.instance, "lifted");
    auto res = reduce_lifted_instance(t.lifted, t.base, t.r, t.instance);
    if (auto* cert = std::get_if<ReductionCertificate>(&res)) {
        os << "phi";
        for (auto v : cert->phi)
            os << " " << v;
        os << "\n" << serialize_instance(cert->reduced, "base") << "opt " << solve_bruteforce(cert->reduced).value << "\n";
    } else {
        auto& ti = std::get<TriviallyInfeasible>(res);
        os << "conflict " << ti.conflict.var << " " << ti.conflict.first_copy << " " << ti.conflict.second_copy << "\n";
    }
    auto g = random_weighted_graph(rng, 6);
    auto enc = mwis_to_vcsp(g);
    auto sol = solve_bruteforce(enc.instance);
    os << "mwis " << sol.value << " offset " << enc.offset << "\n";
    return os.str();
}

inline CriterionResult format_round_trips(std::uint64_t trials = 100, std::uint64_t base = 3000)
{
    return timed(12, "format round trips and reproducible reports", 0, [=](Checker& c) {
        for (std::uint64_t seed = 1; seed <= trials; ++seed) {
            SplitMix64 rng(base + seed);
            const auto tag = "seed " + std::to_string(seed);
            std::vector<std::size_t> ar;
            for (std::size_t i = rng.between(1, 3); i > 0; --i)
                ar.push_back(rng.between(1, 3));
            auto s = random_structure(rng, rng.between(1, 5), Signature{ar}, 1, 4);
            auto st = serialize_structure(s);
            auto sp = parse_structure(st);
            c.expect(sp.structure == s && serialize_structure(sp) == st, tag + " structure");

            auto lang = random_language(rng, rng.between(1, 3), ar);
            auto lt = serialize_language(*lang);
            auto lp = parse_language(lt);
            bool same = lp.language.size() == lang->size();
            for (std::size_t i = 0; same && i < lang->size(); ++i)
                same = lp.language.functions[i] == lang->functions[i] && lp.language.name(i) == lang->name(i);
            c.expect(same && serialize_language(lp) == lt, tag + " language");

            auto trial = random_lifted_trial(rng);
            auto llt = serialize_language(trial.lifted);
            auto llp = parse_language(llt);
            c.expect(llp.lifted() && llp.provenance == trial.lifted.provenance && serialize_language(llp) == llt,
                tag + " lifted language");

            auto inst = random_instance(rng, lang, rng.between(1, 5), rng.between(0, 6));
            auto it = serialize_instance(inst, "L");
            auto ip = parse_instance(it);
            auto bound = bind_instance(ip, lang);
            c.expect(serialize_instance(ip) == it && serialize_instance(bound, "L") == it, tag + " instance");
        }
        bool reports = true;
        for (std::uint64_t seed = 1; seed <= 10; ++seed)
            reports = reports && seeded_report(seed) == seeded_report(seed);
        c.expect(reports, "seeded reports identical");
        return std::string("structures, languages, lifted languages, instances");
    });
}

inline std::vector<std::function<CriterionResult()>> criteria()
{
    return {
        [] { return chromatic_generalization(); },
        [] { return infinite_chromatic(); },
        [] { return ordered_witnesses(); },
        [] { return lifted_reduction(); },
        [] { return unary_folding(); },
        [] { return siggers_machinery(); },
        [] { return conservative_classification(); },
        [] { return mwis_equivalence(); },
        [] { return hard_language_demo(); },
        [] { return transfer_demo(); },
        [] { return siggers_closure(); },
        [] { return format_round_trips(); },
    };
}

/// Runs every criterion, printing one line each; returns the results.
inline std::vector<CriterionResult> run_all(std::ostream& out)
{
    std::vector<CriterionResult> results;
    for (const auto& fn : criteria()) {
        results.push_back(fn());
        out << results.back().line() << std::endl;
    }
    return results;
}

}  // namespace acceptance
