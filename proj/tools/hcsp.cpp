// hcsp: command-line front end. Every subcommand prints a report (text or
// JSON) and exits 0 when all checks pass, 1 when a check fails and 2 on
// usage or input errors.

#include "acceptance.hpp"
#include "hcsp/hcsp.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace hcsp;
using json = nlohmann::ordered_json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::uint64_t seed = 0;
    std::uint64_t budget = kDefaultBudget;
    std::optional<std::size_t> max_colors;
    std::optional<std::uint64_t> trials;
    std::string format = "text";

    [[nodiscard]] json to_json() const
    {
        json j;
        j["seed"] = seed;
        j["budget"] = budget;
        j["max_colors"] = max_colors ? json(*max_colors) : json(nullptr);
        j["trials"] = trials ? json(*trials) : json(nullptr);
        j["format"] = format;
        return j;
    }
};

struct Report {
    json result = json::object();
    json checks = json::array();
    std::vector<std::string> text;

    void check(const std::string& name, bool passed, const std::string& detail = {})
    {
        checks.push_back({{"name", name}, {"passed", passed}, {"detail", detail}});
    }
    void say(std::string line) { text.push_back(std::move(line)); }

    [[nodiscard]] bool passed() const
    {
        for (const auto& c : checks)
            if (!c["passed"].get<bool>())
                return false;
        return true;
    }
};

std::string rat(const Rational& r) { return std::to_string(r.num()) + "/" + std::to_string(r.den()); }
std::string cost(const CostValue& c) { return c.is_infinite() ? "INF" : rat(c.value()); }

template <typename T>
json array_of(const std::vector<T>& v)
{
    json j = json::array();
    for (const auto& x : v)
        j.push_back(x);
    return j;
}

json tuple_list(const std::vector<Tuple>& ts)
{
    json j = json::array();
    for (const auto& t : ts)
        j.push_back(array_of(t));
    return j;
}

std::string joined(const std::vector<Value>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? " " : "") + std::to_string(v[i]);
    return s;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UsageError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw UsageError("cannot write " + path);
    out << text;
}

UsageError located(const std::string& path, const ParseError& e)
{
    return UsageError(path + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": " + e.message());
}

template <typename Fn>
auto parsing(const std::string& path, Fn&& fn)
{
    auto text = read_file(path);
    try {
        return fn(text);
    } catch (const ParseError& e) {
        throw located(path, e);
    }
}

StructureDoc load_structure(const std::string& path)
{
    return parsing(path, [](const std::string& t) { return parse_structure(t); });
}

LanguageDoc load_language(const std::string& path)
{
    return parsing(path, [](const std::string& t) { return parse_language(t); });
}

Instance load_instance(const std::string& path, std::shared_ptr<const ValuedLanguage> lang)
{
    auto doc = parsing(path, [](const std::string& t) { return parse_instance(t); });
    try {
        return bind_instance(doc, std::move(lang));
    } catch (const ParseError& e) {
        throw located(path, e);
    }
}

std::shared_ptr<const ValuedLanguage> shared(ValuedLanguage l) { return std::make_shared<const ValuedLanguage>(std::move(l)); }

json solution_json(const Solution& s)
{
    return {{"value", cost(s.value)}, {"assignment", array_of(s.assignment)}};
}

json op_json(const Operation& op)
{
    return {{"arity", op.arity}, {"domain", op.domain_size}, {"table", array_of(op.table)}};
}

json triple_json(const StpMjn& t)
{
    json pairs = json::array();
    for (auto [a, b] : t.pairs.pairs())
        pairs.push_back({a, b});
    return {{"pairs", pairs}, {"meet", op_json(t.meet)}, {"join", op_json(t.join)},
        {"mjn", {op_json(t.mjn[0]), op_json(t.mjn[1]), op_json(t.mjn[2])}}};
}

void add_criterion(Report& rep, const acceptance::CriterionResult& r)
{
    rep.checks.push_back({{"name", "criterion " + std::to_string(r.id) + ": " + r.title}, {"passed", r.passed()},
        {"detail", r.detail}, {"seconds", r.seconds}, {"limit_seconds", r.limit}});
    rep.say(r.line());
}

// Brute force within the budget; nullopt when the budget is exceeded.
std::optional<Solution> try_solve(const Instance& inst, std::uint64_t budget)
{
    try {
        return solve_bruteforce(inst, budget);
    } catch (const BudgetExceeded&) {
        return std::nullopt;
    }
}

// ---------------------------------------------------------------------------
// Subcommands

void cmd_chi(Report& rep, const RunConfig& cfg, const std::string& in)
{
    auto doc = load_structure(in);
    const auto& s = doc.structure;
    auto res = chromatic_number(s, cfg.max_colors);
    rep.result["chromatic"] = res.str();
    rep.say("chromatic number: " + res.str());
    switch (res.kind) {
    case ChromaticResult::Kind::Finite: {
        auto c = find_proper_coloring(s, res.value);
        bool ok = c && !is_improper(s, *c).improper;
        if (c)
            rep.result["coloring"] = array_of(c->colors);
        rep.check("coloring is proper", ok);
        if (res.value > 1)
            rep.check("no proper coloring with fewer colors", chromatic_exceeds(s, res.value - 1));
        break;
    }
    case ChromaticResult::Kind::Infinite: {
        auto w = constant_tuple_witness(s);
        rep.check("constant tuple in every relation", w.has_value());
        if (w) {
            rep.result["witness_element"] = *w;
            rep.say("witness element: " + std::to_string(*w));
        }
        break;
    }
    case ChromaticResult::Kind::AboveBound:
        rep.check("no proper coloring within the bound", chromatic_exceeds(s, res.value));
        break;
    }
}

void cmd_hom(Report& rep, const std::string& src_path, const std::string& dst_path)
{
    auto src = load_structure(src_path).structure;
    auto dst = load_structure(dst_path).structure;
    if (!(src.signature() == dst.signature()))
        throw UsageError("source and target signatures differ");
    SearchStats stats;
    auto h = find_homomorphism(src, dst, &stats);
    rep.result["nodes"] = stats.nodes;
    if (h) {
        rep.result["homomorphism"] = array_of(*h);
        rep.say("homomorphism: " + joined(std::vector<Value>(h->begin(), h->end())));
        rep.check("map is a homomorphism", is_homomorphism(*h, src, dst).ok);
    } else {
        rep.result["homomorphism"] = nullptr;
        rep.say("no homomorphism");
    }
}

void cmd_order(Report& rep, const std::string& in)
{
    auto s = load_structure(in).structure;
    auto o = find_ordering(s);
    if (o) {
        rep.result["ordering"] = array_of(*o);
        rep.say("ranks: " + joined(std::vector<Value>(o->begin(), o->end())));
        rep.check("every tuple strictly increases", is_valid_ordering(s, *o));
    } else {
        rep.result["ordering"] = nullptr;
        rep.say("not orderable");
    }
}

void cmd_solve(Report& rep, const RunConfig& cfg, const std::string& lang_path, const std::string& inst_path)
{
    auto lang = shared(load_language(lang_path).language);
    auto inst = load_instance(inst_path, lang);
    auto sol = solve_bruteforce(inst, cfg.budget);
    rep.result["solution"] = solution_json(sol);
    rep.say("optimum: " + cost(sol.value));
    if (sol.value.is_finite()) {
        rep.say("assignment: " + joined(sol.assignment));
        rep.check("assignment attains the optimum", evaluate(inst, sol.assignment) == sol.value);
    }
}

void cmd_lift(Report& rep, const std::string& lang_path, const std::string& struct_path, bool complete,
    const std::string& out)
{
    auto base = load_language(lang_path).language;
    auto r = load_structure(struct_path).structure;
    if (complete)
        r = unary_completion(r);
    auto ll = lift_language(base, r);
    auto text = serialize_language(ll);
    rep.result["domain"] = ll.domain.size();
    rep.result["functions"] = ll.size();
    rep.check("lifted functions match relation tuples", [&] {
        std::size_t expected = r.universe_size();
        for (const auto& rel : r.relations())
            expected += rel.size();
        return expected == ll.size();
    }());
    if (!out.empty()) {
        write_file(out, text);
        rep.result["written"] = out;
        rep.say("wrote " + out);
    } else {
        rep.result["language"] = text;
        rep.say(text);
    }
}

void cmd_reduce(Report& rep, const RunConfig& cfg, const std::string& lang_path, const std::string& struct_path,
    const std::string& inst_path)
{
    auto base = shared(load_language(lang_path).language);
    auto r = load_structure(struct_path).structure;
    auto ll = lift_language(*base, r);
    auto inst = load_instance(inst_path, ll.language);
    auto res = reduce_lifted_instance(ll, base, r, inst);
    auto lifted_opt = try_solve(inst, cfg.budget);
    if (auto* ti = std::get_if<TriviallyInfeasible>(&res)) {
        rep.result["trivially_infeasible"] = {{"var", ti->conflict.var}, {"first_copy", ti->conflict.first_copy},
            {"second_copy", ti->conflict.second_copy}};
        rep.say("trivially infeasible: variable " + std::to_string(ti->conflict.var) + " pinned to copies "
            + std::to_string(ti->conflict.first_copy) + " and " + std::to_string(ti->conflict.second_copy));
        if (lifted_opt)
            rep.check("lifted optimum is infinite", lifted_opt->value.is_infinite());
        return;
    }
    const auto& cert = std::get<ReductionCertificate>(res);
    rep.result["phi"] = array_of(cert.phi);
    rep.result["kept"] = array_of(cert.preprocessing.kept);
    rep.result["offset"] = cost(cert.preprocessing.offset);
    rep.result["reduced_instance"] = serialize_instance(cert.reduced, "base");
    rep.result["rtilde"] = serialize_structure(cert.rtilde);
    rep.say("phi: " + joined(std::vector<Value>(cert.phi.begin(), cert.phi.end())));
    rep.say("offset: " + cost(cert.preprocessing.offset));
    rep.say(serialize_instance(cert.reduced, "base"));
    rep.check("phi is a homomorphism into R", cert.hom_check.ok);
    auto red = try_solve(cert.reduced, cfg.budget);
    if (lifted_opt && red) {
        rep.result["lifted_optimum"] = cost(lifted_opt->value);
        rep.result["reduced_optimum"] = cost(red->value);
        rep.check("optimum equals reduced optimum plus offset", lifted_opt->value == red->value + cert.preprocessing.offset);
        auto h = pull_back_solution(cert, ll.domain, red->assignment);
        rep.check("pulled-back assignment attains the optimum", evaluate(inst, h) == lifted_opt->value);
    } else {
        rep.result["verification"] = "skipped: budget exceeded";
    }
}

void cmd_fold(Report& rep, const RunConfig& cfg, const std::string& lang_path, const std::string& struct_path,
    const std::string& inst_path)
{
    auto base = load_language(lang_path).language;
    if (!is_conservative(base))
        throw UsageError("fold: base language is not conservative");
    auto r = unary_completion(load_structure(struct_path).structure);
    auto ll = lift_language(base, r);
    auto doc = parsing(inst_path, [](const std::string& t) { return parse_instance(t); });
    std::vector<std::uint64_t> masks;
    for (const auto& c : doc.constraints) {
        if (ll.language->find(c.function) || c.function.rfind("delta_", 0) != 0)
            continue;
        try {
            auto m = std::stoull(c.function.substr(6));
            if (m >= delta(ll.domain).count())
                throw UsageError(inst_path + ":" + std::to_string(c.line) + ": mask out of range");
            if (std::find(masks.begin(), masks.end(), m) == masks.end())
                masks.push_back(m);
        } catch (const std::logic_error&) {
            throw UsageError(inst_path + ":" + std::to_string(c.line) + ": bad Delta name " + c.function);
        }
    }
    auto extended = with_delta(ll, masks).first;
    Instance inst;
    try {
        inst = bind_instance(doc, extended.language);
    } catch (const ParseError& e) {
        throw located(inst_path, e);
    }
    auto folded = fold_unaries(ll, extended, base, r, inst);
    rep.result["folded_instance"] = serialize_instance(folded, "lifted");
    rep.say(serialize_instance(folded, "lifted"));
    bool inside = true;
    for (const auto& c : folded.constraints)
        inside = inside && c.function < ll.size();
    rep.check("folded instance uses only lifted functions", inside);
    auto a = try_solve(inst, cfg.budget);
    auto b = try_solve(folded, cfg.budget);
    if (a && b) {
        rep.result["optimum"] = cost(a->value);
        rep.result["folded_optimum"] = cost(b->value);
        rep.check("folding preserves the optimum", a->value == b->value);
    } else {
        rep.result["verification"] = "skipped: budget exceeded";
    }
}

void cmd_siggers(Report& rep, const std::string& in, bool all)
{
    auto lang = load_language(in).language;
    auto search = find_siggers_pair(lang, !all);
    rep.result["unary_candidates"] = search.unary_candidates;
    rep.result["admissible_unaries"] = search.admissible_unaries;
    json attempts = json::array();
    for (const auto& a : search.attempts)
        attempts.push_back({{"g", array_of(a.g.table)}, {"image", array_of(a.image)}, {"tuples", a.tuples},
            {"classes", a.classes}, {"raw_constraints", a.raw_constraints}, {"constraints", a.constraints},
            {"nodes", a.stats.nodes}, {"found", a.found}});
    rep.result["attempts"] = attempts;
    if (search.pair) {
        const auto& p = *search.pair;
        rep.result["pair"] = {{"g", op_json(p.g)}, {"image", array_of(p.image)}, {"s", op_json(p.s)}};
        rep.result["pairs_found"] = all ? search.all_pairs.size() : 1;
        rep.say("Siggers pair found: g = " + joined(p.g.table) + ", image {" + joined(p.image) + "}");
        rep.say(serialize_operation(p.s, "s"));
        rep.check("pair is admitted", is_admitted_pair(p, lang));
        for (const auto& q : search.all_pairs)
            if (!is_admitted_pair(q, lang)) {
                rep.check("every listed pair is admitted", false);
                break;
            }
    } else {
        rep.result["pair"] = nullptr;
        rep.result["certificate"] = "no Siggers pair: NP-hard";
        rep.say("no Siggers pair: NP-hard (" + std::to_string(search.attempts.size()) + " admissible unaries refuted)");
        rep.check("every admissible unary refuted", search.attempts.size() == search.admissible_unaries);
    }
}

void cmd_classify(Report& rep, const std::string& in)
{
    auto lang = load_language(in).language;
    auto res = classify_conservative(lang);
    rep.result["verdict"] = res.tractable() ? "Tractable" : "NPHard";
    rep.say(std::string("verdict: ") + (res.tractable() ? "Tractable" : "NPHard"));
    json attempts = json::array();
    for (const auto& a : res.attempts) {
        auto summary = [](const CandidateSearch& s) {
            return json{{"candidates", s.candidates}, {"covered", s.covered}, {"pruned_families", s.pruned.size()},
                {"truncated", s.truncated}, {"found", s.found.has_value()}};
        };
        json pairs = json::array();
        for (auto [x, y] : a.pairs.pairs())
            pairs.push_back({x, y});
        attempts.push_back({{"pairs", pairs}, {"stp", summary(a.stp)}, {"mjn", a.mjn ? summary(*a.mjn) : json(nullptr)}});
    }
    rep.result["attempts"] = attempts;
    if (res.witness) {
        const auto& w = *res.witness;
        rep.result["witness"] = triple_json(w);
        rep.say(serialize_stpmjn(w));
        rep.check("STP on M", is_stp(w.meet, w.join, w.pairs));
        rep.check("MJN on the complement of M", is_mjn(w.mjn[0], w.mjn[1], w.mjn[2], w.pairs.complement()));
        rep.check("STP is a fractional polymorphism", is_fractional_polymorphism(w.sigma(), lang).ok);
        rep.check("MJN is a fractional polymorphism", is_fractional_polymorphism(w.mu(), lang).ok);
    } else {
        rep.check("exhaustion transcript complete", exhaustion_complete(res));
    }
}

StpMjn load_stpmjn(const std::string& path)
{
    return parsing(path, [](const std::string& t) { return parse_stpmjn(t); });
}

void cmd_project(Report& rep, const std::string& lang_path, const std::string& struct_path, const std::string& ops_path,
    std::optional<Element> vertex)
{
    auto base = load_language(lang_path).language;
    auto r = load_structure(struct_path).structure;
    auto ops = load_stpmjn(ops_path);
    LiftedDomain ld(base.domain_size, r.universe_size());
    if (ops.meet.domain_size != ld.size())
        throw UsageError("operations are not over the lifted domain");
    if (vertex && *vertex >= r.universe_size())
        throw UsageError("vertex out of range");
    json out = json::array();
    for (Element v = 0; v < r.universe_size(); ++v) {
        if (vertex && *vertex != v)
            continue;
        auto p = project_ops(ops, ld, v);
        out.push_back({{"vertex", v}, {"triple", triple_json(p.triple())}, {"stp_ok", p.stp_ok}, {"mjn_ok", p.mjn_ok}});
        rep.say("vertex " + std::to_string(v) + ":");
        rep.say(serialize_stpmjn(p.triple()));
        rep.check("vertex " + std::to_string(v) + " projection is an STP", p.stp_ok);
        rep.check("vertex " + std::to_string(v) + " projection is an MJN", p.mjn_ok);
    }
    rep.result["projections"] = out;
}

void cmd_transfer(Report& rep, const std::string& lang_path, const std::string& struct_path, const std::string& ops_path)
{
    auto base = load_language(lang_path).language;
    auto r = load_structure(struct_path).structure;
    LiftedDomain ld(base.domain_size, r.universe_size());
    StpMjn lifted;
    if (!ops_path.empty()) {
        lifted = load_stpmjn(ops_path);
    } else {
        auto cls = classify_conservative(base);
        if (!cls.tractable()) {
            rep.result["verdict"] = "NPHard";
            rep.check("base language tractable", false, "no STP/MJN to lift");
            return;
        }
        lifted = blockwise_uniform(*cls.witness, ld);
        rep.result["lifted_source"] = "blockwise uniform";
    }
    auto res = transfer_tractability(base, r, lifted);
    if (auto* t = std::get_if<Transferred>(&res)) {
        rep.result["triple"] = triple_json(t->triple);
        rep.result["witnesses"] = tuple_list(t->witnesses);
        rep.result["distinct_triples"] = t->distinct_triples;
        rep.say(serialize_stpmjn(t->triple));
        rep.check("transferred STP is a fractional polymorphism", t->sigma_verified);
        rep.check("transferred MJN is a fractional polymorphism", t->mu_verified);
    } else {
        const auto& nm = std::get<NoMonochromaticWitness>(res);
        rep.result["distinct_triples"] = nm.distinct_triples;
        rep.check("monochromatic triple found", false, std::to_string(nm.distinct_triples) + " projected triples");
    }
}

std::vector<std::size_t> parse_arities(const std::string& s)
{
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stoul(item));
        } catch (const std::logic_error&) {
            throw UsageError("bad arity list: " + s);
        }
    }
    if (out.empty())
        throw UsageError("empty arity list");
    return out;
}

void cmd_gadget(Report& rep, const RunConfig& cfg, const std::string& arities, std::size_t colors,
    const std::string& in, const std::string& out)
{
    HardLanguage h;
    try {
        h = build_hard_language(parse_arities(arities), colors);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    auto rho = neq_gadget(h);
    auto dp = gadget_support(h);
    rep.result["domain"] = h.language->domain_size;
    rep.result["support"] = array_of(dp);
    rep.say("D' = {" + joined(dp) + "}");
    bool same = true;
    for (Value x = 0; x < h.language->domain_size; ++x)
        for (Value y = 0; y < h.language->domain_size; ++y) {
            bool inside = std::find(dp.begin(), dp.end(), x) != dp.end() && std::find(dp.begin(), dp.end(), y) != dp.end();
            same = same && rho({x, y}) == (inside && x != y ? CostValue(0) : CostValue::infinity());
        }
    rep.check("gadget is the disequality on D'", same);
    try {
        rep.check("gadget instance expresses the gadget", express(neq_gadget_instance(h), {0, 1}, cfg.budget) == rho);
    } catch (const BudgetExceeded&) {
        rep.result["verification"] = "expression skipped: budget exceeded";
    }
    if (!out.empty()) {
        write_file(out, serialize_language(*h.language));
        rep.result["written"] = out;
    }
    if (in.empty())
        return;
    auto s = load_structure(in).structure;
    auto w = coloring_feasibility_witness(s, h);
    if (auto* cw = std::get_if<ColorWitness>(&w)) {
        rep.result["coloring"] = array_of(cw->coloring.colors);
        rep.result["assignment"] = array_of(cw->assignment);
        rep.result["value"] = cost(cw->value);
        rep.say("assignment: " + joined(cw->assignment));
        auto inst = instance_from_structure(s, h.language);
        rep.check("assignment has value 0", evaluate(inst, cw->assignment) == CostValue(0));
    } else {
        rep.result["coloring"] = nullptr;
        rep.say("no proper coloring with " + std::to_string(colors) + " colors");
    }
}

void cmd_demo_ordered(Report& rep, std::optional<std::size_t> n, std::optional<std::size_t> m)
{
    std::vector<std::pair<std::size_t, std::size_t>> params{{2, 2}, {3, 2}, {2, 3}, {3, 3}};
    if (n || m)
        params = {{n.value_or(2), m.value_or(2)}};
    json out = json::array();
    for (auto [a, b] : params) {
        if (a < 1 || b < 2)
            throw UsageError("ordered demo needs n >= 1 and m >= 2");
        auto s = ordered_witness(a, b);
        bool exceeds = chromatic_exceeds(s, a);
        auto tag = "(" + std::to_string(a) + "," + std::to_string(b) + ")";
        out.push_back({{"n", a}, {"m", b}, {"elements", s.universe_size()}, {"exceeds", exceeds}});
        rep.say("ordered witness " + tag + ": " + std::to_string(s.universe_size()) + " elements, chi > n: "
            + (exceeds ? "yes" : "no"));
        rep.check("chi exceeds n for " + tag, exceeds);
        rep.check("witness is orderable " + tag, find_ordering(s).has_value());
    }
    rep.result["witnesses"] = out;
}

std::uint64_t seed_base(const RunConfig& cfg) { return cfg.seed << 20; }

void cmd_demo(Report& rep, const RunConfig& cfg, const std::string& which, std::optional<std::size_t> n,
    std::optional<std::size_t> m)
{
    const auto base = seed_base(cfg);
    if (which == "ordered") {
        cmd_demo_ordered(rep, n, m);
    } else if (which == "mwis") {
        add_criterion(rep, acceptance::mwis_equivalence(cfg.trials.value_or(100), base));
    } else if (which == "hardlang") {
        add_criterion(rep, acceptance::hard_language_demo(cfg.trials.value_or(50), base));
    } else if (which == "lifting") {
        add_criterion(rep, acceptance::lifted_reduction(cfg.trials.value_or(200), base));
        add_criterion(rep, acceptance::unary_folding(cfg.trials.value_or(100), base));
    } else if (which == "transfer") {
        add_criterion(rep, acceptance::transfer_demo(cfg.trials.value_or(20), base));
    } else {
        throw UsageError("unknown demo " + which);
    }
}

void cmd_selftest(Report& rep)
{
    for (const auto& fn : acceptance::criteria())
        add_criterion(rep, fn());
}

void emit(const Report& rep, const RunConfig& cfg, const std::vector<std::string>& argv, double seconds, bool ok)
{
    if (cfg.format == "json") {
        json j;
        j["command"] = array_of(argv);
        j["config"] = cfg.to_json();
        j["result"] = rep.result;
        j["checks"] = rep.checks;
        j["verdict"] = ok ? "pass" : "fail";
        j["timing"] = {{"seconds", seconds}};
        std::cout << j.dump(2) << "\n";
        return;
    }
    for (const auto& line : rep.text)
        std::cout << line << (line.empty() || line.back() != '\n' ? "\n" : "");
    for (const auto& c : rep.checks) {
        if (c.contains("seconds"))
            continue;
        std::cout << (c["passed"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>();
        if (!c["detail"].get<std::string>().empty())
            std::cout << " (" << c["detail"].get<std::string>() << ")";
        std::cout << "\n";
    }
    std::cout << "verdict: " << (ok ? "pass" : "fail") << "\n";
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hybrid CSP toolkit: chromatic numbers, lifted languages, reductions and polymorphisms"};
    app.require_subcommand(1);
    app.fallthrough();
    RunConfig cfg;
    std::optional<std::uint64_t> budget_flag;
    app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    app.add_option("--seed", cfg.seed, "Seed for randomized generation");
    app.add_option("--budget", budget_flag, "Maximum enumerated assignments (overrides HCSP_BUDGET)");
    app.add_option("--max-colors", cfg.max_colors, "Upper bound for the chromatic search");
    app.add_option("--trials", cfg.trials, "Number of trials for demos");

    std::string in, src, dst, lang, structure, inst, ops, out, arities = "2", which;
    std::size_t colors = 3;
    bool all = false, complete = false;
    std::optional<std::size_t> vertex, demo_n, demo_m;

    auto* chi = app.add_subcommand("chi", "Generalized chromatic number of a structure");
    chi->add_option("--in", in, "Structure file")->required();
    auto* hom = app.add_subcommand("hom", "Homomorphism search between structures");
    hom->add_option("--src", src, "Source structure")->required();
    hom->add_option("--dst", dst, "Target structure")->required();
    auto* order = app.add_subcommand("order", "Ordering in which every tuple increases");
    order->add_option("--in", in, "Structure file")->required();
    auto* solve = app.add_subcommand("solve", "Exact VCSP optimum by enumeration");
    solve->add_option("--lang", lang, "Language file")->required();
    solve->add_option("--inst", inst, "Instance file")->required();
    auto* lift = app.add_subcommand("lift", "Lifted language of a base language and a structure");
    lift->add_option("--lang", lang, "Base language")->required();
    lift->add_option("--struct", structure, "Structure R")->required();
    lift->add_flag("--unary-complete", complete, "Add every singleton unary to R first");
    lift->add_option("--out", out, "Write the lifted language here");
    auto* reduce = app.add_subcommand("reduce", "Reduce a lifted instance to the base language");
    reduce->add_option("--lang", lang, "Base language")->required();
    reduce->add_option("--struct", structure, "Structure R")->required();
    reduce->add_option("--inst", inst, "Instance over the lifted language")->required();
    auto* fold = app.add_subcommand("fold", "Fold Delta unaries into a conservative lifted instance");
    fold->add_option("--lang", lang, "Conservative base language")->required();
    fold->add_option("--struct", structure, "Structure R (unary completion is applied)")->required();
    fold->add_option("--inst", inst, "Instance over the lifted language plus delta_<mask> unaries")->required();
    auto* siggers = app.add_subcommand("siggers", "Search for a Siggers pair");
    siggers->add_option("--in", in, "Language file")->required();
    siggers->add_flag("--all", all, "Collect every pair instead of stopping at the first");
    auto* classify = app.add_subcommand("classify", "Classify a conservative language (|D| <= 3)");
    classify->add_option("--in", in, "Language file")->required();
    auto* project = app.add_subcommand("project", "Project lifted STP/MJN operations to one copy");
    project->add_option("--lang", lang, "Base language")->required();
    project->add_option("--struct", structure, "Structure R")->required();
    project->add_option("--ops", ops, "STPMJN file over the lifted domain")->required();
    project->add_option("--vertex", vertex, "Only this vertex");
    auto* transfer = app.add_subcommand("transfer", "Transfer a lifted STP/MJN back to the base language");
    transfer->add_option("--lang", lang, "Conservative base language")->required();
    transfer->add_option("--struct", structure, "Structure R")->required();
    transfer->add_option("--ops", ops, "STPMJN file over the lifted domain (default: blockwise uniform lift)");
    auto* gadget = app.add_subcommand("gadget", "Hard language, disequality gadget and coloring witness");
    gadget->add_option("--arities", arities, "Comma-separated arities");
    gadget->add_option("--colors", colors, "Colors m (> 2)");
    gadget->add_option("--in", in, "Structure to build a witness for");
    gadget->add_option("--out", out, "Write the hard language here");
    auto* demo = app.add_subcommand("demo", "Seeded demonstrations");
    demo->add_option("which", which, "ordered | mwis | hardlang | lifting | transfer")
        ->required()
        ->check(CLI::IsMember({"ordered", "mwis", "hardlang", "lifting", "transfer"}));
    demo->add_option("--n", demo_n, "Colors n for the ordered demo");
    demo->add_option("--m", demo_m, "Arity m for the ordered demo");
    auto* selftest = app.add_subcommand("selftest", "Run the acceptance suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (const char* env = std::getenv("HCSP_BUDGET")) {
        try {
            cfg.budget = std::stoull(env);
        } catch (const std::logic_error&) {
            std::cerr << "error: HCSP_BUDGET is not a number\n";
            return 2;
        }
    }
    if (budget_flag)
        cfg.budget = *budget_flag;
    if (cfg.budget == 0) {
        std::cerr << "error: budget must be positive\n";
        return 2;
    }

    std::vector<std::string> args(argv + 1, argv + argc);
    Report rep;
    auto t0 = std::chrono::steady_clock::now();
    try {
        if (chi->parsed())
            cmd_chi(rep, cfg, in);
        else if (hom->parsed())
            cmd_hom(rep, src, dst);
        else if (order->parsed())
            cmd_order(rep, in);
        else if (solve->parsed())
            cmd_solve(rep, cfg, lang, inst);
        else if (lift->parsed())
            cmd_lift(rep, lang, structure, complete, out);
        else if (reduce->parsed())
            cmd_reduce(rep, cfg, lang, structure, inst);
        else if (fold->parsed())
            cmd_fold(rep, cfg, lang, structure, inst);
        else if (siggers->parsed())
            cmd_siggers(rep, in, all);
        else if (classify->parsed())
            cmd_classify(rep, in);
        else if (project->parsed())
            cmd_project(rep, lang, structure, ops, vertex);
        else if (transfer->parsed())
            cmd_transfer(rep, lang, structure, ops);
        else if (gadget->parsed())
            cmd_gadget(rep, cfg, arities, colors, in, out);
        else if (demo->parsed())
            cmd_demo(rep, cfg, which, demo_n, demo_m);
        else if (selftest->parsed())
            cmd_selftest(rep);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const BudgetExceeded& e) {
        std::cerr << "error: " << e.what() << " (raise --budget or HCSP_BUDGET)\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = rep.passed();
    emit(rep, cfg, args, seconds, ok);
    return ok ? 0 : 1;
}
