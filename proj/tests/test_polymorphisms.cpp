#include "hcsp/constructions.hpp"
#include "hcsp/polymorphisms.hpp"
#include "hcsp/random.hpp"
#include "acceptance.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace hcsp;

namespace {

const CostValue kInf = CostValue::infinity();

// Direct evaluation of the averaged inequality over every choice of m rows.
bool fractional_oracle(const FractionalOperation& w, const CostFunction& f)
{
    auto rows = f.dom_tuples();
    const std::size_t m = w.arity();
    if (rows.empty())
        return true;
    std::vector<std::size_t> pick(m, 0);
    do {
        CostValue rhs(0);
        for (auto i : pick)
            rhs = rhs + f(rows[i]);
        rhs = Rational(1, static_cast<std::int64_t>(m)) * rhs;
        CostValue lhs(0);
        for (const auto& [op, weight] : w.support) {
            std::vector<Value> y(f.arity());
            for (std::size_t j = 0; j < f.arity(); ++j) {
                std::vector<Value> col(m);
                for (std::size_t i = 0; i < m; ++i)
                    col[i] = rows[pick[i]][j];
                y[j] = op(col);
            }
            lhs = lhs + weight * f(y);
        }
        if (rhs < lhs)
            return false;
    } while (oracle::advance(pick, rows.size()));
    return true;
}

Operation negation() { return Operation::tabulate(2, 1, [](std::span<const Value> x) { return Value(1 - x[0]); }); }

}  // namespace

TEST(Operation, Basics)
{
    auto mn = op_min(3);
    EXPECT_EQ(mn({2, 1}), 1u);
    EXPECT_TRUE(mn.idempotent());
    EXPECT_FALSE(negation().idempotent());
    EXPECT_EQ(op_sorted(3, 1)({2, 0, 1}), 1u);
    EXPECT_EQ(op_majority(2)({0, 1, 1}), 1u);
    EXPECT_EQ(op_minority(2)({0, 1, 1}), 0u);
    EXPECT_EQ(boolean_and(3)({1, 1, 0}), 0u);
    EXPECT_THROW(Operation::projection(2, 2, 2), std::invalid_argument);
    EXPECT_THROW(Operation::tabulate(2, 1, [](std::span<const Value>) { return Value(2); }), std::invalid_argument);
}

TEST(Polymorphism, Examples)
{
    SplitMix64 rng(41);
    auto id = Operation::projection(3, 1, 0);
    for (int t = 0; t < 20; ++t)
        EXPECT_TRUE(is_polymorphism(id, random_cost_function(rng, 3, 2, 1, 2)).ok);

    auto c = is_polymorphism(op_min(2), neq_relation(2));
    EXPECT_FALSE(c.ok);
    EXPECT_EQ(c.arguments, (std::vector<std::vector<Value>>{{0, 1}, {1, 0}}));
    EXPECT_EQ(c.image, (std::vector<Value>{0, 0}));

    EXPECT_TRUE(is_polymorphism(negation(), neq_relation(2)).ok);
    EXPECT_THROW(is_polymorphism(op_min(3), neq_relation(2)), std::invalid_argument);
}

TEST(Polymorphism, LanguageReportsFailingFunction)
{
    auto lang = make_language(2, {CostFunction::constant(2, 2, CostValue(0)), neq_relation(2)});
    auto c = is_polymorphism(op_min(2), lang);
    EXPECT_FALSE(c.ok);
    EXPECT_EQ(c.function, 1u);
}

TEST(FractionalPolymorphism, Examples)
{
    auto half = FractionalOperation::uniform({op_min(2), op_max(2)});
    EXPECT_TRUE(is_fractional_polymorphism(half, acceptance::cut_function()).ok);
    auto edge = mwis_language()->functions[0];
    auto c = is_fractional_polymorphism(half, edge);
    EXPECT_FALSE(c.ok);
    EXPECT_EQ(c.arguments, (std::vector<std::vector<Value>>{{0, 1}, {1, 0}}));
    EXPECT_EQ(c.lhs, kInf);

    FractionalOperation proj{{{Operation::projection(2, 1, 0), Rational(1)}}};
    SplitMix64 rng(42);
    for (int t = 0; t < 30; ++t)
        EXPECT_TRUE(is_fractional_polymorphism(proj, random_cost_function(rng, 2, 2, 1, 3)).ok);
}

TEST(FractionalPolymorphism, ProjectionSupportAlwaysPasses)
{
    SplitMix64 rng(43);
    for (int t = 0; t < 50; ++t) {
        const std::size_t d = rng.between(1, 3);
        auto w = FractionalOperation::uniform(
            {Operation::projection(d, 3, 0), Operation::projection(d, 3, 1), Operation::projection(d, 3, 2)});
        EXPECT_TRUE(is_fractional_polymorphism(w, random_cost_function(rng, d, 2, 1, 3)).ok);
    }
}

TEST(FractionalPolymorphism, AgreesWithOracle)
{
    SplitMix64 rng(44);
    std::vector<FractionalOperation> ops{
        FractionalOperation::uniform({op_min(2), op_max(2)}),
        FractionalOperation::uniform({op_majority(2), op_majority(2), op_minority(2)}),
        FractionalOperation{{{op_min(2), Rational(1, 3)}, {op_max(2), Rational(2, 3)}}},
        FractionalOperation::uniform({op_sorted(2, 0), op_sorted(2, 1), op_sorted(2, 2)}),
    };
    int rejected = 0;
    for (int t = 0; t < 200; ++t) {
        auto f = random_cost_function(rng, 2, rng.between(1, 2), 1, 4);
        for (const auto& w : ops) {
            bool got = is_fractional_polymorphism(w, f).ok;
            EXPECT_EQ(got, fractional_oracle(w, f));
            rejected += !got;
        }
    }
    EXPECT_GT(rejected, 0);
}

TEST(FractionalOperation, CheckAndNormalize)
{
    auto dup = FractionalOperation::uniform({op_majority(2), op_majority(2), op_minority(2)});
    EXPECT_THROW(dup.check(), std::invalid_argument);
    auto n = dup.normalized();
    EXPECT_NO_THROW(n.check());
    ASSERT_EQ(n.support.size(), 2u);
    EXPECT_EQ(n.support[0].second, Rational(2, 3));
    FractionalOperation bad{{{op_min(2), Rational(1, 2)}}};
    EXPECT_THROW(bad.check(), std::invalid_argument);
}

TEST(Siggers, OperationExamples)
{
    EXPECT_TRUE(is_siggers_operation(boolean_and(6), {0, 1}));
    EXPECT_FALSE(is_siggers_operation(Operation::projection(2, 6, 0), {0, 1}));
    SplitMix64 rng(45);
    auto any = Operation::tabulate(3, 6, [&](std::span<const Value> x) { return x[0] == 1 ? Value(1) : Value(rng.below(3)); });
    EXPECT_TRUE(is_siggers_operation(any, {1}));
}

TEST(Siggers, PairSearchExamples)
{
    auto full = make_language(2, {CostFunction::constant(2, 2, CostValue(0))});
    auto s1 = find_siggers_pair(full);
    ASSERT_TRUE(s1.pair);
    EXPECT_TRUE(is_admitted_pair(*s1.pair, full));
    EXPECT_EQ(s1.pair->image, (std::vector<Value>{0}));

    auto neq = make_language(2, {neq_relation(2)});
    auto s2 = find_siggers_pair(neq);
    ASSERT_TRUE(s2.pair);
    EXPECT_EQ(s2.pair->g, Operation::projection(2, 1, 0));
    EXPECT_TRUE(is_admitted_pair(*s2.pair, neq));

    auto hard = make_language(2, {acceptance::one_in_three()});
    auto s3 = find_siggers_pair(hard);
    EXPECT_FALSE(s3.pair);
    EXPECT_EQ(s3.admissible_unaries, 1u);
    ASSERT_EQ(s3.attempts.size(), 1u);
    EXPECT_EQ(s3.attempts[0].tuples, 64u);
    EXPECT_EQ(s3.attempts[0].raw_constraints, 729u);
    EXPECT_FALSE(s3.attempts[0].found);
}

TEST(Siggers, FoundPairsAreSound)
{
    SplitMix64 rng(46);
    int found = 0;
    for (int t = 0; t < 30; ++t) {
        const std::size_t d = rng.between(2, 3);
        auto f = dom(random_cost_function(rng, d, 2, 1, 2));
        auto lang = make_language(d, {f});
        auto s = find_siggers_pair(lang);
        if (!s.pair)
            continue;
        ++found;
        const auto& p = *s.pair;
        EXPECT_TRUE(is_polymorphism(p.g, lang).ok);
        for (Value a = 0; a < d; ++a)
            EXPECT_EQ(p.g.table[p.g.table[a]], p.g.table[a]);
        std::vector<Value> rel(p.image.size());
        std::iota(rel.begin(), rel.end(), 0);
        EXPECT_TRUE(is_siggers_operation(p.s, rel));
        EXPECT_TRUE(is_polymorphism(p.s, restrict_language(lang, p.image).language).ok);
    }
    EXPECT_GT(found, 0);
}

TEST(Restrict, Examples)
{
    auto neq3 = make_language(3, {neq_relation(3)});
    auto r = restrict_language(neq3, {1, 0});
    EXPECT_EQ(r.elements, (std::vector<Value>{0, 1}));
    EXPECT_EQ(r.language.functions[0], neq_relation(2));
    EXPECT_TRUE(r.language.is_crisp());
    auto same = restrict_language(neq3, {0, 1, 2});
    EXPECT_EQ(same.language.functions[0], neq3.functions[0]);
    EXPECT_THROW(restrict_language(neq3, {}), std::invalid_argument);
    EXPECT_THROW(restrict_language(neq3, {3}), std::invalid_argument);
}

TEST(SiggersClosure, SingleRelationWithoutHiddenVariables)
{
    auto neq = make_language(2, {neq_relation(2)});
    auto pair = *find_siggers_pair(neq).pair;
    auto lang = std::make_shared<const ValuedLanguage>(neq);
    Instance gadget{lang, 2, {{0, {0, 1}, Rational(1)}}};
    auto c = check_siggers_closure(pair, neq, gadget, {0, 1});
    EXPECT_TRUE(c.ok);
    EXPECT_EQ(c.expressed, neq_relation(2));
}

TEST(SiggersClosure, UnaryImageStaysInside)
{
    auto lang = make_language(3, {CostFunction::from_relation(3, 2, {{0, 1}, {1, 0}, {1, 2}, {2, 1}})});
    auto s = find_siggers_pair(lang);
    ASSERT_TRUE(s.pair);
    auto shared = std::make_shared<const ValuedLanguage>(lang);
    Instance gadget{shared, 2, {{0, {0, 1}, Rational(1)}}};
    auto c = check_siggers_closure(*s.pair, lang, gadget, {0});
    EXPECT_TRUE(c.ok);
    ASSERT_TRUE(c.g_image_in_b);
    EXPECT_TRUE(*c.g_image_in_b);
    EXPECT_TRUE(*c.s_image_in_b);
}

TEST(SiggersClosure, HardLanguageAndItsGadgetAdmitNoPair)
{
    auto h = build_hard_language({2}, 3);
    EXPECT_TRUE(find_siggers_pair(*h.language, false).all_pairs.empty());
    auto rho = make_language(h.language->domain_size, {express(neq_gadget_instance(h), {0, 1})});
    EXPECT_TRUE(find_siggers_pair(rho, false).all_pairs.empty());
}

TEST(SiggersClosure, RejectsUnadmittedPair)
{
    auto neq = make_language(2, {neq_relation(2)});
    SiggersPair p{Operation::tabulate(2, 1, [](std::span<const Value>) { return Value(0); }), Operation::projection(1, 6, 0), {0}};
    auto lang = std::make_shared<const ValuedLanguage>(neq);
    Instance gadget{lang, 2, {{0, {0, 1}, Rational(1)}}};
    EXPECT_THROW(check_siggers_closure(p, neq, gadget, {0, 1}), std::invalid_argument);
}

TEST(Stp, Examples)
{
    EXPECT_TRUE(is_stp(op_min(2), op_max(2), SymmetricPairSet::full(2)));
    EXPECT_TRUE(is_stp(Operation::projection(2, 2, 0), Operation::projection(2, 2, 1), SymmetricPairSet(2)));
    EXPECT_FALSE(is_stp(op_min(2), op_min(2), SymmetricPairSet(2)));
    EXPECT_FALSE(is_stp(Operation::projection(2, 2, 0), Operation::projection(2, 2, 1), SymmetricPairSet::full(2)));
    EXPECT_THROW(is_stp(FractionalOperation::uniform({op_min(2)}), SymmetricPairSet(2)), std::invalid_argument);
}

TEST(Mjn, Examples)
{
    auto p = [](std::size_t i) { return Operation::projection(2, 3, i); };
    EXPECT_TRUE(is_mjn(op_majority(2), op_majority(2), op_minority(2), SymmetricPairSet::full(2)));
    EXPECT_TRUE(is_mjn(p(0), p(1), p(2), SymmetricPairSet(2)));
    EXPECT_FALSE(is_mjn(p(0), p(1), p(2), SymmetricPairSet::full(2)));
}

TEST(PairSet, MaskAndComplement)
{
    auto s = SymmetricPairSet::from_mask(3, 0b101);
    EXPECT_EQ(s.pairs(), (std::vector<std::pair<Value, Value>>{{0, 1}, {1, 2}}));
    EXPECT_TRUE(s.contains(2, 1));
    EXPECT_FALSE(s.contains(1, 1));
    EXPECT_EQ(s.complement().pairs(), (std::vector<std::pair<Value, Value>>{{0, 2}}));
    EXPECT_THROW(s.insert(1, 1), std::invalid_argument);
}

TEST(Classify, Examples)
{
    auto cut = conservative_language(2, {acceptance::cut_function()});
    auto res = classify_conservative(*cut);
    ASSERT_TRUE(res.tractable());
    EXPECT_EQ(res.witness->meet, op_min(2));
    EXPECT_EQ(res.witness->join, op_max(2));
    EXPECT_EQ(res.witness->pairs, SymmetricPairSet::full(2));

    auto mw = classify_conservative(*mwis_language());
    EXPECT_FALSE(mw.tractable());
    EXPECT_TRUE(exhaustion_complete(mw));
    EXPECT_EQ(mw.attempts.size(), 2u);

    auto unaries = conservative_language(3, {});
    auto u = classify_conservative(*unaries);
    ASSERT_TRUE(u.tractable());
    EXPECT_EQ(u.witness->pairs, SymmetricPairSet(3));
}

TEST(Classify, RejectsOutOfScopeLanguages)
{
    EXPECT_THROW(classify_conservative(make_language(2, {neq_relation(2)})), std::invalid_argument);
    EXPECT_THROW(classify_conservative(*conservative_language(4, {})), std::invalid_argument);
}

TEST(Classify, WitnessesVerifyOnRandomLanguages)
{
    SplitMix64 rng(47);
    int tractable = 0, hard = 0;
    for (int t = 0; t < 40; ++t) {
        auto lang = conservative_language(2, {random_cost_function(rng, 2, 2, 1, 4)});
        auto res = classify_conservative(*lang);
        if (res.tractable()) {
            ++tractable;
            const auto& w = *res.witness;
            EXPECT_TRUE(is_stp(w.meet, w.join, w.pairs));
            EXPECT_TRUE(is_mjn(w.mjn[0], w.mjn[1], w.mjn[2], w.pairs.complement()));
            for (const auto& f : lang->functions) {
                EXPECT_TRUE(fractional_oracle(w.sigma(), f));
                EXPECT_TRUE(fractional_oracle(w.mu(), f));
            }
        } else {
            ++hard;
            EXPECT_TRUE(exhaustion_complete(res));
        }
    }
    EXPECT_GT(tractable, 0);
    EXPECT_GT(hard, 0);
}

TEST(ProjectOps, BlockwiseUniformProjectsToBase)
{
    auto cut = conservative_language(2, {acceptance::cut_function()});
    auto base = *classify_conservative(*cut).witness;
    LiftedDomain ld(2, 3);
    auto lifted = blockwise_uniform(base, ld);
    EXPECT_TRUE(is_stp(lifted.meet, lifted.join, lifted.pairs));
    for (Element v = 0; v < 3; ++v) {
        auto p = project_ops(lifted, ld, v);
        EXPECT_TRUE(p.stp_ok);
        EXPECT_TRUE(p.mjn_ok);
        EXPECT_EQ(p.meet, op_min(2));
        EXPECT_EQ(p.join, op_max(2));
        EXPECT_EQ(p.pairs, SymmetricPairSet::full(2));
        EXPECT_EQ(p.triple().key(), base.key());
    }
}

TEST(ProjectOps, ThreeElementBase)
{
    auto lang = conservative_language(3, {});
    auto base = *classify_conservative(*lang).witness;
    LiftedDomain ld(3, 2);
    auto lifted = blockwise_uniform(base, ld);
    for (Element v = 0; v < 2; ++v) {
        auto p = project_ops(lifted, ld, v);
        EXPECT_TRUE(p.stp_ok && p.mjn_ok);
        EXPECT_EQ(p.triple().key(), base.key());
    }
    EXPECT_THROW(project_ops(base, ld, 0), std::invalid_argument);
}

TEST(Transfer, BlockwiseUniformWitness)
{
    auto cut = conservative_language(2, {acceptance::cut_function()});
    auto base = *classify_conservative(*cut).witness;
    SplitMix64 rng(48);
    auto r = random_nonempty_structure(rng, 2, cut->signature(), 1, 2);
    auto res = transfer_tractability(*cut, r, blockwise_uniform(base, LiftedDomain(2, 2)));
    ASSERT_TRUE(std::holds_alternative<Transferred>(res));
    const auto& tr = std::get<Transferred>(res);
    EXPECT_TRUE(tr.sigma_verified);
    EXPECT_TRUE(tr.mu_verified);
    EXPECT_EQ(tr.distinct_triples, 1u);
    ASSERT_EQ(tr.witnesses.size(), r.num_relations());
    for (std::size_t i = 0; i < r.num_relations(); ++i)
        EXPECT_EQ(tr.witnesses[i], r.relation(i).front());
    EXPECT_TRUE(fractional_oracle(tr.triple.sigma(), acceptance::cut_function()));
    EXPECT_EQ(tr.triple.meet, op_min(2));
}

TEST(Transfer, EmptyRelationHasNoWitness)
{
    auto cut = conservative_language(2, {acceptance::cut_function()});
    auto base = *classify_conservative(*cut).witness;
    std::vector<std::vector<Tuple>> rels{{{0}}, {{0}}, {{0}}, {{0}}, {}};
    RelationalStructure r(2, cut->signature(), rels);
    auto res = transfer_tractability(*cut, r, blockwise_uniform(base, LiftedDomain(2, 2)));
    EXPECT_TRUE(std::holds_alternative<NoMonochromaticWitness>(res));
}
