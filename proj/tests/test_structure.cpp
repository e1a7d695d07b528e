#include "hcsp/constructions.hpp"
#include "hcsp/random.hpp"
#include "hcsp/structure.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace hcsp;

namespace {

RelationalStructure k2() { return complete_graph(2).symmetric_structure(); }
RelationalStructure k3() { return complete_graph(3).symmetric_structure(); }
RelationalStructure single_edge() { return RelationalStructure(2, Signature{{2}}, {{{0, 1}}}); }

}  // namespace

TEST(Structure, CanonicalTupleOrder)
{
    RelationalStructure s(3, Signature{{2}}, {{{2, 1}, {0, 1}, {2, 1}, {0, 2}}});
    std::vector<Tuple> expected{{0, 1}, {0, 2}, {2, 1}};
    EXPECT_EQ(s.relation(0), expected);
    EXPECT_TRUE(s.contains(0, Tuple{2, 1}));
    EXPECT_FALSE(s.contains(0, Tuple{1, 2}));
}

TEST(Structure, HashedMembershipMatchesScan)
{
    SplitMix64 rng(11);
    for (int t = 0; t < 20; ++t) {
        auto s = random_structure(rng, 6, Signature{{3}}, 1, 2);
        ASSERT_GT(s.relation(0).size(), 64u);
        std::vector<std::size_t> x(3, 0);
        do {
            Tuple tup(x.begin(), x.end());
            EXPECT_EQ(s.contains(0, tup), oracle::tuple_in(s.relation(0), tup));
        } while (oracle::advance(x, 6));
    }
}

TEST(Validate, WellFormedGraph)
{
    EXPECT_TRUE(validate(k2(), Signature{{2}}).ok);
}

TEST(Validate, OutOfRangeEntry)
{
    RelationalStructure s(2, Signature{{2}}, {{{0, 5}}});
    auto rep = validate(s, Signature{{2}});
    EXPECT_FALSE(rep.ok);
    EXPECT_EQ(rep.relation, 0u);
    EXPECT_EQ(rep.tuple, (Tuple{0, 5}));
}

TEST(Validate, ArityMismatch)
{
    RelationalStructure s(3, Signature{{2}}, {{{0, 1, 2}}});
    EXPECT_FALSE(validate(s, Signature{{2}}).ok);
    EXPECT_THROW(make_structure(3, Signature{{2}}, {{{0, 1, 2}}}), std::invalid_argument);
}

TEST(Signature, AllUnary)
{
    EXPECT_TRUE(is_all_unary(Signature{{1, 1}}));
    EXPECT_FALSE(is_all_unary(Signature{{1, 2}}));
    EXPECT_FALSE(is_all_unary(Signature{{2}}));
}

TEST(Homomorphism, IdentityOnTriangle)
{
    EXPECT_TRUE(is_homomorphism({0, 1, 2}, k3(), k3()).ok);
}

TEST(Homomorphism, CollapsingAnEdgeFails)
{
    auto r = is_homomorphism({0, 0}, k2(), k2());
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.relation, 0u);
    EXPECT_EQ(r.counterexample, (Tuple{0, 1}));
}

TEST(Homomorphism, SingleEdgeIntoK2)
{
    EXPECT_TRUE(is_homomorphism({0, 1}, single_edge(), k2()).ok);
}

TEST(Homomorphism, SignatureMismatchThrows)
{
    RelationalStructure u(2, Signature{{1}}, {{{0}}});
    EXPECT_THROW(is_homomorphism({0, 1}, u, k2()), std::invalid_argument);
    EXPECT_THROW(find_homomorphism(u, k2()), std::invalid_argument);
}

TEST(FindHomomorphism, Examples)
{
    auto h = find_homomorphism(k2(), k3());
    ASSERT_TRUE(h);
    EXPECT_TRUE(is_homomorphism(*h, k2(), k3()).ok);
    EXPECT_EQ(*h, (VertexMap{0, 1}));
    EXPECT_FALSE(find_homomorphism(k3(), k2()));
    RelationalStructure empty(4, Signature{{2}}, {{}});
    EXPECT_TRUE(find_homomorphism(empty, k2()));
}

TEST(FindHomomorphism, AgreesWithExhaustiveCount)
{
    SplitMix64 rng(3);
    for (int t = 0; t < 300; ++t) {
        Signature sig{{1, 2}};
        auto src = random_structure(rng, rng.between(1, 5), sig, 1, 3);
        auto dst = random_structure(rng, rng.between(1, 4), sig, 1, 2);
        auto h = find_homomorphism(src, dst);
        auto count = oracle::count_homomorphisms(src, dst);
        EXPECT_EQ(h.has_value(), count > 0);
        if (h) {
            EXPECT_TRUE(is_homomorphism(*h, src, dst).ok);
            std::vector<std::size_t> hh(h->begin(), h->end());
            EXPECT_TRUE(oracle::is_hom(hh, src, dst));
        }
    }
}

TEST(FindHomomorphism, LexicographicallyLeast)
{
    SplitMix64 rng(8);
    for (int t = 0; t < 100; ++t) {
        Signature sig{{2}};
        auto src = random_structure(rng, rng.between(1, 4), sig, 1, 3);
        auto dst = random_structure(rng, 3, sig, 1, 2);
        auto h = find_homomorphism(src, dst);
        std::vector<std::size_t> x(src.universe_size(), 0);
        std::optional<std::vector<std::size_t>> first;
        do
            if (oracle::is_hom(x, src, dst)) {
                first = x;
                break;
            }
        while (oracle::advance(x, 3));
        ASSERT_EQ(h.has_value(), first.has_value());
        if (h) {
            EXPECT_EQ(std::vector<std::size_t>(h->begin(), h->end()), *first);
        }
    }
}

TEST(IsHomomorphism, AgreesWithOracle)
{
    SplitMix64 rng(5);
    for (int t = 0; t < 300; ++t) {
        Signature sig{{2, 1}};
        auto src = random_structure(rng, 3, sig, 1, 3);
        auto dst = random_structure(rng, 3, sig, 1, 2);
        VertexMap h(3);
        std::vector<std::size_t> hh(3);
        for (std::size_t i = 0; i < 3; ++i)
            hh[i] = h[i] = static_cast<Element>(rng.below(3));
        EXPECT_EQ(is_homomorphism(h, src, dst).ok, oracle::is_hom(hh, src, dst));
    }
}

TEST(Ordering, Examples)
{
    auto o = find_ordering(single_edge());
    ASSERT_TRUE(o);
    EXPECT_LT((*o)[0], (*o)[1]);
    EXPECT_FALSE(find_ordering(k2()));
    auto w = ordered_witness(2, 2);
    auto ow = find_ordering(w);
    ASSERT_TRUE(ow);
    EXPECT_EQ(*ow, (Ordering{0, 1, 2}));
}

TEST(Ordering, AgreesWithPermutationOracle)
{
    SplitMix64 rng(21);
    for (int t = 0; t < 300; ++t) {
        auto s = random_structure(rng, rng.between(1, 6), Signature{{2, 3}}, 1, 8);
        auto o = find_ordering(s);
        EXPECT_EQ(o.has_value(), oracle::orderable(s));
        if (o) {
            EXPECT_TRUE(oracle::ordering_ok(s, *o));
        }
    }
}

TEST(OrderPullback, TwoEdgesOntoOne)
{
    RelationalStructure src(3, Signature{{2}}, {{{0, 1}, {2, 1}}});
    auto rank = order_pullback({0, 1, 0}, src, single_edge(), {0, 1});
    EXPECT_LT(rank[0], rank[1]);
    EXPECT_LT(rank[2], rank[1]);
    EXPECT_TRUE(is_valid_ordering(src, rank));
}

TEST(OrderPullback, IdentityReturnsTargetOrdering)
{
    auto w = ordered_witness(2, 3);
    auto o = *find_ordering(w);
    VertexMap id(w.universe_size());
    for (Element v = 0; v < id.size(); ++v)
        id[v] = v;
    EXPECT_EQ(order_pullback(id, w, w, o), o);
}

TEST(OrderPullback, EmptyRelationsAnyPermutation)
{
    RelationalStructure src(3, Signature{{2}}, {{}});
    auto rank = order_pullback({1, 1, 0}, src, single_edge(), {0, 1});
    EXPECT_TRUE(is_valid_ordering(src, rank));
}

TEST(OrderPullback, RejectsNonHomomorphism)
{
    EXPECT_THROW(order_pullback({0, 0}, single_edge(), single_edge(), {0, 1}), std::invalid_argument);
}

TEST(OrderPullback, UpClosedOrderedFamily)
{
    SplitMix64 rng(17);
    int checked = 0;
    for (int t = 0; t < 300; ++t) {
        Signature sig{{2, 1}};
        auto r = random_ordered_structure(rng, rng.between(2, 5), sig, 1, 2);
        auto src = random_structure(rng, rng.between(1, 5), sig, 1, 4);
        auto h = find_homomorphism(src, r);
        if (!h)
            continue;
        ++checked;
        auto ro = find_ordering(r);
        ASSERT_TRUE(ro);
        auto rank = order_pullback(*h, src, r, *ro);
        EXPECT_TRUE(is_valid_ordering(src, rank));
        EXPECT_TRUE(oracle::ordering_ok(src, rank));
    }
    EXPECT_GT(checked, 50);
}
