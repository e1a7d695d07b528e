#include "hcsp/random.hpp"
#include "hcsp/rational.hpp"

#include <gtest/gtest.h>

using namespace hcsp;

TEST(Rational, NormalizesSignAndGcd)
{
    Rational r(6, -4);
    EXPECT_EQ(r.num(), -3);
    EXPECT_EQ(r.den(), 2);
    EXPECT_EQ(Rational(0, 7), Rational(0));
    EXPECT_EQ(Rational(0, 7).den(), 1);
}

TEST(Rational, Arithmetic)
{
    EXPECT_EQ(Rational(1, 2) + Rational(1, 3), Rational(5, 6));
    EXPECT_EQ(Rational(1, 2) - Rational(3, 4), Rational(-1, 4));
    EXPECT_EQ(Rational(2, 3) * Rational(9, 4), Rational(3, 2));
    EXPECT_EQ(Rational(2, 3) / Rational(4, 9), Rational(3, 2));
    EXPECT_THROW(Rational(1) / Rational(0), std::domain_error);
    EXPECT_THROW(Rational(1, 0), std::domain_error);
}

TEST(Rational, Ordering)
{
    EXPECT_LT(Rational(1, 3), Rational(1, 2));
    EXPECT_GT(Rational(-1, 3), Rational(-1, 2));
    EXPECT_EQ(Rational(2, 4) <=> Rational(1, 2), std::strong_ordering::equal);
}

TEST(Rational, OverflowIsDetected)
{
    Rational big(INT64_MAX);
    EXPECT_THROW(big + Rational(1), std::overflow_error);
    EXPECT_THROW(big * Rational(2), std::overflow_error);
    EXPECT_EQ(big * Rational(1, 2) * Rational(2), big);
}

TEST(Rational, ParseAndPrint)
{
    EXPECT_EQ(Rational::parse("3/6"), Rational(1, 2));
    EXPECT_EQ(Rational::parse("-7"), Rational(-7));
    EXPECT_EQ(Rational(5, 10).str(), "1/2");
    EXPECT_EQ(Rational(4).str(), "4");
    EXPECT_THROW(Rational::parse("1/0"), std::invalid_argument);
    EXPECT_THROW(Rational::parse("x"), std::invalid_argument);
    EXPECT_THROW(Rational::parse("1/"), std::invalid_argument);
}

TEST(Rational, FieldAxiomsOnRandomValues)
{
    SplitMix64 rng(99);
    for (int t = 0; t < 2000; ++t) {
        auto draw = [&] {
            return Rational(static_cast<std::int64_t>(rng.below(2001)) - 1000, static_cast<std::int64_t>(rng.between(1, 500)));
        };
        Rational a = draw(), b = draw(), c = draw();
        EXPECT_EQ(a + b, b + a);
        EXPECT_EQ((a + b) + c, a + (b + c));
        EXPECT_EQ(a * (b + c), a * b + a * c);
        EXPECT_EQ(a - a, Rational(0));
        if (b != Rational(0)) {
            EXPECT_EQ(a / b * b, a);
        }
        EXPECT_EQ(a < b, a.num() * b.den() < b.num() * a.den());
    }
}

TEST(CostValue, InfinityAbsorbs)
{
    auto inf = CostValue::infinity();
    EXPECT_EQ(inf + CostValue(3), inf);
    EXPECT_EQ(Rational(1, 2) * inf, inf);
    EXPECT_LT(CostValue(1000000), inf);
    EXPECT_EQ(inf, CostValue::infinity());
    EXPECT_NE(inf, CostValue(0));
    EXPECT_THROW((void)inf.value(), std::logic_error);
}

TEST(CostValue, ParseAndPrint)
{
    EXPECT_EQ(CostValue::parse("INF"), CostValue::infinity());
    EXPECT_EQ(CostValue::parse("2/4"), CostValue(Rational(1, 2)));
    EXPECT_EQ(CostValue::infinity().str(), "INF");
    EXPECT_EQ(CostValue(Rational(-3, 9)).str(), "-1/3");
}

TEST(CostValue, TotalOrder)
{
    std::vector<CostValue> v{CostValue::infinity(), CostValue(2), CostValue(Rational(-1, 2)), CostValue(0)};
    std::sort(v.begin(), v.end());
    EXPECT_EQ(v.front(), CostValue(Rational(-1, 2)));
    EXPECT_EQ(v.back(), CostValue::infinity());
}
