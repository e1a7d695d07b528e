#pragma once

// Exact rationals over 64-bit integers and the extended cost domain Q ∪ {∞}.
//
// Every intermediate product is formed in 128 bits and the result is reduced
// before narrowing; anything that still does not fit throws std::overflow_error
// rather than silently wrapping.

#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hcsp {

class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT(implicit)
    Rational(std::int64_t n, std::int64_t d) { assign(n, d); }

    [[nodiscard]] std::int64_t num() const { return num_; }
    [[nodiscard]] std::int64_t den() const { return den_; }
    [[nodiscard]] bool is_integer() const { return den_ == 1; }
    [[nodiscard]] int sign() const { return (num_ > 0) - (num_ < 0); }

    friend Rational operator+(const Rational& a, const Rational& b)
    {
        using i128 = __int128;
        return from_wide(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
    friend Rational operator*(const Rational& a, const Rational& b)
    {
        using i128 = __int128;
        return from_wide(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b)
    {
        if (b.num_ == 0)
            throw std::domain_error("rational division by zero");
        using i128 = __int128;
        return from_wide(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
    }
    Rational operator-() const
    {
        if (num_ == INT64_MIN)
            throw std::overflow_error("rational negation overflow");
        Rational r;
        r.num_ = -num_;
        r.den_ = den_;
        return r;
    }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) = default;
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b)
    {
        using i128 = __int128;
        i128 l = i128(a.num_) * b.den_, r = i128(b.num_) * a.den_;
        if (l < r)
            return std::strong_ordering::less;
        if (l > r)
            return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    /// "p" when integral, "p/q" otherwise.
    [[nodiscard]] std::string str() const
    {
        if (den_ == 1)
            return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    /// Accepts "p" or "p/q" with an optional leading sign on p.
    static Rational parse(std::string_view text)
    {
        auto slash = text.find('/');
        if (slash == std::string_view::npos)
            return Rational(parse_int(text));
        auto q = parse_int(text.substr(slash + 1));
        if (q == 0)
            throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
        return Rational(parse_int(text.substr(0, slash)), q);
    }

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;

    void assign(std::int64_t n, std::int64_t d)
    {
        if (d == 0)
            throw std::domain_error("rational with zero denominator");
        *this = from_wide(n, d);
    }

    static Rational from_wide(__int128 n, __int128 d)
    {
        if (d < 0) {
            n = -n;
            d = -d;
        }
        __int128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) {
            n /= g;
            d /= g;
        }
        if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
            throw std::overflow_error("rational overflow");
        Rational r;
        r.num_ = static_cast<std::int64_t>(n);
        r.den_ = static_cast<std::int64_t>(d);
        return r;
    }

    static __int128 gcd128(__int128 a, __int128 b)
    {
        while (b != 0) {
            auto t = a % b;
            a = b;
            b = t;
        }
        return a == 0 ? 1 : a;
    }

    static std::int64_t parse_int(std::string_view s)
    {
        if (s.empty())
            throw std::invalid_argument("empty integer");
        std::size_t i = 0;
        bool neg = false;
        if (s[0] == '-' || s[0] == '+') {
            neg = s[0] == '-';
            i = 1;
        }
        if (i == s.size())
            throw std::invalid_argument("malformed integer '" + std::string(s) + "'");
        __int128 v = 0;
        for (; i < s.size(); ++i) {
            if (s[i] < '0' || s[i] > '9')
                throw std::invalid_argument("malformed integer '" + std::string(s) + "'");
            v = v * 10 + (s[i] - '0');
            if (v > (__int128(INT64_MAX) + 1))
                throw std::overflow_error("integer out of range '" + std::string(s) + "'");
        }
        if (neg)
            v = -v;
        if (v > INT64_MAX || v < INT64_MIN)
            throw std::overflow_error("integer out of range '" + std::string(s) + "'");
        return static_cast<std::int64_t>(v);
    }
};

inline std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

/// An element of Q ∪ {∞}. Addition absorbs ∞; ∞ compares above every rational.
class CostValue {
public:
    constexpr CostValue() = default;
    CostValue(Rational r) : value_(r) {}  // NOLINT(implicit)
    CostValue(std::int64_t n) : value_(n) {}  // NOLINT(implicit)

    static CostValue infinity()
    {
        CostValue c;
        c.infinite_ = true;
        return c;
    }

    [[nodiscard]] bool is_infinite() const { return infinite_; }
    [[nodiscard]] bool is_finite() const { return !infinite_; }

    /// The rational value; only meaningful when finite.
    [[nodiscard]] const Rational& value() const
    {
        if (infinite_)
            throw std::logic_error("value() of infinite cost");
        return value_;
    }

    friend CostValue operator+(const CostValue& a, const CostValue& b)
    {
        if (a.infinite_ || b.infinite_)
            return infinity();
        return CostValue(a.value_ + b.value_);
    }
    CostValue& operator+=(const CostValue& o) { return *this = *this + o; }

    /// Scaling by a strictly positive weight; ∞ stays ∞.
    friend CostValue operator*(const Rational& w, const CostValue& c)
    {
        if (c.infinite_)
            return infinity();
        return CostValue(w * c.value_);
    }

    friend bool operator==(const CostValue& a, const CostValue& b)
    {
        if (a.infinite_ || b.infinite_)
            return a.infinite_ == b.infinite_;
        return a.value_ == b.value_;
    }
    friend std::strong_ordering operator<=>(const CostValue& a, const CostValue& b)
    {
        if (a.infinite_ || b.infinite_) {
            if (a.infinite_ == b.infinite_)
                return std::strong_ordering::equal;
            return a.infinite_ ? std::strong_ordering::greater : std::strong_ordering::less;
        }
        return a.value_ <=> b.value_;
    }

    [[nodiscard]] std::string str() const { return infinite_ ? "INF" : value_.str(); }

    /// Integer, "p/q", or "INF".
    static CostValue parse(std::string_view text)
    {
        if (text == "INF" || text == "inf")
            return infinity();
        return CostValue(Rational::parse(text));
    }

private:
    Rational value_{};
    bool infinite_ = false;
};

inline std::ostream& operator<<(std::ostream& os, const CostValue& c) { return os << c.str(); }

}  // namespace hcsp
