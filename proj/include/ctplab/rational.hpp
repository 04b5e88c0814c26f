#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace ctplab {

/// Exact rational number in lowest terms with a positive denominator.
class Rational {
 public:
  using Integer = boost::multiprecision::mpz_int;
  using Impl = boost::multiprecision::mpq_rational;

  Rational() = default;
  Rational(long long v) : value_(v) {}  // NOLINT(google-explicit-constructor)
  Rational(const Integer& num, const Integer& den) {
    if (den == 0) throw std::domain_error("zero denominator");
    value_ = Impl(num, den);
  }
  explicit Rational(Impl v) : value_(std::move(v)) {}

  /// Parses "num/den", "num" or a negative variant of either.
  static Rational parse(std::string_view text) {
    auto trim = [](std::string_view s) {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
      return s;
    };
    text = trim(text);
    auto valid_int = [](std::string_view s) {
      if (s.empty()) return false;
      std::size_t i = (s.front() == '-' || s.front() == '+') ? 1 : 0;
      if (i == s.size()) return false;
      for (; i < s.size(); ++i)
        if (s[i] < '0' || s[i] > '9') return false;
      return true;
    };
    auto to_int = [](std::string_view s) {
      if (!s.empty() && s.front() == '+') s.remove_prefix(1);
      return Integer(std::string(s));
    };
    auto slash = text.find('/');
    if (slash == std::string_view::npos) {
      if (!valid_int(text)) throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
      return Rational(to_int(text), Integer(1));
    }
    auto num = trim(text.substr(0, slash));
    auto den = trim(text.substr(slash + 1));
    if (!valid_int(num) || !valid_int(den)) throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
    return Rational(to_int(num), to_int(den));
  }

  /// 2^exponent for any signed exponent.
  static Rational pow2(long long exponent) {
    Integer one(1);
    if (exponent >= 0) return Rational(one << static_cast<unsigned>(exponent), Integer(1));
    return Rational(Integer(1), one << static_cast<unsigned>(-exponent));
  }

  Integer numerator() const { return boost::multiprecision::numerator(value_); }
  Integer denominator() const { return boost::multiprecision::denominator(value_); }
  const Impl& impl() const { return value_; }

  bool is_zero() const { return value_ == 0; }
  int sign() const { return value_.sign(); }

  Rational pow(long long e) const {
    if (e < 0) return Rational(1) / pow(-e);
    Integer n = boost::multiprecision::pow(numerator(), static_cast<unsigned>(e));
    Integer d = boost::multiprecision::pow(denominator(), static_cast<unsigned>(e));
    return Rational(n, d);
  }

  double to_double() const { return value_.convert_to<double>(); }

  /// Always "num/den", including "5/1".
  std::string str() const { return numerator().str() + "/" + denominator().str(); }

  /// Decimal rendering with `digits` significant digits.
  std::string decimal(int digits = 20) const;

  Rational& operator+=(const Rational& o) { value_ += o.value_; return *this; }
  Rational& operator-=(const Rational& o) { value_ -= o.value_; return *this; }
  Rational& operator*=(const Rational& o) { value_ *= o.value_; return *this; }
  Rational& operator/=(const Rational& o) {
    if (o.is_zero()) throw std::domain_error("division by zero");
    value_ /= o.value_;
    return *this;
  }

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
  friend Rational operator-(const Rational& a) { return Rational(Impl(-a.value_)); }

  friend bool operator==(const Rational& a, const Rational& b) { return a.value_ == b.value_; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    int c = a.value_.compare(b.value_);
    return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  Impl value_{0};
};

inline std::string Rational::decimal(int digits) const {
  if (digits < 1) digits = 1;
  if (is_zero()) return "0.0";
  Integer num = boost::multiprecision::abs(numerator());
  Integer den = denominator();
  std::string sign_prefix = sign() < 0 ? "-" : "";

  // Choose k so that num*10^k/den has exactly `digits` integer digits.
  long long est = static_cast<long long>(boost::multiprecision::msb(num)) -
                  static_cast<long long>(boost::multiprecision::msb(den));
  long long exp10 = static_cast<long long>(static_cast<double>(est) * 0.30102999566398120);
  auto scaled = [&](long long k) {
    Integer n = num, d = den;
    if (k >= 0)
      n *= boost::multiprecision::pow(Integer(10), static_cast<unsigned>(k));
    else
      d *= boost::multiprecision::pow(Integer(10), static_cast<unsigned>(-k));
    return std::pair<Integer, Integer>(n, d);
  };
  Integer lo = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(digits - 1));
  Integer hi = lo * 10;
  long long k = digits - 1 - exp10;
  Integer q;
  for (int guard = 0; guard < 8; ++guard) {
    auto [n, d] = scaled(k);
    q = n / d;
    if (q < lo) {
      ++k;
    } else if (q >= hi) {
      --k;
    } else {
      Integer r = n % d;
      if (2 * r >= d) ++q;  // round half up
      if (q >= hi) {
        q /= 10;
        --k;
      }
      break;
    }
  }
  std::string s = q.str();
  // value = q * 10^-k; position of decimal point relative to the digit string
  long long point = static_cast<long long>(s.size()) - k;
  auto strip = [](std::string frac) {
    while (frac.size() > 1 && frac.back() == '0') frac.pop_back();
    return frac;
  };
  if (point > 21 || point < -6) {
    std::string mant = s.substr(0, 1);
    std::string frac = strip(s.substr(1));
    if (frac.empty()) frac = "0";
    return sign_prefix + mant + "." + frac + "e" + std::to_string(point - 1);
  }
  if (point <= 0) return sign_prefix + "0." + strip(std::string(static_cast<std::size_t>(-point), '0') + s);
  if (point >= static_cast<long long>(s.size()))
    return sign_prefix + s + std::string(static_cast<std::size_t>(point) - s.size(), '0') + ".0";
  std::string frac = strip(s.substr(static_cast<std::size_t>(point)));
  return sign_prefix + s.substr(0, static_cast<std::size_t>(point)) + "." + frac;
}

/// Non-negative edge or sensing cost; Infinite absorbs addition and dominates comparison.
class Cost {
 public:
  Cost() = default;
  Cost(Rational v) : finite_(true), value_(std::move(v)) {  // NOLINT(google-explicit-constructor)
    if (value_.sign() < 0) throw std::domain_error("negative cost " + value_.str());
  }
  Cost(long long v) : Cost(Rational(v)) {}  // NOLINT(google-explicit-constructor)

  static Cost infinite() {
    Cost c;
    c.finite_ = false;
    return c;
  }
  static Cost parse(std::string_view text) {
    if (text == "inf") return infinite();
    return Cost(Rational::parse(text));
  }

  bool is_finite() const { return finite_; }
  bool is_infinite() const { return !finite_; }
  const Rational& value() const {
    if (!finite_) throw std::logic_error("value() of infinite cost");
    return value_;
  }

  std::string str() const { return finite_ ? value_.str() : "inf"; }
  std::string decimal(int digits = 20) const { return finite_ ? value_.decimal(digits) : "inf"; }

  friend Cost operator+(const Cost& a, const Cost& b) {
    if (!a.finite_ || !b.finite_) return infinite();
    return Cost(a.value_ + b.value_);
  }
  Cost& operator+=(const Cost& o) { return *this = *this + o; }

  /// Probability-weighted cost; a zero weight annihilates even an infinite cost.
  friend Cost operator*(const Rational& p, const Cost& c) {
    if (p.is_zero()) return Cost(0);
    if (!c.finite_) return infinite();
    return Cost(p * c.value_);
  }

  friend bool operator==(const Cost& a, const Cost& b) {
    if (a.finite_ != b.finite_) return false;
    return !a.finite_ || a.value_ == b.value_;
  }
  friend std::strong_ordering operator<=>(const Cost& a, const Cost& b) {
    if (!a.finite_ || !b.finite_) {
      if (a.finite_ == b.finite_) return std::strong_ordering::equal;
      return a.finite_ ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    return a.value_ <=> b.value_;
  }

  friend std::ostream& operator<<(std::ostream& os, const Cost& c) { return os << c.str(); }

 private:
  bool finite_ = true;
  Rational value_{0};
};

/// "num/den (decimal)" rendering used in reports.
inline std::string pretty(const Rational& r) { return r.str() + " (" + r.decimal() + ")"; }
inline std::string pretty(const Cost& c) { return c.is_finite() ? pretty(c.value()) : std::string("inf"); }

/// Smallest e with 2^e >= x, for x > 0.
inline long long ceil_log2(const Rational& x) {
  if (x.sign() <= 0) throw std::domain_error("ceil_log2 of non-positive value");
  long long e = 0;
  while (Rational::pow2(e) < x) ++e;
  while (e > -4096 && Rational::pow2(e - 1) >= x) --e;
  return e;
}

}  // namespace ctplab
