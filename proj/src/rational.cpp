#include "mwp/rational.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

namespace mwp {

namespace {

using i128 = __int128;

constexpr int64_t kMax = std::numeric_limits<int64_t>::max();
constexpr int64_t kMin = std::numeric_limits<int64_t>::min();

bool fits64(i128 v) { return v <= i128(kMax) && v >= i128(kMin); }

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

std::optional<Rational> reduce(i128 num, i128 den) {
  if (den == 0) return std::nullopt;
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (!fits64(num) || !fits64(den)) return std::nullopt;
  return Rational::make(static_cast<int64_t>(num), static_cast<int64_t>(den));
}

}  // namespace

std::optional<Rational> Rational::make(int64_t num, int64_t den) {
  if (den == 0) return std::nullopt;
  if (num == kMin || den == kMin) return std::nullopt;  // |kMin| overflows
  if (den < 0) {
    num = -num;
    den = -den;
  }
  int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  Rational r;
  r.num_ = num;
  r.den_ = den;
  return r;
}

Rational Rational::from_int(int64_t v) {
  Rational r;
  r.num_ = v;
  r.den_ = 1;
  return r;
}

std::optional<Rational> Rational::parse(const std::string& text) {
  if (text.empty()) return std::nullopt;
  size_t pos = 0;
  bool neg = false;
  if (text[pos] == '-' || text[pos] == '+') {
    neg = text[pos] == '-';
    ++pos;
  }
  auto read_digits = [&](int64_t& out, int* ndigits) -> bool {
    int n = 0;
    i128 acc = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      acc = acc * 10 + (text[pos] - '0');
      if (!fits64(acc)) return false;
      ++pos;
      ++n;
    }
    if (n == 0) return false;
    out = static_cast<int64_t>(acc);
    if (ndigits) *ndigits = n;
    return true;
  };
  int64_t whole = 0;
  if (!read_digits(whole, nullptr)) return std::nullopt;
  if (pos == text.size()) {
    return Rational::make(neg ? -whole : whole, 1);
  }
  if (text[pos] == '/') {
    ++pos;
    int64_t den = 0;
    if (!read_digits(den, nullptr) || pos != text.size()) return std::nullopt;
    return Rational::make(neg ? -whole : whole, den);
  }
  if (text[pos] == '.') {
    ++pos;
    int64_t frac = 0;
    int ndigits = 0;
    if (!read_digits(frac, &ndigits) || pos != text.size()) return std::nullopt;
    i128 den = 1;
    for (int i = 0; i < ndigits; ++i) den *= 10;
    if (!fits64(den)) return std::nullopt;
    i128 num = i128(whole) * den + frac;
    if (!fits64(num)) return std::nullopt;
    return Rational::make(neg ? -static_cast<int64_t>(num)
                              : static_cast<int64_t>(num),
                          static_cast<int64_t>(den));
  }
  return std::nullopt;
}

std::optional<Rational> Rational::from_double(double v) {
  if (!std::isfinite(v)) return std::nullopt;
  if (v == 0.0) return Rational::from_int(0);
  int exp = 0;
  double m = std::frexp(v, &exp);  // v = m * 2^exp, |m| in [0.5, 1)
  // Scale the mantissa to an integer (53 bits suffice for any double).
  i128 mant = static_cast<i128>(std::ldexp(m, 53));
  int e2 = exp - 53;
  i128 num = mant, den = 1;
  while (e2 > 0) {
    num *= 2;
    if (!fits64(num)) return std::nullopt;
    --e2;
  }
  while (e2 < 0) {
    if (num % 2 == 0) {
      num /= 2;
    } else {
      den *= 2;
      if (!fits64(den)) return std::nullopt;
    }
    ++e2;
  }
  return reduce(num, den);
}

double Rational::to_double() const {
  return static_cast<double>(num_) / static_cast<double>(den_);
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

std::optional<Rational> Rational::add(const Rational& a, const Rational& b) {
  return reduce(i128(a.num_) * b.den_ + i128(b.num_) * a.den_,
                i128(a.den_) * b.den_);
}

std::optional<Rational> Rational::sub(const Rational& a, const Rational& b) {
  return reduce(i128(a.num_) * b.den_ - i128(b.num_) * a.den_,
                i128(a.den_) * b.den_);
}

std::optional<Rational> Rational::mul(const Rational& a, const Rational& b) {
  return reduce(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
}

std::optional<Rational> Rational::div(const Rational& a, const Rational& b) {
  if (b.num_ == 0) return std::nullopt;
  return reduce(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
}

std::optional<Rational> Rational::pow_int(const Rational& base, int64_t exp) {
  if (exp == 0) return Rational::from_int(1);
  if (base.num_ == 0) {
    if (exp < 0) return std::nullopt;  // 0^negative
    return Rational::from_int(0);
  }
  Rational b = base;
  if (exp < 0) {
    auto inv = Rational::div(Rational::from_int(1), base);
    if (!inv) return std::nullopt;
    b = *inv;
    exp = -exp;
  }
  // |base| != 0; anything with |num| or den >= 2 overflows past exp ~ 63
  if (exp > 63 && !(b.num_ == 1 && b.den_ == 1) && b.num_ != -1) {
    return std::nullopt;
  }
  Rational acc = Rational::from_int(1);
  while (exp > 0) {
    if (exp & 1) {
      auto m = Rational::mul(acc, b);
      if (!m) return std::nullopt;
      acc = *m;
    }
    exp >>= 1;
    if (exp > 0) {
      auto s = Rational::mul(b, b);
      if (!s) return std::nullopt;
      b = *s;
    }
  }
  return acc;
}

bool Rational::less(const Rational& a, const Rational& b) {
  return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
}

}  // namespace mwp
