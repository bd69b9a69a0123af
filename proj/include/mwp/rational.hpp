#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace mwp {

// Exact rational with overflow-checked 64-bit components. Arithmetic runs
// through 128-bit intermediates; any result that leaves the int64 range is
// reported as failure (nullopt) instead of wrapping.
class Rational {
 public:
  Rational() = default;

  static std::optional<Rational> make(int64_t num, int64_t den);
  static Rational from_int(int64_t v);
  // Accepts "8", "-3", "2/3", "1.5".
  static std::optional<Rational> parse(const std::string& text);
  // Exact conversion of a finite double (every finite double is dyadic);
  // fails when the scaled mantissa does not fit in int64.
  static std::optional<Rational> from_double(double v);

  int64_t num() const { return num_; }
  int64_t den() const { return den_; }
  bool is_integer() const { return den_ == 1; }
  bool is_zero() const { return num_ == 0; }
  double to_double() const;
  std::string str() const;  // "n" or "n/d"

  static std::optional<Rational> add(const Rational& a, const Rational& b);
  static std::optional<Rational> sub(const Rational& a, const Rational& b);
  static std::optional<Rational> mul(const Rational& a, const Rational& b);
  // nullopt when b == 0 or on overflow
  static std::optional<Rational> div(const Rational& a, const Rational& b);
  // Exact integer power. nullopt on 0^negative or overflow.
  static std::optional<Rational> pow_int(const Rational& base, int64_t exp);

  static bool less(const Rational& a, const Rational& b);
  bool operator==(const Rational& o) const {
    return num_ == o.num_ && den_ == o.den_;
  }

 private:
  int64_t num_ = 0;
  int64_t den_ = 1;  // > 0, gcd(num_, den_) == 1
};

}  // namespace mwp
