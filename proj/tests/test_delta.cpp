#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "lagforge/delta.hpp"
#include "lagforge/rational.hpp"

using lagforge::Partition;
using lagforge::Rational;

namespace {

// Independent exact-fraction arithmetic on __int128, used as an oracle for
// the library's boost::rational-based coefficient. Kept deliberately separate
// from the library implementation.
struct Frac {
  __int128 num = 0;
  __int128 den = 1;
};

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 r = a % b;
    a = b;
    b = r;
  }
  return a;
}

Frac reduce(Frac f) {
  REQUIRE(f.den != 0);
  if (f.den < 0) {
    f.num = -f.num;
    f.den = -f.den;
  }
  const __int128 g = gcd128(f.num, f.den);
  if (g > 1) {
    f.num /= g;
    f.den /= g;
  }
  return f;
}

Frac frac(long long n, long long d = 1) { return reduce(Frac{n, d}); }

Frac operator+(Frac a, Frac b) { return reduce(Frac{a.num * b.den + b.num * a.den, a.den * b.den}); }
Frac operator-(Frac a, Frac b) { return reduce(Frac{a.num * b.den - b.num * a.den, a.den * b.den}); }
Frac operator*(Frac a, Frac b) { return reduce(Frac{a.num * b.num, a.den * b.den}); }
Frac operator/(Frac a, Frac b) {
  REQUIRE(b.num != 0);
  return reduce(Frac{a.num * b.den, a.den * b.num});
}
bool operator==(Frac a, Frac b) {
  a = reduce(a);
  b = reduce(b);
  return a.num == b.num && a.den == b.den;
}

std::string to_string(Frac f) {
  f = reduce(f);
  auto digits = [](__int128 v) {
    const bool neg = v < 0;
    if (neg) v = -v;
    std::string s;
    do {
      s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
      v /= 10;
    } while (v != 0);
    return neg ? "-" + s : s;
  };
  return digits(f.num) + "/" + digits(f.den);
}

// Direct transcription of the two coefficient formulas: with S = sum of the
// parts and k their count,
//   S < n :  n^2 (n - S + 3k - 1 - 6 sum_j 1/(2+n_j))
//            -----------------------------------------
//            2  (n - S + 3k + 2 - 6 sum_j 1/(2+n_j))
//   S = n :  n^2 (k - 1 - 2 sum_{j>=2} 1/(2+n_j))
//            -----------------------------------
//            2  (k     - 2 sum_{j>=2} 1/(2+n_j))
Frac oracle_coefficient(int n, const std::vector<int>& parts) {
  const int k = static_cast<int>(parts.size());
  int total = 0;
  for (int p : parts) total += p;
  const Frac n_sq = frac(n) * frac(n);
  if (total < n) {
    Frac s = frac(0);
    for (int p : parts) s = s + frac(1, 2 + p);
    const Frac numerator = frac(n - total + 3 * k - 1) - frac(6) * s;
    const Frac denominator = frac(n - total + 3 * k + 2) - frac(6) * s;
    return n_sq * numerator / (frac(2) * denominator);
  }
  Frac s = frac(0);
  for (std::size_t j = 1; j < parts.size(); ++j) s = s + frac(1, 2 + parts[j]);
  const Frac numerator = frac(k - 1) - frac(2) * s;
  const Frac denominator = frac(k) - frac(2) * s;
  return n_sq * numerator / (frac(2) * denominator);
}

Frac to_frac(const Rational& r) { return frac(r.numerator(), r.denominator()); }

void enumerate_partitions(int n, int min_part, int budget, std::vector<int>& prefix,
                          std::vector<std::vector<int>>& out) {
  for (int p = min_part; p <= std::min(n - 1, budget); ++p) {
    prefix.push_back(p);
    out.push_back(prefix);
    enumerate_partitions(n, p, budget - p, prefix, out);
    prefix.pop_back();
  }
}

std::vector<std::vector<int>> all_valid_partitions(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> prefix;
  enumerate_partitions(n, 2, n, prefix, out);
  return out;
}

}  // namespace

TEST_CASE("coefficient matches the independent exact-fraction oracle for all tuples, n <= 12") {
  int checked = 0;
  for (int n = 3; n <= 12; ++n) {
    for (const auto& parts : all_valid_partitions(n)) {
      Partition p{n, parts};
      const Rational lib = lagforge::a_coefficient(p);
      const Frac want = oracle_coefficient(n, parts);
      INFO("n=" << n << " k=" << parts.size() << " first part=" << parts.front());
      INFO("oracle=" << to_string(want) << " library=" << lagforge::to_string(lib));
      CHECK(to_frac(lib) == want);
      CHECK(lib > Rational(0));
      ++checked;
    }
  }
  // Guards against a vacuous enumeration.
  CHECK(checked > 100);
}

TEST_CASE("coefficient worked examples") {
  CHECK(lagforge::a_coefficient(Partition{3, {2}}) == Rational(3, 2));
  CHECK(lagforge::a_coefficient(Partition{4, {2, 2}}) == Rational(8, 3));
}

TEST_CASE("partition validation names the violated constraint") {
  CHECK_THROWS_WITH(lagforge::a_coefficient(Partition{3, {3}}),
                    Catch::Matchers::ContainsSubstring("<= n-1"));
  CHECK_THROWS_WITH(lagforge::a_coefficient(Partition{5, {1}}),
                    Catch::Matchers::ContainsSubstring(">= 2"));
  CHECK_THROWS_WITH(lagforge::a_coefficient(Partition{6, {3, 2}}),
                    Catch::Matchers::ContainsSubstring("nondecreasing"));
  CHECK_THROWS_WITH(lagforge::a_coefficient(Partition{5, {2, 2, 2}}),
                    Catch::Matchers::ContainsSubstring("sum exceeds"));
  CHECK_THROWS_WITH(lagforge::a_coefficient(Partition{2, {2}}),
                    Catch::Matchers::ContainsSubstring("n must be >= 3"));
  CHECK_THROWS_WITH(lagforge::a_coefficient(Partition{4, {}}),
                    Catch::Matchers::ContainsSubstring("at least one part"));
}

TEST_CASE("bound right-hand side worked examples") {
  const Partition p{3, {2}};
  CHECK(lagforge::delta_bound_rhs(p, 0.0, 1) == Catch::Approx(2.0).margin(1e-15));
  CHECK(lagforge::delta_bound_rhs(p, 1.0, 0) == Catch::Approx(1.5).margin(1e-15));
  for (int n = 3; n <= 7; ++n)
    for (const auto& parts : all_valid_partitions(n))
      CHECK(lagforge::delta_bound_rhs(Partition{n, parts}, 0.0, 0) == 0.0);
}

TEST_CASE("bound right-hand side is affine with the stated coefficients") {
  for (int n = 3; n <= 9; ++n) {
    for (const auto& parts : all_valid_partitions(n)) {
      const Partition p{n, parts};
      // Slope in |H|^2 equals the coefficient; slope in c equals
      // (1/2)(n(n-1) - sum n_j(n_j-1)); no cross or higher-order terms.
      const double a = lagforge::to_double(lagforge::a_coefficient(p));
      long long pinned = static_cast<long long>(n) * (n - 1);
      for (int q : parts) pinned -= static_cast<long long>(q) * (q - 1);
      const double curvature_slope = 0.5 * static_cast<double>(pinned);

      const double at_00 = lagforge::delta_bound_rhs(p, 0.0, 0);
      const double at_10 = lagforge::delta_bound_rhs(p, 1.0, 0);
      const double at_01 = lagforge::delta_bound_rhs(p, 0.0, 1);
      const double at_2m = lagforge::delta_bound_rhs(p, 2.0, -1);
      CHECK(at_00 == 0.0);
      CHECK(at_10 - at_00 == Catch::Approx(a).epsilon(1e-14));
      CHECK(at_01 - at_00 == Catch::Approx(curvature_slope).margin(1e-12));
      CHECK(at_2m == Catch::Approx(2.0 * a - curvature_slope).epsilon(1e-13).margin(1e-12));
    }
  }
  CHECK_THROWS_WITH(lagforge::delta_bound_rhs(Partition{3, {2}}, -0.5, 0),
                    Catch::Matchers::ContainsSubstring("nonnegative"));
  CHECK_THROWS_WITH(lagforge::delta_bound_rhs(Partition{3, {2}}, 0.5, 2),
                    Catch::Matchers::ContainsSubstring("curvature"));
}

TEST_CASE("special-ratio classification worked examples") {
  {
    const auto tag = lagforge::classify_special_d(5, Rational(1, 4));
    REQUIRE(tag.case_one_m.has_value());
    CHECK(*tag.case_one_m == 2);
    CHECK(tag.case_two);
  }
  {
    const auto tag = lagforge::classify_special_d(4, Rational(1, 3));
    CHECK_FALSE(tag.case_one_m.has_value());
    CHECK_FALSE(tag.case_two);
  }
  {
    const auto tag = lagforge::classify_special_d(7, Rational(1, 5));
    REQUIRE(tag.case_one_m.has_value());
    CHECK(*tag.case_one_m == 3);
    CHECK_FALSE(tag.case_two);
  }
}

TEST_CASE("special-ratio classification, exhaustive n <= 50") {
  for (int n = 2; n <= 50; ++n) {
    for (int m = 2; m <= n - 1; ++m) {
      const auto tag = lagforge::classify_special_d(n, Rational(1, 2 + m));
      INFO("n=" << n << " m=" << m);
      if ((n - 1) % m == 0) {
        REQUIRE(tag.case_one_m.has_value());
        CHECK(*tag.case_one_m == m);
      } else {
        CHECK_FALSE(tag.case_one_m.has_value());
      }
      CHECK(tag.case_two == (n >= 5 && Rational(1, 2 + m) == Rational(1, n - 1)));
    }
    // Non-unit fractions and small denominators never match case one.
    CHECK_FALSE(lagforge::classify_special_d(n, Rational(2, 5)).case_one_m.has_value());
    CHECK_FALSE(lagforge::classify_special_d(n, Rational(1, 3)).case_one_m.has_value());
  }
  CHECK_THROWS_WITH(lagforge::classify_special_d(1, Rational(1, 4)),
                    Catch::Matchers::ContainsSubstring("n must be >= 2"));
}

TEST_CASE("rational parsing accepts fractions, integers, and exact decimals") {
  CHECK(lagforge::parse_rational("1/4") == Rational(1, 4));
  CHECK(lagforge::parse_rational("-3/6") == Rational(-1, 2));
  CHECK(lagforge::parse_rational("2") == Rational(2));
  CHECK(lagforge::parse_rational("0.25") == Rational(1, 4));
  CHECK(lagforge::parse_rational("-0.5") == Rational(-1, 2));
  CHECK(lagforge::parse_rational("1.") == Rational(1));
  CHECK_THROWS(lagforge::parse_rational("1/0"));
  CHECK_THROWS(lagforge::parse_rational("abc"));
  CHECK_THROWS(lagforge::parse_rational(""));
}
