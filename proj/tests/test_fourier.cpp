#include <cmath>
#include <numbers>

#include "doctest.h"
#include "ghs/fourier.hpp"
#include "helpers.hpp"

using namespace ghs;
using ghs::test::lit;

namespace {

// Direct O(size^2) transform, independent of the separable implementation.
std::vector<Complex> naive_dft(const Domain& d, const std::vector<Complex>& f) {
  const std::uint64_t size = *d.size();
  std::vector<Complex> out(size);
  Point a(d.n), x(d.n);
  for (std::uint64_t ai = 0; ai < size; ++ai) {
    d.point_at(ai, a);
    Complex acc{};
    for (std::uint64_t xi = 0; xi < size; ++xi) {
      d.point_at(xi, x);
      double dot = 0.0;
      for (std::size_t k = 0; k < d.n; ++k) dot += static_cast<double>(a[k] * x[k]);
      acc += f[xi] * std::polar(1.0, -2.0 * std::numbers::pi * dot / static_cast<double>(d.b));
    }
    out[ai] = acc / static_cast<double>(size);
  }
  return out;
}

std::vector<Complex> literal_table(const Literal& l, Residue b) {
  std::vector<Complex> t(b);
  for (Residue x = 0; x < b; ++x) t[x] = eval_literal(l, x, b);
  return t;
}

}  // namespace

TEST_CASE("characters") {
  const auto d = Domain::make(1, 4);
  CHECK(std::abs(char_eval(d, Point{1}, Point{1}) - Complex(0, 1)) < 1e-12);
  CHECK(std::abs(char_eval(d, Point{1}, Point{2}) - Complex(-1, 0)) < 1e-12);
  const auto d2 = Domain::make(2, 7);
  for (Residue a = 0; a < 7; ++a) CHECK(std::abs(char_eval(d2, Point{0, 0}, Point{a, 3}) - 1.0) < 1e-12);
  // Huge alphabets: the residue is reduced before the angle is formed.
  const auto big = Domain::make(1, Residue{1} << 40);
  const Residue x = (Residue{1} << 40) - 1;
  CHECK(std::abs(std::abs(char_eval(big, Point{x}, Point{x})) - 1.0) < 1e-12);
  CHECK(std::abs(char_eval(big, Point{x}, Point{x}) - std::polar(1.0, 2.0 * std::numbers::pi / std::ldexp(1.0, 40))) <
        1e-12);
}

TEST_CASE("orthonormality of characters") {
  for (Residue b : {3u, 5u, 8u}) {
    const auto d = Domain::make(2, b);
    const std::uint64_t size = *d.size();
    Point a(2), c(2), x(2);
    for (std::uint64_t ai = 0; ai < size; ++ai)
      for (std::uint64_t ci = 0; ci < size; ++ci) {
        d.point_at(ai, a);
        d.point_at(ci, c);
        Complex acc{};
        for (std::uint64_t xi = 0; xi < size; ++xi) {
          d.point_at(xi, x);
          acc += char_eval(d, a, x) * std::conj(char_eval(d, c, x));
        }
        acc /= static_cast<double>(size);
        CHECK(std::abs(acc - (ai == ci ? 1.0 : 0.0)) < 1e-9);
      }
  }
}

TEST_CASE("four point literal transform") {
  const auto d = Domain::make(1, 4);
  const std::vector<int> table{-1, -1, 1, 1};
  const auto s = dft_exact(d, std::span<const int>(table));
  CHECK(std::abs(s.at({0})) < 1e-12);
  CHECK(std::abs(s.at({1}) - Complex(-0.5, 0.5)) < 1e-12);
  CHECK(std::abs(s.at({2})) < 1e-12);
  CHECK(std::abs(s.at({3}) - Complex(-0.5, -0.5)) < 1e-12);
  CHECK(l1_norm(s) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(linf_norm(s) == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
  CHECK(s.energy() == doctest::Approx(1.0));

  const auto l = lit(0, -1, 0, 1);
  CHECK(std::abs(literal_coefficient(l, 4, 0)) < 1e-12);
  CHECK(std::abs(literal_coefficient(l, 4, 1) - Complex(-0.5, 0.5)) < 1e-12);

  const auto k1 = k_restriction(l, 4, 1);
  CHECK(k1.size() == 3);
  CHECK(k1.contains({0}));
  CHECK(k1.contains({1}));
  CHECK(k1.contains({3}));
  CHECK(k_restriction_tail(l, 4, 1) < 1e-12);
}

TEST_CASE("constant function") {
  const auto d = Domain::make(2, 6);
  const std::vector<int> ones(36, 1);
  const auto s = dft_exact(d, std::span<const int>(ones));
  CHECK(s.size() == 1);
  CHECK(std::abs(s.at({0, 0}) - 1.0) < 1e-12);
  CHECK(l1_norm(s) == doctest::Approx(1.0));
  CHECK(linf_norm(s) == doctest::Approx(1.0));
}

TEST_CASE("dense transform agrees with the direct sum and inverts") {
  Rng rng(5);
  for (Residue b : {2u, 3u, 6u, 7u}) {
    const auto d = Domain::make(2, b);
    const std::uint64_t size = *d.size();
    std::vector<Complex> f(size);
    for (auto& v : f) v = Complex(rng.uniform() - 0.5, rng.uniform() - 0.5);
    const auto fast = dft_dense(d, std::span<const Complex>(f));
    const auto slow = naive_dft(d, f);
    for (std::uint64_t i = 0; i < size; ++i) CHECK(std::abs(fast[i] - slow[i]) < 1e-9);

    std::vector<int> pm(size);
    for (auto& v : pm) v = rng.sign();
    const auto s = dft_exact(d, std::span<const int>(pm));
    CHECK(std::abs(s.energy() - 1.0) < 1e-9);
    Point x(2);
    for (std::uint64_t i = 0; i < size; ++i) {
      d.point_at(i, x);
      CHECK(std::abs(s.evaluate(x) - static_cast<double>(pm[i])) < 1e-9);
    }
  }
}

TEST_CASE("transform is independent of the thread count") {
  Rng rng(8);
  const auto d = Domain::make(3, 12);
  std::vector<Complex> f(*d.size());
  for (auto& v : f) v = rng.uniform();
  DftOptions one, many;
  many.threads = 8;
  CHECK(dft_dense(d, std::span<const Complex>(f), one) == dft_dense(d, std::span<const Complex>(f), many));
}

TEST_CASE("budget is enforced") {
  const auto d = Domain::make(3, 128);
  std::vector<Complex> f(1);
  DftOptions o;
  o.budget = 1000;
  try {
    dft_dense(d, std::span<const Complex>(f), o);
    FAIL("budget ignored");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::budget_exceeded);
  }
}

TEST_CASE("closed form literal coefficients") {
  for (Residue b : {2u, 5u, 16u, 33u}) {
    for (Residue lo = 0; lo < b; lo += 3)
      for (Residue hi = lo; hi < b; hi += 2) {
        const auto l = lit(0, (lo + hi) % 2 ? 1 : -1, lo, hi);
        const auto ref = naive_dft(Domain::make(1, b), literal_table(l, b));
        for (Residue g = 0; g < b; ++g) {
          const auto c = literal_coefficient(l, b, g);
          CHECK(std::abs(c - ref[g]) < 1e-9);
          if (g != 0) CHECK(std::abs(c) < 2.0 / static_cast<double>(circular_abs(g, b)));
        }
      }
  }
}

TEST_CASE("twist relation") {
  CHECK(twist_frequency(2, 3, 5) == 4);
  CHECK(twist_frequency(7, 1, 16) == 7);
  CHECK_THROWS_AS(twist_frequency(1, 4, 16), Error);
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const Residue b = 2 + rng.below(255);
    Residue z;
    do z = 1 + rng.below(b - 1 ? b - 1 : 1);
    while (gcd(z, b) != 1);
    const Residue lo = rng.below(b);
    const Residue hi = lo + rng.below(b - lo);
    const auto basic = lit(0, -1, lo, hi);
    const auto twisted = lit(0, -1, lo, hi, z);
    const auto d = Domain::make(1, b);
    const auto tw = dft_dense(d, std::span<const Complex>(literal_table(twisted, b)));
    const auto ba = dft_dense(d, std::span<const Complex>(literal_table(basic, b)));
    for (Residue a = 0; a < b; ++a) {
      CHECK(std::abs(tw[a] - ba[twist_frequency(a, z, b)]) < 1e-9);
      CHECK(std::abs(tw[a] - literal_coefficient(twisted, b, a)) < 1e-9);
    }
  }
}

TEST_CASE("geometric sum bound") {
  for (Residue b = 2; b <= 96; ++b)
    for (Residue a = 1; a < b; ++a) {
      Complex acc{};
      const Complex w = unit_root(a, b);
      Complex p = 1.0;
      for (Residue len = 0; len <= b; ++len) {
        CHECK(std::abs(acc) < static_cast<double>(b) / static_cast<double>(circular_abs(a, b)));
        acc += p;
        p *= w;
      }
    }
}

TEST_CASE("k restriction") {
  const auto l = lit(0, -1, 3, 9);
  const Residue b = 20;
  const auto full = k_restriction(l, b, 10);
  CHECK(full.size() == b);
  for (Residue x = 0; x < b; ++x) CHECK(std::abs(full.evaluate(Point{x}) - static_cast<double>(eval_literal(l, x, b))) < 1e-9);

  const auto tl = lit(0, -1, 3, 9, 3);
  const auto kt = k_restriction(tl, b, 2);
  CHECK(kt.size() == 5);
  for (const auto& [alpha, amp] : kt) {
    CHECK(circular_abs(twist_frequency(alpha[0], 3, b), b) <= 2);
    CHECK(std::abs(amp - literal_coefficient(tl, b, alpha[0])) < 1e-12);
  }

  Rng rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const Residue bb = 2 + rng.below(300);
    const Residue lo = rng.below(bb);
    const auto rl = lit(0, rng.sign(), lo, lo + rng.below(bb - lo));
    for (Residue k : {1u, 2u, 4u, 8u, 16u}) {
      const double tail = k_restriction_tail(rl, bb, k);
      CHECK(tail <= 8.0 / static_cast<double>(k));
      CHECK(std::abs(tail + k_restriction(rl, bb, k).energy() - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("literal L1 norm grows logarithmically") {
  Rng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const Residue b = 2 + rng.below(4095);
    const Residue lo = rng.below(b);
    const auto l = lit(0, -1, lo, lo + rng.below(b - lo));
    double l1 = 0.0;
    for (Residue g = 0; g < b; ++g) l1 += std::abs(literal_coefficient(l, b, g));
    CHECK(l1 <= 5.0 + 4.0 * std::log(static_cast<double>(b)));
  }
}

TEST_CASE("correlation is bounded by L1 times the best character") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = Domain::make(2, 4 + rng.below(20));
    const std::uint64_t size = *d.size();
    std::vector<Complex> f(size), h(size), fd(size);
    std::vector<double> dist(size);
    double total = 0.0;
    for (auto& p : dist) total += (p = rng.uniform());
    for (std::uint64_t i = 0; i < size; ++i) {
      f[i] = rng.sign();
      h[i] = rng.sign();
      dist[i] /= total;
      fd[i] = f[i] * dist[i] * static_cast<double>(size);
    }
    Complex lhs{};
    for (std::uint64_t i = 0; i < size; ++i) lhs += dist[i] * f[i] * std::conj(h[i]);
    const auto hs = dft_exact(d, std::span<const Complex>(h));
    const auto corr = dft_dense(d, std::span<const Complex>(fd));
    double best = 0.0;
    for (auto c : corr) best = std::max(best, std::abs(c));
    CHECK(std::abs(lhs) <= l1_norm(hs) * best + 1e-9);
  }
}

TEST_CASE("spectrum csv") {
  Spectrum s(Domain::make(2, 4));
  s.set({1, 0}, Complex(0.5, -0.25));
  s.set({0, 3}, Complex(1.0, 0.0));
  CHECK(s.to_csv() == "0,3,1,0\n1,0,0.5,-0.25\n");
  CHECK_THROWS_AS(s.set({4, 0}, 1.0), Error);
}
