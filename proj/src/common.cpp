#include "ghs/common.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ghs {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::malformed_concept: return "malformed-concept";
    case Errc::budget_exceeded: return "budget-exceeded";
    case Errc::non_basic_literal: return "non-basic-literal";
    case Errc::not_invertible: return "not-invertible";
    case Errc::no_correlated_character: return "no-correlated-character";
    case Errc::stage_budget_exhausted: return "stage-budget-exhausted";
    case Errc::measure_collapse: return "measure-collapse";
    case Errc::refinement_degenerate: return "refinement-degenerate";
    case Errc::no_disagreement_found: return "no-disagreement-found";
    case Errc::index_out_of_range: return "index-out-of-range";
    case Errc::terminated: return "terminated";
    case Errc::learner_failure: return "learner-failure";
  }
  return "unknown";
}

Residue gcd(Residue a, Residue c) {
  while (c != 0) {
    Residue t = a % c;
    a = c;
    c = t;
  }
  return a;
}

std::optional<Residue> mod_inverse(Residue z, Residue b) {
  if (b == 1) return 0;
  __int128 old_r = static_cast<__int128>(z % b), r = static_cast<__int128>(b);
  __int128 old_s = 1, s = 0;
  while (r != 0) {
    __int128 q = old_r / r;
    __int128 t = old_r - q * r;
    old_r = r;
    r = t;
    t = old_s - q * s;
    old_s = s;
    s = t;
  }
  if (old_r != 1) return std::nullopt;
  __int128 inv = old_s % static_cast<__int128>(b);
  if (inv < 0) inv += b;
  return static_cast<Residue>(inv);
}

std::vector<Residue> prime_factors(Residue b) {
  std::vector<Residue> out;
  for (Residue p = 2; p <= b / p; ++p) {
    while (b % p == 0) {
      out.push_back(p);
      b /= p;
    }
  }
  if (b > 1) out.push_back(b);
  return out;
}

Domain Domain::make(std::size_t n, Residue b) {
  if (n < 1) fail(Errc::invalid_argument, "domain needs n >= 1");
  if (b < 2) fail(Errc::invalid_argument, "domain needs b >= 2");
  if (static_cast<double>(n) * std::log2(static_cast<double>(b)) > kDescriptionBits)
    fail(Errc::invalid_argument, "domain description length exceeds budget");
  return Domain{n, b};
}

std::optional<std::uint64_t> Domain::size() const {
  unsigned __int128 s = 1;
  for (std::size_t i = 0; i < n; ++i) {
    s *= b;
    if (s > (static_cast<unsigned __int128>(1) << 63)) return std::nullopt;
  }
  return static_cast<std::uint64_t>(s);
}

std::uint64_t Domain::index_of(PointView x) const {
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < n; ++i) idx = idx * b + x[i];
  return idx;
}

Point Domain::point_at(std::uint64_t index) const {
  Point x(n);
  point_at(index, x);
  return x;
}

void Domain::point_at(std::uint64_t index, std::span<Residue> out) const {
  for (std::size_t i = n; i-- > 0;) {
    out[i] = index % b;
    index /= b;
  }
}

bool Domain::contains(PointView x) const {
  if (x.size() != n) return false;
  return std::all_of(x.begin(), x.end(), [this](Residue v) { return v < b; });
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  if (count == 0) return;
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, count);
  if (workers == 1) {
    body(0, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace ghs
