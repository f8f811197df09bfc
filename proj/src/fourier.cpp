#include "ghs/fourier.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace ghs {

Complex unit_root(Residue d, Residue b) {
  d %= b;
  const double angle = 2.0 * std::numbers::pi * (static_cast<double>(d) / static_cast<double>(b));
  return {std::cos(angle), std::sin(angle)};
}

Residue dot_mod(PointView alpha, PointView x, Residue b) {
  Residue acc = 0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] == 0 || x[i] == 0) continue;
    acc = addmod(acc, mulmod(alpha[i], x[i], b), b);
  }
  return acc;
}

Complex char_eval(const Domain& domain, PointView alpha, PointView x) {
  return unit_root(dot_mod(alpha, x, domain.b), domain.b);
}

void Spectrum::set(Frequency alpha, Complex amplitude) {
  if (alpha.size() != domain_.n || !domain_.contains(alpha))
    fail(Errc::invalid_argument, "frequency outside the spectrum's domain");
  entries_[std::move(alpha)] = amplitude;
}

Complex Spectrum::at(const Frequency& alpha) const {
  auto it = entries_.find(alpha);
  return it == entries_.end() ? Complex{} : it->second;
}

double Spectrum::energy() const {
  double e = 0.0;
  for (const auto& [alpha, amp] : entries_) e += std::norm(amp);
  return e;
}

Complex Spectrum::evaluate(PointView x) const {
  Complex acc{};
  for (const auto& [alpha, amp] : entries_) acc += amp * char_eval(domain_, alpha, x);
  return acc;
}

std::string Spectrum::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  for (const auto& [alpha, amp] : entries_) {
    for (auto a : alpha) out << a << ',';
    out << amp.real() << ',' << amp.imag() << '\n';
  }
  return out.str();
}

double l1_norm(const Spectrum& s) {
  double acc = 0.0;
  for (const auto& [alpha, amp] : s) acc += std::abs(amp);
  return acc;
}

double linf_norm(const Spectrum& s) {
  double best = 0.0;
  for (const auto& [alpha, amp] : s) best = std::max(best, std::abs(amp));
  return best;
}

std::vector<Complex> dft_dense(const Domain& domain, std::span<const Complex> table,
                               const DftOptions& options) {
  if (!domain.fits(options.budget))
    fail(Errc::budget_exceeded, "domain exceeds the exhaustive budget; use the sft module");
  const std::uint64_t size = *domain.size();
  if (table.size() != size) fail(Errc::invalid_argument, "truth table size mismatch");
  const Residue b = domain.b;

  std::vector<Complex> twiddle(b);
  for (Residue m = 0; m < b; ++m) twiddle[m] = unit_root(b - m, b);  // e^{-2 pi i m / b}

  std::vector<Complex> cur(table.begin(), table.end());
  std::vector<Complex> next(size);
  const double inv_b = 1.0 / static_cast<double>(b);
  std::uint64_t stride = size;
  for (std::size_t axis = 0; axis < domain.n; ++axis) {
    stride /= b;
    const std::uint64_t lines = size / b;
    parallel_for(lines, options.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t line = begin; line < end; ++line) {
        const std::uint64_t outer = line / stride;
        const std::uint64_t inner = line % stride;
        const std::uint64_t base = outer * stride * b + inner;
        for (Residue k = 0; k < b; ++k) {
          Complex acc{};
          Residue phase = 0;
          for (Residue x = 0; x < b; ++x) {
            acc += cur[base + x * stride] * twiddle[phase];
            phase += k;
            if (phase >= b) phase -= b;
          }
          next[base + k * stride] = acc * inv_b;
        }
      }
    });
    cur.swap(next);
  }
  return cur;
}

std::vector<Complex> dft_dense(const Domain& domain, std::span<const int> table, const DftOptions& options) {
  std::vector<Complex> values(table.begin(), table.end());
  return dft_dense(domain, std::span<const Complex>(values), options);
}

namespace {

Spectrum to_spectrum(const Domain& domain, const std::vector<Complex>& dense) {
  Spectrum s(domain);
  for (std::uint64_t idx = 0; idx < dense.size(); ++idx) {
    if (std::abs(dense[idx]) > Spectrum::kPrune) s.set(domain.point_at(idx), dense[idx]);
  }
  return s;
}

}  // namespace

Spectrum dft_exact(const Domain& domain, std::span<const Complex> table, const DftOptions& options) {
  return to_spectrum(domain, dft_dense(domain, table, options));
}

Spectrum dft_exact(const Domain& domain, std::span<const int> table, const DftOptions& options) {
  return to_spectrum(domain, dft_dense(domain, table, options));
}

Residue twist_frequency(Residue alpha, Residue z, Residue b) {
  auto inv = mod_inverse(z, b);
  if (!inv) fail(Errc::not_invertible, "twist is not a unit modulo b");
  return mulmod(alpha % b, *inv, b);
}

namespace {

// hat of the basic literal sigma on [lo, hi] at gamma. The interval sum is
// e^{-i pi gamma (2 lo + w - 1) / b} sin(pi w gamma / b) / sin(pi gamma / b),
// with every angle numerator reduced exactly modulo 2b.
Complex basic_coefficient(const BasicLiteral& lit, Residue b, Residue gamma) {
  const double sigma = lit.sign;
  const Residue w = lit.hi - lit.lo + 1;
  const double bd = static_cast<double>(b);
  if (gamma == 0) return sigma * (2.0 * static_cast<double>(w) / bd - 1.0);
  const Residue two_b = 2 * b;
  auto half_turn = [&](Residue t) { return std::numbers::pi * (static_cast<double>(t % two_b) / bd); };
  const Residue phase_num = mulmod((2 * lit.lo + w - 1) % two_b, gamma, two_b);
  const double ratio = std::sin(half_turn(mulmod(w % two_b, gamma, two_b))) / std::sin(half_turn(gamma));
  const double phase = -half_turn(phase_num);
  return (2.0 * sigma / bd) * ratio * Complex(std::cos(phase), std::sin(phase));
}

}  // namespace

Complex literal_coefficient(const Literal& lit, Residue b, Residue gamma) {
  gamma %= b;
  const Residue basic_gamma = lit.is_basic() ? gamma : twist_frequency(gamma, lit.twist, b);
  return basic_coefficient(lit.base, b, basic_gamma);
}

Spectrum k_restriction(const Literal& lit, Residue b, Residue k) {
  if (k < 1) fail(Errc::invalid_argument, "k-restriction needs k >= 1");
  Spectrum s(Domain::make(1, b));
  const Residue reach = std::min<Residue>(k, b / 2);
  auto add = [&](Residue beta) {
    // beta is the untwisted frequency; the twisted literal carries the same
    // amplitude at beta * z.
    const Residue alpha = lit.is_basic() ? beta : mulmod(beta, lit.twist, b);
    s.set({alpha}, basic_coefficient(lit.base, b, beta));
  };
  add(0);
  for (Residue m = 1; m <= reach; ++m) {
    add(m);
    if (b - m != m) add(b - m);
  }
  return s;
}

double k_restriction_tail(const Literal& lit, Residue b, Residue k) {
  double tail = 0.0;
  if (b <= (Residue{1} << 24)) {
    for (Residue beta = 1; beta < b; ++beta)
      if (circular_abs(beta, b) > k) tail += std::norm(basic_coefficient(lit.base, b, beta));
    return tail;
  }
  return std::max(0.0, 1.0 - k_restriction(lit, b, k).energy());
}

}  // namespace ghs
