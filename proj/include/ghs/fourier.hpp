#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "ghs/common.hpp"
#include "ghs/concepts.hpp"

namespace ghs {

using Complex = std::complex<double>;
using Frequency = std::vector<Residue>;

/// min(a, b - a), the circular magnitude of a frequency component.
inline Residue circular_abs(Residue a, Residue b) { return std::min(a, b - a); }

/// e^{2 pi i d / b} for a residue d; d is reduced before any trigonometry.
Complex unit_root(Residue d, Residue b);

/// <alpha, x> mod b in exact integer arithmetic.
Residue dot_mod(PointView alpha, PointView x, Residue b);

/// chi_alpha(x) = omega_b^{<alpha, x>}.
Complex char_eval(const Domain& domain, PointView alpha, PointView x);

/// Sparse association frequency -> amplitude. Iteration is lexicographic.
class Spectrum {
 public:
  /// Amplitudes at or below this magnitude are dropped when building from a
  /// dense transform.
  static constexpr double kPrune = 1e-12;

  explicit Spectrum(Domain domain) : domain_(domain) {}

  const Domain& domain() const { return domain_; }
  void set(Frequency alpha, Complex amplitude);
  Complex at(const Frequency& alpha) const;
  bool contains(const Frequency& alpha) const { return entries_.count(alpha) != 0; }
  std::size_t size() const { return entries_.size(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  /// Sum of |amplitude|^2.
  double energy() const;
  /// Inverse transform at one point.
  Complex evaluate(PointView x) const;
  /// Rows "alpha_0,...,alpha_{n-1},re,im", lexicographic in alpha.
  std::string to_csv() const;

 private:
  Domain domain_;
  std::map<Frequency, Complex> entries_;
};

double l1_norm(const Spectrum& s);
double linf_norm(const Spectrum& s);

struct DftOptions {
  std::uint64_t budget = 1u << 20;
  unsigned threads = 1;
};

/// Dense coefficients hat f(alpha) = E[f conj(chi_alpha)] in Domain index
/// order. Separable exact transform; reference oracle for everything else.
std::vector<Complex> dft_dense(const Domain& domain, std::span<const Complex> table,
                               const DftOptions& options = {});
std::vector<Complex> dft_dense(const Domain& domain, std::span<const int> table,
                               const DftOptions& options = {});

Spectrum dft_exact(const Domain& domain, std::span<const Complex> table, const DftOptions& options = {});
Spectrum dft_exact(const Domain& domain, std::span<const int> table, const DftOptions& options = {});

/// Closed-form hat l(gamma) for a one-variable literal over [b], in O(1).
Complex literal_coefficient(const Literal& lit, Residue b, Residue gamma);

/// alpha * z^{-1} mod b.
Residue twist_frequency(Residue alpha, Residue z, Residue b);

/// Truncation of a literal's spectrum to the frequencies whose untwisted
/// magnitude is at most k.
Spectrum k_restriction(const Literal& lit, Residue b, Residue k);

/// Exact energy of the frequencies excluded by k_restriction.
double k_restriction_tail(const Literal& lit, Residue b, Residue k);

}  // namespace ghs
