#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ghs {

using Residue = std::uint64_t;
using Point = std::vector<Residue>;
using PointView = std::span<const Residue>;

enum class Errc {
  invalid_argument,
  malformed_concept,
  budget_exceeded,
  non_basic_literal,
  not_invertible,
  no_correlated_character,
  stage_budget_exhausted,
  measure_collapse,
  refinement_degenerate,
  no_disagreement_found,
  index_out_of_range,
  terminated,
  learner_failure,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

// Exact residue arithmetic. Products go through 128-bit intermediates so any
// modulus below 2^64 is safe.
inline Residue mulmod(Residue a, Residue c, Residue m) {
  return static_cast<Residue>((static_cast<unsigned __int128>(a) * c) % m);
}

inline Residue addmod(Residue a, Residue c, Residue m) {
  return static_cast<Residue>((static_cast<unsigned __int128>(a) + c) % m);
}

Residue gcd(Residue a, Residue c);

/// Inverse of z modulo b by extended Euclid; nullopt when gcd(z, b) != 1.
std::optional<Residue> mod_inverse(Residue z, Residue b);

/// Prime factors of b in ascending order, with multiplicity.
std::vector<Residue> prime_factors(Residue b);

/// The domain [b]^n.
struct Domain {
  std::size_t n = 1;
  Residue b = 2;

  /// Upper bound on n * log2(b) accepted at construction.
  static constexpr double kDescriptionBits = 4096.0;

  static Domain make(std::size_t n, Residue b);

  /// b^n when it fits in 63 bits.
  std::optional<std::uint64_t> size() const;
  bool fits(std::uint64_t budget) const {
    auto s = size();
    return s && *s <= budget;
  }
  /// Linear index with coordinate 0 most significant, so index order is
  /// lexicographic order on points.
  std::uint64_t index_of(PointView x) const;
  Point point_at(std::uint64_t index) const;
  void point_at(std::uint64_t index, std::span<Residue> out) const;
  bool contains(PointView x) const;

  friend bool operator==(const Domain&, const Domain&) = default;
};

/// Runs body(begin, end) over [0, count) split into contiguous chunks, one per
/// worker. Chunks write disjoint outputs, so results never depend on threads.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace ghs
