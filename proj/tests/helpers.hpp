#pragma once

#include <vector>

#include "ghs/concepts.hpp"

namespace ghs::test {

inline Literal lit(std::size_t var, int sign, Residue lo, Residue hi, Residue z = 1) {
  return Literal{BasicLiteral{var, sign, lo, hi}, z};
}

inline Gate rect(std::vector<Literal> lits) { return Gate{GateType::rectangle, std::move(lits)}; }
inline Gate parity(std::vector<Literal> lits) { return Gate{GateType::parity, std::move(lits)}; }

inline Concept union_of(Domain d, std::vector<Gate> gates) {
  return Concept(d, ConceptKind::union_rect, std::move(gates));
}

/// Direct definition of i-sensitivity, by exhaustive search for a witness.
inline bool sensitive_somewhere(const Concept& c, std::size_t coord, Residue sigma) {
  const auto& d = c.domain();
  Point x(d.n);
  for (std::uint64_t idx = 0; idx < *d.size(); ++idx) {
    d.point_at(idx, x);
    Point y = x;
    y[coord] = (sigma + d.b - 1) % d.b;
    x[coord] = sigma;
    if (c.eval(x) != c.eval(y)) return true;
  }
  return false;
}

}  // namespace ghs::test
