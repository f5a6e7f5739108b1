#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "hasimoto/calculus.hpp"
#include "hasimoto/errors.hpp"
#include "hasimoto/grid.hpp"

namespace hasimoto {

/// Complex grid function (q, p, psi).
struct ComplexField {
  GridSpec grid;
  std::vector<cplx> values;

  std::size_t size() const { return values.size(); }
  cplx& operator[](std::size_t i) { return values[i]; }
  const cplx& operator[](std::size_t i) const { return values[i]; }

  bool finite() const {
    for (const auto& v : values)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }
};

/// q together with its x-derivatives; d[k] holds d^k q / dx^k, k = 0..order.
struct ComplexJet {
  GridSpec grid;
  int order = 0;
  std::array<std::vector<cplx>, 5> d;

  std::size_t size() const { return d[0].size(); }
  const std::vector<cplx>& q() const { return d[0]; }
  const std::vector<cplx>& operator[](int k) const { return d[static_cast<std::size_t>(k)]; }

  void require(int k) const {
    if (order < k) throw ConfigError("jet of order " + std::to_string(order) + " lacks derivative " + std::to_string(k));
  }
};

/// Jet by grid differentiation of q.
inline ComplexJet make_jet(const ComplexField& q, const GridCalculus& calc, int order) {
  if (order < 0 || order > 4) throw UnsupportedError("jet order must be in 0..4");
  ComplexJet j;
  j.grid = q.grid;
  j.order = order;
  j.d[0] = q.values;
  if (order > 0) {
    auto ds = calc.derivatives(q.values, order);
    for (int k = 1; k <= order; ++k) j.d[static_cast<std::size_t>(k)] = std::move(ds[static_cast<std::size_t>(k - 1)]);
  }
  return j;
}

inline double l2_norm(const std::vector<cplx>& v, double dx) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s * dx);
}

inline double linf_norm(const std::vector<cplx>& v) {
  double m = 0.0;
  for (const auto& z : v) m = std::max(m, std::abs(z));
  return m;
}

inline double l2_norm(const ComplexField& f) { return l2_norm(f.values, f.grid.dx()); }
inline double linf_norm(const ComplexField& f) { return linf_norm(f.values); }

}  // namespace hasimoto
