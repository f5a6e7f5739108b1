#pragma once

#include <complex>
#include <string>
#include <vector>

#include "hasimoto/errors.hpp"

namespace hasimoto {

using cplx = std::complex<double>;

enum class Boundary { periodic, line_truncated };

inline std::string to_string(Boundary b) {
  return b == Boundary::periodic ? "periodic" : "line_truncated";
}

/// Uniform 1-D grid on [x_min, x_max] (periodic: x_max excluded).
struct GridSpec {
  int n_points = 0;
  double x_min = 0.0;
  double x_max = 0.0;
  Boundary boundary = Boundary::periodic;

  static GridSpec periodic(int n, double x_min, double x_max) {
    GridSpec g{n, x_min, x_max, Boundary::periodic};
    g.validate();
    return g;
  }

  static GridSpec line(int n, double x_min, double x_max) {
    GridSpec g{n, x_min, x_max, Boundary::line_truncated};
    g.validate();
    return g;
  }

  double length() const { return x_max - x_min; }

  double dx() const {
    return boundary == Boundary::periodic ? length() / n_points : length() / (n_points - 1);
  }

  double x(int i) const { return x_min + i * dx(); }

  std::vector<double> coordinates() const {
    std::vector<double> xs(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) xs[static_cast<std::size_t>(i)] = x(i);
    return xs;
  }

  std::size_t size() const { return static_cast<std::size_t>(n_points); }

  void validate() const {
    if (n_points < 2) throw ConfigError("grid.n must be at least 2");
    if (!(x_max > x_min)) throw ConfigError("grid domain must satisfy x_max > x_min");
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

}  // namespace hasimoto
