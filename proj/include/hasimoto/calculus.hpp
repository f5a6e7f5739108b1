#pragma once

// Grid calculus: spectral differentiation, integration and interpolation on
// periodic grids (FFTW-backed) and finite-difference stencils on truncated lines.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "hasimoto/errors.hpp"
#include "hasimoto/grid.hpp"
#include "hasimoto/vec3.hpp"

namespace hasimoto {

enum class Quadrature {
  trapezoid,            ///< cumulative trapezoid, O(dx^2)
  corrected_trapezoid,  ///< trapezoid with endpoint-derivative correction, O(dx^4)
  spectral              ///< exact antiderivative of the trigonometric interpolant (periodic only)
};

namespace detail {

/// Process-wide cache of in-place FFTW plans. Planning is serialized; execution
/// through fftw_execute_dft on caller buffers is thread-safe.
class FftPlans {
 public:
  struct Pair {
    fftw_plan forward;
    fftw_plan backward;
  };

  static const Pair& get(int n) {
    static FftPlans instance;
    std::lock_guard lock(instance.mutex_);
    auto it = instance.plans_.find(n);
    if (it != instance.plans_.end()) return it->second;
    std::vector<fftw_complex> scratch(static_cast<std::size_t>(n));
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    Pair p{fftw_plan_dft_1d(n, scratch.data(), scratch.data(), FFTW_FORWARD, flags),
           fftw_plan_dft_1d(n, scratch.data(), scratch.data(), FFTW_BACKWARD, flags)};
    return instance.plans_.emplace(n, p).first->second;
  }

  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

 private:
  FftPlans() = default;
  ~FftPlans() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

  std::mutex mutex_;
  std::map<int, Pair> plans_;
};

inline void fft_inplace(std::vector<cplx>& data, bool forward) {
  const auto& plans = FftPlans::get(static_cast<int>(data.size()));
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(forward ? plans.forward : plans.backward, ptr, ptr);
}

// Packing of field element types into complex channels. Every operator applied
// channel-wise is real-linear, so real data packed as re/im stays real.
template <class T>
struct Channels;

template <>
struct Channels<double> {
  static constexpr int count = 1;
  static void pack(std::span<const double> f, int, std::vector<cplx>& out) {
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = cplx(f[i], 0.0);
  }
  static void unpack(const std::vector<cplx>& in, int, std::vector<double>& f) {
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = in[i].real();
  }
};

template <>
struct Channels<cplx> {
  static constexpr int count = 1;
  static void pack(std::span<const cplx> f, int, std::vector<cplx>& out) {
    std::copy(f.begin(), f.end(), out.begin());
  }
  static void unpack(const std::vector<cplx>& in, int, std::vector<cplx>& f) {
    std::copy(in.begin(), in.end(), f.begin());
  }
};

template <>
struct Channels<Vec3> {
  static constexpr int count = 2;
  static void pack(std::span<const Vec3> f, int c, std::vector<cplx>& out) {
    for (std::size_t i = 0; i < f.size(); ++i)
      out[i] = c == 0 ? cplx(f[i].x, f[i].y) : cplx(f[i].z, 0.0);
  }
  static void unpack(const std::vector<cplx>& in, int c, std::vector<Vec3>& f) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (c == 0) {
        f[i].x = in[i].real();
        f[i].y = in[i].imag();
      } else {
        f[i].z = in[i].real();
      }
    }
  }
};

/// Finite-difference weights (Fornberg's recursion) for derivatives 0..m at z.
inline std::vector<std::vector<double>> fornberg_weights(double z, const std::vector<double>& x, int m) {
  const int n = static_cast<int>(x.size()) - 1;
  std::vector<std::vector<double>> c(static_cast<std::size_t>(n + 1),
                                     std::vector<double>(static_cast<std::size_t>(m + 1), 0.0));
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[static_cast<std::size_t>(i)] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)];
      c2 *= c3;
      auto& ci = c[static_cast<std::size_t>(i)];
      auto& cim = c[static_cast<std::size_t>(i - 1)];
      auto& cj = c[static_cast<std::size_t>(j)];
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          ci[static_cast<std::size_t>(k)] =
              c1 * (k * cim[static_cast<std::size_t>(k - 1)] - c5 * cim[static_cast<std::size_t>(k)]) / c2;
        ci[0] = -c1 * c5 * cim[0] / c2;
      }
      for (int k = mn; k >= 1; --k)
        cj[static_cast<std::size_t>(k)] =
            (c4 * cj[static_cast<std::size_t>(k)] - k * cj[static_cast<std::size_t>(k - 1)]) / c3;
      cj[0] = c4 * cj[0] / c3;
    }
    c1 = c2;
  }
  return c;
}

}  // namespace detail

/// Differentiation, cumulative integration and interpolation bound to one grid.
///
/// Periodic grids use Fourier collocation (odd-order derivatives drop the
/// Nyquist mode). Truncated lines use centred stencils of the configured
/// accuracy order in the interior and one-sided stencils near the ends.
class GridCalculus {
 public:
  static constexpr int max_derivative_order = 4;

  explicit GridCalculus(GridSpec grid, int fd_accuracy = 4) : grid_(grid), fd_accuracy_(fd_accuracy) {
    grid_.validate();
    if (fd_accuracy_ < 2 || fd_accuracy_ % 2 != 0)
      throw ConfigError("finite-difference accuracy must be an even integer >= 2");
    if (grid_.boundary == Boundary::periodic) {
      build_wavenumbers();
    } else {
      build_stencils();
    }
  }

  const GridSpec& grid() const { return grid_; }
  bool periodic() const { return grid_.boundary == Boundary::periodic; }
  int fd_accuracy() const { return fd_accuracy_; }

  /// Grids coarser than this make spectral derivatives unreliable; callers may warn.
  static constexpr int recommended_min_points = 16;

  /// d^order f / dx^order for order in 1..4.
  template <class T>
  std::vector<T> derivative(std::span<const T> f, int order) const {
    check_order(order);
    check_size(f.size());
    auto all = periodic() ? spectral_derivatives(f, order, order) : fd_derivatives(f, order, order);
    return std::move(all[static_cast<std::size_t>(order - 1)]);
  }

  template <class T>
  std::vector<T> derivative(const std::vector<T>& f, int order) const {
    return derivative(std::span<const T>(f), order);
  }

  /// All derivatives of orders 1..max_order (index k-1 holds order k).
  template <class T>
  std::vector<std::vector<T>> derivatives(std::span<const T> f, int max_order) const {
    check_order(max_order);
    check_size(f.size());
    return periodic() ? spectral_derivatives(f, 1, max_order) : fd_derivatives(f, 1, max_order);
  }

  template <class T>
  std::vector<std::vector<T>> derivatives(const std::vector<T>& f, int max_order) const {
    return derivatives(std::span<const T>(f), max_order);
  }

  /// F(x_i) = integral of f from x_0 to x_i.
  template <class T>
  std::vector<T> cumulative_integral(std::span<const T> f, Quadrature q) const {
    check_size(f.size());
    switch (q) {
      case Quadrature::trapezoid:
        return trapezoid(f);
      case Quadrature::corrected_trapezoid: {
        auto F = trapezoid(f);
        const auto df = derivative(f, 1);
        const double h2 = grid_.dx() * grid_.dx() / 12.0;
        for (std::size_t i = 0; i < F.size(); ++i) F[i] = F[i] - h2 * (df[i] - df[0]);
        return F;
      }
      case Quadrature::spectral:
        if (!periodic()) throw ConfigError("spectral quadrature requires a periodic grid");
        return spectral_cumulative(f);
    }
    return {};
  }

  template <class T>
  std::vector<T> cumulative_integral(const std::vector<T>& f, Quadrature q) const {
    return cumulative_integral(std::span<const T>(f), q);
  }

  /// Integral over the whole grid (periodic: one period, line: trapezoid to x_max).
  template <class T>
  T integral(std::span<const T> f) const {
    check_size(f.size());
    T sum = f[0] * 0.0;
    if (periodic()) {
      for (const auto& v : f) sum += v;
      return sum * grid_.dx();
    }
    for (std::size_t i = 0; i + 1 < f.size(); ++i) sum += (f[i] + f[i + 1]) * (0.5 * grid_.dx());
    return sum;
  }

  template <class T>
  T integral(const std::vector<T>& f) const {
    return integral(std::span<const T>(f));
  }

  /// Trigonometric interpolant sampled at x_i + offset (periodic only).
  template <class T>
  std::vector<T> shifted(std::span<const T> f, double offset) const {
    if (!periodic()) throw ConfigError("spectral shift requires a periodic grid");
    check_size(f.size());
    const std::size_t n = f.size();
    std::vector<T> out(n);
    std::vector<cplx> buf(n);
    for (int c = 0; c < detail::Channels<T>::count; ++c) {
      detail::Channels<T>::pack(f, c, buf);
      detail::fft_inplace(buf, true);
      for (std::size_t k = 0; k < n; ++k) {
        const double kk = wavenumber_[k];
        if (nyquist(k)) {
          buf[k] *= std::cos(kk * offset);
        } else {
          buf[k] *= std::polar(1.0, kk * offset);
        }
      }
      detail::fft_inplace(buf, false);
      for (auto& v : buf) v /= static_cast<double>(n);
      detail::Channels<T>::unpack(buf, c, out);
    }
    return out;
  }

  template <class T>
  std::vector<T> shifted(const std::vector<T>& f, double offset) const {
    return shifted(std::span<const T>(f), offset);
  }

 private:
  void check_order(int order) const {
    if (order < 1 || order > max_derivative_order)
      throw UnsupportedError("spatial derivative order must be in 1..4 (got " + std::to_string(order) + ")");
  }

  void check_size(std::size_t n) const {
    if (n != grid_.size()) throw ConfigError("field length does not match grid size");
  }

  bool nyquist(std::size_t k) const { return grid_.n_points % 2 == 0 && k == grid_.size() / 2; }

  void build_wavenumbers() {
    const std::size_t n = grid_.size();
    wavenumber_.resize(n);
    const double base = 2.0 * std::numbers::pi / grid_.length();
    for (std::size_t k = 0; k < n; ++k) {
      const long j = k <= n / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
      wavenumber_[k] = base * static_cast<double>(j);
    }
    // (ik)^m / n, formed without complex pow so the multipliers stay exactly
    // real or imaginary.
    multiplier_.assign(max_derivative_order, std::vector<cplx>(n));
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double kk = wavenumber_[k];
      const bool drop_odd = nyquist(k);
      multiplier_[0][k] = drop_odd ? cplx(0.0) : cplx(0.0, kk * inv_n);
      multiplier_[1][k] = cplx(-kk * kk * inv_n, 0.0);
      multiplier_[2][k] = drop_odd ? cplx(0.0) : cplx(0.0, -kk * kk * kk * inv_n);
      multiplier_[3][k] = cplx(kk * kk * kk * kk * inv_n, 0.0);
    }
  }

  void build_stencils() {
    const int n = grid_.n_points;
    const double h = grid_.dx();
    stencils_.resize(max_derivative_order);
    for (int m = 1; m <= max_derivative_order; ++m) {
      const int centred = 2 * ((m + 1) / 2) - 1 + fd_accuracy_;
      const int one_sided = m + fd_accuracy_;
      if (one_sided > n) throw ConfigError("grid too small for finite-difference stencils");
      auto& rows = stencils_[static_cast<std::size_t>(m - 1)];
      rows.resize(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        const int half = (centred - 1) / 2;
        int start = i - half;
        int width = centred;
        if (start < 0 || start + width > n) {
          width = one_sided;
          start = std::clamp(i - width / 2, 0, n - width);
        }
        std::vector<double> nodes(static_cast<std::size_t>(width));
        for (int j = 0; j < width; ++j) nodes[static_cast<std::size_t>(j)] = (start + j - i);
        const auto w = detail::fornberg_weights(0.0, nodes, m);
        Stencil s{start, std::vector<double>(static_cast<std::size_t>(width))};
        for (int j = 0; j < width; ++j)
          s.weights[static_cast<std::size_t>(j)] =
              w[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)] / std::pow(h, m);
        rows[static_cast<std::size_t>(i)] = std::move(s);
      }
    }
  }

  template <class T>
  std::vector<std::vector<T>> spectral_derivatives(std::span<const T> f, int min_order, int max_order) const {
    const std::size_t n = f.size();
    std::vector<std::vector<T>> out(static_cast<std::size_t>(max_order), std::vector<T>(n));
    std::vector<cplx> hat(n);
    std::vector<cplx> buf(n);
    for (int c = 0; c < detail::Channels<T>::count; ++c) {
      detail::Channels<T>::pack(f, c, hat);
      detail::fft_inplace(hat, true);
      for (int m = min_order; m <= max_order; ++m) {
        for (std::size_t k = 0; k < n; ++k) {
          buf[k] = hat[k] * multiplier_[static_cast<std::size_t>(m - 1)][k];
        }
        detail::fft_inplace(buf, false);
        detail::Channels<T>::unpack(buf, c, out[static_cast<std::size_t>(m - 1)]);
      }
    }
    return out;
  }

  template <class T>
  std::vector<std::vector<T>> fd_derivatives(std::span<const T> f, int min_order, int max_order) const {
    const std::size_t n = f.size();
    std::vector<std::vector<T>> out(static_cast<std::size_t>(max_order), std::vector<T>(n));
    for (int m = min_order; m <= max_order; ++m) {
      const auto& rows = stencils_[static_cast<std::size_t>(m - 1)];
      auto& d = out[static_cast<std::size_t>(m - 1)];
      for (std::size_t i = 0; i < n; ++i) {
        const auto& s = rows[i];
        T acc = f[0] * 0.0;
        for (std::size_t j = 0; j < s.weights.size(); ++j)
          acc += f[static_cast<std::size_t>(s.start) + j] * s.weights[j];
        d[i] = acc;
      }
    }
    return out;
  }

  template <class T>
  std::vector<T> trapezoid(std::span<const T> f) const {
    std::vector<T> F(f.size());
    F[0] = f[0] * 0.0;
    const double h = grid_.dx();
    for (std::size_t i = 1; i < f.size(); ++i) F[i] = F[i - 1] + (f[i - 1] + f[i]) * (0.5 * h);
    return F;
  }

  template <class T>
  std::vector<T> spectral_cumulative(std::span<const T> f) const {
    const std::size_t n = f.size();
    std::vector<T> out(n);
    std::vector<cplx> buf(n);
    const cplx I(0.0, 1.0);
    for (int c = 0; c < detail::Channels<T>::count; ++c) {
      detail::Channels<T>::pack(f, c, buf);
      detail::fft_inplace(buf, true);
      const cplx mean = buf[0] / static_cast<double>(n);
      buf[0] = 0.0;
      for (std::size_t k = 1; k < n; ++k) {
        if (nyquist(k)) {
          buf[k] = 0.0;
        } else {
          buf[k] /= (I * wavenumber_[k]) * static_cast<double>(n);
        }
      }
      detail::fft_inplace(buf, false);
      const cplx p0 = buf[0];
      for (std::size_t i = 0; i < n; ++i) buf[i] = buf[i] - p0 + mean * (grid_.dx() * static_cast<double>(i));
      detail::Channels<T>::unpack(buf, c, out);
    }
    return out;
  }

  struct Stencil {
    int start = 0;
    std::vector<double> weights;
  };

  GridSpec grid_;
  int fd_accuracy_;
  std::vector<double> wavenumber_;
  std::vector<std::vector<cplx>> multiplier_;
  std::vector<std::vector<Stencil>> stencils_;
};

/// Free-function form of GridCalculus::derivative.
template <class T>
std::vector<T> spatial_derivative(const std::vector<T>& f, int order, const GridSpec& grid, int fd_accuracy = 4) {
  return GridCalculus(grid, fd_accuracy).derivative(f, order);
}

}  // namespace hasimoto
