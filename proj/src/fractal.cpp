#include <algorithm>
#include <cmath>
#include <numbers>

#include "fractalscape/error.hpp"
#include "fractalscape/holder.hpp"

namespace fractalscape {

namespace {

using u128 = unsigned __int128;

// Largest modulus exponent for which base * residue stays inside 128 bits.
constexpr int kMaxModBits = 120;

}  // namespace

double weierstrass(double x, double a, double b, int n_terms) {
  require(a > 0.0 && a < 1.0, "weierstrass needs 0 < a < 1");
  require(b >= 1.0, "weierstrass needs b >= 1");
  require(n_terms >= 1, "weierstrass needs at least one term");
  x = std::abs(x);

  const bool integer_base = b == std::floor(b) && b < 128.0;
  int exp2 = 0;
  const double frac = std::frexp(x, &exp2);
  // x = mantissa * 2^-shift with an odd (or zero) integer mantissa
  auto mantissa = static_cast<std::uint64_t>(std::ldexp(frac, 53));
  int shift = 53 - exp2;
  while (mantissa != 0 && (mantissa & 1U) == 0 && shift > 0) {
    mantissa >>= 1;
    --shift;
  }
  const bool exact = integer_base && x != 0.0 && shift + 1 <= kMaxModBits;

  double total = 0.0;
  double weight = 1.0;
  if (exact && shift <= 0) {
    // x is an integer: b^n x mod 2 is its parity
    const auto base = static_cast<std::uint64_t>(b);
    std::uint64_t parity = (shift < 0) ? 0 : (mantissa & 1U);
    for (int n = 0; n < n_terms; ++n) {
      total += weight * (parity ? -1.0 : 1.0);
      parity = (parity * base) & 1U;
      weight *= a;
    }
    return total;
  }
  if (exact) {
    const auto base = static_cast<u128>(b);
    const u128 modulus_mask = (static_cast<u128>(1) << (shift + 1)) - 1;
    u128 residue = static_cast<u128>(mantissa) & modulus_mask;
    for (int n = 0; n < n_terms; ++n) {
      // phase = residue * 2^-shift in [0, 2)
      const double phase = std::ldexp(static_cast<double>(residue), -shift);
      total += weight * std::cos(std::numbers::pi * phase);
      residue = (residue * base) & modulus_mask;
      weight *= a;
    }
    return total;
  }
  double freq = 1.0;
  for (int n = 0; n < n_terms; ++n) {
    total += weight * std::cos(std::numbers::pi * std::fmod(freq * x, 2.0));
    freq *= b;
    weight *= a;
  }
  return total;
}

void CurveSample::validate() const {
  require(xs.size() == ys.size(), "curve xs and ys differ in length");
  if (xs.size() < 1000) {
    throw Error(ErrorKind::insufficient_points, "box counting needs at least 1000 curve points");
  }
  require(std::adjacent_find(xs.begin(), xs.end(), std::greater_equal<>()) == xs.end(),
          "curve xs must be strictly increasing");
}

double box_count_dimension(const CurveSample& curve) {
  curve.validate();
  const std::size_t n = curve.xs.size();
  const double x0 = curve.xs.front(), x1 = curve.xs.back();
  const auto [ylo_it, yhi_it] = std::minmax_element(curve.ys.begin(), curve.ys.end());
  const double ylo = *ylo_it, yspan = *yhi_it - *ylo_it;

  std::vector<double> u(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = (curve.xs[i] - x0) / (x1 - x0);
    v[i] = yspan > 0.0 ? (curve.ys[i] - ylo) / yspan : 0.0;
  }

  // Finest level keeps roughly four samples per column.
  const int levels = std::max(4, static_cast<int>(std::floor(std::log2(static_cast<double>(n) / 4.0))));
  std::vector<double> log_inv_eps, log_count;
  const int first = levels / 4, last = (3 * levels) / 4;
  for (int level = first; level <= last; ++level) {
    const double cols = std::ldexp(1.0, level);
    const auto ncols = static_cast<std::size_t>(cols);
    std::vector<double> lo(ncols, INFINITY), hi(ncols, -INFINITY);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = std::min(ncols - 1, static_cast<std::size_t>(u[i] * cols));
      lo[c] = std::min(lo[c], v[i]);
      hi[c] = std::max(hi[c], v[i]);
      // the graph is connected: the segment to the next sample crosses into its column
      if (i + 1 < n) {
        const auto c_next = std::min(ncols - 1, static_cast<std::size_t>(u[i + 1] * cols));
        if (c_next != c) {
          lo[c] = std::min(lo[c], v[i + 1]);
          hi[c] = std::max(hi[c], v[i + 1]);
        }
      }
    }
    double count = 0.0;
    for (std::size_t c = 0; c < ncols; ++c) {
      if (lo[c] > hi[c]) continue;
      const double top = std::min(std::floor(hi[c] * cols), cols - 1.0);
      const double bottom = std::min(std::floor(lo[c] * cols), cols - 1.0);
      count += top - bottom + 1.0;
    }
    log_inv_eps.push_back(static_cast<double>(level) * std::log(2.0));
    log_count.push_back(std::log(count));
  }

  const double m = static_cast<double>(log_count.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < log_count.size(); ++i) {
    mx += log_inv_eps[i];
    my += log_count[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < log_count.size(); ++i) {
    sxx += (log_inv_eps[i] - mx) * (log_inv_eps[i] - mx);
    sxy += (log_inv_eps[i] - mx) * (log_count[i] - my);
  }
  return sxy / sxx;
}

}  // namespace fractalscape
