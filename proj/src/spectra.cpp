#include "qhd/spectra.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "qhd/errors.hpp"

namespace qhd {

std::vector<double> remove_mean(std::span<const double> series) {
  if (series.empty()) throw UsageError("remove_mean: empty series");
  const double mean =
      std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
  std::vector<double> out(series.begin(), series.end());
  for (double& v : out) v -= mean;
  return out;
}

FourierCoefficients fourier_coefficients(std::span<const double> u) {
  const std::size_t n = u.size();
  if (n < 8 || n % 2 != 0) {
    std::ostringstream os;
    os << "fourier_coefficients: series length must be even and >= 8, got " << n;
    throw UsageError(os.str());
  }
  // Twiddles cos/sin(2 pi m / N); l * k is reduced mod N so every sum uses
  // exactly the tabulated angles.
  std::vector<double> c(n), s(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
    c[m] = std::cos(angle);
    s[m] = std::sin(angle);
  }
  const std::size_t half = n / 2;
  FourierCoefficients out{std::vector<double>(half), std::vector<double>(half)};
  for (std::size_t k = 1; k <= half; ++k) {
    double sa = 0.0, sb = 0.0;
    std::size_t m = 0;
    for (std::size_t l = 0; l < n; ++l) {
      sa += u[l] * c[m];
      sb += u[l] * s[m];
      m += k;
      if (m >= n) m -= n;
    }
    out.a[k - 1] = 2.0 * sa;
    out.b[k - 1] = 2.0 * sb;
  }
  return out;
}

Spectrum energy_spectrum(std::span<const double> samples) {
  const auto pulsations = remove_mean(samples);
  const auto coeff = fourier_coefficients(pulsations);
  Spectrum s;
  s.n_samples = static_cast<int>(samples.size());
  s.reliable_max_k = s.n_samples / 8;
  const std::size_t half = coeff.a.size();
  s.k.resize(half);
  s.energy.resize(half);
  for (std::size_t q = 0; q < half; ++q) {
    s.k[q] = static_cast<int>(q + 1);
    s.energy[q] = coeff.a[q] * coeff.a[q] + coeff.b[q] * coeff.b[q];
  }
  return s;
}

Spectrum energy_spectrum(const ProbeSeries& series, Component c, double t_start) {
  series.validate();
  const auto values = series.component(c, t_start);
  return energy_spectrum(values);
}

double loglog_slope(const Spectrum& s, int k_lo, int k_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t q = 0; q < s.k.size(); ++q) {
    if (s.k[q] < k_lo || s.k[q] > k_hi || !(s.energy[q] > 0.0)) continue;
    const double x = std::log(static_cast<double>(s.k[q])), y = std::log(s.energy[q]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw UsageError("loglog_slope: fewer than two positive entries in range");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace qhd
