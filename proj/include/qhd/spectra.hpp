#pragma once

#include <span>
#include <vector>

#include "qhd/diagnostics.hpp"

namespace qhd {

/// Subtracts the sample mean. Throws UsageError on an empty series.
std::vector<double> remove_mean(std::span<const double> series);

/// Cosine and sine coefficients by wavenumber k = 1 .. N/2, stored at k - 1:
///   a(k) = 2 sum_l u_l cos(2 pi l k / N),  b(k) = 2 sum_l u_l sin(2 pi l k / N).
struct FourierCoefficients {
  std::vector<double> a;
  std::vector<double> b;
};

/// Direct summation. N must be even and at least 8 (UsageError otherwise).
FourierCoefficients fourier_coefficients(std::span<const double> pulsations);

/// Pulsation energy E(k) = a(k)^2 + b(k)^2 for k = 1 .. N/2; k = 0 (the mean)
/// is not part of the spectrum.
struct Spectrum {
  std::vector<int> k;
  std::vector<double> energy;
  int n_samples = 0;
  /// Harmonics up to N/8 have at least four samples per period.
  int reliable_max_k = 0;

  bool reliable(int wavenumber) const noexcept { return wavenumber <= reliable_max_k; }
};

/// Mean removal followed by the coefficient sums.
Spectrum energy_spectrum(std::span<const double> samples);

/// Spectrum of one velocity component from t_start on. The series must be
/// uniformly sampled; an odd number of samples is rejected.
Spectrum energy_spectrum(const ProbeSeries& series, Component c, double t_start = -1.0);

/// Least-squares slope of log E against log k over k_lo <= k <= k_hi.
double loglog_slope(const Spectrum& s, int k_lo, int k_hi);

}  // namespace qhd
