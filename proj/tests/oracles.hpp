#pragma once

// Slow, direct reference computations. None of these call into the library
// beyond plain data types, so agreement with it is a real cross-check.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

// Error(i) for 1-based sample i of a wrong prediction, straight from the piecewise definition.
inline double error_term(long i, long n1, long n2, double a, double b, double g) {
  const double ln_n1 = std::log(static_cast<double>(n1));
  if (i <= n1) return a * ln_n1;
  if (i <= n1 + n2) return b * std::log(static_cast<double>(i - n1)) + a * ln_n1;
  const double j = static_cast<double>(i - n1 - n2);
  return g * j * j + b * std::log(static_cast<double>(n2)) + a * ln_n1;
}

// Error mass of an all-wrong series in each interval.
inline std::array<double, 3> interval_sums(long n1, long n2, long n3, double a, double b, double g) {
  std::array<double, 3> s{};
  for (long i = 1; i <= n1 + n2 + n3; ++i) {
    const int k = i <= n1 ? 0 : i <= n1 + n2 ? 1 : 2;
    s[k] += error_term(i, n1, n2, a, b, g);
  }
  return s;
}

struct Coefficients {
  double alpha, beta, gamma;
};

// Interval sums are linear in (alpha, beta, gamma); probe with unit vectors, then
// solve the 3x3 system by Gaussian elimination with partial pivoting.
inline Coefficients solve_calibration(long n1, long n2, long n3, std::array<double, 3> w = {0.2, 0.3, 0.5}) {
  double m[3][4];
  for (int c = 0; c < 3; ++c) {
    const auto col = interval_sums(n1, n2, n3, c == 0, c == 1, c == 2);
    for (int r = 0; r < 3; ++r) m[r][c] = col[r];
  }
  for (int r = 0; r < 3; ++r) m[r][3] = w[r];
  for (int p = 0; p < 3; ++p) {
    int best = p;
    for (int r = p + 1; r < 3; ++r)
      if (std::abs(m[r][p]) > std::abs(m[best][p])) best = r;
    for (int c = 0; c < 4; ++c) std::swap(m[p][c], m[best][c]);
    for (int r = 0; r < 3; ++r) {
      if (r == p) continue;
      const double f = m[r][p] / m[p][p];
      for (int c = p; c < 4; ++c) m[r][c] -= f * m[p][c];
    }
  }
  return {m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

// 1 - sum of Error(i) over mispredicted samples (0-based flags).
inline double s_score(const std::vector<bool>& wrong, long n1, long n2, const Coefficients& c) {
  double e = 0.0;
  for (std::size_t i = 0; i < wrong.size(); ++i)
    if (wrong[i]) e += error_term(static_cast<long>(i) + 1, n1, n2, c.alpha, c.beta, c.gamma);
  return 1.0 - e;
}

// |X_k| for every k by the O(M^2) definition.
inline std::vector<double> dft_magnitudes(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> cs(n), sn(n);
  for (std::size_t k = 0; k < n; ++k) {
    cs[k] = std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
    sn[k] = std::sin(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
  }
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    long double re = 0, im = 0;
    for (std::size_t m = 0; m < n; ++m) {
      const std::size_t idx = (k * m) % n;
      re += x[m] * cs[idx];
      im -= x[m] * sn[idx];
    }
    out[k] = static_cast<double>(std::sqrt(re * re + im * im));
  }
  return out;
}

// One-sided amplitude spectrum, DC and Nyquist unscaled, others doubled, all over M.
inline std::vector<double> amplitude_spectrum(const std::vector<double>& x) {
  const auto mag = dft_magnitudes(x);
  const std::size_t n = x.size();
  std::vector<double> a(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k)
    a[k] = mag[k] * ((k == 0 || k == n / 2) ? 1.0 : 2.0) / static_cast<double>(n);
  return a;
}

// 8-tap Daubechies lowpass filter (4 vanishing moments).
inline const std::vector<double> kDb4 = {0.23037781330885523,  0.7148465705525415,  0.6308807679295904,
                                         -0.02798376941698385, -0.18703481171888114, 0.030841381835986965,
                                         0.032883011666982945, -0.010597401784997278};

// Periodized one-level analysis written as a dense matrix product:
// rows 0..n/2-1 are shifted lowpass filters, rows n/2..n-1 shifted highpass filters.
inline void analysis_matrix_step(const std::vector<double>& x, const std::vector<double>& h,
                                 std::vector<double>& approx, std::vector<double>& detail) {
  const std::size_t n = x.size(), len = h.size();
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < n / 2; ++k)
    for (std::size_t t = 0; t < len; ++t) {
      const double g = (t % 2 ? -1.0 : 1.0) * h[len - 1 - t];
      w[k][(2 * k + t) % n] += h[t];
      w[n / 2 + k][(2 * k + t) % n] += g;
    }
  approx.assign(n / 2, 0.0);
  detail.assign(n / 2, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    long double acc = 0;
    for (std::size_t c = 0; c < n; ++c) acc += w[r][c] * x[c];
    (r < n / 2 ? approx[r] : detail[r - n / 2]) = static_cast<double>(acc);
  }
}

struct WaveletEnergies {
  std::array<double, 4> detail{};
  double approx = 0.0;
};

inline WaveletEnergies wavelet_energies(std::vector<double> x, const std::vector<double>& h = kDb4) {
  WaveletEnergies e;
  std::vector<double> a, d;
  for (int level = 0; level < 4; ++level) {
    analysis_matrix_step(x, h, a, d);
    for (double v : d) e.detail[static_cast<std::size_t>(level)] += v * v;
    x = a;
  }
  for (double v : x) e.approx += v * v;
  return e;
}

// The 24 per-sensor features in extraction order, from their textbook formulas.
inline std::array<double, 24> wave_features(const std::vector<double>& x) {
  const long double m = static_cast<long double>(x.size());
  long double mx = x[0], mn = x[0], s = 0, s2 = 0, sr = 0;
  for (double v : x) {
    mx = std::max<long double>(mx, v);
    mn = std::min<long double>(mn, v);
    s += v;
    s2 += static_cast<long double>(v) * v;
    sr += std::sqrt(std::abs(static_cast<long double>(v)));
  }
  const long double mean = s / m;
  long double c2 = 0, c3 = 0, c4 = 0;
  for (double v : x) {
    const long double d = v - mean;
    c2 += d * d;
    c3 += d * d * d;
    c4 += d * d * d * d;
  }
  const long double var = c2 / m;
  const long double sd = std::sqrt(var);
  const long double rms = std::sqrt(s2 / m);
  std::array<double, 24> f{};
  f[0] = static_cast<double>(mx);
  f[1] = static_cast<double>(mn);
  f[2] = static_cast<double>(mean);
  f[3] = static_cast<double>(mx - mn);
  f[4] = static_cast<double>(var);
  f[5] = static_cast<double>(sd);
  f[6] = static_cast<double>(rms);
  f[7] = static_cast<double>((c3 / m) / (sd * sd * sd));
  f[8] = static_cast<double>((c4 / m) / (var * var));
  f[9] = static_cast<double>(rms / std::abs(mean));
  f[10] = static_cast<double>(mx / rms);
  f[11] = static_cast<double>(mx / std::abs(mean));
  f[12] = static_cast<double>(mx / ((sr / m) * (sr / m)));

  const auto amp = amplitude_spectrum(x);
  long double amax = amp[1], asum = 0;
  for (std::size_t k = 1; k < amp.size(); ++k) {
    amax = std::max<long double>(amax, amp[k]);
    asum += amp[k];
  }
  const long double bins = static_cast<long double>(amp.size() - 1);
  const long double amean = asum / bins;
  long double avar = 0;
  for (std::size_t k = 1; k < amp.size(); ++k) avar += (amp[k] - amean) * (amp[k] - amean);
  f[13] = static_cast<double>(amax);
  f[14] = static_cast<double>(amean);
  f[15] = static_cast<double>(std::sqrt(avar / bins));

  const auto e = wavelet_energies(x);
  const double total = e.detail[0] + e.detail[1] + e.detail[2] + e.detail[3] + e.approx;
  for (int i = 0; i < 4; ++i) {
    f[16 + static_cast<std::size_t>(i)] = e.detail[static_cast<std::size_t>(i)];
    f[20 + static_cast<std::size_t>(i)] = e.detail[static_cast<std::size_t>(i)] / total;
  }
  return f;
}

inline double rel_err(double got, double want, double floor = 1e-300) {
  return std::abs(got - want) / std::max(std::abs(want), floor);
}

}  // namespace oracle
