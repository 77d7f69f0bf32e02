#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rotorprog/error.hpp"

namespace rotorprog {

inline constexpr std::size_t kDefaultWaveLength = 1024;
inline constexpr int kSensorCount = 6;
inline constexpr int kWaveletLevels = 4;

/// One sensor time series (displacement in um) captured at one timestamp.
/// Sensors 1-2 are radial, 3-6 axial.
struct Wave {
  std::string machine_id;
  int sensor_id = 1;
  double timestamp = 0.0;
  std::vector<double> samples;

  std::size_t size() const { return samples.size(); }
};

inline void validate(const Wave& wave) {
  require(wave.samples.size() >= 2, ErrorKind::invalid_input,
          "wave needs at least 2 samples");
  require(wave.sensor_id >= 1 && wave.sensor_id <= kSensorCount,
          ErrorKind::invalid_input,
          "sensor_id out of range: " + std::to_string(wave.sensor_id));
  for (double v : wave.samples)
    require(std::isfinite(v), ErrorKind::invalid_input, "wave has non-finite sample");
}

// ---------------------------------------------------------------------------
// FFT amplitude spectrum
// ---------------------------------------------------------------------------

/// One-sided amplitude spectrum, bins 0..M/2. A sinusoid of amplitude A reads A.
struct Spectrum {
  std::vector<double> amplitudes;

  std::size_t bins() const { return amplitudes.size(); }
};

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline void fft_radix2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      // Twiddles computed directly per index, not by recurrence, to hold 1e-12 accuracy.
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
      const std::complex<double> w(std::cos(ang), std::sin(ang));
      for (std::size_t i = k; i < n; i += len) {
        const auto u = a[i];
        const auto v = a[i + half] * w;
        a[i] = u + v;
        a[i + half] = u - v;
      }
    }
  }
}

inline std::vector<std::complex<double>> dft_direct(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>((k * m) % n) / static_cast<double>(n);
      acc += x[m] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

}  // namespace detail

/// Complex DFT of a real sequence; radix-2 when the length allows, direct otherwise.
inline std::vector<std::complex<double>> dft(std::span<const double> x) {
  if (!detail::is_pow2(x.size())) return detail::dft_direct(x);
  std::vector<std::complex<double>> a(x.begin(), x.end());
  detail::fft_radix2(a);
  return a;
}

inline Spectrum fft_spectrum(std::span<const double> samples) {
  const std::size_t m = samples.size();
  require(m >= 2, ErrorKind::invalid_input, "spectrum needs at least 2 samples");
  for (double v : samples)
    require(std::isfinite(v), ErrorKind::invalid_input, "wave has non-finite sample");
  const auto coeffs = dft(samples);
  Spectrum s;
  s.amplitudes.resize(m / 2 + 1);
  const double md = static_cast<double>(m);
  for (std::size_t k = 0; k <= m / 2; ++k) {
    const bool edge = (k == 0) || (m % 2 == 0 && k == m / 2);
    s.amplitudes[k] = std::abs(coeffs[k]) * (edge ? 1.0 : 2.0) / md;
  }
  return s;
}

inline Spectrum fft_spectrum(const Wave& wave) { return fft_spectrum(wave.samples); }

/// Index of the largest non-DC bin.
inline std::size_t dominant_bin(const Spectrum& s) {
  if (s.bins() < 2) return 0;
  return static_cast<std::size_t>(
      std::max_element(s.amplitudes.begin() + 1, s.amplitudes.end()) - s.amplitudes.begin());
}

// ---------------------------------------------------------------------------
// Discrete wavelet transform (periodized, orthonormal filter banks)
// ---------------------------------------------------------------------------

/// Orthonormal scaling (lowpass) filter; the wavelet filter is its quadrature mirror.
struct WaveletBasis {
  std::string name;
  std::vector<double> lowpass;

  std::vector<double> highpass() const {
    const std::size_t len = lowpass.size();
    std::vector<double> g(len);
    for (std::size_t n = 0; n < len; ++n)
      g[n] = ((n % 2) ? -1.0 : 1.0) * lowpass[len - 1 - n];
    return g;
  }

  static WaveletBasis haar() {
    const double r = 1.0 / std::numbers::sqrt2;
    return {"haar", {r, r}};
  }

  /// Daubechies, 4 vanishing moments (8 taps).
  static WaveletBasis db4() {
    return {"db4",
            {0.23037781330885523, 0.7148465705525415, 0.6308807679295904,
             -0.02798376941698385, -0.18703481171888114, 0.030841381835986965,
             0.032883011666982945, -0.010597401784997278}};
  }
};

struct WaveletDecomposition {
  std::vector<std::vector<double>> details;  // details[0] is layer 1, the finest
  std::vector<double> approx;
  std::string basis_name;

  std::size_t levels() const { return details.size(); }

  double energy() const {
    double e = 0.0;
    for (const auto& layer : details)
      for (double c : layer) e += c * c;
    for (double c : approx) e += c * c;
    return e;
  }
};

namespace detail {

inline void analysis_step(std::span<const double> x, const std::vector<double>& h,
                          const std::vector<double>& g, std::vector<double>& approx,
                          std::vector<double>& detail) {
  const std::size_t n = x.size();
  const std::size_t half = n / 2;
  approx.assign(half, 0.0);
  detail.assign(half, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    double a = 0.0, d = 0.0;
    for (std::size_t t = 0; t < h.size(); ++t) {
      const double v = x[(2 * k + t) % n];
      a += h[t] * v;
      d += g[t] * v;
    }
    approx[k] = a;
    detail[k] = d;
  }
}

inline std::vector<double> synthesis_step(std::span<const double> approx,
                                          std::span<const double> detail,
                                          const std::vector<double>& h,
                                          const std::vector<double>& g) {
  const std::size_t n = approx.size() * 2;
  std::vector<double> x(n, 0.0);
  for (std::size_t k = 0; k < approx.size(); ++k)
    for (std::size_t t = 0; t < h.size(); ++t)
      x[(2 * k + t) % n] += h[t] * approx[k] + g[t] * detail[k];
  return x;
}

}  // namespace detail

inline WaveletDecomposition dwt_decompose(std::span<const double> samples,
                                          int levels = kWaveletLevels,
                                          const WaveletBasis& basis = WaveletBasis::db4()) {
  require(levels >= 1, ErrorKind::invalid_input, "levels must be >= 1");
  const std::size_t block = std::size_t{1} << levels;
  require(samples.size() >= block && samples.size() % block == 0,
          ErrorKind::insufficient_length,
          "wave length " + std::to_string(samples.size()) + " must be a positive multiple of " +
              std::to_string(block));
  const auto g = basis.highpass();
  WaveletDecomposition out;
  out.basis_name = basis.name;
  out.details.resize(static_cast<std::size_t>(levels));
  std::vector<double> current(samples.begin(), samples.end());
  std::vector<double> approx;
  for (int level = 0; level < levels; ++level) {
    detail::analysis_step(current, basis.lowpass, g, approx, out.details[static_cast<std::size_t>(level)]);
    current.swap(approx);
  }
  out.approx = std::move(current);
  return out;
}

inline WaveletDecomposition dwt_decompose(const Wave& wave, int levels = kWaveletLevels,
                                          const WaveletBasis& basis = WaveletBasis::db4()) {
  return dwt_decompose(wave.samples, levels, basis);
}

inline std::vector<double> dwt_reconstruct(const WaveletDecomposition& dec,
                                           const WaveletBasis& basis = WaveletBasis::db4()) {
  require(dec.basis_name == basis.name, ErrorKind::invalid_input,
          "decomposition basis " + dec.basis_name + " does not match " + basis.name);
  const auto g = basis.highpass();
  std::vector<double> current = dec.approx;
  for (std::size_t level = dec.levels(); level-- > 0;) {
    require(dec.details[level].size() == current.size(), ErrorKind::invalid_input,
            "inconsistent decomposition layer sizes");
    current = detail::synthesis_step(current, dec.details[level], basis.lowpass, g);
  }
  return current;
}

// ---------------------------------------------------------------------------
// Denoising
// ---------------------------------------------------------------------------

inline double median_abs(std::span<const double> v) {
  std::vector<double> a(v.size());
  std::transform(v.begin(), v.end(), a.begin(), [](double x) { return std::abs(x); });
  if (a.empty()) return 0.0;
  const std::size_t mid = a.size() / 2;
  std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(mid), a.end());
  double m = a[mid];
  if (a.size() % 2 == 0) {
    const double lower = *std::max_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + lower);
  }
  return m;
}

/// sigma * sqrt(2 ln M), sigma estimated from the finest detail layer (MAD / 0.6745).
inline double universal_threshold(const WaveletDecomposition& dec, std::size_t length) {
  const double sigma = median_abs(dec.details.front()) / 0.6745;
  return sigma * std::sqrt(2.0 * std::log(static_cast<double>(length)));
}

inline double soft_threshold(double x, double t) {
  const double mag = std::abs(x) - t;
  return mag > 0.0 ? std::copysign(mag, x) : 0.0;
}

inline std::vector<double> wavelet_denoise(std::span<const double> samples,
                                           const WaveletBasis& basis = WaveletBasis::db4()) {
  require(samples.size() >= 16, ErrorKind::insufficient_length, "denoising needs M >= 16");
  auto dec = dwt_decompose(samples, kWaveletLevels, basis);
  const double thr = universal_threshold(dec, samples.size());
  for (auto& layer : dec.details)
    for (double& c : layer) c = soft_threshold(c, thr);
  return dwt_reconstruct(dec, basis);
}

inline Wave wavelet_denoise(const Wave& wave, const WaveletBasis& basis = WaveletBasis::db4()) {
  Wave out = wave;
  out.samples = wavelet_denoise(wave.samples, basis);
  return out;
}

}  // namespace rotorprog
