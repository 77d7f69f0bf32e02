#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rotorprog/error.hpp"
#include "rotorprog/signal.hpp"

namespace rotorprog {

inline constexpr std::size_t kTimeFeatureCount = 13;
inline constexpr std::size_t kFreqFeatureCount = 11;
inline constexpr std::size_t kFeaturesPerSensor = kTimeFeatureCount + kFreqFeatureCount;
inline constexpr std::size_t kMachineFeatureCount = kFeaturesPerSensor * kSensorCount;

inline constexpr std::array<const char*, kTimeFeatureCount> kTimeFeatureNames = {
    "Max", "Min", "Mean", "Peak_Peak", "Var", "Std", "Rms", "Skew", "Kurt",
    "Shape_factor", "Crest_factor", "Pulse_factor", "Clearance_factor"};

inline constexpr std::array<const char*, kFreqFeatureCount> kFreqFeatureNames = {
    "FFT_max", "FFT_mean", "FFT_std", "Energy_1", "Energy_2", "Energy_3", "Energy_4",
    "Energy_1_por", "Energy_2_por", "Energy_3_por", "Energy_4_por"};

using MaybeValue = std::optional<double>;

/// Time-domain statistics of one wave, population moments throughout.
struct TimeDomainFeatures {
  double max = 0, min = 0, mean = 0, peak_peak = 0, var = 0, std = 0, rms = 0;
  MaybeValue skew, kurt;         // missing when variance is 0
  MaybeValue shape_factor;       // missing when mean is 0
  double crest_factor = 0;       // 0 for the all-zero wave
  MaybeValue pulse_factor;       // missing when mean is 0
  double clearance_factor = 0;   // 0 for the all-zero wave

  std::array<MaybeValue, kTimeFeatureCount> values() const {
    return {max, min, mean, peak_peak, var, std, rms, skew, kurt,
            shape_factor, crest_factor, pulse_factor, clearance_factor};
  }
};

/// Computes every defined entry; degenerate ones are left empty instead of throwing.
inline TimeDomainFeatures time_domain_features_partial(std::span<const double> x) {
  require(x.size() >= 2, ErrorKind::invalid_input, "wave needs at least 2 samples");
  const double m = static_cast<double>(x.size());
  TimeDomainFeatures f;
  f.max = x[0];
  f.min = x[0];
  double sum = 0.0, sum_sq = 0.0, sum_sqrt_abs = 0.0;
  for (double v : x) {
    require(std::isfinite(v), ErrorKind::invalid_input, "wave has non-finite sample");
    f.max = std::max(f.max, v);
    f.min = std::min(f.min, v);
    sum += v;
    sum_sq += v * v;
    sum_sqrt_abs += std::sqrt(std::abs(v));
  }
  f.mean = sum / m;
  f.peak_peak = f.max - f.min;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - f.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= m;
  m3 /= m;
  m4 /= m;
  f.var = m2;
  f.std = std::sqrt(m2);
  f.rms = std::sqrt(sum_sq / m);
  if (m2 > 0.0) {
    f.skew = m3 / std::pow(m2, 1.5);
    f.kurt = m4 / (m2 * m2);
  }
  if (f.mean != 0.0) {
    f.shape_factor = f.rms / std::abs(f.mean);
    f.pulse_factor = f.max / std::abs(f.mean);
  }
  if (f.rms > 0.0) f.crest_factor = f.max / f.rms;
  const double root_mean = sum_sqrt_abs / m;
  if (root_mean > 0.0) f.clearance_factor = f.max / (root_mean * root_mean);
  return f;
}

/// Strict variant: throws degenerate-wave for zero variance, degenerate-mean for zero mean.
inline TimeDomainFeatures time_domain_features(std::span<const double> x) {
  auto f = time_domain_features_partial(x);
  require(f.var > 0.0, ErrorKind::degenerate_wave, "zero variance: skewness/kurtosis undefined");
  require(f.mean != 0.0, ErrorKind::degenerate_mean, "zero mean: shape/pulse factors undefined");
  return f;
}

struct FreqDomainFeatures {
  double fft_max = 0, fft_mean = 0, fft_std = 0;
  std::array<double, kWaveletLevels> energy{};
  std::array<MaybeValue, kWaveletLevels> energy_ratio{};  // missing for the zero wave
  double approx_energy = 0;

  std::array<MaybeValue, kFreqFeatureCount> values() const {
    return {fft_max, fft_mean, fft_std, energy[0], energy[1], energy[2], energy[3],
            energy_ratio[0], energy_ratio[1], energy_ratio[2], energy_ratio[3]};
  }
};

inline FreqDomainFeatures freq_domain_features_partial(std::span<const double> x) {
  FreqDomainFeatures f;
  const auto dec = dwt_decompose(x, kWaveletLevels);
  const auto spec = fft_spectrum(x);
  // DC excluded: a sensor offset would otherwise dominate the amplitude statistics.
  const auto amps = std::span<const double>(spec.amplitudes).subspan(1);
  double sum = 0.0;
  f.fft_max = amps.front();
  for (double a : amps) {
    f.fft_max = std::max(f.fft_max, a);
    sum += a;
  }
  f.fft_mean = sum / static_cast<double>(amps.size());
  double ss = 0.0;
  for (double a : amps) ss += (a - f.fft_mean) * (a - f.fft_mean);
  f.fft_std = std::sqrt(ss / static_cast<double>(amps.size()));

  double total = 0.0;
  for (std::size_t i = 0; i < kWaveletLevels; ++i) {
    double e = 0.0;
    for (double c : dec.details[i]) e += c * c;
    f.energy[i] = e;
    total += e;
  }
  for (double c : dec.approx) f.approx_energy += c * c;
  total += f.approx_energy;
  if (total > 0.0)
    for (std::size_t i = 0; i < kWaveletLevels; ++i) f.energy_ratio[i] = f.energy[i] / total;
  return f;
}

inline FreqDomainFeatures freq_domain_features(std::span<const double> x) {
  auto f = freq_domain_features_partial(x);
  require(f.energy_ratio[0].has_value(), ErrorKind::degenerate_energy,
          "zero wave: energy ratios undefined");
  return f;
}

/// Per-sensor names in extraction order, e.g. "Std_S1".
inline std::vector<std::string> sensor_feature_names(int sensor_id) {
  std::vector<std::string> names;
  names.reserve(kFeaturesPerSensor);
  const std::string suffix = "_S" + std::to_string(sensor_id);
  for (const char* n : kTimeFeatureNames) names.push_back(n + suffix);
  for (const char* n : kFreqFeatureNames) names.push_back(n + suffix);
  return names;
}

/// The 144 machine-level names: sensor-major, time-domain then time-frequency.
inline const std::vector<std::string>& machine_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> all;
    all.reserve(kMachineFeatureCount);
    for (int s = 1; s <= kSensorCount; ++s) {
      auto part = sensor_feature_names(s);
      all.insert(all.end(), part.begin(), part.end());
    }
    return all;
  }();
  return names;
}

/// One machine-level feature record. Undefined features are empty optionals.
struct FeatureVector {
  std::string machine_id;
  double timestamp = 0.0;
  std::vector<std::string> names;
  std::vector<MaybeValue> values;
};

inline std::array<MaybeValue, kFeaturesPerSensor> wave_features(std::span<const double> x) {
  std::array<MaybeValue, kFeaturesPerSensor> out;
  const auto t = time_domain_features_partial(x).values();
  const auto f = freq_domain_features_partial(x).values();
  std::copy(t.begin(), t.end(), out.begin());
  std::copy(f.begin(), f.end(), out.begin() + kTimeFeatureCount);
  return out;
}

/// Builds the 144-entry record from the six sensor waves of one timestamp.
/// Waves are taken as-is; see featurize() for the denoise-then-extract path.
inline FeatureVector assemble(std::span<const Wave> waves) {
  require(waves.size() == kSensorCount, ErrorKind::alignment,
          "expected 6 sensor waves, got " + std::to_string(waves.size()));
  std::array<const Wave*, kSensorCount> by_sensor{};
  for (const auto& w : waves) {
    require(w.sensor_id >= 1 && w.sensor_id <= kSensorCount, ErrorKind::alignment,
            "sensor_id out of range: " + std::to_string(w.sensor_id));
    auto& slot = by_sensor[static_cast<std::size_t>(w.sensor_id - 1)];
    require(slot == nullptr, ErrorKind::alignment,
            "duplicate sensor " + std::to_string(w.sensor_id));
    require(w.machine_id == waves[0].machine_id, ErrorKind::alignment,
            "machine mismatch in wave array");
    require(w.timestamp == waves[0].timestamp, ErrorKind::alignment,
            "timestamp mismatch in wave array");
    slot = &w;
  }
  FeatureVector fv;
  fv.machine_id = waves[0].machine_id;
  fv.timestamp = waves[0].timestamp;
  fv.names = machine_feature_names();
  fv.values.reserve(kMachineFeatureCount);
  for (const Wave* w : by_sensor) {
    require(w != nullptr, ErrorKind::alignment, "missing sensor in wave array");
    const auto vals = wave_features(w->samples);
    fv.values.insert(fv.values.end(), vals.begin(), vals.end());
  }
  return fv;
}

/// Denoises each wave, then assembles the feature record.
inline FeatureVector featurize(std::span<const Wave> waves, bool denoise = true) {
  if (!denoise) return assemble(waves);
  std::vector<Wave> clean;
  clean.reserve(waves.size());
  for (const auto& w : waves) clean.push_back(wavelet_denoise(w));
  return assemble(clean);
}

}  // namespace rotorprog
