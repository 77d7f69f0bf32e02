#pragma once

// Seeded synthetic rotor-vibration fleet. Each wave is a two-tone mixture
// (fundamental + second harmonic) plus Gaussian noise, with sparse spikes in
// some high-risk waves. Per-interval standard deviations follow the measured
// sensor statistics; the fundamental slows as deterioration grows, and both
// amplitude and frequency wander slowly from wave to wave.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rotorprog/cascade.hpp"
#include "rotorprog/rng.hpp"
#include "rotorprog/signal.hpp"

namespace rotorprog {

using WaveArray = std::array<Wave, kSensorCount>;

struct DegradationProfile {
  // [sensor][interval] standard deviation targets (um)
  std::array<std::array<double, 3>, kSensorCount> target_std{};
  // fundamental frequency per interval, in FFT bins of one wave
  std::array<double, 3> base_bin{40.0, 24.0, 14.0};
  double noise_fraction = 0.15;     // share of variance from white noise
  double harmonic_fraction = 0.10;  // share of variance from the second harmonic
  double spike_wave_share = 0.3;    // share of high-risk waves that carry spikes
  double spike_rate = 0.002;        // per-sample spike probability in a spiking wave
  double spike_scale = 3.5;         // spike height in wave standard deviations
  double machine_jitter = 0.10;     // per-machine, per-sensor std scale in [1-j, 1+j]
  double freq_jitter = 0.08;        // per-machine fundamental scale in [1-j, 1+j]
  double amp_spread = 0.35;         // log-sd of the wave-to-wave amplitude multiplier
  double wander_limit = 2.0;        // both multipliers are capped at this many log-sds
  double freq_spread = 0.2;         // log-sd of the wave-to-wave frequency multiplier
  double persistence = 0.8;         // lag-one correlation of both multipliers between consecutive waves
  double drift = 0.2;               // within-interval ramp of std (+) and frequency (-) for risky/high-risk
  std::size_t wave_length = kDefaultWaveLength;

  /// Standard deviations of the six sensors in the normal / risky / high-risk intervals.
  static DegradationProfile standard() {
    DegradationProfile p;
    p.target_std = {{{2.0366, 6.7985, 11.1055},
                     {2.8504, 6.8678, 12.3792},
                     {2.1308, 10.1692, 12.5702},
                     {2.2505, 9.9623, 11.8240},
                     {4.8239, 12.6074, 15.6947},
                     {5.0908, 12.1179, 16.1177}}};
    return p;
  }

  void validate() const {
    for (const auto& s : target_std)
      require(s[0] > 0.0 && s[0] < s[1] && s[1] < s[2], ErrorKind::invalid_input,
              "profile std targets must increase normal -> risky -> high-risk");
    require(base_bin[0] > base_bin[1] && base_bin[1] > base_bin[2] && base_bin[2] > 1.0,
            ErrorKind::invalid_input, "profile frequencies must decrease normal -> risky -> high-risk");
    require(noise_fraction >= 0.0 && harmonic_fraction >= 0.0 &&
                noise_fraction + harmonic_fraction + spike_fraction() < 1.0,
            ErrorKind::invalid_input, "variance shares must leave room for the fundamental");
    require(persistence >= 0.0 && persistence < 1.0, ErrorKind::invalid_input, "persistence must be in [0, 1)");
    require(wave_length >= 16 && wave_length % 16 == 0, ErrorKind::invalid_input,
            "wave length must be a positive multiple of 16");
    require(2.0 * base_bin[0] * (1.0 + freq_jitter) * std::exp(wander_limit * freq_spread) <
                static_cast<double>(wave_length) / 2.0,
            ErrorKind::invalid_input, "harmonic of the normal fundamental would exceed the Nyquist bin");
  }

  /// Share of a spiking wave's variance carried by spikes (heights uniform in [0.8, 1.2] * scale).
  double spike_fraction() const { return spike_rate * spike_scale * spike_scale * (1.0 + 0.16 / 12.0); }
};

struct IntervalCounts {
  std::size_t normal = 40;
  std::size_t risky = 26;
  std::size_t high_risk = 24;
};

struct MachineData {
  MachineTimeline timeline;
  std::vector<WaveArray> waves;  // one per timestamp
  std::vector<int> labels;
};

inline constexpr double kDefaultEpoch = 1.6e9;
inline constexpr double kObservationSpan = 180.0 * kSecondsPerDay;

namespace detail {

/// `count` evenly spaced whole-second timestamps strictly inside [begin, end).
inline void spread(double begin, double end, std::size_t count, std::vector<double>& out) {
  const double step = (end - begin) / static_cast<double>(count);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(std::floor(begin + (static_cast<double>(i) + 0.5) * step));
}

inline double quantize(double v) { return std::round(v * 1e4) / 1e4; }

}  // namespace detail

/// Per-wave operating condition drawn by generate_machine.
struct WaveCondition {
  int interval = kNormal;
  double sd = 1.0;        // target standard deviation of this wave (um)
  double freq = 40.0;     // fundamental, in bins
  bool spiking = false;
};

inline std::vector<double> synthesize_wave(const DegradationProfile& p, const WaveCondition& w, Rng& rng) {
  require(w.sd > 0.0 && w.freq > 0.0, ErrorKind::invalid_input, "wave needs positive std and frequency");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double spikes = w.spiking ? p.spike_fraction() : 0.0;
  const double tone_var = 1.0 - p.noise_fraction - p.harmonic_fraction - spikes;
  const double a1 = std::sqrt(2.0 * tone_var) * w.sd;
  const double a2 = std::sqrt(2.0 * p.harmonic_fraction) * w.sd;
  const double phase1 = 2.0 * std::numbers::pi * unit(rng);
  const double phase2 = 2.0 * std::numbers::pi * unit(rng);
  std::normal_distribution<double> noise(0.0, std::sqrt(p.noise_fraction) * w.sd);
  std::bernoulli_distribution spike(w.spiking ? p.spike_rate : 0.0);
  const double m = static_cast<double>(p.wave_length);
  std::vector<double> x(p.wave_length);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / m;
    double v = a1 * std::sin(w.freq * t + phase1) + a2 * std::sin(2.0 * w.freq * t + phase2) + noise(rng);
    if (spike(rng)) {
      const double height = p.spike_scale * w.sd * (0.8 + 0.4 * unit(rng));
      v += unit(rng) < 0.5 ? -height : height;
    }
    x[i] = detail::quantize(v);
  }
  return x;
}

/// Faulty machines fail at `epoch + 180 days` and produce normal, risky and
/// high-risk waves; healthy machines produce `counts.normal` normal waves over 180 days.
///
/// Amplitude and frequency wander from wave to wave through two AR(1) log-normal
/// multipliers shared by all six sensors. The amplitude multiplier has unit mean
/// square, so pooled interval standard deviations stay on target.
inline MachineData generate_machine(const DegradationProfile& profile, const std::string& machine_id, bool faulty,
                                    const IntervalCounts& counts, std::uint64_t seed,
                                    double epoch = kDefaultEpoch) {
  profile.validate();
  require(counts.normal >= 1, ErrorKind::invalid_input, "need at least one normal wave");
  if (faulty)
    require(counts.risky >= 1 && counts.high_risk >= 1, ErrorKind::invalid_input,
            "faulty machines need risky and high-risk waves");
  MachineData out;
  out.timeline.machine_id = machine_id;
  auto& ts = out.timeline.timestamps;
  if (faulty) {
    const double fail_at = epoch + kObservationSpan;
    out.timeline.failure_time = fail_at;
    out.timeline.downtime_end = fail_at + 7.0 * kSecondsPerDay;
    detail::spread(epoch, fail_at - kRiskyWindow, counts.normal, ts);
    detail::spread(fail_at - kRiskyWindow, fail_at - kHighRiskWindow, counts.risky, ts);
    detail::spread(fail_at - kHighRiskWindow, fail_at, counts.high_risk, ts);
  } else {
    detail::spread(epoch, epoch + kObservationSpan, counts.normal, ts);
  }
  out.labels = label_timeline(out.timeline);

  Rng machine_rng(derive_seed(seed, "machine"));
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::array<double, kSensorCount> std_scale{};
  for (double& s : std_scale) s = 1.0 + profile.machine_jitter * jitter(machine_rng);
  const double freq_scale = 1.0 + profile.freq_jitter * jitter(machine_rng);

  const std::size_t n = ts.size();
  std::array<std::size_t, 3> total{};
  for (int y : out.labels) ++total[static_cast<std::size_t>(y)];
  const double rho = profile.persistence;
  const double innov = std::sqrt(1.0 - rho * rho);
  const double sf = profile.freq_spread;
  std::vector<double> amp(n), freq(n), ramp(n);
  std::vector<bool> spiking(n);
  std::array<double, 3> mean_square{};
  std::array<std::size_t, 3> seen{};
  double amp_state = gauss(machine_rng), freq_state = gauss(machine_rng);
  for (std::size_t w = 0; w < n; ++w) {
    if (w > 0) {
      amp_state = rho * amp_state + innov * gauss(machine_rng);
      freq_state = rho * freq_state + innov * gauss(machine_rng);
    }
    const auto yk = static_cast<std::size_t>(out.labels[w]);
    const double progress = (static_cast<double>(seen[yk]++) + 0.5) / static_cast<double>(total[yk]);
    ramp[w] = yk == kNormal ? 0.0 : (progress - 0.5) * 2.0 * profile.drift;
    const double za = std::clamp(amp_state, -profile.wander_limit, profile.wander_limit);
    const double zf = std::clamp(freq_state, -profile.wander_limit, profile.wander_limit);
    amp[w] = std::exp(profile.amp_spread * za);
    freq[w] = std::exp(sf * zf - 0.5 * sf * sf);
    spiking[w] = yk == kHighRisk && unit(machine_rng) < profile.spike_wave_share;
    mean_square[yk] += amp[w] * amp[w] / static_cast<double>(total[yk]);
  }
  // unit mean square per interval keeps each machine on its (jittered) target
  for (std::size_t w = 0; w < n; ++w)
    amp[w] *= (1.0 + ramp[w]) / std::sqrt(mean_square[static_cast<std::size_t>(out.labels[w])]);

  out.waves.reserve(n);
  for (std::size_t w = 0; w < n; ++w) {
    const auto yk = static_cast<std::size_t>(out.labels[w]);
    WaveCondition cond;
    cond.interval = out.labels[w];
    cond.freq = profile.base_bin[yk] * freq_scale * (1.0 - ramp[w]) * freq[w];
    cond.spiking = spiking[w];

    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(w)));
    WaveArray arr;
    for (std::size_t s = 0; s < kSensorCount; ++s) {
      arr[s].machine_id = machine_id;
      arr[s].sensor_id = static_cast<int>(s) + 1;
      arr[s].timestamp = ts[w];
      cond.sd = profile.target_std[s][yk] * std_scale[s] * amp[w];
      arr[s].samples = synthesize_wave(profile, cond, rng);
    }
    out.waves.push_back(std::move(arr));
  }
  return out;
}

struct FleetConfig {
  std::size_t n_faulty = 7;
  std::size_t n_healthy = 7;
  IntervalCounts faulty_counts;
  std::size_t healthy_waves = 72;
  std::uint64_t seed = 0;
  DegradationProfile profile = DegradationProfile::standard();
};

inline std::string machine_name(std::size_t index) { return "M" + std::to_string(index + 1); }

/// Machines M1..Mn_faulty are faulty, the following n_healthy are healthy.
inline std::vector<MachineData> generate_fleet(const FleetConfig& cfg) {
  require(cfg.n_faulty + cfg.n_healthy >= 1, ErrorKind::invalid_input, "fleet has no machines");
  std::vector<MachineData> fleet;
  const std::size_t n = cfg.n_faulty + cfg.n_healthy;
  for (std::size_t i = 0; i < n; ++i) {
    const bool faulty = i < cfg.n_faulty;
    IntervalCounts counts = cfg.faulty_counts;
    if (!faulty) counts = {cfg.healthy_waves, 0, 0};
    fleet.push_back(generate_machine(cfg.profile, machine_name(i), faulty, counts, derive_seed(cfg.seed, i),
                                     kDefaultEpoch + static_cast<double>(i) * kSecondsPerDay));
  }
  return fleet;
}

/// Denoise + extract for every wave array of a machine, labeled from its timeline.
inline FeatureTable featurize_machine(const MachineData& m, PipelineAudit* audit = nullptr, bool denoise = true) {
  FeatureTable t;
  t.names = machine_feature_names();
  for (std::size_t w = 0; w < m.waves.size(); ++w) {
    auto fv = featurize(m.waves[w], denoise);
    FeatureRow row{fv.machine_id, fv.timestamp, std::move(fv.values)};
    if (audit) audit->record(audit_stage::denoise, row.key(), {row.key()});
    t.add(std::move(row), m.labels[w]);
  }
  return t;
}

inline void append(FeatureTable& into, const FeatureTable& from) {
  if (into.names.empty()) into.names = from.names;
  require(into.names == from.names, ErrorKind::feature_mismatch, "cannot append tables with different names");
  into.rows.insert(into.rows.end(), from.rows.begin(), from.rows.end());
  into.labels.insert(into.labels.end(), from.labels.begin(), from.labels.end());
}

}  // namespace rotorprog
