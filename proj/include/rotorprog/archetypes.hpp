#pragma once

// Synthetic prediction sequences that share an accuracy but place their
// errors differently, for demonstrating how S and C separate such models.
//
//   kind 1: normal and risky correct; scattered misses in high-risk (predicted risky)
//   kind 2: errors confined to risky, flickering between normal and high-risk
//   kind 3: deterioration fully correct; false alarms in normal, in runs of risky/high-risk
//   kind 4: high-risk correct; scattered errors split over normal and risky
//   kind 5: normal correct; errors around the risky -> high-risk transition

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "rotorprog/metrics.hpp"
#include "rotorprog/rng.hpp"

namespace rotorprog {

namespace detail {

inline std::vector<std::size_t> sample_positions(std::size_t begin, std::size_t end,
                                                 std::size_t count, Rng& rng) {
  std::vector<std::size_t> pool(end - begin);
  std::iota(pool.begin(), pool.end(), begin);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

inline int other_label(int truth, Rng& rng) {
  const int step = std::uniform_int_distribution<int>(1, 2)(rng);
  return (truth + step) % 3;
}

/// Splits `total` into `parts` buckets, each at least `minimum`, remainder spread at random.
inline std::vector<std::size_t> random_composition(std::size_t total, std::size_t parts,
                                                   std::size_t minimum, Rng& rng) {
  std::vector<std::size_t> out(parts, minimum);
  std::uniform_int_distribution<std::size_t> pick(0, parts - 1);
  for (std::size_t left = total - parts * minimum; left > 0; --left) ++out[pick(rng)];
  return out;
}

}  // namespace detail

inline PredictionSeries archetype_series(int kind, const LoopLayout& layout, double target_accuracy,
                                         std::uint64_t seed) {
  validate(layout);
  require(kind >= 1 && kind <= 5, ErrorKind::invalid_input, "archetype kind must be 1..5");
  require(target_accuracy >= 0.0 && target_accuracy <= 1.0, ErrorKind::invalid_input,
          "accuracy must lie in [0, 1]");
  const std::size_t n = layout.total();
  const auto errors = static_cast<std::size_t>(std::llround((1.0 - target_accuracy) * static_cast<double>(n)));
  const std::size_t b1 = layout.n1, b2 = layout.n1 + layout.n2;

  PredictionSeries s;
  s.layout = layout;
  s.truth = truth_for(layout);
  s.predicted = s.truth;
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(kind)));

  auto infeasible = [&](std::size_t capacity) {
    require(errors <= capacity, ErrorKind::invalid_input,
            "accuracy " + format_double(target_accuracy) + " not reachable by archetype " +
                std::to_string(kind) + " on this layout");
  };

  switch (kind) {
    case 1: {
      infeasible(layout.n3);
      for (std::size_t i : detail::sample_positions(b2, n, errors, rng)) s.predicted[i] = kRisky;
      break;
    }
    case 2: {
      infeasible(layout.n2);
      std::bernoulli_distribution coin(0.5);
      for (std::size_t i : detail::sample_positions(b1, b2, errors, rng))
        s.predicted[i] = coin(rng) ? kHighRisk : kNormal;
      break;
    }
    case 3: {
      infeasible(layout.n1);
      if (errors == 0) break;
      const std::size_t free = layout.n1 - errors;
      std::size_t runs = std::min<std::size_t>(errors, std::uniform_int_distribution<std::size_t>(1, 3)(rng));
      runs = std::min(runs, free + 1);
      const auto lengths = detail::random_composition(errors, runs, 1, rng);
      // runs+1 gaps; inner gaps hold at least one correct sample so runs stay distinct
      auto gaps = detail::random_composition(free - (runs - 1), runs + 1, 0, rng);
      for (std::size_t g = 1; g < runs; ++g) ++gaps[g];
      std::size_t pos = 0;
      std::bernoulli_distribution coin(0.5);
      for (std::size_t r = 0; r < runs; ++r) {
        pos += gaps[r];
        const int value = coin(rng) ? kHighRisk : kRisky;
        for (std::size_t k = 0; k < lengths[r]; ++k) s.predicted[pos++] = value;
      }
      break;
    }
    case 4: {
      infeasible(layout.n1 + layout.n2);
      std::size_t in_normal = std::min(layout.n1, errors / 2);
      std::size_t in_risky = errors - in_normal;
      if (in_risky > layout.n2) {
        in_normal += in_risky - layout.n2;
        in_risky = layout.n2;
      }
      for (std::size_t i : detail::sample_positions(0, b1, in_normal, rng))
        s.predicted[i] = detail::other_label(s.truth[i], rng);
      for (std::size_t i : detail::sample_positions(b1, b2, in_risky, rng))
        s.predicted[i] = detail::other_label(s.truth[i], rng);
      break;
    }
    case 5: {
      infeasible(layout.n2 + layout.n3);
      const std::size_t lo = b2 - std::min(layout.n2, errors);
      const std::size_t hi = b2 + std::min(layout.n3, errors);
      for (std::size_t i : detail::sample_positions(lo, hi, errors, rng))
        s.predicted[i] = detail::other_label(s.truth[i], rng);
      break;
    }
  }
  return s;
}

}  // namespace rotorprog
