#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rotorprog {

enum class ErrorKind {
  invalid_input,
  insufficient_length,
  degenerate_wave,
  degenerate_mean,
  degenerate_energy,
  degenerate_layout,
  infeasible_calibration,
  invalid_labels,
  alignment,
  divergence,
  feature_mismatch,
  untrainable_stage,
  unknown_machine,
  malformed_csv,
  config,
  io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::insufficient_length: return "insufficient-length";
    case ErrorKind::degenerate_wave: return "degenerate-wave";
    case ErrorKind::degenerate_mean: return "degenerate-mean";
    case ErrorKind::degenerate_energy: return "degenerate-energy";
    case ErrorKind::degenerate_layout: return "degenerate-layout";
    case ErrorKind::infeasible_calibration: return "infeasible-calibration";
    case ErrorKind::invalid_labels: return "invalid-labels";
    case ErrorKind::alignment: return "alignment";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::feature_mismatch: return "feature-mismatch";
    case ErrorKind::untrainable_stage: return "untrainable-stage";
    case ErrorKind::unknown_machine: return "unknown-machine";
    case ErrorKind::malformed_csv: return "malformed-csv";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace rotorprog
