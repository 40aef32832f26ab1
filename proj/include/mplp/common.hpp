#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mplp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;
using IndexList = std::vector<Index>;

enum class ErrorCode {
  kInvalidPartition,
  kRankDeficient,
  kFormat,
  kSolverFailure,
  kUnboundedAuxiliary,
  kIllPosed,
  kIllConditionedFace,
  kEmptyFace,
  kProjectionOverflow,
  kMisclassification,
  kEquivalentCostFailure,
  kDomain,
  kMismatch,
  kIo,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidPartition: return "invalid-partition";
    case ErrorCode::kRankDeficient: return "rank-deficient";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kSolverFailure: return "solver-failure";
    case ErrorCode::kUnboundedAuxiliary: return "unbounded-auxiliary";
    case ErrorCode::kIllPosed: return "ill-posed";
    case ErrorCode::kIllConditionedFace: return "ill-conditioned-face";
    case ErrorCode::kEmptyFace: return "empty-face";
    case ErrorCode::kProjectionOverflow: return "projection-overflow";
    case ErrorCode::kMisclassification: return "misclassification";
    case ErrorCode::kEquivalentCostFailure: return "equivalent-cost-failure";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kMismatch: return "mismatch";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Numerical tolerances shared by every module. Defaults follow the values
/// fixed for the engine; callers may override individual fields.
struct Tolerances {
  double drop = 1e-12;        // stored-entry drop tolerance
  double rank = 1e-9;         // relative singular value / pivot cutoff
  double null_residual = 1e-8;
  double orthogonality = 1e-8;
  double feas = 1e-8;
  double dual = 1e-8;
  double comp = 1e-8;
  double obj = 1e-7;
  double zero_rel = 1e-9;     // tau_zero = zero_rel * max(1, |b|_inf)
  double pivot = 1e-9;

  double zero_threshold(double rhs_inf_norm) const {
    return zero_rel * std::max(1.0, rhs_inf_norm);
  }
};

inline const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

}  // namespace mplp
