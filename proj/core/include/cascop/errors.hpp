#pragma once

#include <stdexcept>
#include <string>

namespace cascop {

// All library failures derive from Error so callers can map them to exit
// codes in one place. The category() tag is what the CLI prints in its
// machine-readable error line.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& what)
      : std::runtime_error(what), category_(std::move(category)) {}
  const std::string& category() const { return category_; }

 private:
  std::string category_;
};

// Bad or unusable arguments: outside a function's stated domain.
struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error("DomainError", what) {}
};

// A splitting-law spec that is malformed, has non-positive parameters, or
// encodes a geometric (lattice) law.
struct InvalidLawError : Error {
  explicit InvalidLawError(const std::string& what) : Error("InvalidLawError", what) {}
};

// A probability vector that does not sum to (at most) one.
struct InvalidDistribution : Error {
  explicit InvalidDistribution(const std::string& what) : Error("InvalidDistribution", what) {}
};

// A regime whose hypotheses fail (inadmissible slope a, theta out of range,
// shattering hypothesis violated, ...).
struct RegimeError : Error {
  explicit RegimeError(const std::string& what) : Error("RegimeError", what) {}
};

// Analytic profile construction failed to converge (Monte Carlo error bars
// too wide, non-finite evaluations).
struct ProfileBuildError : Error {
  explicit ProfileBuildError(const std::string& what) : Error("ProfileBuildError", what) {}
};

// Resource caps.
struct AtomCapExceeded : Error {
  explicit AtomCapExceeded(const std::string& what) : Error("AtomCapExceeded", what) {}
};
struct NodeCapExceeded : Error {
  NodeCapExceeded(const std::string& what, int generation)
      : Error("NodeCapExceeded", what), generation(generation) {}
  int generation;
};
struct DepthCapExceeded : Error {
  explicit DepthCapExceeded(const std::string& what) : Error("DepthCapExceeded", what) {}
};

// Truncated mass tree too coarse for the requested accuracy.
struct TruncationTooCoarse : Error {
  explicit TruncationTooCoarse(const std::string& what) : Error("TruncationTooCoarse", what) {}
};

// A tilted-measure window reaches below the stored mass threshold.
struct WindowTruncated : Error {
  explicit WindowTruncated(const std::string& what) : Error("WindowTruncated", what) {}
};

// A functional breached its declared decay envelope.
struct DecayViolation : Error {
  explicit DecayViolation(const std::string& what) : Error("DecayViolation", what) {}
};

// Partition errors.
struct GroundSetMismatch : Error {
  explicit GroundSetMismatch(const std::string& what) : Error("GroundSetMismatch", what) {}
};
struct EmptyRestriction : Error {
  explicit EmptyRestriction(const std::string& what) : Error("EmptyRestriction", what) {}
};

}  // namespace cascop
