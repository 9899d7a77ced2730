#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bong {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

// Base of every error the library raises. `kind()` is the stable error-class
// name reported by the CLI.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define BONG_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  };

BONG_DEFINE_ERROR(ShapeError)
BONG_DEFINE_ERROR(SingularCovariance)
BONG_DEFINE_ERROR(NotPositiveDefinite)
BONG_DEFINE_ERROR(SingularInnerSystem)
BONG_DEFINE_ERROR(SingularObservationCov)
BONG_DEFINE_ERROR(CapExceeded)
BONG_DEFINE_ERROR(EstimatorIncompatible)
BONG_DEFINE_ERROR(UnsupportedDynamics)
BONG_DEFINE_ERROR(InvalidConfig)
BONG_DEFINE_ERROR(BadMagic)
BONG_DEFINE_ERROR(TruncatedFile)
BONG_DEFINE_ERROR(CountMismatch)
BONG_DEFINE_ERROR(TaskMismatch)
BONG_DEFINE_ERROR(AllTrialsFailed)

#undef BONG_DEFINE_ERROR

// Wraps an inner failure with the stream step (and inner iteration) it came from.
class StepError : public Error {
 public:
  StepError(std::size_t step, const Error& inner)
      : Error(inner.kind(), "at step " + std::to_string(step) + ": " + inner.what()),
        step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// Deterministic child seed for substream (a, b, c) of `base`.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(a),    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b),    static_cast<std::uint32_t>(c)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

inline Vec standard_normal(Index n, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = nd(rng);
  return v;
}

}  // namespace bong
