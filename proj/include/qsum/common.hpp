#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qsum {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

// Error taxonomy shared by all modules; the CLI maps these onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error("domain", w) {}
};
struct ShapeError : Error {
  explicit ShapeError(const std::string& w) : Error("shape", w) {}
};
struct GridError : Error {
  explicit GridError(const std::string& w) : Error("grid", w) {}
};
struct DivergenceError : Error {
  explicit DivergenceError(const std::string& w) : Error("divergence", w) {}
};
struct SmallnessError : Error {
  explicit SmallnessError(const std::string& w) : Error("smallness", w) {}
};
struct FitError : Error {
  explicit FitError(const std::string& w) : Error("fit", w) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error("config", w) {}
};

}  // namespace qsum
