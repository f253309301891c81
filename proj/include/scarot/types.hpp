#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace scarot {

inline constexpr const char* kVersion = "0.1.0";

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonOrthogonalInput : Error { using Error::Error; };
struct NonPositiveEntry : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct NotPositiveDefinite : Error { using Error::Error; };
struct UnsupportedStratum : Error { using Error::Error; };
struct DimensionTooLarge : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct BadParameter : Error { using Error::Error; };
struct OutsideInjectivityRadius : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

}  // namespace scarot
