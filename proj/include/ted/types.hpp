#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace ted {

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Index = Eigen::Index;

// Application-wide default scalar. The math core stays templated so other
// precisions can be instantiated where needed.
using Scalar = double;
using Matrix = MatrixX<Scalar>;
using Vector = VectorX<Scalar>;

// Bad or inconsistent input data (CLI exit code 2).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Command-line or configuration misuse (CLI exit code 1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values or a failed numeric check (CLI exit code 3).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ted
