#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ofo {

using Scalar = double;
using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A plant returned non-finite or dimensionally inconsistent data.
class InvalidModelError : public Error
{
public:
  using Error::Error;
};

/// The scaling matrix is too close to singular to invert.
class IllConditionedMetricError : public Error
{
public:
  using Error::Error;
};

/// Step-size fit requested at a zero abscissa.
class DegenerateFitError : public Error
{
public:
  using Error::Error;
};

/// ODE integration produced a non-finite state.
class IntegrationError : public Error
{
public:
  using Error::Error;
};

/// Malformed or inconsistent scenario configuration.
class ConfigError : public Error
{
public:
  using Error::Error;
};

}  // namespace ofo
