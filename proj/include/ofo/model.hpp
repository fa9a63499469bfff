#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ofo/types.hpp"

namespace ofo {

/**
 * @brief The controlled system seen through the quantities OFO needs.
 *
 * `measure` is the only member allowed to carry state: dynamic plants
 * advance their simulation by one control interval per call. Every other
 * member is a pure function of its arguments.
 */
struct PlantModel
{
  std::string name;
  Index n_u = 0;
  Index n_y = 0;

  /// Applies u and returns the measured output.
  std::function<Vector(const Vector & u)> measure;
  /// Output at the start of a run. Dynamic plants report their initial state
  /// here instead of stepping; when empty, measure(u0) is used.
  std::function<Vector(const Vector & u)> initial_output;
  /// Input-output sensitivity, n_y x n_u.
  std::function<Matrix(const Vector & u, const Vector & y)> sensitivity;
  std::function<Scalar(const Vector & u, const Vector & y)> objective;
  /// Partial derivative of the objective with respect to u, as a row.
  std::function<RowVector(const Vector & u, const Vector & y)> grad_u;
  /// Partial derivative of the objective with respect to y, as a row.
  std::function<RowVector(const Vector & u, const Vector & y)> grad_y;
};

/// Linear constraints A u <= b on inputs and C y <= d on outputs.
struct ConstraintSet
{
  Matrix A;
  Vector b;
  Matrix C;
  Vector d;

  Index n_input_rows() const { return A.rows(); }
  Index n_output_rows() const { return C.rows(); }

  /// Throws InvalidModelError unless the shapes agree with (n_u, n_y).
  void validate(Index n_u, Index n_y) const;

  /// Box constraints lo <= u <= hi, lo_y <= y <= hi_y stacked as upper/lower pairs.
  static ConstraintSet boxes(const Vector & u_lo, const Vector & u_hi, const Vector & y_lo, const Vector & y_hi);
};

enum class AdaptationMode { fixed, heuristic_diagonal, sdp_full, sdp_diagonal };

std::string_view to_string(AdaptationMode mode);
/// Accepts "fixed", "heuristic-diagonal", "sdp-full", "sdp-diagonal".
AdaptationMode adaptation_mode_from_string(std::string_view name);

inline bool is_diagonal(AdaptationMode mode)
{
  return mode == AdaptationMode::heuristic_diagonal || mode == AdaptationMode::sdp_diagonal;
}

struct OfoParams
{
  Scalar alpha_min = 1e-6;
  Scalar alpha_max = 1.0;
  Scalar alpha0 = 1.0;
  Scalar p_max = 1.0;
  Scalar t_min = 1e-6;
  Scalar t_max = 1.0;
  Scalar beta1 = 0.1;
  Scalar beta2 = 0.2;
  Matrix S0;
  AdaptationMode mode = AdaptationMode::fixed;
  bool step_adaptation = false;

  /// Throws ConfigError on any violated invariant.
  void validate(Index n_u) const;
};

/// Entries of dPhi/dS. Diagonal modes populate the diagonal only.
struct ScalingSensitivity
{
  Matrix D;
};

struct ControllerState
{
  Index k = 0;
  Vector u;
  Vector y;
  /// Last QP solution (zero before the first iteration).
  Vector w;
  Scalar alpha = 0;
  Matrix S;
  /// Reduced gradient at (u, y).
  Vector reduced_grad;
  std::optional<ScalingSensitivity> dPhi_dS;
  std::vector<Index> active_inputs;
  std::vector<Index> active_outputs;
};

/// dPhi/du^T + grad_h^T dPhi/dy^T at (u, y). Throws InvalidModelError on non-finite data.
Vector reduced_gradient(const PlantModel & plant, const Vector & u, const Vector & y);

/// Same as above with an already evaluated sensitivity.
Vector reduced_gradient(const PlantModel & plant, const Vector & u, const Vector & y, const Matrix & grad_h);

inline constexpr Scalar kSymmetryTol = 1e-10;
inline constexpr Scalar kEigenTol = 1e-8;

bool is_symmetric(const Matrix & S, Scalar tol = kSymmetryTol);

/// Ascending eigenvalues of the symmetric part of S.
Vector symmetric_eigenvalues(const Matrix & S);

/// True iff S is symmetric within 1e-10 and lambda_min(S) >= t_min.
bool spd_project_check(const Matrix & S, Scalar t_min);

}  // namespace ofo
