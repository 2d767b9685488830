#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tdr/linalg.hpp"

namespace tdr {

// BoxCox:        (y^w - 1) / w, log(y) at w = 0.                 w in [-2, 2]
// MeanAbs:       c (y - ybar) + (1 - c) |y - ybar|.               c in [0, 1]
// MeanAbsBoxCox: |b - mean(b)| with b the Box-Cox transform.      w in [-2, 2]
enum class TransformFamily { BoxCox, MeanAbs, MeanAbsBoxCox };

std::string_view to_string(TransformFamily family);
TransformFamily parse_family(std::string_view name);

/// True for families that take logs or powers of the raw response.
bool needs_positive_response(TransformFamily family);

struct TransformSpec {
  TransformFamily family = TransformFamily::BoxCox;
  std::vector<double> grid;
  // Added to y before transforming. Never chosen implicitly.
  double shift = 0.0;

  /// Throws InvalidGrid / ParamOutOfRange when the grid breaks the family's
  /// range or is empty, unsorted or non-finite.
  void validate() const;
};

/// Evenly spaced grid lo, lo + step, ..., hi (inclusive, rounded to 1e-10 so
/// 0.1 steps land on decimal values).
std::vector<double> make_grid(double lo, double hi, double step);

/// Default grid for a family: step 0.1 over [-2, 2] or [0, 1].
TransformSpec default_spec(TransformFamily family);

Vector box_cox(const Vector& y, double omega);
Vector t1(const Vector& y, double c);
Vector t2(const Vector& y, double omega);

/// Applies spec.family with the given parameter after adding spec.shift.
Vector apply_transform(const TransformSpec& spec, double param, const Vector& y);

/// Same as apply_transform, but the centering statistic (ybar for MeanAbs,
/// the Box-Cox mean for MeanAbsBoxCox) is taken from `reference` instead of
/// `y`. Used to place excluded observations on the estimation sample's scale.
Vector apply_transform_relative(const TransformSpec& spec, double param,
                                const Vector& y, const Vector& reference);

}  // namespace tdr
