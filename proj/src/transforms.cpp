#include "tdr/transforms.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "tdr/error.hpp"

namespace tdr {

namespace {

constexpr double kLogCutoff = 1e-8;
constexpr double kRangeSlack = 1e-12;

void check_positive(const Vector& y) {
  std::vector<Index> bad;
  for (Index i = 0; i < y.size(); ++i) {
    if (!(y(i) > 0.0)) bad.push_back(i);
  }
  if (bad.empty()) return;
  std::ostringstream msg;
  msg << bad.size() << " non-positive response(s) at index";
  const size_t shown = std::min<size_t>(bad.size(), 20);
  for (size_t k = 0; k < shown; ++k) msg << (k == 0 ? " " : ",") << bad[k];
  if (shown < bad.size()) msg << ",...";
  msg << "; supply an explicit shift";
  fail(ErrorCode::NonPositiveResponse, msg.str());
}

void check_range(TransformFamily family, double param) {
  const bool unit = family == TransformFamily::MeanAbs;
  const double lo = unit ? 0.0 : -2.0;
  const double hi = unit ? 1.0 : 2.0;
  if (!std::isfinite(param) || param < lo - kRangeSlack || param > hi + kRangeSlack) {
    std::ostringstream msg;
    msg << to_string(family) << " parameter " << param << " outside [" << lo << ", "
        << hi << "]";
    fail(ErrorCode::ParamOutOfRange, msg.str());
  }
}

Vector box_cox_unchecked(const Vector& y, double omega) {
  if (std::abs(omega) < kLogCutoff) return y.array().log().matrix();
  return ((y.array().pow(omega) - 1.0) / omega).matrix();
}

Vector mean_abs(const Vector& y, double c, double center) {
  const Eigen::ArrayXd d = y.array() - center;
  return (c * d + (1.0 - c) * d.abs()).matrix();
}

}  // namespace

std::string_view to_string(TransformFamily family) {
  switch (family) {
    case TransformFamily::BoxCox: return "boxcox";
    case TransformFamily::MeanAbs: return "t1";
    case TransformFamily::MeanAbsBoxCox: return "t2";
  }
  return "?";
}

TransformFamily parse_family(std::string_view name) {
  if (name == "boxcox" || name == "bc") return TransformFamily::BoxCox;
  if (name == "t1" || name == "meanabs") return TransformFamily::MeanAbs;
  if (name == "t2" || name == "meanabs-boxcox") return TransformFamily::MeanAbsBoxCox;
  fail(ErrorCode::InvalidConfig, "unknown transform family '" + std::string(name) + "'");
}

bool needs_positive_response(TransformFamily family) {
  return family != TransformFamily::MeanAbs;
}

void TransformSpec::validate() const {
  if (grid.empty()) fail(ErrorCode::InvalidGrid, "parameter grid is empty");
  for (size_t k = 0; k < grid.size(); ++k) {
    if (!std::isfinite(grid[k])) fail(ErrorCode::InvalidGrid, "grid value is not finite");
    if (k > 0 && !(grid[k] > grid[k - 1])) {
      fail(ErrorCode::InvalidGrid, "grid must be strictly increasing");
    }
    check_range(family, grid[k]);
  }
  if (!std::isfinite(shift)) fail(ErrorCode::InvalidConfig, "shift is not finite");
}

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
    fail(ErrorCode::InvalidGrid, "grid needs finite lo <= hi and step > 0");
  }
  std::vector<double> grid;
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long k = 0; k <= count; ++k) {
    const double v = lo + static_cast<double>(k) * step;
    grid.push_back(std::round(v * 1e10) / 1e10);
  }
  return grid;
}

TransformSpec default_spec(TransformFamily family) {
  TransformSpec spec;
  spec.family = family;
  spec.grid = family == TransformFamily::MeanAbs ? make_grid(0.0, 1.0, 0.1)
                                                 : make_grid(-2.0, 2.0, 0.1);
  return spec;
}

Vector box_cox(const Vector& y, double omega) {
  check_positive(y);
  return box_cox_unchecked(y, omega);
}

Vector t1(const Vector& y, double c) {
  if (!std::isfinite(c) || c < 0.0 || c > 1.0) {
    fail(ErrorCode::ParamOutOfRange, "t1 parameter must lie in [0, 1]");
  }
  return mean_abs(y, c, y.mean());
}

Vector t2(const Vector& y, double omega) {
  check_range(TransformFamily::MeanAbsBoxCox, omega);
  const Vector b = box_cox(y, omega);
  return (b.array() - b.mean()).abs().matrix();
}

Vector apply_transform(const TransformSpec& spec, double param, const Vector& y) {
  return apply_transform_relative(spec, param, y, y);
}

Vector apply_transform_relative(const TransformSpec& spec, double param,
                                const Vector& y, const Vector& reference) {
  check_range(spec.family, param);
  const Vector ys = y.array() + spec.shift;
  switch (spec.family) {
    case TransformFamily::BoxCox:
      return box_cox(ys, param);
    case TransformFamily::MeanAbs:
      return mean_abs(ys, param, reference.mean() + spec.shift);
    case TransformFamily::MeanAbsBoxCox: {
      const Vector b = box_cox(ys, param);
      const double center =
          &reference == &y ? b.mean()
                           : box_cox(Vector(reference.array() + spec.shift), param).mean();
      return (b.array() - center).abs().matrix();
    }
  }
  return ys;
}

}  // namespace tdr
