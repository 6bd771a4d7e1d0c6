#include "hmtraj/calibration_model.hpp"

#include <cmath>

#include <fmt/format.h>

#include "hmtraj/error.hpp"

namespace hmtraj {

void CalibrationModel::validate() const {
  if (!std::isfinite(a)) throw Error(ErrorKind::InvalidArgument, "calibration slope is not finite");
  if (!(b > 0.0) || !std::isfinite(b)) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("calibration intercept {} must be positive", b));
  }
}

CalibrationPreset builtin_preset(const std::string& dataset) {
  // Keep in sync with data/presets/*.json.
  auto make = [&](double a, double b, double fixed) {
    CalibrationPreset p;
    p.model.a = a;
    p.model.b = b;
    p.model.source_dataset = dataset;
    p.fixed_radius = fixed;
    return p;
  };
  if (dataset == "argoverse") return make(0.020, 0.78, 1.5);
  if (dataset == "interaction") return make(0.026, 0.96, 0.6);
  // Printed without the variable in the source table; read as slope 0.014.
  if (dataset == "nuscenes") return make(0.014, 1.32, 1.1);
  if (dataset == "shifts") return make(0.022, 0.91, 1.5);
  throw Error(ErrorKind::InvalidArgument, fmt::format("no preset for dataset '{}'", dataset));
}

}  // namespace hmtraj
