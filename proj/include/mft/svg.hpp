#pragma once

#include <string>
#include <vector>

#include "mft/detector.hpp"
#include "mft/filtered_derivative.hpp"

namespace mft {

// Two stacked panels (rate on top, variance below): |G| per window as
// colored polylines, the rejection threshold as a dashed line, detected
// change points as diamond markers.
void write_g_svg(const std::string& path, const std::vector<DerivativeProcess>& rate_procs,
                 double q_rate, const std::vector<ChangePoint>& rate_cps,
                 const std::vector<DerivativeProcess>& var_procs, double q_var,
                 const std::vector<ChangePoint>& var_cps);

}  // namespace mft
