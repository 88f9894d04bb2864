#pragma once

#include <string_view>
#include <vector>

#include "hwnet/types.hpp"

namespace hwnet {

// A point of the product simplex: queue split over classes, idleness split over pools.
struct ControlPoint {
  Vec uc;
  Vec us;
};

void validate_control(const ControlPoint& u, int m, int J);

// "uc1,...,ucm/us1,...,usJ"
ControlPoint parse_control_point(std::string_view text, int m, int J);

// All pairs (e_i, e_j).
std::vector<ControlPoint> vertex_controls(int m, int J);

}  // namespace hwnet
