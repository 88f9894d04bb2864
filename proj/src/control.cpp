#include "hwnet/control.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "hwnet/error.hpp"

namespace hwnet {

namespace {

Vec parse_list(std::string_view text, int expect, const char* what) {
  std::string s(text);
  for (char& c : s)
    if (c == ',') c = ' ';
  std::istringstream in(s);
  std::vector<double> vals;
  double v;
  while (in >> v) vals.push_back(v);
  if (!in.eof() || static_cast<int>(vals.size()) != expect)
    throw Error(ErrorCode::InvalidInput,
                std::string(what) + " needs " + std::to_string(expect) + " numbers: '" + std::string(text) + "'");
  return Eigen::Map<Vec>(vals.data(), expect);
}

void check_simplex(const Vec& u, int dim, const char* what) {
  if (u.size() != dim) throw Error(ErrorCode::InvalidInput, std::string(what) + " has wrong length");
  if ((u.array() < 0).any() || std::abs(u.sum() - 1.0) > 1e-12)
    throw Error(ErrorCode::InvalidInput, std::string(what) + " is not a simplex point");
}

}  // namespace

void validate_control(const ControlPoint& u, int m, int J) {
  check_simplex(u.uc, m, "queue split");
  check_simplex(u.us, J, "idleness split");
}

ControlPoint parse_control_point(std::string_view text, int m, int J) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos)
    throw Error(ErrorCode::InvalidInput, "control must look like 'uc1,..,ucm/us1,..,usJ'");
  ControlPoint u{parse_list(text.substr(0, slash), m, "queue split"),
                 parse_list(text.substr(slash + 1), J, "idleness split")};
  validate_control(u, m, J);
  return u;
}

std::vector<ControlPoint> vertex_controls(int m, int J) {
  std::vector<ControlPoint> out;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < J; ++j) out.push_back({Vec::Unit(m, i), Vec::Unit(J, j)});
  return out;
}

}  // namespace hwnet
