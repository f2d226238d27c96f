#include "nmh/target.hpp"

#include <cmath>
#include <sstream>

namespace nmh {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2 = 0.69314718055994530941723212145818;
}  // namespace

TargetSpec geometric_target() {
  TargetSpec t;
  t.support = SupportKind::positive_integers;
  t.name = "geometric_half";
  t.log_density = [](const State& x) {
    std::int64_t m = x.as_integer();
    return m >= 1 ? -static_cast<double>(m) * kLog2 : kNegInf;
  };
  return t;
}

TargetSpec discrete_target(std::function<double(std::int64_t)> h,
                           std::string name) {
  TargetSpec t;
  t.support = SupportKind::positive_integers;
  t.name = std::move(name);
  t.log_density = [h = std::move(h)](const State& x) {
    std::int64_t m = x.as_integer();
    return m >= 1 ? -h(m) : kNegInf;
  };
  return t;
}

TargetSpec std_normal_target() {
  TargetSpec t;
  t.support = SupportKind::real_vector;
  t.dim = 1;
  t.name = "std_normal";
  t.log_density = [](const State& x) {
    double v = x.as_scalar();
    return -0.5 * v * v;
  };
  return t;
}

std::string State::to_string() const {
  if (is_integer()) return std::to_string(as_integer());
  std::ostringstream os;
  os << "(";
  const auto& v = as_vector();
  for (std::size_t i = 0; i < v.size(); ++i)
    os << (i ? "," : "") << v[i];
  os << ")";
  return os.str();
}

}  // namespace nmh
