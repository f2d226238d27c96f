// Chain state: either a signed integer (lattice targets) or a real vector
// (continuous targets).  The variant is fixed per experiment; kernels never
// mix the two.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace nmh {

class State {
 public:
  State() : value_(std::int64_t{0}) {}

  static State integer(std::int64_t m) { return State(m); }
  static State vector(std::vector<double> v) { return State(std::move(v)); }
  static State scalar(double x) { return State(std::vector<double>{x}); }

  bool is_integer() const {
    return std::holds_alternative<std::int64_t>(value_);
  }

  std::int64_t as_integer() const {
    if (!is_integer()) throw std::logic_error("State: not an integer state");
    return std::get<std::int64_t>(value_);
  }

  const std::vector<double>& as_vector() const {
    if (is_integer()) throw std::logic_error("State: not a vector state");
    return std::get<std::vector<double>>(value_);
  }

  double as_scalar() const {
    const auto& v = as_vector();
    if (v.size() != 1) throw std::logic_error("State: not one-dimensional");
    return v[0];
  }

  bool operator==(const State& other) const { return value_ == other.value_; }
  bool operator!=(const State& other) const { return !(*this == other); }

  std::string to_string() const;

 private:
  explicit State(std::int64_t m) : value_(m) {}
  explicit State(std::vector<double> v) : value_(std::move(v)) {}

  std::variant<std::int64_t, std::vector<double>> value_;
};

}  // namespace nmh
