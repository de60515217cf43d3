#include "kinopt/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace kinopt {

Schedule Schedule::constant(double value) {
  if (!(value > 0.0)) throw std::invalid_argument("schedule values must be strictly positive");
  return Schedule(Kind::constant, value, 0.0);
}

Schedule Schedule::logarithmic(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("logarithmic schedule needs C > 0");
  return Schedule(Kind::logarithmic, c, 0.0);
}

Schedule Schedule::geometric(double initial, double ratio) {
  if (!(initial > 0.0) || !(ratio > 0.0))
    throw std::invalid_argument("geometric schedule needs positive initial value and ratio");
  return Schedule(Kind::geometric, initial, ratio);
}

double Schedule::value_at(double k) const {
  switch (kind_) {
    case Kind::constant:
      return a_;
    case Kind::logarithmic:
      return log_cooling(k, a_);
    case Kind::geometric:
      return a_ * std::pow(b_, k);
  }
  return a_;
}

double log_cooling(double k, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("log cooling needs C > 0");
  if (k < 0.0) throw std::invalid_argument("log cooling needs k >= 0");
  return c / std::log(k + 2.0);
}

}  // namespace kinopt
