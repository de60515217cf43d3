#ifndef KINOPT_SCHEDULE_HPP
#define KINOPT_SCHEDULE_HPP

namespace kinopt {

/// Stepwise parameter law (temperature, diffusion strength).
class Schedule {
 public:
  enum class Kind { constant, logarithmic, geometric };

  static Schedule constant(double value);
  static Schedule logarithmic(double c);                 // c / log(k + 2)
  static Schedule geometric(double initial, double ratio);

  double value_at(double k) const;
  Kind kind() const { return kind_; }

 private:
  Schedule(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}

  Kind kind_;
  double a_;
  double b_;
};

/// Classic logarithmic cooling, C / log(k + 2).
double log_cooling(double k, double c);

}  // namespace kinopt

#endif
