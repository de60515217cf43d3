#ifndef KINOPT_ERRORS_HPP
#define KINOPT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace kinopt {

/// A computation produced or received non-finite values.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An integration blew up; remembers the last time that was still finite.
class divergence_error : public numeric_error {
 public:
  divergence_error(const std::string& what, double last_valid_time)
      : numeric_error(what), last_valid_time_(last_valid_time) {}

  double last_valid_time() const { return last_valid_time_; }

 private:
  double last_valid_time_;
};

}  // namespace kinopt

#endif
