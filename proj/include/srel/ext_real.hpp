#ifndef SREL_EXT_REAL_HPP
#define SREL_EXT_REAL_HPP

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace srel {

// Nonnegative real extended with a tagged +infinity. Divergent entropies
// (singular per-step covariances) are represented explicitly instead of
// letting IEEE infinities flow through sums, so curves still render and
// comparisons short-circuit.
class ExtReal {
 public:
  ExtReal() : value_(0.0), infinite_(false) {}

  static ExtReal finite(double v) {
    ExtReal r;
    r.value_ = v;
    return r;
  }
  static ExtReal infinity() {
    ExtReal r;
    r.infinite_ = true;
    return r;
  }

  bool is_infinite() const { return infinite_; }
  bool is_finite() const { return !infinite_; }

  // Finite value; +inf as an IEEE double when infinite (for printing only).
  double as_double() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }
  double finite_value() const { return value_; }

  ExtReal operator+(const ExtReal& o) const {
    if (infinite_ || o.infinite_) return infinity();
    return finite(value_ + o.value_);
  }
  ExtReal& operator+=(const ExtReal& o) {
    *this = *this + o;
    return *this;
  }

  // 17 significant digits: lossless double round-trip in text artifacts.
  std::string to_string() const {
    if (infinite_) return "inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value_);
    return buf;
  }

 private:
  double value_;
  bool infinite_;
};

}  // namespace srel

#endif
