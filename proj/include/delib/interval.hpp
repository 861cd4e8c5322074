#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace delib {

/// Closed interval of doubles. Every arithmetic result is widened outward by
/// one ulp on each side, so the exact real result is always enclosed.
class Interval {
public:
  constexpr Interval() = default;
  constexpr Interval(double point) : lo_(point), hi_(point) {}
  constexpr Interval(double lo, double hi) : lo_(lo), hi_(hi) {}

  static constexpr Interval empty_set() {
    return {std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};
  }
  static constexpr Interval whole() {
    return {-std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
  }

  constexpr double lo() const { return lo_; }
  constexpr double hi() const { return hi_; }
  constexpr bool empty() const { return !(lo_ <= hi_); }
  double width() const { return empty() ? 0.0 : hi_ - lo_; }
  double mid() const {
    if (std::isinf(lo_) || std::isinf(hi_)) return std::isinf(lo_) ? (std::isinf(hi_) ? 0.0 : hi_) : lo_;
    return lo_ + 0.5 * (hi_ - lo_);
  }
  bool contains(double x) const { return lo_ <= x && x <= hi_; }
  bool contains_zero() const { return lo_ <= 0.0 && 0.0 <= hi_; }
  bool subset_of(const Interval& o) const { return empty() || (o.lo_ <= lo_ && hi_ <= o.hi_); }

  friend Interval intersect(const Interval& a, const Interval& b) {
    Interval r{std::max(a.lo_, b.lo_), std::min(a.hi_, b.hi_)};
    return r.empty() ? empty_set() : r;
  }
  friend Interval hull(const Interval& a, const Interval& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    return {std::min(a.lo_, b.lo_), std::max(a.hi_, b.hi_)};
  }

  friend Interval operator-(const Interval& a) { return {-a.hi_, -a.lo_}; }
  friend Interval operator+(const Interval& a, const Interval& b) {
    if (a.empty() || b.empty()) return empty_set();
    return outward(a.lo_ + b.lo_, a.hi_ + b.hi_);
  }
  friend Interval operator-(const Interval& a, const Interval& b) {
    if (a.empty() || b.empty()) return empty_set();
    return outward(a.lo_ - b.hi_, a.hi_ - b.lo_);
  }
  friend Interval operator*(const Interval& a, const Interval& b) {
    if (a.empty() || b.empty()) return empty_set();
    if (a.is_point(0.0) || b.is_point(0.0)) return {0.0, 0.0};
    const double p[4] = {mul(a.lo_, b.lo_), mul(a.lo_, b.hi_), mul(a.hi_, b.lo_),
                         mul(a.hi_, b.hi_)};
    return outward(*std::min_element(p, p + 4), *std::max_element(p, p + 4));
  }
  /// Division by an interval that excludes zero; whole() otherwise.
  friend Interval operator/(const Interval& a, const Interval& b) {
    if (a.empty() || b.empty()) return empty_set();
    if (b.contains_zero()) return whole();
    const double q[4] = {a.lo_ / b.lo_, a.lo_ / b.hi_, a.hi_ / b.lo_, a.hi_ / b.hi_};
    return outward(*std::min_element(q, q + 4), *std::max_element(q, q + 4));
  }
  friend Interval sqr(const Interval& a) {
    if (a.empty()) return empty_set();
    if (a.contains_zero()) {
      const double m = std::max(a.lo_ * a.lo_, a.hi_ * a.hi_);
      return {0.0, std::nextafter(m, std::numeric_limits<double>::infinity())};
    }
    const double l = std::min(a.lo_ * a.lo_, a.hi_ * a.hi_);
    const double h = std::max(a.lo_ * a.lo_, a.hi_ * a.hi_);
    return {std::max(0.0, down(l)), up(h)};
  }

  friend bool operator==(const Interval& a, const Interval& b) {
    return (a.empty() && b.empty()) || (a.lo_ == b.lo_ && a.hi_ == b.hi_);
  }
  friend std::ostream& operator<<(std::ostream& os, const Interval& a) {
    if (a.empty()) return os << "[empty]";
    return os << '[' << a.lo_ << ", " << a.hi_ << ']';
  }

private:
  bool is_point(double v) const { return lo_ == v && hi_ == v; }
  // inf * 0 is taken as 0 (bounds are finite in practice, this only guards whole()).
  static double mul(double x, double y) { return (x == 0.0 || y == 0.0) ? 0.0 : x * y; }
  static double down(double x) { return std::nextafter(x, -std::numeric_limits<double>::infinity()); }
  static double up(double x) { return std::nextafter(x, std::numeric_limits<double>::infinity()); }
  static Interval outward(double lo, double hi) { return {down(lo), up(hi)}; }

  double lo_ = 0.0;
  double hi_ = 0.0;
};

}  // namespace delib
