#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <variant>

#include "errors.hpp"
#include "expr.hpp"
#include "interval.hpp"

namespace bajmean {

enum class Direction { Increasing, Decreasing };

inline Direction reversed(Direction d) noexcept {
  return d == Direction::Increasing ? Direction::Decreasing : Direction::Increasing;
}

inline const char* to_string(Direction d) noexcept {
  return d == Direction::Increasing ? "increasing" : "decreasing";
}

/// First pair of consecutive grid points where strict monotonicity breaks.
struct MonotoneViolation {
  double x1;
  double x2;
};

using MonotoneCheck = std::variant<Direction, MonotoneViolation>;

inline constexpr std::size_t kDefaultCertifyGrid = 1024;

/// Samples `f` on `grid_size` points spanning `domain` (infinite ends clamped)
/// and reports the direction when consecutive values are strictly ordered the
/// same way throughout. DomainError from evaluation propagates.
inline MonotoneCheck check_strict_monotone(const Expr& f, const Interval& domain,
                                           std::size_t grid_size) {
  const auto xs = domain.grid(grid_size);
  double prev = eval(f, xs[0]);
  double cur = eval(f, xs[1]);
  if (cur == prev) return MonotoneViolation{xs[0], xs[1]};
  const bool up = cur > prev;
  for (std::size_t k = 2; k < xs.size(); ++k) {
    prev = cur;
    cur = eval(f, xs[k]);
    if (up ? !(cur > prev) : !(cur < prev)) return MonotoneViolation{xs[k - 1], xs[k]};
  }
  return up ? Direction::Increasing : Direction::Decreasing;
}

/// A generator: an expression on an open interval, strictly monotone in the
/// declared direction (certified on a sampling grid at construction).
class MonotoneFn {
 public:
  MonotoneFn(Expr expr, Interval domain, Direction direction,
             std::size_t certify_grid = kDefaultCertifyGrid)
      : expr_(std::move(expr)), domain_(domain), direction_(direction) {
    const MonotoneCheck check = check_strict_monotone(expr_, domain_, certify_grid);
    if (const auto* v = std::get_if<MonotoneViolation>(&check)) {
      throw SpecError("generator " + to_string(expr_) + " is not strictly monotone between " +
                      format_number(v->x1) + " and " + format_number(v->x2));
    }
    if (std::get<Direction>(check) != direction_) {
      throw SpecError("generator " + to_string(expr_) + " is " +
                      bajmean::to_string(std::get<Direction>(check)) + ", declared " +
                      bajmean::to_string(direction_));
    }
  }

  /// Detects the direction instead of taking it as given.
  static MonotoneFn detect(Expr expr, Interval domain,
                           std::size_t certify_grid = kDefaultCertifyGrid) {
    const MonotoneCheck check = check_strict_monotone(expr, domain, certify_grid);
    if (std::holds_alternative<MonotoneViolation>(check)) {
      throw SpecError("generator " + to_string(expr) + " is not strictly monotone");
    }
    return MonotoneFn(std::move(expr), domain, std::get<Direction>(check), certify_grid);
  }

  const Expr& expr() const noexcept { return expr_; }
  const Interval& domain() const noexcept { return domain_; }
  Direction direction() const noexcept { return direction_; }
  bool increasing() const noexcept { return direction_ == Direction::Increasing; }

  double operator()(double x) const { return eval(expr_, x); }

 private:
  Expr expr_;
  Interval domain_;
  Direction direction_;
};

}  // namespace bajmean
