#pragma once

// Piecewise-constant densities on an interval [0, L]. These represent one
// road's share of an absolutely continuous measure. The class keeps the
// breakpoint grid and one value per piece, and exposes the integral transforms
// the transport formulation needs:
//
//   cdf        Phi(y)  = integral of the density over [0, y]
//   inverse    Psi(x)  = least y with Phi(y) >= x
//   qcost      q(x)    = integral of phi(y) * y over [0, Psi(x)]
//   reverse    chi(y)  = phi(L - y)
//
// q is convex and Lipschitz with constant at most L, and Psi(x) is a
// subgradient of q at x.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "roademd/errors.hpp"

namespace roademd {

class Density {
 public:
  Density() = default;

  Density(std::vector<double> breakpoints, std::vector<double> values)
      : breaks_(std::move(breakpoints)), values_(std::move(values)) {
    if (breaks_.size() < 2 || values_.size() + 1 != breaks_.size())
      throw ValidationError("density: need n+1 breakpoints for n pieces");
    if (std::abs(breaks_.front()) > 1e-12)
      throw ValidationError("density: first breakpoint must be 0");
    breaks_.front() = 0.0;
    for (std::size_t i = 0; i + 1 < breaks_.size(); ++i) {
      if (!(breaks_[i + 1] > breaks_[i]) || !std::isfinite(breaks_[i + 1]))
        throw ValidationError("density: breakpoints must increase strictly");
    }
    for (double& v : values_) {
      if (!std::isfinite(v) || v < -1e-12) throw ValidationError("density: negative value");
      v = std::max(v, 0.0);
    }
    cum_.assign(breaks_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < breaks_.size(); ++i)
      cum_[i + 1] = cum_[i] + values_[i] * (breaks_[i + 1] - breaks_[i]);
  }

  static Density uniform(double length, double value) {
    return Density({0.0, length}, {value});
  }

  double length() const { return breaks_.back(); }
  double total_mass() const { return cum_.back(); }
  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::vector<double>& values() const { return values_; }

  double max_value() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, v);
    return m;
  }

  double min_positive_value() const {
    double m = std::numeric_limits<double>::infinity();
    for (double v : values_)
      if (v > 0.0) m = std::min(m, v);
    return m;
  }

  double value_at(double y) const { return values_[piece_of(y)]; }

  double cdf(double y) const {
    y = clamp_coord(y);
    std::size_t i = piece_of(y);
    return cum_[i] + values_[i] * (y - breaks_[i]);
  }

  // Least y with cdf(y) >= x. x must lie in [0, total_mass] up to 1e-12 slack.
  double inverse_cdf(double x) const {
    x = clamp_mass(x);
    if (x <= 0.0) return 0.0;
    // First piece whose closing cumulative reaches x; its value is positive
    // because the cumulative strictly increases across it.
    std::size_t i = std::lower_bound(cum_.begin() + 1, cum_.end(), x) - cum_.begin() - 1;
    if (i >= values_.size()) return breaks_.back();
    double y = breaks_[i] + (x - cum_[i]) / values_[i];
    return std::min(y, breaks_[i + 1]);
  }

  // q(x): cost of draining the first x units of mass through the origin,
  // charging each unit its distance to 0. Convex in x; subgradient inverse_cdf.
  double qcost(double x) const {
    x = clamp_mass(x);
    double ystar = inverse_cdf(x);
    double q = 0.0;
    for (std::size_t i = 0; i < values_.size() && breaks_[i] < ystar; ++i) {
      double hi = std::min(breaks_[i + 1], ystar);
      q += values_[i] * 0.5 * (hi * hi - breaks_[i] * breaks_[i]);
    }
    return q;
  }

  // Integral of phi(y) * y over the whole interval.
  double first_moment() const { return qcost(total_mass()); }

  // Density of the same mass traversed from the opposite end.
  Density reverse() const {
    double L = length();
    std::vector<double> rb(breaks_.size()), rv(values_.size());
    for (std::size_t i = 0; i < breaks_.size(); ++i) rb[i] = L - breaks_[breaks_.size() - 1 - i];
    rb.front() = 0.0;
    rb.back() = L;
    for (std::size_t i = 0; i < values_.size(); ++i) rv[i] = values_[values_.size() - 1 - i];
    return Density(std::move(rb), std::move(rv));
  }

  // Restriction to [from, to], re-parameterized to start at 0.
  Density slice(double from, double to) const {
    from = clamp_coord(from);
    to = clamp_coord(to);
    if (!(to > from)) throw ValidationError("density: empty slice");
    std::vector<double> sb{0.0}, sv;
    std::size_t i = piece_of(from);
    for (; i < values_.size() && breaks_[i] < to; ++i) {
      double hi = std::min(breaks_[i + 1], to);
      if (hi - from <= sb.back()) continue;
      sv.push_back(values_[i]);
      sb.push_back(std::min(hi - from, to - from));
    }
    sb.back() = to - from;
    return Density(std::move(sb), std::move(sv));
  }

  // Pointwise combination of two densities over the same interval.
  enum class Combine { Min, Add, Subtract };

  static Density combine(const Density& a, const Density& b, Combine op) {
    if (std::abs(a.length() - b.length()) > 1e-9)
      throw ValidationError("density: combining densities of different lengths");
    std::vector<double> grid;
    grid.reserve(a.breaks_.size() + b.breaks_.size());
    std::merge(a.breaks_.begin(), a.breaks_.end(), b.breaks_.begin(), b.breaks_.end(),
               std::back_inserter(grid));
    grid.erase(std::unique(grid.begin(), grid.end(),
                           [](double x, double y) { return std::abs(x - y) <= 1e-12; }),
               grid.end());
    grid.back() = a.length();
    std::vector<double> vals(grid.size() - 1);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      double mid = 0.5 * (grid[i] + grid[i + 1]);
      double va = a.value_at(std::min(mid, a.length()));
      double vb = b.value_at(std::min(mid, b.length()));
      switch (op) {
        case Combine::Min: vals[i] = std::min(va, vb); break;
        case Combine::Add: vals[i] = va + vb; break;
        case Combine::Subtract:
          if (vb > va + 1e-9) throw ValidationError("density: subtraction went negative");
          vals[i] = std::max(va - vb, 0.0);
          break;
      }
    }
    return Density(std::move(grid), std::move(vals));
  }

 private:
  double clamp_coord(double y) const {
    if (!(y >= -1e-12) || !(y <= length() + 1e-12))
      throw ValidationError("density: coordinate outside [0, length]");
    return std::min(std::max(y, 0.0), length());
  }

  double clamp_mass(double x) const {
    if (!(x >= -1e-12) || !(x <= total_mass() + 1e-12))
      throw ValidationError("density: mass argument outside [0, total]");
    return std::min(std::max(x, 0.0), total_mass());
  }

  // Piece index containing y; the last piece wins at y == length().
  std::size_t piece_of(double y) const {
    std::size_t i = std::upper_bound(breaks_.begin(), breaks_.end(), y) - breaks_.begin();
    if (i == 0) return 0;
    if (i >= breaks_.size()) return values_.size() - 1;
    return i - 1;
  }

  std::vector<double> breaks_;
  std::vector<double> values_;
  std::vector<double> cum_;  // cdf at each breakpoint
};

}  // namespace roademd
