#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "settest/data.hpp"

namespace settest {

/// A variable-length series coerced onto a fixed time grid on [0, 1].
/// Multichannel series are splined channel-wise and concatenated, so
/// `values` has length grid_size * channels.
struct GridSeries {
  Eigen::VectorXd values;
  int grid_size = 0;
};

/// Natural cubic spline through (t, y) knots. Evaluations outside the knot
/// range clamp to the boundary values (cubic extrapolation blows up).
class NaturalCubicSpline {
 public:
  static NaturalCubicSpline fit(std::vector<double> t, std::vector<double> y) {
    if (t.size() != y.size())
      throw validation_error("spline: time and value counts differ");
    // sort by time, average values at duplicate times
    std::vector<std::size_t> order(t.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return t[a] < t[b]; });
    std::vector<double> ts, ys;
    std::size_t k = 0;
    while (k < order.size()) {
      const double tk = t[order[k]];
      double sum = 0.0;
      std::size_t count = 0;
      while (k < order.size() && t[order[k]] == tk) {
        sum += y[order[k]];
        ++count;
        ++k;
      }
      ts.push_back(tk);
      ys.push_back(sum / static_cast<double>(count));
    }
    if (ts.size() < 2)
      throw validation_error("spline: need at least 2 distinct time points");

    NaturalCubicSpline s;
    s.t_ = std::move(ts);
    s.y_ = std::move(ys);
    const std::size_t n = s.t_.size();
    s.m_.assign(n, 0.0);  // natural boundary: zero second derivative at the ends
    if (n > 2) {
      // Thomas algorithm on the tridiagonal system for interior second derivatives
      std::vector<double> diag(n - 2), rhs(n - 2), upper(n - 2);
      for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = s.t_[i] - s.t_[i - 1];
        const double h1 = s.t_[i + 1] - s.t_[i];
        diag[i - 1] = 2.0 * (h0 + h1);
        upper[i - 1] = h1;
        rhs[i - 1] = 6.0 * ((s.y_[i + 1] - s.y_[i]) / h1 - (s.y_[i] - s.y_[i - 1]) / h0);
      }
      for (std::size_t i = 1; i < n - 2; ++i) {
        const double lower = s.t_[i + 1] - s.t_[i];  // sub-diagonal h_i
        const double w = lower / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
      }
      for (std::size_t i = n - 2; i-- > 0;) {
        double v = rhs[i];
        if (i + 1 < n - 2) v -= upper[i] * s.m_[i + 2];
        s.m_[i + 1] = v / diag[i];
      }
    }
    return s;
  }

  double operator()(double x) const {
    if (x <= t_.front()) return y_.front();
    if (x >= t_.back()) return y_.back();
    const auto it = std::upper_bound(t_.begin(), t_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
    const double h = t_[i + 1] - t_[i];
    const double a = (t_[i + 1] - x) / h;
    const double b = (x - t_[i]) / h;
    return a * y_[i] + b * y_[i + 1] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
  }

 private:
  std::vector<double> t_, y_, m_;
};

/// Interpolates a set of (t, x_1, ..., x_c) observations onto `grid_size`
/// equispaced times in [0, 1], channel by channel.
inline GridSeries spline_to_grid(const ObservationSet& set, int grid_size) {
  if (grid_size < 2) throw validation_error("spline_to_grid: grid size must be at least 2");
  if (set.dim() < 2)
    throw validation_error("spline_to_grid: set '" + set.id +
                           "' needs a time column and at least one value channel");
  const Eigen::Index n = set.size();
  std::vector<double> times(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    const double t = set.points(j, 0);
    if (t < 0.0 || t > 1.0)
      throw validation_error("spline_to_grid: set '" + set.id + "' has a time outside [0, 1]");
    times[static_cast<std::size_t>(j)] = t;
  }
  const Eigen::Index channels = set.dim() - 1;
  GridSeries out;
  out.grid_size = grid_size;
  out.values.resize(static_cast<Eigen::Index>(grid_size) * channels);
  for (Eigen::Index c = 0; c < channels; ++c) {
    std::vector<double> vals(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j)
      vals[static_cast<std::size_t>(j)] = set.points(j, 1 + c);
    const auto spline = NaturalCubicSpline::fit(times, vals);
    for (int g = 0; g < grid_size; ++g) {
      const double x = static_cast<double>(g) / static_cast<double>(grid_size - 1);
      out.values(c * grid_size + g) = spline(x);
    }
  }
  return out;
}

}  // namespace settest
