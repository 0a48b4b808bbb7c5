#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "sewflow/almostflow.hpp"
#include "sewflow/errors.hpp"
#include "sewflow/parallel.hpp"
#include "sewflow/sewing.hpp"
#include "sewflow/statespace.hpp"
#include "sewflow/timegrid.hpp"

namespace sewflow {

/// Discrete D-solution candidate: states on a grid starting at (r, a).
template <MetricState State>
class DPath {
 public:
  DPath(Partition grid, std::vector<State> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw InvalidArgument("path needs one state per grid point");
  }

  const Partition& grid() const { return grid_; }
  const std::vector<State>& values() const { return values_; }
  double r() const { return grid_.front(); }
  const State& start() const { return values_.front(); }
  /// State at a grid time.
  const State& at(double t) const { return values_[grid_.index_of(t)]; }

 private:
  Partition grid_;
  std::vector<State> values_;
};

struct DefectReport {
  /// max over grid pairs s < t of d(y_t, phi_{t,s}(y_s)) / (N(a) varpi(omega_{s,t})), a = y_r.
  double k_hat = 0.0;
  std::optional<std::pair<double, double>> worst;
  std::size_t grid_points = 0;
};

template <MetricState State>
DefectReport davie_defect(const DPath<State>& y, const AlmostFlow<State>& phi) {
  using traits = state_traits<State>;
  const auto pts = y.grid().points();
  if (pts.front() < 0.0 || pts.back() > phi.horizon) throw InvalidArgument("path grid outside the flow's domain");
  const std::size_t n = pts.size();
  const double na = phi.gauge(y.start());
  std::vector<double> row_max(n, 0.0);
  std::vector<std::size_t> row_arg(n, 0);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const State step = phi.evaluator(pts[i], pts[j], y.values()[i]);
      const double d = distance(y.values()[j], step);
      const double r = detail::resolved_ratio(d, na * phi.remainder(pts[i], pts[j]),
                                              traits::norm(step) + traits::norm(y.values()[j]));
      if (r > row_max[i]) {
        row_max[i] = r;
        row_arg[i] = j;
      }
    }
  });
  DefectReport out;
  out.grid_points = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (row_max[i] > out.k_hat) {
      out.k_hat = row_max[i];
      out.worst = std::make_pair(pts[i], pts[row_arg[i]]);
    }
  }
  return out;
}

/// y_t = psi^_{t,r}(a) on the grid, with grid.front() = r.
template <MetricState State>
DPath<State> flow_to_solution(const FlowApprox<State>& approx, double r, const State& a, const Partition& grid) {
  if (!(r >= 0.0 && r < approx.source.horizon)) throw InvalidArgument("start time outside [0, T)");
  if (grid.front() != r || grid.back() > approx.source.horizon) {
    throw InvalidArgument("solution grid must start at r and stay inside [r, T]");
  }
  const auto pts = grid.points();
  std::vector<State> values(pts.size(), a);
  parallel_for(pts.size(), [&](std::size_t i) { values[i] = approx(r, pts[i], a); });
  return DPath<State>(grid, std::move(values));
}

/// y on [r, s] followed by z on [s, T]; z must start at s with exactly y_s.
template <MetricState State>
DPath<State> splice(const DPath<State>& y, const DPath<State>& z, double s) {
  if (!y.grid().contains(s)) throw InvalidArgument("splice time is not a point of the first grid");
  if (z.r() != s) throw InvalidArgument("second path must start at the splice time");
  const State& ys = y.at(s);
  const State& zs = z.start();
  if (!state_traits<State>::same_shape(ys, zs) || distance(ys, zs) != 0.0) {
    throw InvalidArgument("second path does not start at the first path's value at the splice time");
  }
  std::vector<double> pts;
  std::vector<State> values;
  const auto yp = y.grid().points();
  for (std::size_t i = 0; i < yp.size() && yp[i] < s; ++i) {
    pts.push_back(yp[i]);
    values.push_back(y.values()[i]);
  }
  const auto zp = z.grid().points();
  for (std::size_t i = 0; i < zp.size(); ++i) {
    pts.push_back(zp[i]);
    values.push_back(z.values()[i]);
  }
  return DPath<State>(Partition(std::move(pts)), std::move(values));
}

/// Grid points of y inside [from, to]; `from` must be a grid point.
template <MetricState State>
DPath<State> restrict(const DPath<State>& y, double from, double to) {
  if (!y.grid().contains(from)) throw InvalidArgument("restriction must start at a grid point");
  if (to < from) throw InvalidArgument("restriction needs from <= to");
  std::vector<double> pts;
  std::vector<State> values;
  const auto yp = y.grid().points();
  for (std::size_t i = 0; i < yp.size(); ++i) {
    if (yp[i] >= from && yp[i] <= to) {
      pts.push_back(yp[i]);
      values.push_back(y.values()[i]);
    }
  }
  return DPath<State>(Partition(std::move(pts)), std::move(values));
}

/// Sub-grid restriction keeping every `stride`-th point (first and last kept).
template <MetricState State>
DPath<State> thin(const DPath<State>& y, std::size_t stride) {
  if (stride < 1) throw InvalidArgument("thinning stride must be >= 1");
  std::vector<double> pts;
  std::vector<State> values;
  const auto yp = y.grid().points();
  for (std::size_t i = 0; i < yp.size(); ++i) {
    if (i % stride == 0 || i + 1 == yp.size()) {
      pts.push_back(yp[i]);
      values.push_back(y.values()[i]);
    }
  }
  return DPath<State>(Partition(std::move(pts)), std::move(values));
}

}  // namespace sewflow
