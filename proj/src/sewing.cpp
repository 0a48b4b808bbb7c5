#include "sewflow/sewing.hpp"

#include <cmath>

namespace sewflow {

RateFit rate_fit(std::span<const LevelRecord> history) {
  std::vector<double> x, y;
  for (const auto& h : history) {
    if (h.gap > 0.0 && std::isfinite(h.gap) && h.theta > 0.0 && std::isfinite(h.theta)) {
      x.push_back(std::log(h.theta));
      y.push_back(std::log(h.gap));
    }
  }
  if (x.size() < 3) throw InsufficientData("rate fit needs at least 3 levels with positive gaps");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InsufficientData("rate fit needs distinct theta values");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.levels = x.size();
  return fit;
}

}  // namespace sewflow
