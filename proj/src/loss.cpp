#include "rexp/loss.hpp"

#include <algorithm>

namespace rexp {

double sample_expectile(std::span<const double> values,
                        const ExpectileLevel& level, double tol) {
  if (values.empty()) throw std::domain_error("sample_expectile: empty input");
  if (!(tol > 0.0)) throw std::domain_error("sample_expectile: tol must be > 0");
  const double a = level.alpha();

  double lo = values.front(), hi = values.front();
  for (double v : values) {
    detail::check_finite(v);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo == hi) return lo;

  // h(m) and h'(m); h is strictly decreasing with a root in [lo, hi].
  auto eval = [&](double m, double& h, double& hp) {
    h = 0.0;
    hp = 0.0;
    for (double v : values) {
      const double w = v < m ? 1.0 - a : a;
      h += w * (v - m);
      hp -= w;
    }
  };

  double scale = 0.0;
  for (double v : values) scale += std::fabs(v);
  const double target = tol * std::max(scale, 1.0);

  double m = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double h, hp;
    eval(m, h, hp);
    if (std::fabs(h) <= target) return m;
    if (h > 0.0)
      lo = m;
    else
      hi = m;
    double next = m - h / hp;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == m) break;
    m = next;
  }
  return m;
}

}  // namespace rexp
