#include "blowuplab/grid1d.hpp"

#include <algorithm>
#include <cmath>

namespace blowuplab {

std::size_t Grid1D::locate(double x) const {
  if (!(x >= nodes.front()) || !(x <= nodes.back())) {
    throw DomainError("Grid1D::locate: x = " + fmt_g17(x) + " outside [" +
                      fmt_g17(nodes.front()) + ", " + fmt_g17(nodes.back()) + "]");
  }
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  std::size_t j = static_cast<std::size_t>(it - nodes.begin());
  if (j == 0) return 0;  // x == nodes.front()
  if (j >= nodes.size()) return nodes.size() - 2;
  return j - 1;
}

void validate_nodes(const std::vector<double>& nodes) {
  if (nodes.size() < 8) throw GridError("grid needs at least 8 nodes");
  if (!(nodes.front() > 0.0)) throw GridError("grid nodes must start above 0");
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i] > nodes[i - 1])) {
      throw GridError("grid nodes must be strictly increasing (violated at index " +
                      std::to_string(i) + ")");
    }
  }
}

Grid1D make_grid_1d(std::size_t n, double x_first, double x_switch, double x_max,
                    double uniform_frac, double rho_cap) {
  if (n < 16) throw GridError("make_grid_1d: need at least 16 nodes");
  if (!(0.0 < x_first && x_first < x_switch && x_switch < x_max)) {
    throw GridError("make_grid_1d: need 0 < x_first < x_switch < x_max");
  }
  if (!(uniform_frac > 0.0 && uniform_frac < 1.0)) {
    throw GridError("make_grid_1d: uniform_frac must lie in (0, 1)");
  }
  const std::size_t nu =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(uniform_frac * n)),
                              4, n - 4);
  const std::size_t ng = n - nu;  // geometric panels
  const double h = (x_switch - x_first) / static_cast<double>(nu - 1);

  // Geometric part: x_switch + h * sum_{k=1}^{ng} rho^k = x_max. The reach is
  // monotone in rho, so bisect on (1, rho_cap].
  const auto reach = [&](double r) {
    // h * r (r^ng - 1)/(r - 1), guarded near r = 1.
    if (std::fabs(r - 1.0) < 1e-12) return x_switch + h * static_cast<double>(ng);
    return x_switch + h * r * (std::pow(r, static_cast<double>(ng)) - 1.0) / (r - 1.0);
  };
  if (reach(rho_cap) < x_max) {
    throw GridError("make_grid_1d: cannot reach x_max = " + fmt_g17(x_max) + " with ratio <= " +
                    fmt_g17(rho_cap) + "; increase n or shrink the span");
  }
  double lo = 1.0 + 1e-9, hi = rho_cap;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (reach(mid) < x_max ? lo : hi) = mid;
  }
  const double rho = 0.5 * (lo + hi);

  Grid1D g;
  g.nodes.reserve(n);
  for (std::size_t i = 0; i < nu; ++i) {
    g.nodes.push_back(x_first + h * static_cast<double>(i));
  }
  g.nodes[nu - 1] = x_switch;  // land exactly
  double step = h;
  for (std::size_t k = 1; k <= ng; ++k) {
    step *= rho;
    g.nodes.push_back(g.nodes.back() + step);
  }
  g.nodes.back() = x_max;  // absorb the bisection residual (well below one spacing)
  g.n_uniform = nu;
  g.x_switch = x_switch;
  g.rho = rho;
  validate_nodes(g.nodes);
  return g;
}

}  // namespace blowuplab
