#pragma once
// 1D radial grid: uniform spacing on [x_first, x_switch] (where the profile
// has O(1) structure), then geometrically growing spacing out to x_max so a
// power-law tail is resolved with a few nodes per decade.

#include <cstddef>
#include <vector>

#include "blowuplab/common.hpp"

namespace blowuplab {

struct Grid1D {
  std::vector<double> nodes;  // strictly increasing, nodes.front() > 0
  std::size_t n_uniform = 0;  // nodes[0..n_uniform-1] are uniformly spaced
  double x_switch = 0.0;      // last uniform node
  double rho = 1.0;           // geometric spacing ratio beyond x_switch

  std::size_t size() const { return nodes.size(); }
  double x_first() const { return nodes.front(); }
  double x_max() const { return nodes.back(); }

  // Index of the panel [nodes[j], nodes[j+1]] containing x (clamped to the
  // last panel for x == x_max). Requires nodes.front() <= x <= nodes.back().
  std::size_t locate(double x) const;
};

// Build the graded grid. n total nodes; uniform_frac of them uniform on
// [x_first, x_switch]; the rest geometric with ratio rho <= rho_cap solved so
// the last node lands exactly on x_max. Throws GridError when the geometry is
// infeasible (too few nodes for the requested span).
Grid1D make_grid_1d(std::size_t n, double x_first = 1e-4, double x_switch = 2.0,
                    double x_max = 1e6, double uniform_frac = 0.5859375,
                    double rho_cap = 1.2);

// Validate an externally supplied node set (strictly increasing, positive).
void validate_nodes(const std::vector<double>& nodes);

}  // namespace blowuplab
