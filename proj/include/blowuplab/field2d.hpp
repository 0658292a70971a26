#pragma once
// Half-plane (r, z) grids and scalar fields for the axisymmetric problem.
// Storage convention: the grid carries the axis r = 0 and the symmetry line
// z = 0 explicitly; field values are stored for z > 0 only (the z = 0 row is
// identically zero for the odd-in-z quantities evolved here). As a function
// of signed r the scalar is even in r; in z it extends oddly.

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "blowuplab/common.hpp"

namespace blowuplab {

struct HalfPlaneGrid {
  std::vector<double> r;  // r[0] = 0 < r[1] < ... < r[nr-1] = r_max
  std::vector<double> z;  // z[0] = 0 < z[1] < ... < z[nz-1] = z_max

  std::size_t nr() const { return r.size(); }
  std::size_t nz() const { return z.size(); }
  double r_max() const { return r.back(); }
  double z_max() const { return z.back(); }

  // Cell index i with r[i] <= x < r[i+1] (clamped to the last cell).
  std::size_t locate_r(double x) const;
  std::size_t locate_z(double x) const;

  // Smallest cell diagonal, used as the default origin-exclusion radius.
  double min_cell_diameter() const;

  void validate() const;  // throws GridError on non-monotone/invalid nodes
};

// Graded tensor grid: uniform spacing on [0, switch_at], then geometrically
// stretched cells (ratio <= rho_cap) reaching r_max / z_max, mirroring the 1D
// grid design. n_r / n_z are node counts including the r = 0 and z = 0 lines.
HalfPlaneGrid make_half_plane_grid(std::size_t n_r, std::size_t n_z,
                                   double r_max = 60.0, double z_max = 60.0,
                                   double switch_at = 4.0,
                                   double uniform_frac = 0.625,
                                   double rho_cap = 1.2);

// Uniform tensor grid (used by grid-refinement studies).
HalfPlaneGrid make_uniform_half_plane_grid(std::size_t n_r, std::size_t n_z,
                                           double r_max, double z_max);

struct Field2D {
  HalfPlaneGrid grid;
  // values(i, j) = field(r_i, z_{j+1}); nr rows, nz-1 columns (z > 0 only).
  Eigen::MatrixXd values;
  double support_radius = 0.0;  // 0 = unknown / not declared
  double tail_p_r = 0.0;        // optional declared decay exponents (0 = none)
  double tail_p_z = 0.0;

  // Value at a stored sample (z_{j+1} column convention hidden).
  double at(std::size_t i, std::size_t j_pos) const {
    return values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j_pos));
  }

  // Bilinear evaluation with the symmetry extensions: even in signed r, odd
  // in z, zero beyond the grid box.
  double eval(double r_pt, double z_pt) const;

  // True when the outermost two node layers (in r and z) vanish identically.
  bool compactly_supported() const;

  void validate() const;
};

// Sample a callable f(r, z) on the grid (z > 0 rows only).
Field2D make_field(const HalfPlaneGrid& grid,
                   const std::function<double(double, double)>& f);

// Largest |x| = hypot(r, z) over nodes where the field is nonzero (0 for the
// zero field); useful as an effective support radius.
double field_support_radius(const Field2D& f);

// Bilinear sample of a matrix laid out like Field2D::values (nr rows, nz-1
// columns, z > 0 only) with explicit reflection parities: parity_r / parity_z
// are +1 (even) or -1 (odd) and give the sign picked up when mirroring the
// query point into the stored quadrant. Odd-in-z data interpolate through the
// implicit zero on the z = 0 line; even-in-z data keep the first stored row
// (consistent with a vanishing normal derivative there). Outside the grid box
// the sample is zero unless clamp_outside is set, in which case the query is
// clamped to the box edge (appropriate for velocities, which stay finite).
double sample_bilinear(const HalfPlaneGrid& grid, const Eigen::MatrixXd& values,
                       int parity_r, int parity_z, double r_pt, double z_pt,
                       bool clamp_outside = false);

// Monotonicity-limited cubic sample of an even-in-r, odd-in-z matrix (same
// layout as Field2D::values), zero beyond the grid box. Tensor-product local
// Hermite cubics with Fritsch-Carlson limited slopes on 4-point stencils:
// bounded by the local data range, so sup norms never grow under resampling.
double sample_monotone_cubic(const HalfPlaneGrid& grid,
                             const Eigen::MatrixXd& values, double r_pt,
                             double z_pt);

}  // namespace blowuplab
