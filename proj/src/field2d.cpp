#include "blowuplab/field2d.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include "blowuplab/interp.hpp"

namespace blowuplab {

namespace {

std::size_t locate_in(const std::vector<double>& nodes, double x) {
  if (!(x >= nodes.front()) || !(x <= nodes.back())) {
    throw DomainError("HalfPlaneGrid::locate: coordinate " + fmt_g17(x) + " outside [" +
                      fmt_g17(nodes.front()) + ", " + fmt_g17(nodes.back()) + "]");
  }
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  std::size_t j = static_cast<std::size_t>(it - nodes.begin());
  if (j == 0) return 0;
  if (j >= nodes.size()) return nodes.size() - 2;
  return j - 1;
}

void validate_axis_nodes(const std::vector<double>& nodes, const char* name) {
  if (nodes.size() < 8) {
    throw GridError(std::string("HalfPlaneGrid: ") + name + " needs at least 8 nodes");
  }
  if (nodes.front() != 0.0) {
    throw GridError(std::string("HalfPlaneGrid: ") + name + " nodes must start at 0");
  }
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i] > nodes[i - 1])) {
      throw GridError(std::string("HalfPlaneGrid: ") + name +
                      " nodes must be strictly increasing (violated at index " +
                      std::to_string(i) + ")");
    }
  }
}

// Nodes 0, h, 2h, ..., switch_at, then geometrically stretched steps up to
// x_max. Same construction as the 1D grid but anchored at 0.
std::vector<double> graded_axis(std::size_t n, double x_max, double switch_at,
                                double uniform_frac, double rho_cap) {
  if (n < 16) throw GridError("make_half_plane_grid: need at least 16 nodes per direction");
  if (!(0.0 < switch_at && switch_at < x_max)) {
    throw GridError("make_half_plane_grid: need 0 < switch_at < max extent");
  }
  if (!(uniform_frac > 0.0 && uniform_frac < 1.0)) {
    throw GridError("make_half_plane_grid: uniform_frac must lie in (0, 1)");
  }
  const std::size_t nu = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(uniform_frac * static_cast<double>(n))), 4, n - 4);
  const std::size_t ng = n - nu;
  const double h = switch_at / static_cast<double>(nu - 1);

  const auto reach = [&](double r) {
    if (std::fabs(r - 1.0) < 1e-12) return switch_at + h * static_cast<double>(ng);
    return switch_at + h * r * (std::pow(r, static_cast<double>(ng)) - 1.0) / (r - 1.0);
  };
  if (reach(rho_cap) < x_max) {
    throw GridError("make_half_plane_grid: cannot reach extent " + fmt_g17(x_max) +
                    " with ratio <= " + fmt_g17(rho_cap) + "; increase the node count");
  }
  double lo = 1.0 + 1e-9, hi = rho_cap;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (reach(mid) < x_max ? lo : hi) = mid;
  }
  const double rho = 0.5 * (lo + hi);

  std::vector<double> nodes;
  nodes.reserve(n);
  for (std::size_t i = 0; i < nu; ++i) nodes.push_back(h * static_cast<double>(i));
  nodes[nu - 1] = switch_at;
  double step = h;
  for (std::size_t k = 1; k <= ng; ++k) {
    step *= rho;
    nodes.push_back(nodes.back() + step);
  }
  nodes.back() = x_max;
  return nodes;
}

}  // namespace

std::size_t HalfPlaneGrid::locate_r(double x) const { return locate_in(r, x); }
std::size_t HalfPlaneGrid::locate_z(double x) const { return locate_in(z, x); }

double HalfPlaneGrid::min_cell_diameter() const {
  double hr = r[1] - r[0], hz = z[1] - z[0];
  for (std::size_t i = 1; i + 1 < r.size(); ++i) hr = std::min(hr, r[i + 1] - r[i]);
  for (std::size_t j = 1; j + 1 < z.size(); ++j) hz = std::min(hz, z[j + 1] - z[j]);
  return std::hypot(hr, hz);
}

void HalfPlaneGrid::validate() const {
  validate_axis_nodes(r, "r");
  validate_axis_nodes(z, "z");
}

HalfPlaneGrid make_half_plane_grid(std::size_t n_r, std::size_t n_z, double r_max,
                                   double z_max, double switch_at, double uniform_frac,
                                   double rho_cap) {
  HalfPlaneGrid g;
  g.r = graded_axis(n_r, r_max, switch_at, uniform_frac, rho_cap);
  g.z = graded_axis(n_z, z_max, switch_at, uniform_frac, rho_cap);
  g.validate();
  return g;
}

HalfPlaneGrid make_uniform_half_plane_grid(std::size_t n_r, std::size_t n_z, double r_max,
                                           double z_max) {
  if (n_r < 8 || n_z < 8) {
    throw GridError("make_uniform_half_plane_grid: need at least 8 nodes per direction");
  }
  if (!(r_max > 0.0) || !(z_max > 0.0)) {
    throw GridError("make_uniform_half_plane_grid: extents must be positive");
  }
  HalfPlaneGrid g;
  g.r.resize(n_r);
  g.z.resize(n_z);
  for (std::size_t i = 0; i < n_r; ++i) {
    g.r[i] = r_max * static_cast<double>(i) / static_cast<double>(n_r - 1);
  }
  for (std::size_t j = 0; j < n_z; ++j) {
    g.z[j] = z_max * static_cast<double>(j) / static_cast<double>(n_z - 1);
  }
  g.validate();
  return g;
}

double Field2D::eval(double r_pt, double z_pt) const {
  const double sign_z = z_pt < 0.0 ? -1.0 : 1.0;
  double rr = std::fabs(r_pt);       // even extension across the axis
  double zz = std::fabs(z_pt);       // odd extension below the symmetry line
  if (rr > grid.r_max() || zz > grid.z_max()) return 0.0;
  const std::size_t i = grid.locate_r(rr);
  const std::size_t j = grid.locate_z(zz);
  const double tr = (rr - grid.r[i]) / (grid.r[i + 1] - grid.r[i]);
  const double tz = (zz - grid.z[j]) / (grid.z[j + 1] - grid.z[j]);
  // Column j-1 holds z_j; the z = 0 column is implicit (zero).
  const auto val = [&](std::size_t ii, std::size_t jj) -> double {
    if (jj == 0) return 0.0;
    return values(static_cast<Eigen::Index>(ii), static_cast<Eigen::Index>(jj - 1));
  };
  const double v00 = val(i, j), v10 = val(i + 1, j);
  const double v01 = val(i, j + 1), v11 = val(i + 1, j + 1);
  const double v = (1.0 - tr) * ((1.0 - tz) * v00 + tz * v01) +
                   tr * ((1.0 - tz) * v10 + tz * v11);
  return sign_z * v;
}

bool Field2D::compactly_supported() const {
  const Eigen::Index m = values.rows(), n = values.cols();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (values(m - 1, j) != 0.0 || values(m - 2, j) != 0.0) return false;
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (values(i, n - 1) != 0.0 || values(i, n - 2) != 0.0) return false;
  }
  return true;
}

void Field2D::validate() const {
  grid.validate();
  if (values.rows() != static_cast<Eigen::Index>(grid.nr()) ||
      values.cols() != static_cast<Eigen::Index>(grid.nz()) - 1) {
    throw GridError("Field2D: values must be nr x (nz-1); got " +
                    std::to_string(values.rows()) + " x " + std::to_string(values.cols()));
  }
  if (!values.allFinite()) throw GridError("Field2D: values contain non-finite entries");
}

Field2D make_field(const HalfPlaneGrid& grid,
                   const std::function<double(double, double)>& f) {
  grid.validate();
  Field2D out;
  out.grid = grid;
  out.values.resize(static_cast<Eigen::Index>(grid.nr()),
                    static_cast<Eigen::Index>(grid.nz()) - 1);
  for (std::size_t i = 0; i < grid.nr(); ++i) {
    for (std::size_t j = 1; j < grid.nz(); ++j) {
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j - 1)) =
          f(grid.r[i], grid.z[j]);
    }
  }
  out.validate();
  return out;
}

double field_support_radius(const Field2D& f) {
  double rad = 0.0;
  for (std::size_t i = 0; i < f.grid.nr(); ++i) {
    for (std::size_t j = 1; j < f.grid.nz(); ++j) {
      if (f.at(i, j - 1) != 0.0) {
        rad = std::max(rad, std::hypot(f.grid.r[i], f.grid.z[j]));
      }
    }
  }
  return rad;
}

double sample_bilinear(const HalfPlaneGrid& grid, const Eigen::MatrixXd& values,
                       int parity_r, int parity_z, double r_pt, double z_pt,
                       bool clamp_outside) {
  if ((parity_r != 1 && parity_r != -1) || (parity_z != 1 && parity_z != -1)) {
    throw DomainError("sample_bilinear: parities must be +1 or -1");
  }
  double sign = 1.0;
  if (r_pt < 0.0) {
    r_pt = -r_pt;
    sign *= parity_r;
  }
  if (z_pt < 0.0) {
    z_pt = -z_pt;
    sign *= parity_z;
  }
  if (r_pt > grid.r_max() || z_pt > grid.z_max()) {
    if (!clamp_outside) return 0.0;
    r_pt = std::min(r_pt, grid.r_max());
    z_pt = std::min(z_pt, grid.z_max());
  }

  const std::size_t i = grid.locate_r(r_pt);
  const double tr = (r_pt - grid.r[i]) / (grid.r[i + 1] - grid.r[i]);
  // Column -1 stands for the z = 0 line: zero for odd data, first-row value
  // for even data (whose normal derivative vanishes on the symmetry line).
  const auto col_val = [&](std::size_t row, std::ptrdiff_t col) -> double {
    if (col < 0) {
      return parity_z < 0 ? 0.0 : values(static_cast<Eigen::Index>(row), 0);
    }
    return values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  };
  const std::size_t j = grid.locate_z(z_pt);
  const double tz = (z_pt - grid.z[j]) / (grid.z[j + 1] - grid.z[j]);
  const std::ptrdiff_t c0 = static_cast<std::ptrdiff_t>(j) - 1;
  const double lo = (1.0 - tr) * col_val(i, c0) + tr * col_val(i + 1, c0);
  const double hi = (1.0 - tr) * col_val(i, c0 + 1) + tr * col_val(i + 1, c0 + 1);
  return sign * ((1.0 - tz) * lo + tz * hi);
}

namespace {

// Fritsch-Carlson limited slope at the shared node of two secants.
double limited_slope(double d0, double d1, double h0, double h1) {
  if (d0 * d1 <= 0.0) return 0.0;
  const double w0 = 2.0 * h1 + h0, w1 = h1 + 2.0 * h0;
  return (w0 + w1) / (w0 / d0 + w1 / d1);
}

// Value of the limited cubic through (xs[k], ys[k]) on the middle interval
// [xs[1], xs[2]] at x.
double cubic4(const std::array<double, 4>& xs, const std::array<double, 4>& ys,
              double x) {
  const double h0 = xs[1] - xs[0], h1 = xs[2] - xs[1], h2 = xs[3] - xs[2];
  const double d0 = (ys[1] - ys[0]) / h0;
  const double d1 = (ys[2] - ys[1]) / h1;
  const double d2 = (ys[3] - ys[2]) / h2;
  const double m1 = limited_slope(d0, d1, h0, h1);
  const double m2 = limited_slope(d1, d2, h1, h2);
  return hermite_eval(xs[1], xs[2], ys[1], ys[2], m1, m2, x);
}

}  // namespace

double sample_monotone_cubic(const HalfPlaneGrid& grid,
                             const Eigen::MatrixXd& values, double r_pt,
                             double z_pt) {
  double sign = 1.0;
  if (z_pt < 0.0) {
    z_pt = -z_pt;
    sign = -1.0;  // odd in z
  }
  r_pt = std::fabs(r_pt);  // even in r
  if (r_pt > grid.r_max() || z_pt > grid.z_max()) return 0.0;

  const std::ptrdiff_t nr = static_cast<std::ptrdiff_t>(grid.nr());
  const std::ptrdiff_t nz = static_cast<std::ptrdiff_t>(grid.nz());

  // Extended r-line: index k < 0 mirrors node -k (even values); one zero ghost
  // node beyond r_max keeps the stencil inside compact support.
  const auto r_node = [&](std::ptrdiff_t k) -> double {
    if (k < 0) return -grid.r[static_cast<std::size_t>(-k)];
    if (k >= nr) return grid.r[grid.nr() - 1] + (grid.r[grid.nr() - 1] - grid.r[grid.nr() - 2]);
    return grid.r[static_cast<std::size_t>(k)];
  };
  // Extended z-line: index 0 is the implicit zero on z = 0, negative indices
  // mirror with a sign flip, one zero ghost beyond z_max.
  const auto z_node = [&](std::ptrdiff_t k) -> double {
    if (k < 0) return -grid.z[static_cast<std::size_t>(-k)];
    if (k >= nz) return grid.z[grid.nz() - 1] + (grid.z[grid.nz() - 1] - grid.z[grid.nz() - 2]);
    return grid.z[static_cast<std::size_t>(k)];
  };
  const auto value_at = [&](std::ptrdiff_t ir, std::ptrdiff_t jz) -> double {
    if (ir >= nr || ir <= -nr) return 0.0;
    if (jz >= nz || jz <= -nz) return 0.0;
    const std::ptrdiff_t row = ir < 0 ? -ir : ir;
    double v;
    if (jz == 0) {
      v = 0.0;
    } else if (jz > 0) {
      v = values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(jz - 1));
    } else {
      v = -values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(-jz - 1));
    }
    return v;
  };

  const std::ptrdiff_t i = static_cast<std::ptrdiff_t>(grid.locate_r(r_pt));
  const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(grid.locate_z(z_pt));

  std::array<double, 4> zs{}, col{};
  for (int b = 0; b < 4; ++b) zs[static_cast<std::size_t>(b)] = z_node(j - 1 + b);
  std::array<double, 4> rs{}, vals{};
  for (int a = 0; a < 4; ++a) {
    const std::ptrdiff_t ir = i - 1 + a;
    rs[static_cast<std::size_t>(a)] = r_node(ir);
    for (int b = 0; b < 4; ++b) {
      col[static_cast<std::size_t>(b)] = value_at(ir, j - 1 + b);
    }
    vals[static_cast<std::size_t>(a)] = cubic4(zs, col, z_pt);
  }
  return sign * cubic4(rs, vals, r_pt);
}

}  // namespace blowuplab
