#pragma once
// Stream function of the five-dimensional Biot-Savart law restricted to
// axisymmetric data, in divergence form
//   -d_r(r^3 psi_r) - r^3 psi_zz = 4 kappa_psi1 * r^(2+alpha) * W,
// with W odd in z. Two independent evaluation paths are provided:
//
//  * direct kernel quadrature  psi(r,z) = (2 kappa_psi1 / pi) * integral of
//    rt^(2+alpha) W(rt,zt) [G(r,rt,z-zt) - G(r,rt,z+zt)] over the stored
//    half-plane, where G(r,rt,zeta) = integral_0^pi sin^2(theta)/A^3 dtheta
//    and A^2 = r^2 + rt^2 - 2 r rt cos(theta) + zeta^2;
//  * a vertex-centered finite-volume discretization of the divergence form
//    solved with preconditioned conjugate gradients.
//
// The two paths cross-validate each other in the tests.

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "blowuplab/common.hpp"
#include "blowuplab/field2d.hpp"
#include "blowuplab/model_params.hpp"

namespace blowuplab {

// Angular factor G and its r / zeta derivatives, graded quadrature in theta
// (panels shrinking geometrically toward the theta = 0 near-diagonal
// singularity; G is log-singular there for r rt > 0).
struct AngularKernel {
  double g = 0.0;       // integral sin^2/A^3
  double g_r = 0.0;     // d/dr
  double g_zeta = 0.0;  // d/dzeta
};
AngularKernel angular_kernel(double r, double rt, double zeta);

// Boundary-reduction kernel of the constant-in-r identity: the r-integral of
// the ring kernel difference, (1 - |a|^alpha * sign-carrying) / kappa_psi1 in
// closed form. Thin wrapper re-exporting the 1D implementation under the
// argument order used here.
double h_kernel(double a, double alpha, double rel_tol = 1e-10);

struct StreamSample {
  double r = 0.0, z = 0.0;
  double psi = 0.0, psi_r = 0.0, psi_z = 0.0;
  double u_r = 0.0, u_z = 0.0;  // u_r = -r psi_z, u_z = 2 psi + r psi_r
};

struct KernelQuadratureResult {
  std::vector<StreamSample> samples;
  double psi_z_origin = 0.0;   // 2 alpha * j3d(omega, infinity)
  std::string method = "kernel";
  double error_estimate = 0.0;  // max refinement difference over samples
};

// Direct quadrature at arbitrary points (axis and z = 0 included; psi(r,0) and
// u_r(0,z) vanish identically). Requires omega compactly supported on its
// grid (outermost two node layers zero) - declared far-field tails are not
// integrated by this path.
KernelQuadratureResult psi_kernel_quadrature(
    const Field2D& omega, const ModelParams& params,
    const std::vector<std::pair<double, double>>& points);

// psi on the axis r = 0 (scalar convenience wrapper of the same engine).
double psi_axis(const Field2D& omega, const ModelParams& params, double z);

// J3D(x) = (3 kappa_psi1 / (2 alpha)) * integral over the strip |zt| <= x of
// rt^(2+alpha) zt W(rt,zt) (rt^2+zt^2)^(-5/2); pass x = infinity for the full
// integral. psi_z(0,0) = 2 alpha * J3D(infinity).
double j3d(const Field2D& omega, const ModelParams& params, double x_abs);

enum class FarBoundary {
  ZeroDirichlet,    // psi = 0 on r = r_max and z = z_max
  KernelDirichlet,  // psi from the kernel quadrature, sampled with a stride
};

struct EllipticOptions {
  FarBoundary far_bc = FarBoundary::KernelDirichlet;
  double tol = 1e-10;       // relative algebraic residual
  int max_iters = 20000;    // total CG budget
  int boundary_stride = 4;  // kernel bc sampled every k-th boundary node
};

struct StreamFunctionResult {
  HalfPlaneGrid grid;
  // nr x (nz-1) matrices on the stored z > 0 nodes (z = 0 row: psi = 0,
  // psi_r = 0, u_r by oddness of psi in z is the only nonzero via psi_z).
  Eigen::MatrixXd psi, psi_r, psi_z, u_r, u_z;
  double psi_z_origin = 0.0;  // 2 alpha * j3d(omega, infinity)
  std::string method;         // "elliptic-zero-bc" or "elliptic-kernel-bc"
  double error_estimate = 0.0;  // final algebraic residual (relative)
  std::vector<double> residual_history;  // per CG chunk
};

// Finite-volume operator for a fixed grid and alpha; assembling and
// preconditioning once lets time steppers re-solve cheaply as omega changes.
class EllipticStreamSolver {
 public:
  EllipticStreamSolver(const HalfPlaneGrid& grid, const ModelParams& params);

  StreamFunctionResult solve(const Field2D& omega,
                             const EllipticOptions& opts = {}) const;

 private:
  HalfPlaneGrid grid_;
  ModelParams params_;
  Eigen::SparseMatrix<double> matrix_;
  std::vector<double> rf_, zf_;            // control faces
  std::vector<double> volr_;               // r-moment per control volume
  std::vector<double> src_w_, src_c_, src_e_;  // source-row weights per volume
  struct Pre;                            // preconditioned CG state
  std::shared_ptr<const Pre> pre_;
};

// One-shot convenience wrapper.
StreamFunctionResult psi_elliptic_solve(const Field2D& omega, const ModelParams& params,
                                        const EllipticOptions& opts = {});

// Fill psi_r, psi_z, u_r, u_z from psi by second-order nonuniform finite
// differences (centered inside, one-sided at edges, psi(r,0) = 0 used below
// the first row). Exposed for tests; solve() already calls it.
void velocities_from_psi(StreamFunctionResult& s);

}  // namespace blowuplab
