#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "deeposg/dataset.hpp"
#include "deeposg/linalg.hpp"

namespace deeposg {

/// A point of the physical domain (y unused for 1D bases).
struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Finite basis with a quadrature rule for inner products.
struct BasisSet {
  std::string name;
  int dim = 0;
  int spatial_dims = 1;
  std::function<double(int, const Point&)> eval;
  std::vector<Point> nodes;
  Vector weights;
  Matrix values;  // nodes x dim, basis members at the quadrature nodes
  Matrix gram;    // dim x dim under the quadrature

  /// Evaluates every member at every point: points x dim.
  Matrix evaluate(const std::vector<Point>& points) const;
};

/// {1, cos x, sin x, ..., cos Kx, sin Kx} on [lo, lo + 2 pi) with a trapezoid rule.
BasisSet fourier_basis(int max_wavenumber, double lo = 0.0, int nodes = 64);
/// {sin x, ..., sin nx} on (-pi, pi) with a trapezoid rule.
BasisSet sine_basis(int count, int nodes = 64);
/// Tensor product {1, cos, sin, cos 2, sin 2}^2 on (-pi, pi)^2; index = i * 5 + j,
/// i for x and j for y.
BasisSet fourier_tensor_basis(int nodes_per_axis = 24);
/// Legendre polynomials P_0..P_{count-1} on [lo, hi] with Gauss-Legendre nodes.
BasisSet legendre_basis(int count, double lo, double hi, int nodes = 0);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int count, Vector& nodes, Vector& weights);

struct ModalState {
  Vector coeffs;
  std::string basis;
};

/// Galerkin coefficients from samples at the basis quadrature nodes.
/// Throws NumericError when the Gram matrix is singular.
ModalState project(const Vector& samples, const BasisSet& basis);
ModalState project(const std::function<double(const Point&)>& u, const BasisSet& basis);
/// Series evaluation at arbitrary points.
Vector reconstruct(const ModalState& v, const BasisSet& basis, const std::vector<Point>& points);

enum class ModalPde { advection, viscous_burgers, convdiff2d };

std::string to_string(ModalPde p);
ModalPde parse_modal_pde(const std::string& s);
int modal_dim(ModalPde p);
BasisSet modal_basis(ModalPde p);
/// Coefficient-sampling domain used for bursts.
Box modal_default_domain(ModalPde p);

/// Galerkin right-hand side for the sine coefficients of u_t + u u_x = nu u_xx,
/// with the quadratic term evaluated on a 4n-point grid and re-projected.
Vector burgers_galerkin_rhs(const Vector& v, double nu);

/// Exact (advection, convdiff2d) or RK4 Galerkin (viscous Burgers) evolution.
ModalState modal_reference_evolve(ModalPde pde, const ModalState& v0, double delta);
Vector modal_reference_evolve(ModalPde pde, const Vector& v0, double delta);

/// Bursts in coefficient space; an empty `domain` selects the default one.
BurstDataset make_modal_bursts(ModalPde pde, const BurstSpec& spec, const Box& domain,
                               std::uint64_t seed);

}  // namespace deeposg
