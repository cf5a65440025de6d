#include "deeposg/modal.hpp"

#include <cmath>

#include "deeposg/error.hpp"
#include "deeposg/integrate.hpp"

namespace deeposg {

namespace {

constexpr double pi = 3.14159265358979323846;
constexpr double burgers_nu = 0.1;
constexpr double burgers_tau = 1e-4;
constexpr double convdiff_alpha[2] = {1.0, 0.7};
constexpr double convdiff_sigma[2] = {0.1, 0.16};

int wavenumber(int i) { return (i + 1) / 2; }

double fourier_member(int i, double x) {
  if (i == 0) return 1.0;
  const int k = wavenumber(i);
  return (i % 2 == 1) ? std::cos(k * x) : std::sin(k * x);
}

void finish(BasisSet& b) {
  b.values = b.evaluate(b.nodes);
  b.gram = b.values.transpose() * b.weights.asDiagonal() * b.values;
}

/// 1D factor of the Fourier evolution: rotation of each (cos kx, sin kx) pair by
/// k * speed * t and damping by exp(-diffusion k^2 t).
Matrix fourier_evolution(int max_k, double speed, double diffusion, double t) {
  const int n = 2 * max_k + 1;
  Matrix m = Matrix::Zero(n, n);
  m(0, 0) = 1.0;
  for (int k = 1; k <= max_k; ++k) {
    const double angle = k * speed * t;
    const double decay = std::exp(-diffusion * k * k * t);
    const double c = std::cos(angle) * decay;
    const double s = std::sin(angle) * decay;
    const int ic = 2 * k - 1, is = 2 * k;
    m(ic, ic) = c;
    m(ic, is) = -s;
    m(is, ic) = s;
    m(is, is) = c;
  }
  return m;
}

struct BurgersGrid {
  int n = 0;
  int points = 0;
  Matrix sin_table;  // points x n
  Matrix dcos_table; // points x n, k cos(k x)
};

const BurgersGrid& burgers_grid(int n) {
  thread_local BurgersGrid grid;
  if (grid.n != n) {
    grid.n = n;
    grid.points = 4 * n;
    grid.sin_table.resize(grid.points, n);
    grid.dcos_table.resize(grid.points, n);
    for (int j = 0; j < grid.points; ++j) {
      const double x = -pi + 2.0 * pi * j / grid.points;
      for (int k = 1; k <= n; ++k) {
        grid.sin_table(j, k - 1) = std::sin(k * x);
        grid.dcos_table(j, k - 1) = k * std::cos(k * x);
      }
    }
  }
  return grid;
}

}  // namespace

Matrix BasisSet::evaluate(const std::vector<Point>& points) const {
  Matrix m(static_cast<Eigen::Index>(points.size()), dim);
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (int i = 0; i < dim; ++i) m(static_cast<Eigen::Index>(p), i) = eval(i, points[p]);
  }
  return m;
}

BasisSet fourier_basis(int max_wavenumber, double lo, int nodes) {
  if (max_wavenumber < 0 || nodes < 2 * max_wavenumber + 2) {
    throw DomainError("fourier basis: too few quadrature nodes");
  }
  BasisSet b;
  b.name = "fourier" + std::to_string(2 * max_wavenumber + 1);
  b.dim = 2 * max_wavenumber + 1;
  b.eval = [](int i, const Point& p) { return fourier_member(i, p.x); };
  b.weights = Vector::Constant(nodes, 2.0 * pi / nodes);
  for (int j = 0; j < nodes; ++j) b.nodes.push_back({lo + 2.0 * pi * j / nodes, 0.0});
  finish(b);
  return b;
}

BasisSet sine_basis(int count, int nodes) {
  if (count < 1 || nodes < 2 * count + 2) throw DomainError("sine basis: too few nodes");
  BasisSet b;
  b.name = "sine" + std::to_string(count);
  b.dim = count;
  b.eval = [](int i, const Point& p) { return std::sin((i + 1) * p.x); };
  b.weights = Vector::Constant(nodes, 2.0 * pi / nodes);
  for (int j = 0; j < nodes; ++j) b.nodes.push_back({-pi + 2.0 * pi * j / nodes, 0.0});
  finish(b);
  return b;
}

BasisSet fourier_tensor_basis(int nodes_per_axis) {
  if (nodes_per_axis < 6) throw DomainError("tensor basis: too few nodes");
  BasisSet b;
  b.name = "fourier_tensor25";
  b.dim = 25;
  b.spatial_dims = 2;
  b.eval = [](int i, const Point& p) {
    return fourier_member(i / 5, p.x) * fourier_member(i % 5, p.y);
  };
  const double h = 2.0 * pi / nodes_per_axis;
  b.weights = Vector::Constant(nodes_per_axis * nodes_per_axis, h * h);
  for (int a = 0; a < nodes_per_axis; ++a) {
    for (int c = 0; c < nodes_per_axis; ++c) b.nodes.push_back({-pi + a * h, -pi + c * h});
  }
  finish(b);
  return b;
}

void gauss_legendre(int count, Vector& nodes, Vector& weights) {
  if (count < 1) throw DomainError("gauss-legendre: need at least one node");
  Matrix jac = Matrix::Zero(count, count);
  for (int i = 1; i < count; ++i) {
    const double beta = i / std::sqrt(4.0 * i * i - 1.0);
    jac(i, i - 1) = beta;
    jac(i - 1, i) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jac);
  nodes = eig.eigenvalues();
  weights = 2.0 * eig.eigenvectors().row(0).transpose().array().square();
}

BasisSet legendre_basis(int count, double lo, double hi, int nodes) {
  if (count < 1 || !(hi > lo)) throw DomainError("legendre basis: bad interval or size");
  if (nodes <= 0) nodes = count + 2;
  BasisSet b;
  b.name = "legendre" + std::to_string(count);
  b.dim = count;
  b.eval = [lo, hi](int i, const Point& p) {
    const double s = 2.0 * (p.x - lo) / (hi - lo) - 1.0;
    double p0 = 1.0, p1 = s;
    if (i == 0) return p0;
    for (int k = 1; k < i; ++k) {
      const double p2 = ((2.0 * k + 1.0) * s * p1 - k * p0) / (k + 1.0);
      p0 = p1;
      p1 = p2;
    }
    return p1;
  };
  Vector x, w;
  gauss_legendre(nodes, x, w);
  b.weights = w * (0.5 * (hi - lo));
  for (int j = 0; j < nodes; ++j) b.nodes.push_back({lo + 0.5 * (x(j) + 1.0) * (hi - lo), 0.0});
  finish(b);
  return b;
}

ModalState project(const Vector& samples, const BasisSet& basis) {
  if (samples.size() != static_cast<Eigen::Index>(basis.nodes.size())) {
    throw DimensionError("project", "sample count differs from quadrature node count");
  }
  Eigen::FullPivLU<Matrix> lu(basis.gram);
  if (!lu.isInvertible()) throw NumericError("project: singular Gram matrix for " + basis.name);
  ModalState v;
  v.basis = basis.name;
  v.coeffs = lu.solve(basis.values.transpose() * (basis.weights.asDiagonal() * samples));
  return v;
}

ModalState project(const std::function<double(const Point&)>& u, const BasisSet& basis) {
  Vector samples(static_cast<Eigen::Index>(basis.nodes.size()));
  for (std::size_t j = 0; j < basis.nodes.size(); ++j) {
    samples(static_cast<Eigen::Index>(j)) = u(basis.nodes[j]);
  }
  return project(samples, basis);
}

Vector reconstruct(const ModalState& v, const BasisSet& basis, const std::vector<Point>& points) {
  if (v.coeffs.size() != basis.dim) {
    throw DimensionError("reconstruct", "coefficient count differs from basis size");
  }
  return basis.evaluate(points) * v.coeffs;
}

std::string to_string(ModalPde p) {
  switch (p) {
    case ModalPde::advection: return "advection";
    case ModalPde::viscous_burgers: return "viscous_burgers";
    case ModalPde::convdiff2d: return "convdiff2d";
  }
  return "advection";
}

ModalPde parse_modal_pde(const std::string& s) {
  if (s == "advection") return ModalPde::advection;
  if (s == "viscous_burgers") return ModalPde::viscous_burgers;
  if (s == "convdiff2d") return ModalPde::convdiff2d;
  throw ConfigError("unknown modal problem '" + s + "'");
}

int modal_dim(ModalPde p) {
  switch (p) {
    case ModalPde::advection: return 7;
    case ModalPde::viscous_burgers: return 9;
    case ModalPde::convdiff2d: return 25;
  }
  return 0;
}

BasisSet modal_basis(ModalPde p) {
  switch (p) {
    case ModalPde::advection: return fourier_basis(3, 0.0, 64);
    case ModalPde::viscous_burgers: return sine_basis(9, 64);
    case ModalPde::convdiff2d: return fourier_tensor_basis(24);
  }
  throw ConfigError("unknown modal problem");
}

Box modal_default_domain(ModalPde p) {
  Box b;
  switch (p) {
    case ModalPde::advection: {
      Vector h(7);
      h << 0.8, 0.8, 0.8, 0.2, 0.2, 0.03, 0.03;
      b.lo = -h;
      b.hi = h;
      break;
    }
    case ModalPde::viscous_burgers: {
      Vector h(9);
      h << 1.5, 0.5, 0.2, 0.2, 0.1, 0.1, 0.05, 0.05, 0.02;
      b.lo = -h;
      b.hi = h;
      break;
    }
    case ModalPde::convdiff2d: {
      Vector h(25);
      for (int i = 0; i < 25; ++i) {
        h(i) = 1.0 / ((1.0 + wavenumber(i / 5)) * (1.0 + wavenumber(i % 5)));
      }
      b.lo = -h;
      b.hi = h;
      break;
    }
  }
  return b;
}

Vector burgers_galerkin_rhs(const Vector& v, double nu) {
  const int n = static_cast<int>(v.size());
  const BurgersGrid& g = burgers_grid(n);
  const Vector u = g.sin_table * v;
  const Vector ux = g.dcos_table * v;
  const Vector prod = u.cwiseProduct(ux);
  Vector f = -(2.0 / g.points) * (g.sin_table.transpose() * prod);
  for (int k = 1; k <= n; ++k) f(k - 1) -= nu * k * k * v(k - 1);
  return f;
}

Vector modal_reference_evolve(ModalPde pde, const Vector& v0, double delta) {
  if (v0.size() != modal_dim(pde)) {
    throw DimensionError(to_string(pde), "coefficient vector has the wrong size");
  }
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw DomainError("time lag must be >= 0");
  if (delta == 0.0) return v0;
  switch (pde) {
    case ModalPde::advection: return fourier_evolution(3, 1.0, 0.0, delta) * v0;
    case ModalPde::convdiff2d: {
      const Matrix mx = fourier_evolution(2, convdiff_alpha[0], convdiff_sigma[0], delta);
      const Matrix my = fourier_evolution(2, convdiff_alpha[1], convdiff_sigma[1], delta);
      // Row-major 5x5 coefficient grid: rows follow x, columns follow y.
      Eigen::Matrix<double, 5, 5, Eigen::RowMajor> c;
      for (int i = 0; i < 25; ++i) c(i / 5, i % 5) = v0(i);
      const Eigen::Matrix<double, 5, 5, Eigen::RowMajor> out = mx * c * my.transpose();
      Vector v(25);
      for (int i = 0; i < 25; ++i) v(i) = out(i / 5, i % 5);
      return v;
    }
    case ModalPde::viscous_burgers: {
      const auto rhs = [](const Vector& v) { return burgers_galerkin_rhs(v, burgers_nu); };
      return rk4_integrate(rhs, v0, delta, burgers_tau);
    }
  }
  return v0;
}

ModalState modal_reference_evolve(ModalPde pde, const ModalState& v0, double delta) {
  return {modal_reference_evolve(pde, v0.coeffs, delta), v0.basis};
}

BurstDataset make_modal_bursts(ModalPde pde, const BurstSpec& spec, const Box& domain,
                               std::uint64_t seed) {
  const Box box = domain.lo.size() == 0 ? modal_default_domain(pde) : domain;
  if (box.empty() || box.dim() != modal_dim(pde)) {
    throw DomainError(to_string(pde) + ": coefficient domain is empty or has the wrong size");
  }
  auto flow = [pde](const Vector& v, double t) { return modal_reference_evolve(pde, v, t); };
  auto sample = [&box](Rng& rng) { return box.sample(rng); };
  BurstDataset ds = make_bursts_with(modal_dim(pde), spec, sample, flow, seed);
  ds.provenance.system = to_string(pde);
  ds.provenance.basis = modal_basis(pde).name;
  return ds;
}

}  // namespace deeposg
