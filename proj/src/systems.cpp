#include "deeposg/systems.hpp"

#include <cmath>

#include "deeposg/error.hpp"
#include "deeposg/rng.hpp"

namespace deeposg {

namespace {

Box make_box(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  Box b;
  b.lo = Vector::Map(lo.begin(), static_cast<Eigen::Index>(lo.size()));
  b.hi = Vector::Map(hi.begin(), static_cast<Eigen::Index>(hi.size()));
  return b;
}

OdeSystem linear() {
  OdeSystem s;
  s.name = "linear";
  s.dim = 2;
  s.rhs = [](const Vector& u) {
    Vector f(2);
    f << u(0) - 4.0 * u(1) + 3.0, 4.0 * u(0) - 7.0 * u(1) + 3.0;
    return f;
  };
  s.jacobian = [](const Vector&) { return linear_system_matrix(); };
  s.box = make_box({0.0, 0.0}, {2.0, 2.0});
  Eigen::JacobiSVD<Matrix> svd(linear_system_matrix());
  s.lipschitz = svd.singularValues()(0);
  return s;
}

OdeSystem periodic_attractor() {
  OdeSystem s;
  s.name = "periodic_attractor";
  s.dim = 2;
  s.rhs = [](const Vector& u) {
    const double r = u(0) * u(0) + u(1) * u(1) - 1.0;
    Vector f(2);
    f << u(1) - u(0) * r, -u(0) - u(1) * r;
    return f;
  };
  s.jacobian = [](const Vector& u) {
    const double r = u(0) * u(0) + u(1) * u(1) - 1.0;
    Matrix j(2, 2);
    j << -r - 2.0 * u(0) * u(0), 1.0 - 2.0 * u(0) * u(1),
        -1.0 - 2.0 * u(0) * u(1), -r - 2.0 * u(1) * u(1);
    return j;
  };
  s.box = make_box({-2.0, -2.0}, {2.0, 2.0});
  return s;
}

OdeSystem damped_pendulum() {
  const double alpha = 0.2;
  const double beta = 9.8;
  const double length = 1.0;
  OdeSystem s;
  s.name = "damped_pendulum";
  s.dim = 2;
  s.parameters = {{"alpha", alpha}, {"beta", beta}, {"length", length}};
  s.rhs = [=](const Vector& u) {
    Vector f(2);
    f << u(1), -alpha * u(1) - beta * std::sin(u(0));
    return f;
  };
  s.jacobian = [=](const Vector& u) {
    Matrix j(2, 2);
    j << 0.0, 1.0, -beta * std::cos(u(0)), -alpha;
    return j;
  };
  const double pi = 3.14159265358979323846;
  s.box = make_box({-pi, -2.0 * pi}, {pi, 2.0 * pi});
  s.inside = [=](const Vector& u) {
    if (std::abs(u(0)) > pi) return false;
    const double cap = std::min(2.0 * pi, std::sqrt(2.0 * beta * length * (1.0 + std::cos(u(0)))));
    return std::abs(u(1)) <= cap;
  };
  double lip = 0.0;
  for (double c : {-1.0, 1.0}) {
    Matrix j(2, 2);
    j << 0.0, 1.0, -beta * c, -alpha;
    Eigen::JacobiSVD<Matrix> svd(j);
    lip = std::max(lip, svd.singularValues()(0));
  }
  s.lipschitz = lip;
  return s;
}

OdeSystem robertson() {
  const double k1 = 0.04, k2 = 1e4, k3 = 3e7;
  OdeSystem s;
  s.name = "robertson";
  s.dim = 3;
  s.stiff = true;
  s.parameters = {{"k1", k1}, {"k2", k2}, {"k3", k3}};
  s.rhs = [=](const Vector& u) {
    Vector f(3);
    f << -k1 * u(0) + k2 * u(1) * u(2), k1 * u(0) - k2 * u(1) * u(2) - k3 * u(1) * u(1),
        k3 * u(1) * u(1);
    return f;
  };
  s.jacobian = [=](const Vector& u) {
    Matrix j(3, 3);
    j << -k1, k2 * u(2), k2 * u(1),
        k1, -k2 * u(2) - 2.0 * k3 * u(1), -k2 * u(1),
        0.0, 2.0 * k3 * u(1), 0.0;
    return j;
  };
  s.box = make_box({0.0, 0.0, 0.0}, {1.0, 1e-4, 1.0});
  return s;
}

OdeSystem glycolytic() {
  const double J0 = 2.5, k1 = 100, k2 = 6, k3 = 16, k4 = 100, k5 = 1.28, k6 = 12, k = 1.8,
               kappa = 13, q = 4, K1 = 0.52, psi = 0.1, N = 1, A = 4;
  OdeSystem s;
  s.name = "glycolytic";
  s.dim = 7;
  s.parameters = {{"J0", J0}, {"k1", k1}, {"k2", k2}, {"k3", k3},   {"k4", k4},
                  {"k5", k5}, {"k6", k6}, {"k", k},   {"kappa", kappa}, {"q", q},
                  {"K1", K1}, {"psi", psi}, {"N", N}, {"A", A}};
  s.rhs = [=](const Vector& u) {
    const double den = 1.0 + std::pow(u(5) / K1, q);
    const double r = k1 * u(0) * u(5) / den;
    Vector f(7);
    f(0) = J0 - r;
    f(1) = 2.0 * r - k2 * u(1) * (N - u(4)) - k6 * u(1) * u(4);
    f(2) = k2 * u(1) * (N - u(4)) - k3 * u(2) * (A - u(5));
    f(3) = k3 * u(2) * (A - u(5)) - k4 * u(3) * u(4) - kappa * (u(3) - u(6));
    f(4) = k2 * u(1) * (N - u(4)) - k4 * u(3) * u(4) - k6 * u(1) * u(4);
    f(5) = -2.0 * r + 2.0 * k3 * u(2) * (A - u(5)) - k5 * u(5);
    f(6) = psi * kappa * (u(3) - u(6)) - k * u(6);
    return f;
  };
  s.jacobian = [=](const Vector& u) {
    const double p = std::pow(u(5) / K1, q);
    const double den = 1.0 + p;
    const double r1 = k1 * u(5) / den;
    const double r6 = k1 * u(0) * (den - q * p) / (den * den);
    Matrix j = Matrix::Zero(7, 7);
    j(0, 0) = -r1;
    j(0, 5) = -r6;
    j(1, 0) = 2.0 * r1;
    j(1, 5) = 2.0 * r6;
    j(1, 1) = -k2 * (N - u(4)) - k6 * u(4);
    j(1, 4) = k2 * u(1) - k6 * u(1);
    j(2, 1) = k2 * (N - u(4));
    j(2, 4) = -k2 * u(1);
    j(2, 2) = -k3 * (A - u(5));
    j(2, 5) = k3 * u(2);
    j(3, 2) = k3 * (A - u(5));
    j(3, 5) = -k3 * u(2);
    j(3, 3) = -k4 * u(4) - kappa;
    j(3, 4) = -k4 * u(3);
    j(3, 6) = kappa;
    j(4, 1) = k2 * (N - u(4)) - k6 * u(4);
    j(4, 4) = -k2 * u(1) - k4 * u(3) - k6 * u(1);
    j(4, 3) = -k4 * u(4);
    j(5, 0) = -2.0 * r1;
    j(5, 5) = -2.0 * r6 - 2.0 * k3 * u(2) - k5;
    j(5, 2) = 2.0 * k3 * (A - u(5));
    j(6, 3) = psi * kappa;
    j(6, 6) = -psi * kappa - k;
    return j;
  };
  s.box = make_box({0.15, 0.19, 0.04, 0.1, 0.08, 0.14, 0.05},
                   {1.6, 2.16, 0.2, 0.35, 0.3, 2.67, 0.1});
  return s;
}

OdeSystem heat_nodal() {
  const int points = 16;
  const double nu = 0.1;
  const double h = 2.0 * 3.14159265358979323846 / points;
  const double c = nu / (h * h);
  OdeSystem s;
  s.name = "heat_nodal";
  s.dim = points;
  s.parameters = {{"nu", nu}, {"points", points}};
  s.rhs = [=](const Vector& u) {
    Vector f(points);
    for (int i = 0; i < points; ++i) {
      f(i) = c * (u((i + 1) % points) - 2.0 * u(i) + u((i + points - 1) % points));
    }
    return f;
  };
  s.jacobian = [=](const Vector&) {
    Matrix j = Matrix::Zero(points, points);
    for (int i = 0; i < points; ++i) {
      j(i, i) = -2.0 * c;
      j(i, (i + 1) % points) += c;
      j(i, (i + points - 1) % points) += c;
    }
    return j;
  };
  s.box.lo = Vector::Constant(points, -1.0);
  s.box.hi = Vector::Constant(points, 1.0);
  s.lipschitz = 4.0 * c;
  return s;
}

}  // namespace

bool OdeSystem::contains(const Vector& u) const {
  if (!box.contains(u)) return false;
  return inside ? inside(u) : true;
}

Vector OdeSystem::sample_state(Rng& rng) const {
  if (name == "robertson") return sample_robertson_state(*this, rng);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Vector u = box.sample(rng);
    if (!inside || inside(u)) return u;
  }
  throw DomainError(name + ": rejection sampling of the state domain failed");
}

Vector sample_robertson_state(const OdeSystem& sys, Rng& rng) {
  Vector u(3);
  u(1) = rng.uniform(sys.box.lo(1), sys.box.hi(1));
  u(0) = rng.uniform(0.0, 1.0 - u(1));
  u(2) = 1.0 - u(0) - u(1);
  return u;
}

OdeSystem make_system(const std::string& name) {
  if (name == "linear") return linear();
  if (name == "periodic_attractor") return periodic_attractor();
  if (name == "damped_pendulum") return damped_pendulum();
  if (name == "robertson") return robertson();
  if (name == "glycolytic") return glycolytic();
  if (name == "heat_nodal") return heat_nodal();
  throw ConfigError("unknown system '" + name + "'");
}

std::vector<std::string> system_names() {
  return {"linear", "periodic_attractor", "damped_pendulum", "robertson", "glycolytic",
          "heat_nodal"};
}

Matrix linear_system_matrix() {
  Matrix a(2, 2);
  a << 1.0, -4.0, 4.0, -7.0;
  return a;
}

Vector linear_exact_flow(const Vector& u0, double t) {
  Matrix nil(2, 2);
  nil << 4.0, -4.0, 4.0, -4.0;
  const Vector fixed = Vector::Ones(2);
  return fixed + std::exp(-3.0 * t) * ((Matrix::Identity(2, 2) + t * nil) * (u0 - fixed));
}

}  // namespace deeposg
