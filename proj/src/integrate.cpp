#include "deeposg/integrate.hpp"

#include <cmath>
#include <sstream>

#include "deeposg/error.hpp"
#include "deeposg/systems.hpp"

namespace deeposg {

namespace {

std::string time_string(double t) {
  std::ostringstream os;
  os.precision(17);
  os << t;
  return os.str();
}

double error_norm(const Vector& err, const Vector& y, double tol) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    worst = std::max(worst, std::abs(err(i)) / (tol + tol * std::abs(y(i))));
  }
  return worst;
}

/// Solves z = y + h f(z). Returns false when Newton does not converge.
bool backward_euler_step(const RhsFn& rhs, const JacobianFn& jacobian, const Vector& y, double h,
                         double tol, Vector& z) {
  const Eigen::Index n = y.size();
  z = y + h * rhs(y);
  if (!z.allFinite()) z = y;
  const Matrix eye = Matrix::Identity(n, n);
  for (int iter = 0; iter < 12; ++iter) {
    const Vector g = z - y - h * rhs(z);
    Eigen::PartialPivLU<Matrix> lu(eye - h * jacobian(z));
    const Vector dz = lu.solve(g);
    if (!dz.allFinite()) return false;
    z -= dz;
    if (error_norm(dz, z, tol) <= 1e-3) return z.allFinite();
  }
  return false;
}

}  // namespace

Vector rk4_integrate(const RhsFn& rhs, const Vector& u0, double T, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("rk4: step must be positive");
  if (!(T >= 0.0) || !std::isfinite(T)) throw DomainError("rk4: horizon must be >= 0");
  Vector u = u0;
  const long steps = static_cast<long>(std::ceil(T / tau * (1.0 - 1e-12)));
  for (long s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) * tau;
    const double h = (s + 1 == steps) ? T - t : tau;
    const Vector k1 = rhs(u);
    const Vector k2 = rhs(u + 0.5 * h * k1);
    const Vector k3 = rhs(u + 0.5 * h * k2);
    const Vector k4 = rhs(u + h * k3);
    u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!u.allFinite()) {
      throw NumericError("rk4: state diverged at t = " + time_string(t + h));
    }
  }
  return u;
}

Vector rk4_integrate(const OdeSystem& sys, const Vector& u0, double T, double tau) {
  return rk4_integrate(sys.rhs, u0, T, tau);
}

Vector stiff_integrate(const RhsFn& rhs, const JacobianFn& jacobian, const Vector& u0, double T,
                       double tol, StiffStats* stats) {
  if (!(tol > 0.0)) throw DomainError("stiff: tolerance must be positive");
  if (!(T >= 0.0) || !std::isfinite(T)) throw DomainError("stiff: horizon must be >= 0");
  if (!jacobian) throw DomainError("stiff: Jacobian required");
  Vector y = u0;
  double t = 0.0;
  double h = std::min(T, 1e-6);
  const double h_min = 1e-15 * std::max(1.0, T);
  Vector full, half, two;
  while (t < T) {
    if (T - t < h) h = T - t;
    if (h < h_min && T - t > h_min) {
      throw NumericError("stiff: step size underflow at t = " + time_string(t));
    }
    bool ok = backward_euler_step(rhs, jacobian, y, h, tol, full) &&
              backward_euler_step(rhs, jacobian, y, 0.5 * h, tol, half) &&
              backward_euler_step(rhs, jacobian, half, 0.5 * h, tol, two);
    if (ok && error_norm(two - full, two, tol) <= 1.0) {
      const bool last = (t + h >= T);
      t = last ? T : t + h;
      y = 2.0 * two - full;
      if (stats) ++stats->accepted;
      h *= 1.5;
    } else {
      if (stats) ++stats->rejected;
      if (h <= h_min) {
        throw NumericError("stiff: Newton failed at minimum step, t = " + time_string(t));
      }
      h *= 0.5;
    }
  }
  return y;
}

Vector stiff_integrate(const OdeSystem& sys, const Vector& u0, double T, double tol,
                       StiffStats* stats) {
  return stiff_integrate(sys.rhs, sys.jacobian, u0, T, tol, stats);
}

FlowFn make_flow(const OdeSystem& sys, const IntegratorSpec& spec) {
  if (spec.kind == IntegratorSpec::Kind::stiff) {
    const double tol = spec.tol;
    return [sys, tol](const Vector& u, double t) { return stiff_integrate(sys, u, t, tol); };
  }
  const double tau = spec.tau;
  return [sys, tau](const Vector& u, double t) { return rk4_integrate(sys, u, t, tau); };
}

}  // namespace deeposg
