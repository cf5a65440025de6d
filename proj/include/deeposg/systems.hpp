#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "deeposg/linalg.hpp"
#include "deeposg/loss.hpp"

namespace deeposg {

class Rng;

/// Autonomous system du/dt = f(u) with its Jacobian and state domain.
struct OdeSystem {
  std::string name;
  int dim = 0;
  std::function<Vector(const Vector&)> rhs;
  std::function<Matrix(const Vector&)> jacobian;
  /// Bounding box of the state domain.
  Box box;
  /// Extra membership test for non-box domains; empty means the box itself.
  std::function<bool(const Vector&)> inside;
  std::map<std::string, double> parameters;
  /// Global Lipschitz constant of f when known, else 0.
  double lipschitz = 0.0;
  bool stiff = false;

  bool contains(const Vector& u) const;
  /// Uniform over the domain (rejection from the bounding box when needed).
  Vector sample_state(Rng& rng) const;
};

/// Registered names: linear, periodic_attractor, damped_pendulum, robertson,
/// glycolytic, heat_nodal.
OdeSystem make_system(const std::string& name);
std::vector<std::string> system_names();

/// Robertson states are sampled on the mass-conserving slice u1 + u2 + u3 = 1.
Vector sample_robertson_state(const OdeSystem& sys, Rng& rng);

/// Closed-form flow of the linear system: (1,1) + e^{-3t} (I + tN)(u0 - (1,1)).
Vector linear_exact_flow(const Vector& u0, double t);
/// The system matrix [[1,-4],[4,-7]].
Matrix linear_system_matrix();

}  // namespace deeposg
