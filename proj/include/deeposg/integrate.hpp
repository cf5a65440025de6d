#pragma once

#include <functional>

#include "deeposg/linalg.hpp"

namespace deeposg {

struct OdeSystem;

using RhsFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<Matrix(const Vector&)>;

/// Classical RK4 with fixed step tau; the last step is shortened to land on T.
/// Throws NumericError naming the time at which the state became non-finite.
Vector rk4_integrate(const RhsFn& rhs, const Vector& u0, double T, double tau);
Vector rk4_integrate(const OdeSystem& sys, const Vector& u0, double T, double tau);

struct StiffStats {
  long accepted = 0;
  long rejected = 0;
};

/// Backward Euler with Newton iterations and step-doubling error control.
/// Local error is measured as max_i |e_i| / (tol + tol |y_i|); steps halve on
/// rejection or Newton failure and grow by 1.5 after each accepted step. An
/// accepted step keeps the extrapolated value 2 y_half - y_full.
Vector stiff_integrate(const RhsFn& rhs, const JacobianFn& jacobian, const Vector& u0, double T,
                       double tol, StiffStats* stats = nullptr);
Vector stiff_integrate(const OdeSystem& sys, const Vector& u0, double T, double tol,
                       StiffStats* stats = nullptr);

/// Advances a state by a time lag with some reference method.
using FlowFn = std::function<Vector(const Vector&, double)>;

struct IntegratorSpec {
  enum class Kind { rk4, stiff } kind = Kind::rk4;
  double tau = 1e-3;
  double tol = 1e-8;
};

FlowFn make_flow(const OdeSystem& sys, const IntegratorSpec& spec);

}  // namespace deeposg
