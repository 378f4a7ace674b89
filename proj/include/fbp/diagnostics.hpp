#pragma once

#include <functional>
#include <vector>

#include "fbp/dynamics.hpp"
#include "fbp/grid.hpp"
#include "fbp/nonlinearity.hpp"

namespace fbp {

// Entropy pair: g nondecreasing C1, G(x) = int_0^x g(phi(tau)) dtau.
struct EntropyPair {
    std::function<double(double)> g;
    std::function<double(double)> dg;
};

// G(x) by adaptive quadrature of g o phi, absolute tolerance 1e-12.
double entropy_G(const Nonlinearity& n, const EntropyPair& pair, double x);

// Batch evaluation memoized over the value grid (repeated values hit a cache).
std::vector<double> entropy_G_values(const Nonlinearity& n, const EntropyPair& pair,
                                     const std::vector<double>& xs);

// Space-time test field with analytic time derivative. value(T, .) must
// vanish; nonnegative marks fields admissible for entropy inequalities.
struct TestFunction {
    double t_final = 1.0;
    std::function<double(double, double)> value;   // psi(t,x)
    std::function<double(double, double)> dt;      // analytic psi_t(t,x)
    bool nonnegative = false;

    // b(x)*(T-t)^p with a C-infinity spatial bump; psi(0,.) != 0 (pairs with
    // the initial-data term of the very weak form).
    static TestFunction separable_bump(double T, double power, double center, double width);

    // b(x)*tau(t) with tau a C-infinity bump vanishing at both t=0 and t=T;
    // the admissible family for entropy inequalities.
    static TestFunction space_time_bump(double T, double center, double width);
};

// L(u) = eps * sum_i V(u_i), V(u) = int_0^u phi. Throws on negative entries.
double lyapunov(const Nonlinearity& n, const GridFunction& u);

// Max interior-node discrepancy between G(u)_t = g(phi(u)) * rhs(u) and
// div-(g(phi(u)) D+ phi(u)) - D- g(phi(u)) * D- phi(u).
// The identity is algebraic, so the result is roundoff-sized for any u.
double entropy_identity_residual(const Nonlinearity& n, const EntropyPair& pair,
                                 const GridFunction& u);

// Space-time quadrature of
//   G(u) psi_t - g(phi(u)) (D+ phi(u)) (D+ psi) - (D- g(phi(u))) (D- phi(u)) psi
// over the trajectory samples. The correction term keeps the exact
// difference-quotient form of the discrete entropy balance, so for
// admissible psi (>= 0, vanishing at both time endpoints) the result is
// >= -O(time quadrature).
double entropy_inequality_residual(const Nonlinearity& n, const EntropyPair& pair,
                                   const Trajectory& traj, const TestFunction& psi);

// Discrete residual of the very weak form:
//   int_0^T <u, psi_t> + <phi(u), Lap psi> dt + <u0, psi(0,.)>.
// First-order small in the time step for smooth psi with psi(T,.) = 0.
double weak_residual(const Nonlinearity& n, const Trajectory& traj, const TestFunction& psi);

// (1 + ||u0||_1) * (1 + max|g| over the phi-range); the scale entering the
// diagnostics tolerances. Pass nullptr for pair to drop the g factor.
double diagnostic_scale(const Nonlinearity& n, const GridFunction& u0, const EntropyPair* pair);

}  // namespace fbp
