#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace fbp {

// Non-monotone flux phi with turning points u_minus < u_plus.
// phi' > 0 on (0,u_minus) and (u_plus,inf), phi' < 0 on (u_minus,u_plus).
// u_plus = +inf marks the aggregation regime (phi -> 0 at infinity).
struct Nonlinearity {
    std::string name;
    std::function<double(double)> phi;
    std::function<double(double)> dphi;
    double u_minus = 0.0;
    double u_plus = std::numeric_limits<double>::infinity();
    double phi_at_uminus = 0.0;
    double phi_at_uplus = 0.0;  // 0 when u_plus = +inf

    // Optional closed form of V(u) = int_0^u phi; empty -> quadrature.
    std::function<double(double)> primitive;

    bool finite_uplus() const { return std::isfinite(u_plus); }
};

// phi(u) = u^3 - 3u^2 + 2.5u, turning points 1 -/+ sqrt(6)/6.
Nonlinearity cubic_nonlinearity();

// phi(u) = u/(1+u^2), u_minus = 1, u_plus = +inf.
Nonlinearity perona_malik_nonlinearity();

// Piecewise-cubic interpolant (natural spline) of a "# phi-table v1" file:
// lines "u value" with strictly increasing u, at least 16 points.
// Turning points are supplied by the caller and validated separately.
Nonlinearity nonlinearity_from_table(const std::string& path, double u_minus, double u_plus);

enum class BranchId { S1, S2, S3 };

struct ValidationItem {
    std::string hypothesis;
    bool passed;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationItem> items;
    bool all_passed() const;
    std::string summary() const;
};

// Checks the standing hypotheses on phi by dense sampling; never silently
// passes a violation (failures are reported, not thrown).
ValidationReport validate_hypotheses(const Nonlinearity& n, int samples);

// Closed range [lo,hi] of admissible levels for a branch inverse.
// For u_plus = +inf the S2 range is open at 0 and S3 is empty.
void branch_range(const Nonlinearity& n, BranchId branch, double& lo, double& hi);

// u in the branch interval with |phi(u) - v| <= 1e-12*max(1,|v|).
// Bracketed bisection refined by Newton. Throws std::domain_error when v is
// outside the branch range and std::invalid_argument for S3 with u_plus = inf.
double branch_inverse(const Nonlinearity& n, BranchId branch, double v);

// p(u) = phi(u)/(scale*u), the per-step jump fraction of the random-walk
// derivation. Throws for u <= 0 or scale <= 0.
double jump_probability(const Nonlinearity& n, double u, double scale);

// V(u) = int_0^u phi(s) ds; closed form when available, else adaptive
// quadrature with absolute tolerance 1e-12. Throws for u < 0.
double potential(const Nonlinearity& n, double u);

}  // namespace fbp
