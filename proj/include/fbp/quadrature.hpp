#pragma once

#include <cmath>
#include <functional>

namespace fbp {

// Adaptive Simpson on [a,b] with absolute tolerance tol.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol) {
    auto simpson = [&](double lo, double hi, double flo, double fmid, double fhi) {
        return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    };
    struct Rec {
        double a, b, fa, fm, fb, whole;
        int depth;
    };
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = simpson(a, b, fa, fm, fb);

    std::function<double(double, double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fmid, double fhi, double acc, double eps,
            int depth) -> double {
        double m = 0.5 * (lo + hi);
        double fl = f(0.5 * (lo + m)), fr = f(0.5 * (m + hi));
        double left = simpson(lo, m, flo, fl, fmid);
        double right = simpson(m, hi, fmid, fr, fhi);
        double delta = left + right - acc;
        if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
        return rec(lo, m, flo, fl, fmid, left, eps / 2.0, depth - 1) +
               rec(m, hi, fmid, fr, fhi, right, eps / 2.0, depth - 1);
    };
    return rec(a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace fbp
