#include "fbp/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "fbp/quadrature.hpp"

namespace fbp {

bool ValidationReport::all_passed() const {
    for (const auto& it : items)
        if (!it.passed) return false;
    return true;
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    for (const auto& it : items)
        os << (it.passed ? "[pass] " : "[FAIL] ") << it.hypothesis
           << (it.detail.empty() ? "" : " - " + it.detail) << "\n";
    return os.str();
}

Nonlinearity cubic_nonlinearity() {
    Nonlinearity n;
    n.name = "cubic";
    n.phi = [](double u) { return ((u - 3.0) * u + 2.5) * u; };
    n.dphi = [](double u) { return (3.0 * u - 6.0) * u + 2.5; };
    const double d = std::sqrt(6.0) / 6.0;
    n.u_minus = 1.0 - d;
    n.u_plus = 1.0 + d;
    n.phi_at_uminus = n.phi(n.u_minus);
    n.phi_at_uplus = n.phi(n.u_plus);
    n.primitive = [](double u) { return ((0.25 * u - 1.0) * u + 1.25) * u * u; };
    return n;
}

Nonlinearity perona_malik_nonlinearity() {
    Nonlinearity n;
    n.name = "perona-malik";
    n.phi = [](double u) { return u / (1.0 + u * u); };
    n.dphi = [](double u) {
        double q = 1.0 + u * u;
        return (1.0 - u * u) / (q * q);
    };
    n.u_minus = 1.0;
    n.u_plus = std::numeric_limits<double>::infinity();
    n.phi_at_uminus = 0.5;
    n.phi_at_uplus = 0.0;
    n.primitive = [](double u) { return 0.5 * std::log1p(u * u); };
    return n;
}

namespace {

// Natural cubic spline with linear extrapolation beyond the table ends.
struct Spline {
    std::vector<double> x, y, m;  // m = second derivatives at knots

    static std::shared_ptr<Spline> fit(std::vector<double> xs, std::vector<double> ys) {
        auto s = std::make_shared<Spline>();
        s->x = std::move(xs);
        s->y = std::move(ys);
        const int n = static_cast<int>(s->x.size());
        s->m.assign(n, 0.0);
        std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), r(n, 0.0);
        b[0] = b[n - 1] = 1.0;
        for (int i = 1; i < n - 1; ++i) {
            double h0 = s->x[i] - s->x[i - 1], h1 = s->x[i + 1] - s->x[i];
            a[i] = h0 / 6.0;
            b[i] = (h0 + h1) / 3.0;
            c[i] = h1 / 6.0;
            r[i] = (s->y[i + 1] - s->y[i]) / h1 - (s->y[i] - s->y[i - 1]) / h0;
        }
        for (int i = 1; i < n; ++i) {  // Thomas elimination
            double w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            r[i] -= w * r[i - 1];
        }
        s->m[n - 1] = r[n - 1] / b[n - 1];
        for (int i = n - 2; i >= 0; --i) s->m[i] = (r[i] - c[i] * s->m[i + 1]) / b[i];
        return s;
    }

    int segment(double t) const {
        int n = static_cast<int>(x.size());
        auto it = std::upper_bound(x.begin(), x.end(), t);
        int k = static_cast<int>(it - x.begin()) - 1;
        return std::clamp(k, 0, n - 2);
    }

    double eval(double t) const {
        const int n = static_cast<int>(x.size());
        if (t <= x.front()) return y.front() + deriv_at_knot(0) * (t - x.front());
        if (t >= x.back()) return y.back() + deriv_at_knot(n - 1) * (t - x.back());
        int k = segment(t);
        double h = x[k + 1] - x[k], A = (x[k + 1] - t) / h, B = (t - x[k]) / h;
        return A * y[k] + B * y[k + 1] +
               ((A * A * A - A) * m[k] + (B * B * B - B) * m[k + 1]) * h * h / 6.0;
    }

    double deriv(double t) const {
        const int n = static_cast<int>(x.size());
        if (t <= x.front()) return deriv_at_knot(0);
        if (t >= x.back()) return deriv_at_knot(n - 1);
        int k = segment(t);
        double h = x[k + 1] - x[k], A = (x[k + 1] - t) / h, B = (t - x[k]) / h;
        return (y[k + 1] - y[k]) / h +
               (-(3.0 * A * A - 1.0) * m[k] + (3.0 * B * B - 1.0) * m[k + 1]) * h / 6.0;
    }

    double deriv_at_knot(int k) const {
        const int n = static_cast<int>(x.size());
        if (k < n - 1) {
            double h = x[k + 1] - x[k];
            return (y[k + 1] - y[k]) / h - (2.0 * m[k] + m[k + 1]) * h / 6.0;
        }
        double h = x[k] - x[k - 1];
        return (y[k] - y[k - 1]) / h + (m[k - 1] + 2.0 * m[k]) * h / 6.0;
    }

    // Exact integral of the piecewise cubic over [x[k], t] for t in segment k.
    double segment_integral(int k, double t) const {
        double h = x[k + 1] - x[k], A = (x[k + 1] - t) / h, B = (t - x[k]) / h;
        double IA = h * (1.0 - A * A) / 2.0;  // int of A over [x_k, t]
        double IB = h * B * B / 2.0;
        double IA3 = h * (1.0 - A * A * A * A) / 4.0;
        double IB3 = h * B * B * B * B / 4.0;
        return y[k] * IA + y[k + 1] * IB +
               ((IA3 - IA) * m[k] + (IB3 - IB) * m[k + 1]) * h * h / 6.0;
    }

    // int_0^t of the extended spline.
    double primitive(double t) const {
        auto anti = [&](double s) -> double {
            const int n = static_cast<int>(x.size());
            if (s <= x.front()) {
                double d = s - x.front(), sl = deriv_at_knot(0);
                return y.front() * d + 0.5 * sl * d * d;  // relative to x.front()
            }
            double acc = 0.0;
            int k = 0;
            while (k < n - 1 && x[k + 1] <= s) {
                acc += segment_integral(k, x[k + 1]);
                ++k;
            }
            if (k < n - 1)
                acc += segment_integral(k, s);
            else {
                double d = s - x.back(), sl = deriv_at_knot(n - 1);
                acc += y.back() * d + 0.5 * sl * d * d;
            }
            return acc;  // relative to x.front()
        };
        return anti(t) - anti(0.0);
    }
};

}  // namespace

Nonlinearity nonlinearity_from_table(const std::string& path, double u_minus, double u_plus) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("phi table: cannot open " + path);
    std::string header;
    std::getline(in, header);
    if (header.find("# phi-table v1") != 0)
        throw std::invalid_argument("phi table: missing '# phi-table v1' header in " + path);
    std::vector<double> xs, ys;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        double u, v;
        if (!(ls >> u >> v)) throw std::invalid_argument("phi table: bad line '" + line + "'");
        xs.push_back(u);
        ys.push_back(v);
    }
    if (xs.size() < 16) throw std::invalid_argument("phi table: need at least 16 points");
    for (size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1]))
            throw std::invalid_argument("phi table: u column must be strictly increasing");
    if (!(u_minus > 0.0) || !(u_plus > u_minus))
        throw std::invalid_argument("phi table: need 0 < u_minus < u_plus");

    auto sp = Spline::fit(std::move(xs), std::move(ys));
    Nonlinearity n;
    n.name = "custom:" + path;
    n.phi = [sp](double u) { return sp->eval(u); };
    n.dphi = [sp](double u) { return sp->deriv(u); };
    n.u_minus = u_minus;
    n.u_plus = u_plus;
    n.phi_at_uminus = n.phi(u_minus);
    n.phi_at_uplus = std::isfinite(u_plus) ? n.phi(u_plus) : 0.0;
    n.primitive = [sp](double u) { return sp->primitive(u); };
    return n;
}

ValidationReport validate_hypotheses(const Nonlinearity& n, int samples) {
    if (samples < 100) throw std::invalid_argument("validate_hypotheses: need samples >= 100");
    ValidationReport rep;
    auto add = [&](const std::string& h, bool ok, const std::string& d = "") {
        rep.items.push_back({h, ok, d});
    };
    std::ostringstream det;

    add("0 < u_minus < u_plus", n.u_minus > 0.0 && n.u_plus > n.u_minus);
    add("phi(0) = 0", std::abs(n.phi(0.0)) <= 1e-12);

    const bool inf_up = !n.finite_uplus();
    const double spin_hi = inf_up ? 100.0 * std::max(1.0, n.u_minus) : n.u_plus;

    bool nonneg = true;
    double bad_x = 0.0;
    const double range_hi = inf_up ? 10.0 * spin_hi : 2.0 * n.u_plus;
    for (int k = 0; k <= samples; ++k) {
        double x = range_hi * k / samples;
        if (n.phi(x) < -1e-12) {
            nonneg = false;
            bad_x = x;
            break;
        }
    }
    det.str("");
    if (!nonneg) det << "phi(" << bad_x << ") < 0";
    add("phi >= 0 on [0,inf)", nonneg, det.str());

    auto sign_on = [&](double lo, double hi, int want) {
        for (int k = 1; k < samples; ++k) {
            double x = lo + (hi - lo) * k / samples;
            double d = n.dphi(x);
            if (want > 0 && !(d > 0.0)) return x;
            if (want < 0 && !(d < 0.0)) return x;
        }
        return std::numeric_limits<double>::quiet_NaN();
    };
    double w = sign_on(0.0, n.u_minus, +1);
    det.str("");
    if (!std::isnan(w)) det << "dphi(" << w << ") <= 0";
    add("dphi > 0 on (0,u_minus)", std::isnan(w), det.str());

    w = sign_on(n.u_minus, spin_hi, -1);
    det.str("");
    if (!std::isnan(w)) det << "dphi(" << w << ") >= 0";
    add("dphi < 0 on (u_minus,u_plus)", std::isnan(w), det.str());

    if (!inf_up) {
        w = sign_on(n.u_plus, 2.0 * n.u_plus, +1);
        det.str("");
        if (!std::isnan(w)) det << "dphi(" << w << ") <= 0";
        add("dphi > 0 on (u_plus,inf)", std::isnan(w), det.str());
    } else {
        // tail decay: phi small far out
        bool tail_ok = true;
        double worst = 0.0;
        for (int k = 0; k <= samples; ++k) {
            double x = spin_hi + 9.0 * spin_hi * k / samples;
            worst = std::max(worst, n.phi(x));
        }
        tail_ok = worst <= 0.05 * n.phi_at_uminus;
        det.str("");
        det << "max tail value " << worst;
        add("phi -> 0 as u -> inf", tail_ok, det.str());
    }

    // C1 proxy: dphi consistent with a central difference of phi
    bool deriv_ok = true;
    double worst_rel = 0.0, worst_x = 0.0;
    const double hi_d = inf_up ? spin_hi : 2.0 * n.u_plus;
    for (int k = 1; k < samples; ++k) {
        double x = hi_d * k / samples;
        double h = 1e-6 * std::max(1.0, std::abs(x));
        double fd = (n.phi(x + h) - n.phi(x - h)) / (2.0 * h);
        double d = n.dphi(x);
        double rel = std::abs(fd - d) / std::max(1.0, std::abs(d));
        if (rel > worst_rel) {
            worst_rel = rel;
            worst_x = x;
        }
    }
    deriv_ok = worst_rel <= 1e-5;
    det.str("");
    det << "worst relative gap " << worst_rel << " at u = " << worst_x;
    add("dphi consistent with phi", deriv_ok, det.str());

    return rep;
}

void branch_range(const Nonlinearity& n, BranchId branch, double& lo, double& hi) {
    switch (branch) {
        case BranchId::S1:
            lo = 0.0;
            hi = n.phi_at_uminus;
            return;
        case BranchId::S2:
            lo = n.finite_uplus() ? n.phi_at_uplus : 0.0;  // open at 0 when u_plus = inf
            hi = n.phi_at_uminus;
            return;
        case BranchId::S3:
            lo = n.phi_at_uplus;
            hi = std::numeric_limits<double>::infinity();
            return;
    }
}

double branch_inverse(const Nonlinearity& n, BranchId branch, double v) {
    if (branch == BranchId::S3 && !n.finite_uplus())
        throw std::invalid_argument("branch_inverse: S3 is empty when u_plus = +inf");
    double rlo = 0.0, rhi = 0.0;
    branch_range(n, branch, rlo, rhi);
    const double tol_v = 1e-12 * std::max(1.0, std::abs(v));
    const bool open_at_zero = (branch == BranchId::S2 && !n.finite_uplus());
    if (v < rlo - tol_v || v > rhi + tol_v || (open_at_zero && v <= 0.0))
        throw std::domain_error("branch_inverse: level outside branch range");

    // bracket in u
    double lo, hi;
    bool increasing;
    switch (branch) {
        case BranchId::S1:
            lo = 0.0;
            hi = n.u_minus;
            increasing = true;
            break;
        case BranchId::S2:
            lo = n.u_minus;
            increasing = false;
            if (n.finite_uplus()) {
                hi = n.u_plus;
            } else {
                hi = 2.0 * std::max(1.0, n.u_minus);
                while (n.phi(hi) > v) {
                    hi *= 2.0;
                    if (hi > 1e12)
                        throw std::domain_error("branch_inverse: cannot bracket S2 level " +
                                                std::to_string(v));
                }
            }
            break;
        case BranchId::S3:
        default:
            lo = n.u_plus;
            increasing = true;
            hi = 2.0 * n.u_plus;
            while (n.phi(hi) < v) {
                hi *= 2.0;
                if (hi > 1e12)
                    throw std::domain_error("branch_inverse: cannot bracket S3 level " +
                                            std::to_string(v));
            }
            break;
    }

    double flo = n.phi(lo) - v, fhi = n.phi(hi) - v;
    if (std::abs(flo) <= tol_v) return lo;
    if (std::abs(fhi) <= tol_v) return hi;
    (void)increasing;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = n.phi(mid) - v;
        if (std::abs(fm) <= tol_v || 0.5 * (hi - lo) < 1e-16 * std::max(1.0, std::abs(mid))) {
            lo = hi = mid;
            break;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    double u = 0.5 * (lo + hi);
    for (int it = 0; it < 8; ++it) {  // Newton polish inside the bracket
        double f = n.phi(u) - v;
        if (std::abs(f) <= tol_v) break;
        double d = n.dphi(u);
        if (d == 0.0) break;
        double next = u - f / d;
        if (next < std::min(lo, hi) || next > std::max(lo, hi)) break;
        u = next;
    }
    return u;
}

double jump_probability(const Nonlinearity& n, double u, double scale) {
    if (!(u > 0.0))
        throw std::invalid_argument("jump_probability: defined for positive mass only");
    if (!(scale > 0.0)) throw std::invalid_argument("jump_probability: scale must be positive");
    return n.phi(u) / (scale * u);
}

double potential(const Nonlinearity& n, double u) {
    if (u < 0.0) throw std::domain_error("potential: u must be nonnegative");
    if (n.primitive) return n.primitive(u);
    return adaptive_simpson(n.phi, 0.0, u, 1e-12);
}

}  // namespace fbp
