#include "fbp/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fbp {

double default_cutoff(int N, double u_minus) {
    return std::sqrt(static_cast<double>(N)) * std::max(1.0, u_minus);
}

int default_window(int N) {
    int w = std::max(3, N / 16);
    return w % 2 == 0 ? w + 1 : w;
}

std::vector<ValueHistogram> young_histogram(const GridFunction& u, int window_nodes, int bins,
                                            double cutoff) {
    if (window_nodes < 1 || window_nodes % 2 == 0)
        throw std::invalid_argument("young_histogram: window_nodes must be odd and >= 1");
    if (bins < 2) throw std::invalid_argument("young_histogram: need bins >= 2");
    if (!(cutoff > 0.0)) throw std::invalid_argument("young_histogram: cutoff must be positive");

    const int N = u.domain.n_intervals;
    const int half = window_nodes / 2;
    std::vector<ValueHistogram> out;
    out.reserve(N + 1);

    std::vector<double> edges(bins + 1);
    for (int b = 0; b <= bins; ++b) edges[b] = cutoff * b / bins;

    for (int i = 0; i <= N; ++i) {
        ValueHistogram h;
        h.center_x = u.domain.x(i);
        h.radius = half * u.domain.spacing;
        h.edges = edges;
        h.weights.assign(bins, 0.0);
        const int lo = std::max(0, i - half), hi = std::min(N, i + half);
        const int count = hi - lo + 1;
        int above = 0;
        for (int j = lo; j <= hi; ++j) {
            if (u[j] > cutoff) {
                ++above;
                continue;
            }
            int b = static_cast<int>(std::floor(u[j] / cutoff * bins));
            b = std::clamp(b, 0, bins - 1);
            h.weights[b] += 1.0 / count;
        }
        h.deficit = static_cast<double>(above) / count;
        out.push_back(std::move(h));
    }
    return out;
}

MeasureDecomposition decompose(const GridFunction& u, double u0_mass, double cutoff) {
    if (!(cutoff > 0.0)) throw std::invalid_argument("decompose: cutoff must be positive");
    MeasureDecomposition d;
    d.regular_part = GridFunction(u.domain, 0.0);
    double sing_sum = 0.0;
    for (int i = 0; i < u.size(); ++i) {
        if (u[i] > cutoff) {
            d.singular_sites.push_back(i);
            sing_sum += u[i];
        } else {
            d.regular_part[i] = u[i];
        }
    }
    d.singular_mass = u.domain.spacing * sing_sum;
    if (sing_sum > 0.0) {
        d.mu_tilde.reserve(d.singular_sites.size());
        for (int i : d.singular_sites) d.mu_tilde.push_back(u[i] / sing_sum);
    }
    d.disintegration_factor = u0_mass - grid_integral(d.regular_part);
    return d;
}

std::vector<double> coarsening_indicator(const Trajectory& traj, double u0_mass, double cutoff) {
    std::vector<double> s;
    s.reserve(traj.n_samples());
    for (int j = 0; j < traj.n_samples(); ++j) {
        double sing = 0.0;
        for (double v : traj.states[j])
            if (v > cutoff) sing += v;
        s.push_back(traj.domain.spacing * sing / u0_mass);
    }
    return s;
}

bool coarsening_trend_consistent(const std::vector<double>& s, int skip_samples, double slack) {
    for (size_t j = std::max(1, skip_samples + 1); j < s.size(); ++j)
        if (s[j] < s[j - 1] - slack) return false;
    return true;
}

}  // namespace fbp
