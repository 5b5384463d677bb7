#include "edp/dp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edp::dp {

namespace {

void check_dims(int n, int m, int delta) {
    if (n < 3) throw std::invalid_argument("dp: need at least 3 lines");
    if (m < 2) throw std::invalid_argument("dp: need at least 2 points per line");
    if (delta < 1 || delta >= m) throw std::invalid_argument("dp: delta must satisfy 1 <= delta < M");
}

// Radial derivative with the inner boundary clamped: d(n,1) = 0.
inline double deriv(const double* g, int n, int i, int m, double sign) {
    if (i == 1) return 0.0;
    const double* line = g + static_cast<size_t>(n) * m;
    return sign * (line[i - 1] - line[i - 2]);
}

}  // namespace

EnergyTable build_energy(const std::vector<double>& g, int num_lines, int points_per_line,
                         int delta, EdgePolarity polarity) {
    check_dims(num_lines, points_per_line, delta);
    if (g.size() != static_cast<size_t>(num_lines) * points_per_line)
        throw std::invalid_argument("build_energy: g size mismatch");
    const double sign = polarity == EdgePolarity::Negated ? -1.0 : 1.0;
    const int m = points_per_line;

    EnergyTable t;
    t.num_lines = num_lines;
    t.points_per_line = m;
    t.delta = delta;
    t.e.assign(static_cast<size_t>(num_lines) * m * m, kInf);
    for (int n = 0; n < num_lines; ++n) {
        int nn = (n + 1) % num_lines;
        for (int i = 1; i <= m; ++i) {
            double di = deriv(g.data(), n, i, m, sign);
            double* row = t.e.data() + (static_cast<size_t>(n) * m + (i - 1)) * m;
            int jlo = std::max(1, i - delta), jhi = std::min(m, i + delta);
            for (int j = jlo; j <= jhi; ++j)
                row[j - 1] = di + deriv(g.data(), nn, j, m, sign);
        }
    }
    return t;
}

DpResult dp_solve(const std::vector<double>& g, int num_lines, int points_per_line, int delta,
                  EdgePolarity polarity) {
    EnergyTable E = build_energy(g, num_lines, points_per_line, delta, polarity);
    const int N = num_lines, M = points_per_line;
    const size_t mm = static_cast<size_t>(M) * M;

    // U keeps only two stage slabs; I is kept whole for the backtrack.
    std::vector<double> u_prev(mm), u_cur(mm);
    std::vector<std::int32_t> idx(static_cast<size_t>(N - 1) * mm);

    for (int n = 0; n < N - 1; ++n) {
        const double* e_next = E.e.data() + static_cast<size_t>(n + 1) * mm;
        std::int32_t* stage_idx = idx.data() + static_cast<size_t>(n) * mm;
        for (int i = 1; i <= M; ++i) {
            const double* left = (n == 0) ? E.e.data() + static_cast<size_t>(i - 1) * M
                                          : u_prev.data() + static_cast<size_t>(i - 1) * M;
            for (int k = 1; k <= M; ++k) {
                double best = kInf;
                int best_j = 1;
                for (int j = 1; j <= M; ++j) {
                    double s = sat_add(left[j - 1], e_next[static_cast<size_t>(j - 1) * M + (k - 1)]);
                    if (s < best) {
                        best = s;
                        best_j = j;
                    }
                }
                u_cur[static_cast<size_t>(i - 1) * M + (k - 1)] = best;
                stage_idx[static_cast<size_t>(i - 1) * M + (k - 1)] = best_j;
            }
        }
        std::swap(u_prev, u_cur);
    }

    double best = kInf;
    int v1 = 1;
    for (int j = 1; j <= M; ++j) {
        double c = u_prev[static_cast<size_t>(j - 1) * M + (j - 1)];
        if (c < best) {
            best = c;
            v1 = j;
        }
    }
    if (best >= kInf) throw NumericalError("dp_solve: no finite closed contour");

    DpResult r;
    r.cost = best;
    r.indices.v.assign(static_cast<size_t>(N), 1);
    r.indices.v[0] = v1;
    r.indices.v[static_cast<size_t>(N - 1)] =
        idx[(static_cast<size_t>(N - 2) * M + (v1 - 1)) * M + (v1 - 1)];
    for (int n = N - 1; n >= 2; --n) {
        int next = r.indices.v[static_cast<size_t>(n)];
        r.indices.v[static_cast<size_t>(n - 1)] =
            idx[(static_cast<size_t>(n - 2) * M + (v1 - 1)) * M + (next - 1)];
    }
    return r;
}

double contour_cost(const std::vector<double>& g, const ContourIndices& v, int num_lines,
                    int points_per_line, int delta, EdgePolarity polarity) {
    EnergyTable E = build_energy(g, num_lines, points_per_line, delta, polarity);
    if (v.size() != num_lines) throw std::invalid_argument("contour_cost: wrong index count");
    // Same left-to-right association as the dp_solve recurrence.
    double acc = 0.0;
    for (int n = 0; n < num_lines; ++n) {
        int i = v.v[static_cast<size_t>(n)];
        int j = v.v[static_cast<size_t>((n + 1) % num_lines)];
        if (i < 1 || i > points_per_line || j < 1 || j > points_per_line)
            throw std::invalid_argument("contour_cost: index out of range");
        acc = sat_add(acc, E.at(n, i, j));
    }
    return acc >= kInf ? std::numeric_limits<double>::infinity() : acc;
}

DpResult brute_force_solve(const std::vector<double>& g, int num_lines, int points_per_line,
                           int delta, EdgePolarity polarity) {
    check_dims(num_lines, points_per_line, delta);
    double combos = std::pow(static_cast<double>(points_per_line), num_lines);
    if (combos > 1e7) throw std::invalid_argument("brute_force_solve: instance too large (M^N > 1e7)");
    EnergyTable E = build_energy(g, num_lines, points_per_line, delta, polarity);

    const int N = num_lines, M = points_per_line;
    std::vector<int> v(static_cast<size_t>(N), 1);
    DpResult best;
    best.cost = kInf;
    // lexicographic enumeration; strictly-better keeps the first (smallest) optimum
    for (;;) {
        double acc = 0.0;
        for (int n = 0; n < N && acc < kInf; ++n)
            acc = sat_add(acc, E.at(n, v[static_cast<size_t>(n)], v[static_cast<size_t>((n + 1) % N)]));
        if (acc < best.cost) {
            best.cost = acc;
            best.indices.v = v;
        }
        int pos = N - 1;
        while (pos >= 0 && v[static_cast<size_t>(pos)] == M) {
            v[static_cast<size_t>(pos)] = 1;
            --pos;
        }
        if (pos < 0) break;
        ++v[static_cast<size_t>(pos)];
    }
    if (best.cost >= kInf) throw NumericalError("brute_force_solve: no finite closed contour");
    return best;
}

ContourIndices smooth_indices(const ContourIndices& v, int window, int points_per_line) {
    if (window < 1 || window % 2 == 0)
        throw std::invalid_argument("smooth_indices: window must be odd and >= 1");
    const int n = v.size();
    ContourIndices out;
    out.v.resize(static_cast<size_t>(n));
    const int half = window / 2;
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = -half; k <= half; ++k) acc += v.v[static_cast<size_t>(((i + k) % n + n) % n)];
        int r = static_cast<int>(std::floor(acc / window + 0.5));  // round half up
        out.v[static_cast<size_t>(i)] = std::clamp(r, 1, points_per_line);
    }
    return out;
}

}  // namespace edp::dp
