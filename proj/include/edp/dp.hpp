#pragma once

#include <limits>
#include <vector>

#include "edp/star.hpp"

namespace edp::dp {

// Sign convention of the edge energy. AsPrinted minimizes the summed radial
// derivatives of g directly (selects the strongest bright-to-dark ring on a
// radius-increasing scan); Negated flips g first.
enum class EdgePolarity { AsPrinted, Negated };

// Infinity stand-in with saturating addition, so value tables never overflow.
constexpr double kInf = std::numeric_limits<double>::max();

inline double sat_add(double a, double b) {
    if (a >= kInf || b >= kInf) return kInf;
    double s = a + b;
    return s >= kInf ? kInf : s;
}

// E[n][i][j], 1-based i,j packed into M*M blocks per line.
struct EnergyTable {
    int num_lines = 0, points_per_line = 0;
    int delta = 1;
    std::vector<double> e;  // N*M*M

    double at(int n, int i, int j) const {  // n 0-based, i,j 1-based
        return e[(static_cast<size_t>(n) * points_per_line + (i - 1)) * points_per_line + (j - 1)];
    }
};

struct DpResult {
    ContourIndices indices;
    double cost = 0.0;
};

// g is N x M line-major, values 1-based in m via g[n*M + (m-1)].
EnergyTable build_energy(const std::vector<double>& g, int num_lines, int points_per_line,
                         int delta, EdgePolarity polarity = EdgePolarity::AsPrinted);

DpResult dp_solve(const std::vector<double>& g, int num_lines, int points_per_line, int delta,
                  EdgePolarity polarity = EdgePolarity::AsPrinted);

// Exhaustive reference, guarded to M^N <= 1e7. Ties broken toward the
// lexicographically smallest assignment.
DpResult brute_force_solve(const std::vector<double>& g, int num_lines, int points_per_line,
                           int delta, EdgePolarity polarity = EdgePolarity::AsPrinted);

double contour_cost(const std::vector<double>& g, const ContourIndices& v, int num_lines,
                    int points_per_line, int delta,
                    EdgePolarity polarity = EdgePolarity::AsPrinted);

// Circular moving average of the index sequence, round half up, clamped to
// {1..M}. window must be odd; window 1 is the identity.
ContourIndices smooth_indices(const ContourIndices& v, int window, int points_per_line);

}  // namespace edp::dp
