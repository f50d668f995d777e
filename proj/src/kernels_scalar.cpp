#include "migflux/kernels.hpp"

namespace migflux::kernels::scalar {

void dots_to_centers(Points3 pts, std::span<const double> centers, std::span<double> out) {
    const std::size_t k = centers.size() / 3;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t c = 0; c < k; ++c) {
            out[i * k + c] = pts.x[i] * centers[3 * c] + pts.y[i] * centers[3 * c + 1] + pts.z[i] * centers[3 * c + 2];
        }
    }
}

void assign_max_dot(Points3 pts, std::span<const double> centers, std::span<int> label, std::span<double> best) {
    const std::size_t k = centers.size() / 3;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double top = pts.x[i] * centers[0] + pts.y[i] * centers[1] + pts.z[i] * centers[2];
        int arg = 0;
        for (std::size_t c = 1; c < k; ++c) {
            const double d = pts.x[i] * centers[3 * c] + pts.y[i] * centers[3 * c + 1] + pts.z[i] * centers[3 * c + 2];
            if (d > top) {
                top = d;
                arg = static_cast<int>(c);
            }
        }
        label[i] = arg;
        best[i] = top;
    }
}

void relax_min_distance(Points3 pts, const double (&center)[3], std::span<double> dist) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double d = 1.0 - (pts.x[i] * center[0] + pts.y[i] * center[1] + pts.z[i] * center[2]);
        dist[i] = dist[i] < d ? dist[i] : d;
    }
}

}  // namespace migflux::kernels::scalar
