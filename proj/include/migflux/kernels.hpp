#pragma once

// Data-parallel inner loops of the cosine clustering code. Every kernel has a
// portable scalar reference and an AVX2 variant; the AVX2 path evaluates the
// same operations in the same order (no FMA), so the two agree bit for bit.
// The active variant is chosen once at startup from CPUID and can be pinned
// with MIGFLUX_ISA=scalar|avx2 or set_active_isa().

#include <cstddef>
#include <span>
#include <string_view>

namespace migflux::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);
bool isa_available(Isa isa);
Isa active_isa();
/// Throws std::invalid_argument if the CPU lacks `isa`.
void set_active_isa(Isa isa);

// Structure-of-arrays view over n 3-vectors.
struct Points3 {
    std::span<const double> x;
    std::span<const double> y;
    std::span<const double> z;

    std::size_t size() const { return x.size(); }
};

// out[i * k + c] = p_i . centers_c; centers is k x 3 row-major.
void dots_to_centers(Points3 pts, std::span<const double> centers, std::span<double> out);

// label[i] = argmax_c p_i . centers_c (lowest c on ties), best[i] = that dot.
void assign_max_dot(Points3 pts, std::span<const double> centers, std::span<int> label, std::span<double> best);

// dist[i] = min(dist[i], 1 - p_i . center).
void relax_min_distance(Points3 pts, const double (&center)[3], std::span<double> dist);

namespace scalar {
void dots_to_centers(Points3 pts, std::span<const double> centers, std::span<double> out);
void assign_max_dot(Points3 pts, std::span<const double> centers, std::span<int> label, std::span<double> best);
void relax_min_distance(Points3 pts, const double (&center)[3], std::span<double> dist);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define MIGFLUX_HAVE_AVX2_KERNELS 1
namespace avx2 {
void dots_to_centers(Points3 pts, std::span<const double> centers, std::span<double> out);
void assign_max_dot(Points3 pts, std::span<const double> centers, std::span<int> label, std::span<double> best);
void relax_min_distance(Points3 pts, const double (&center)[3], std::span<double> dist);
}  // namespace avx2
#endif

}  // namespace migflux::kernels
