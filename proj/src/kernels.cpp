#include "migflux/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace migflux::kernels {

namespace {

Isa initial_isa() {
    Isa isa = isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
    if (const char* env = std::getenv("MIGFLUX_ISA")) {
        const std::string_view want(env);
        if (want == "scalar") isa = Isa::scalar;
        else if (want == "avx2" && isa_available(Isa::avx2)) isa = Isa::avx2;
    }
    return isa;
}

std::atomic<Isa>& active() {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(MIGFLUX_HAVE_AVX2_KERNELS)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
    }
    return false;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    if (!isa_available(isa)) throw std::invalid_argument("ISA not supported here: " + std::string(isa_name(isa)));
    active().store(isa, std::memory_order_relaxed);
}

void dots_to_centers(Points3 pts, std::span<const double> centers, std::span<double> out) {
#if defined(MIGFLUX_HAVE_AVX2_KERNELS)
    if (active_isa() == Isa::avx2) return avx2::dots_to_centers(pts, centers, out);
#endif
    scalar::dots_to_centers(pts, centers, out);
}

void assign_max_dot(Points3 pts, std::span<const double> centers, std::span<int> label, std::span<double> best) {
#if defined(MIGFLUX_HAVE_AVX2_KERNELS)
    if (active_isa() == Isa::avx2) return avx2::assign_max_dot(pts, centers, label, best);
#endif
    scalar::assign_max_dot(pts, centers, label, best);
}

void relax_min_distance(Points3 pts, const double (&center)[3], std::span<double> dist) {
#if defined(MIGFLUX_HAVE_AVX2_KERNELS)
    if (active_isa() == Isa::avx2) return avx2::relax_min_distance(pts, center, dist);
#endif
    scalar::relax_min_distance(pts, center, dist);
}

}  // namespace migflux::kernels
