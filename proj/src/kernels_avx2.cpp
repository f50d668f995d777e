#include "migflux/kernels.hpp"

#if defined(MIGFLUX_HAVE_AVX2_KERNELS)

#include <immintrin.h>

#define MIGFLUX_AVX2 __attribute__((target("avx2")))

namespace migflux::kernels::avx2 {

namespace {

// (x*cx + y*cy) + z*cz, same association as the scalar path.
MIGFLUX_AVX2 inline __m256d dot4(__m256d x, __m256d y, __m256d z, const double* c) {
    const __m256d xy = _mm256_add_pd(_mm256_mul_pd(x, _mm256_set1_pd(c[0])), _mm256_mul_pd(y, _mm256_set1_pd(c[1])));
    return _mm256_add_pd(xy, _mm256_mul_pd(z, _mm256_set1_pd(c[2])));
}

}  // namespace

MIGFLUX_AVX2 void dots_to_centers(Points3 pts, std::span<const double> centers, std::span<double> out) {
    const std::size_t n = pts.size();
    const std::size_t k = centers.size() / 3;
    const std::size_t n4 = n - n % 4;
    alignas(32) double lane[4];
    for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d x = _mm256_loadu_pd(pts.x.data() + i);
        const __m256d y = _mm256_loadu_pd(pts.y.data() + i);
        const __m256d z = _mm256_loadu_pd(pts.z.data() + i);
        for (std::size_t c = 0; c < k; ++c) {
            _mm256_store_pd(lane, dot4(x, y, z, centers.data() + 3 * c));
            for (std::size_t j = 0; j < 4; ++j) out[(i + j) * k + c] = lane[j];
        }
    }
    scalar::dots_to_centers(Points3{pts.x.subspan(n4), pts.y.subspan(n4), pts.z.subspan(n4)}, centers,
                            out.subspan(n4 * k));
}

MIGFLUX_AVX2 void assign_max_dot(Points3 pts, std::span<const double> centers, std::span<int> label,
                                 std::span<double> best) {
    const std::size_t n = pts.size();
    const std::size_t k = centers.size() / 3;
    const std::size_t n4 = n - n % 4;
    for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d x = _mm256_loadu_pd(pts.x.data() + i);
        const __m256d y = _mm256_loadu_pd(pts.y.data() + i);
        const __m256d z = _mm256_loadu_pd(pts.z.data() + i);
        __m256d top = dot4(x, y, z, centers.data());
        __m256d arg = _mm256_setzero_pd();
        for (std::size_t c = 1; c < k; ++c) {
            const __m256d d = dot4(x, y, z, centers.data() + 3 * c);
            const __m256d gt = _mm256_cmp_pd(d, top, _CMP_GT_OQ);
            top = _mm256_blendv_pd(top, d, gt);
            arg = _mm256_blendv_pd(arg, _mm256_set1_pd(static_cast<double>(c)), gt);
        }
        _mm256_storeu_pd(best.data() + i, top);
        _mm_storeu_si128(reinterpret_cast<__m128i*>(label.data() + i), _mm256_cvtpd_epi32(arg));
    }
    scalar::assign_max_dot(Points3{pts.x.subspan(n4), pts.y.subspan(n4), pts.z.subspan(n4)}, centers,
                           label.subspan(n4), best.subspan(n4));
}

MIGFLUX_AVX2 void relax_min_distance(Points3 pts, const double (&center)[3], std::span<double> dist) {
    const std::size_t n = pts.size();
    const std::size_t n4 = n - n % 4;
    const __m256d one = _mm256_set1_pd(1.0);
    for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d x = _mm256_loadu_pd(pts.x.data() + i);
        const __m256d y = _mm256_loadu_pd(pts.y.data() + i);
        const __m256d z = _mm256_loadu_pd(pts.z.data() + i);
        const __m256d d = _mm256_sub_pd(one, dot4(x, y, z, center));
        _mm256_storeu_pd(dist.data() + i, _mm256_min_pd(_mm256_loadu_pd(dist.data() + i), d));
    }
    scalar::relax_min_distance(Points3{pts.x.subspan(n4), pts.y.subspan(n4), pts.z.subspan(n4)}, center,
                               dist.subspan(n4));
}

}  // namespace migflux::kernels::avx2

#endif
