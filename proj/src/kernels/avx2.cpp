// Compiled with -mavx2 only (no -mfma), so nothing here is contracted.
#include "somkit/kernels.hpp"

#include <immintrin.h>

namespace somkit::kernels::detail {

namespace {

// Four neurons per vector; each lane walks its own neuron's coordinates in
// order, so the per-neuron sums match the scalar loop exactly.
void squared_distances_avx2(const double* weights, std::size_t m, std::size_t n, const double* x, double* out) {
    const auto stride = static_cast<long long>(n);
    const __m256i offsets = _mm256_setr_epi64x(0, stride, 2 * stride, 3 * stride);
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        const double* base = weights + i * n;
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t d = 0; d < n; ++d) {
            const __m256d w = _mm256_i64gather_pd(base + d, offsets, 8);
            const __m256d diff = _mm256_sub_pd(_mm256_set1_pd(x[d]), w);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
        }
        _mm256_storeu_pd(out + i, acc);
    }
    for (; i < m; ++i) {
        const double* w = weights + i * n;
        double s = 0.0;
        for (std::size_t d = 0; d < n; ++d) {
            const double diff = x[d] - w[d];
            s += diff * diff;
        }
        out[i] = s;
    }
}

void blend_avx2(double* row, const double* x, std::size_t n, double eta) {
    const __m256d e = _mm256_set1_pd(eta);
    std::size_t d = 0;
    for (; d + 4 <= n; d += 4) {
        const __m256d w = _mm256_loadu_pd(row + d);
        const __m256d v = _mm256_loadu_pd(x + d);
        _mm256_storeu_pd(row + d, _mm256_add_pd(w, _mm256_mul_pd(e, _mm256_sub_pd(v, w))));
    }
    for (; d < n; ++d) {
        row[d] = row[d] + eta * (x[d] - row[d]);
    }
}

} // namespace

const KernelTable& avx2_table() {
    static constexpr KernelTable table{Isa::Avx2, "avx2", &squared_distances_avx2, &blend_avx2};
    return table;
}

} // namespace somkit::kernels::detail
