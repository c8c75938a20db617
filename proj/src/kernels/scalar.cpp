#include "somkit/kernels.hpp"

namespace somkit::kernels::detail {

namespace {

void squared_distances_scalar(const double* weights, std::size_t m, std::size_t n, const double* x, double* out) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* w = weights + i * n;
        double s = 0.0;
        for (std::size_t d = 0; d < n; ++d) {
            const double diff = x[d] - w[d];
            s += diff * diff;
        }
        out[i] = s;
    }
}

void blend_scalar(double* row, const double* x, std::size_t n, double eta) {
    for (std::size_t d = 0; d < n; ++d) {
        row[d] = row[d] + eta * (x[d] - row[d]);
    }
}

} // namespace

const KernelTable& scalar_table() {
    static constexpr KernelTable table{Isa::Scalar, "scalar", &squared_distances_scalar, &blend_scalar};
    return table;
}

} // namespace somkit::kernels::detail
