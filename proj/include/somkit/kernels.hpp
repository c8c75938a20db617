#pragma once

// Inner-loop arithmetic for BMU search and weight updates.
//
// Every variant must be bit-identical to the scalar reference: distance sums
// accumulate in increasing coordinate order per neuron (the AVX2 variant
// vectorizes across neurons, not across coordinates) and the update is the
// unfused expression w + eta * (x - w).

#include <cstddef>
#include <span>
#include <string_view>

namespace somkit::kernels {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
    Isa isa;
    const char* name;
    /// out[i] = sum_d (x[d] - weights[i*n + d])^2 for i in [0, m).
    void (*squared_distances)(const double* weights, std::size_t m, std::size_t n, const double* x, double* out);
    /// row[d] = row[d] + eta * (x[d] - row[d]).
    void (*blend)(double* row, const double* x, std::size_t n, double eta);
};

const KernelTable& scalar();

/// Null when the build has no AVX2 variant or the CPU lacks AVX2.
const KernelTable* avx2();

/// The table used by the library. Chosen once: SOMKIT_SIMD=scalar|avx2 in the
/// environment wins, otherwise the widest variant the CPU supports.
const KernelTable& active();

/// Forces a variant; returns false (and changes nothing) if unavailable.
bool set_active(Isa isa);
bool set_active(std::string_view name);

inline void squared_distances(std::span<const double> weights, std::size_t n, std::span<const double> x,
                              std::span<double> out) {
    active().squared_distances(weights.data(), out.size(), n, x.data(), out.data());
}

inline void blend(std::span<double> row, std::span<const double> x, double eta) {
    active().blend(row.data(), x.data(), row.size(), eta);
}

namespace detail {
// Defined in the per-ISA translation units.
const KernelTable& scalar_table();
#if defined(SOMKIT_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
} // namespace detail

} // namespace somkit::kernels
