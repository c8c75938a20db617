#include "doctest.h"

#include <cstring>
#include <vector>

#include "somkit/kernels.hpp"
#include "somkit/rng.hpp"

using namespace somkit;

namespace {

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::vector<double> draw(Rng& rng, std::size_t n, double scale) {
    std::vector<double> v(n);
    for (auto& x : v) x = scale * (2.0 * rng.uniform() - 1.0);
    return v;
}

} // namespace

TEST_CASE("scalar squared distances match a direct loop") {
    Rng rng(3);
    const std::size_t m = 13, n = 7;
    const auto w = draw(rng, m * n, 5.0);
    const auto x = draw(rng, n, 5.0);
    std::vector<double> out(m);
    kernels::scalar().squared_distances(w.data(), m, n, x.data(), out.data());
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t d = 0; d < n; ++d) s += (x[d] - w[i * n + d]) * (x[d] - w[i * n + d]);
        CHECK(out[i] == s);
    }
}

TEST_CASE("scalar blend is w + eta * (x - w)") {
    std::vector<double> w{0.0, 0.0};
    const std::vector<double> x{2.0, 4.0};
    kernels::scalar().blend(w.data(), x.data(), 2, 0.5);
    CHECK(w[0] == 1.0);
    CHECK(w[1] == 2.0);
    kernels::scalar().blend(w.data(), x.data(), 2, 1.0);
    CHECK(w == x);
}

TEST_CASE("avx2 variant is bit-identical to scalar") {
    const auto* simd = kernels::avx2();
    if (simd == nullptr) {
        MESSAGE("AVX2 variant unavailable on this machine; equivalence not exercised");
        return;
    }
    Rng rng(99);
    // Odd neuron counts and dimensions exercise the tails.
    for (std::size_t m : {1u, 3u, 4u, 5u, 9u, 17u, 100u, 900u}) {
        for (std::size_t n : {1u, 2u, 5u, 15u, 33u}) {
            const auto w = draw(rng, m * n, 10.0);
            const auto x = draw(rng, n, 10.0);
            std::vector<double> a(m), b(m);
            kernels::scalar().squared_distances(w.data(), m, n, x.data(), a.data());
            simd->squared_distances(w.data(), m, n, x.data(), b.data());
            REQUIRE(same_bits(a, b));

            for (double eta : {0.0, 0.01, 0.37, 0.9, 1.0}) {
                auto ra = draw(rng, n, 3.0);
                auto rb = ra;
                kernels::scalar().blend(ra.data(), x.data(), n, eta);
                simd->blend(rb.data(), x.data(), n, eta);
                REQUIRE(same_bits(ra, rb));
            }
        }
    }
}

TEST_CASE("variant selection") {
    const auto before = kernels::active().isa;
    CHECK(kernels::set_active("scalar"));
    CHECK(kernels::active().isa == kernels::Isa::Scalar);
    CHECK_FALSE(kernels::set_active("sse9"));
    CHECK(kernels::active().isa == kernels::Isa::Scalar);
    if (kernels::avx2() != nullptr) {
        CHECK(kernels::set_active(kernels::Isa::Avx2));
        CHECK(kernels::active().isa == kernels::Isa::Avx2);
    } else {
        CHECK_FALSE(kernels::set_active(kernels::Isa::Avx2));
    }
    CHECK(kernels::set_active("auto"));
    kernels::set_active(before);
}
