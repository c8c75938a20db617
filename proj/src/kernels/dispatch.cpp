#include "somkit/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace somkit::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(SOMKIT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const KernelTable* pick_default() {
    const KernelTable* best = avx2() ? avx2() : &scalar();
    if (const char* env = std::getenv("SOMKIT_SIMD")) {
        const std::string want = env;
        if (want == "scalar") {
            return &scalar();
        }
        if (want == "avx2" && avx2()) {
            return avx2();
        }
    }
    return best;
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> table{pick_default()};
    return table;
}

} // namespace

const KernelTable& scalar() { return detail::scalar_table(); }

const KernelTable* avx2() {
#if defined(SOMKIT_HAVE_AVX2)
    static const bool supported = cpu_has_avx2();
    return supported ? &detail::avx2_table() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool set_active(Isa isa) {
    const KernelTable* t = isa == Isa::Scalar ? &scalar() : avx2();
    if (!t) {
        return false;
    }
    current().store(t, std::memory_order_release);
    return true;
}

bool set_active(std::string_view name) {
    if (name == "scalar") return set_active(Isa::Scalar);
    if (name == "avx2") return set_active(Isa::Avx2);
    if (name == "auto") {
        current().store(avx2() ? avx2() : &scalar(), std::memory_order_release);
        return true;
    }
    return false;
}

} // namespace somkit::kernels
