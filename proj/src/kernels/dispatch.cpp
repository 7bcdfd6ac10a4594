#include "gse/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace gse::kernels {

namespace detail {
const KernelTable* avx2_table_compiled();
}

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable& choose() {
    const char* env = std::getenv("GSE_SIMD");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return scalar_table();
    if (const KernelTable* t = avx2_table()) return *t;
    return scalar_table();
}

}  // namespace

const KernelTable* avx2_table() {
    static const KernelTable* t = cpu_has_avx2() ? detail::avx2_table_compiled() : nullptr;
    return t;
}

const KernelTable& active() {
    static const KernelTable& t = choose();
    return t;
}

}  // namespace gse::kernels
