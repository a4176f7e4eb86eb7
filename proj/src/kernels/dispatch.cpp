#include "vbakf/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace vbakf::kernels {

namespace {

constexpr KernelTable kScalar{Isa::scalar, &scalar::log_evidence, &scalar::soft_counts,
                              &scalar::sum_squared_difference};

#if defined(VBAKF_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::avx2, &avx2::log_evidence, &avx2::soft_counts, &avx2::sum_squared_difference};
#endif

bool cpu_has_avx2() {
#if defined(VBAKF_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable& select() {
    if (const char* env = std::getenv("VBAKF_KERNELS")) {
        const std::string want(env);
        if (want == "scalar") return kScalar;
        if (want == "avx2") return table(Isa::avx2);
        throw std::invalid_argument("VBAKF_KERNELS must be 'scalar' or 'avx2', got '" + want + "'");
    }
    return available(Isa::avx2) ? table(Isa::avx2) : kScalar;
}

} // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    }
    return "unknown";
}

bool available(Isa isa) {
    switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: {
        static const bool has = cpu_has_avx2();
        return has;
    }
    }
    return false;
}

const KernelTable& table(Isa isa) {
    if (!available(isa)) {
        throw std::invalid_argument("kernel variant '" + std::string(isa_name(isa)) + "' is not available");
    }
#if defined(VBAKF_HAVE_AVX2)
    if (isa == Isa::avx2) return kAvx2;
#endif
    return kScalar;
}

const KernelTable& active() {
    static const KernelTable& chosen = select();
    return chosen;
}

} // namespace vbakf::kernels
