#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "oscimarket/kernels.hpp"

namespace oscimarket::kernels {

bool avx2_supported() {
#if defined(OSCIMARKET_HAVE_AVX2_BUILD)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

namespace {

Isa resolve_isa() {
    if (const char* env = std::getenv("OSCIMARKET_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
        if (std::strcmp(env, "avx2") == 0) {
            if (!avx2_supported()) {
                throw std::runtime_error("OSCIMARKET_SIMD=avx2 but AVX2 is unavailable");
            }
            return Isa::avx2;
        }
        // anything else (including "auto") falls through to detection
    }
    return avx2_supported() ? Isa::avx2 : Isa::scalar;
}

} // namespace

Isa active_isa() {
    static const Isa isa = resolve_isa();
    return isa;
}

const char* isa_name(Isa isa) {
    return isa == Isa::avx2 ? "avx2" : "scalar";
}

OscStepFn osc_step() {
#if defined(OSCIMARKET_HAVE_AVX2_BUILD)
    if (active_isa() == Isa::avx2) return &osc_step_avx2;
#endif
    return &osc_step_scalar;
}

RadialStepFn radial_step() {
#if defined(OSCIMARKET_HAVE_AVX2_BUILD)
    if (active_isa() == Isa::avx2) return &radial_step_avx2;
#endif
    return &radial_step_scalar;
}

} // namespace oscimarket::kernels
