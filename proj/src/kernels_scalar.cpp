// Scalar reference kernels. Compiled with -ffp-contract=off so the AVX2
// variants (same operation trees, no FMA) reproduce them bit for bit.

#include "kernels_common.hpp"

namespace oscimarket::kernels {

void osc_step_scalar(double* x, double* y, const double* xi1, const double* xi2,
                     std::size_t n, const OscStepParams& p) {
    for (std::size_t i = 0; i < n; ++i) {
        detail::osc_step_lane(x[i], y[i], xi1[i], xi2[i], p);
    }
}

std::size_t radial_step_scalar(double* r, const double* xi, std::uint8_t* reject,
                               std::size_t n, const RadialStepParams& p) {
    std::size_t rejected = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const bool ok = detail::radial_step_lane(r[i], xi[i], p);
        reject[i] = ok ? 0 : 1;
        rejected += ok ? 0 : 1;
    }
    return rejected;
}

} // namespace oscimarket::kernels
