#include "bel/softskel.hpp"

#include <algorithm>

#include "bel/kernels/kernels.hpp"

namespace bel {

RealVolume soft_erode(const RealVolume& x) { return kernels::omp::min_pool6(x); }

RealVolume soft_dilate(const RealVolume& x) { return kernels::omp::max_pool6(x); }

RealVolume soft_open(const RealVolume& x) { return soft_dilate(soft_erode(x)); }

RealVolume soft_skel(const RealVolume& input, int iterations) {
    if (iterations < 1)
        throw ParameterError("soft_skel: iterations must be >= 1, got " + std::to_string(iterations));

    RealVolume x = input;
    RealVolume skel = RealVolume::like(x);
    {
        const RealVolume opened = soft_open(x);
        for (std::int64_t i = 0; i < x.size(); ++i) skel[i] = std::max(x[i] - opened[i], 0.0);
    }
    for (int it = 0; it < iterations; ++it) {
        x = soft_erode(x);
        const RealVolume opened = soft_open(x);
        const std::int64_t n = x.size();
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) {
            const double delta = std::max(x[i] - opened[i], 0.0);
            skel[i] += std::max(delta - skel[i] * delta, 0.0);
        }
    }
    return skel;
}

RealVolume breakage_map(const BinaryMask& g, const ProbabilityVolume& p, int iterations) {
    require_same_dims(g, p, "breakage_map");
    const RealVolume sg = soft_skel(to_real(g), iterations);
    const RealVolume sp = soft_skel(p, iterations);
    RealVolume b = RealVolume::like(g);
    for (std::int64_t i = 0; i < b.size(); ++i) b[i] = std::max(sg[i] - sp[i], 0.0);
    return b;
}

}  // namespace bel
