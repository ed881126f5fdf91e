// OpenMP kernels. Slices (stencils), lines (EDT passes) and fixed-size blocks
// (reductions) are distributed over threads; each output element is written by
// exactly one thread with the same arithmetic as the serial reference.

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "bel/kernels/kernels.hpp"

namespace bel::kernels::omp {

namespace {

Connectivity stencil_conn(Stencil s) {
    return s == Stencil::cross6 ? Connectivity::six : Connectivity::twentysix;
}

template <class T, class Reduce>
Volume3<T> stencil_apply(const Volume3<T>& in, Connectivity c, T outside, Reduce reduce) {
    Volume3<T> out = Volume3<T>::like(in);
    const auto offs = neighbor_offsets(c);
    const Dims d = in.dims();
    std::vector<std::int64_t> linear;
    for (const auto& o : offs) linear.push_back(o[0] + d.nx * (o[1] + d.ny * o[2]));
    const T* src = in.values().data();
    T* dst = out.values().data();

#pragma omp parallel for schedule(static)
    for (std::int64_t z = 0; z < d.nz; ++z) {
        const bool z_in = z > 0 && z + 1 < d.nz;
        for (std::int64_t y = 0; y < d.ny; ++y) {
            const bool yz_in = z_in && y > 0 && y + 1 < d.ny;
            const std::int64_t row = d.nx * (y + d.ny * z);
            for (std::int64_t x = 0; x < d.nx; ++x) {
                const std::int64_t i = row + x;
                T acc = src[i];
                if (yz_in && x > 0 && x + 1 < d.nx) {
                    for (auto off : linear) acc = reduce(acc, src[i + off]);
                } else {
                    for (const auto& o : offs) {
                        const std::int64_t xx = x + o[0], yy = y + o[1], zz = z + o[2];
                        acc = reduce(acc, in.contains(xx, yy, zz) ? src[in.index(xx, yy, zz)] : outside);
                    }
                }
                dst[i] = acc;
            }
        }
    }
    return out;
}

}  // namespace

BinaryMask erode(const BinaryMask& m, Stencil s) {
    return stencil_apply<std::uint8_t>(m, stencil_conn(s), 0,
                                       [](std::uint8_t a, std::uint8_t b) { return std::min(a, b); });
}

BinaryMask dilate(const BinaryMask& m, Stencil s) {
    return stencil_apply<std::uint8_t>(m, stencil_conn(s), 0,
                                       [](std::uint8_t a, std::uint8_t b) { return std::max(a, b); });
}

RealVolume min_pool6(const RealVolume& x) {
    return stencil_apply<double>(x, Connectivity::six, 0.0,
                                 [](double a, double b) { return std::min(a, b); });
}

RealVolume max_pool6(const RealVolume& x) {
    return stencil_apply<double>(x, Connectivity::six, 0.0,
                                 [](double a, double b) { return std::max(a, b); });
}

EdtResult labeled_sqdist(const LabelVolume& seeds, const std::array<double, 3>& weights) {
    const Dims d = seeds.dims();
    constexpr double inf = std::numeric_limits<double>::infinity();
    EdtResult r{RealVolume::like(seeds, inf), LabelVolume::like(seeds, 0)};
    double* dist = r.sqdist.values().data();
    std::int32_t* near = r.nearest.values().data();
    const std::int32_t* seed = seeds.values().data();
    const std::int64_t total = seeds.size();

#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < total; ++i)
        if (seed[i] > 0) {
            dist[i] = 0.0;
            near[i] = seed[i];
        }

    const std::int64_t longest = std::max({d.nx, d.ny, d.nz});
    for (int axis = 0; axis < 3; ++axis) {
        const std::int64_t n = d[axis];
        const std::int64_t stride = axis == 0 ? 1 : (axis == 1 ? d.nx : d.nx * d.ny);
        const std::int64_t a1 = axis == 0 ? d.ny : d.nx;
        const std::int64_t a2 = axis == 2 ? d.ny : d.nz;
        const std::int64_t lines = a1 * a2;
#pragma omp parallel
        {
            EnvelopeScratch scratch;
            std::vector<double> f(longest), out(longest);
            std::vector<std::int32_t> lab(longest), lab_out(longest);
#pragma omp for schedule(static)
            for (std::int64_t line = 0; line < lines; ++line) {
                const std::int64_t k = line % a1, j = line / a1;
                std::int64_t base = 0;
                if (axis == 0) base = seeds.index(0, k, j);
                if (axis == 1) base = seeds.index(k, 0, j);
                if (axis == 2) base = seeds.index(k, j, 0);
                bool any = false;
                for (std::int64_t t = 0; t < n; ++t) {
                    f[t] = dist[base + t * stride];
                    lab[t] = near[base + t * stride];
                    any = any || f[t] != inf;
                }
                if (!any) continue;
                lower_envelope(n, weights[axis], f.data(), lab.data(), out.data(), lab_out.data(),
                               scratch);
                for (std::int64_t t = 0; t < n; ++t) {
                    dist[base + t * stride] = out[t];
                    near[base + t * stride] = lab_out[t];
                }
            }
        }
    }
    return r;
}

LossSums loss_sums(const LossSumArgs& a) {
    const auto n = static_cast<std::int64_t>(a.p.size());
    const std::int64_t blocks = (n + kReduceBlock - 1) / kReduceBlock;
    std::vector<LossSums> parts(static_cast<std::size_t>(blocks));

#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < blocks; ++b) {
        LossSums part;
        const std::int64_t b0 = b * kReduceBlock;
        const std::int64_t b1 = std::min(n, b0 + kReduceBlock);
        for (std::int64_t i = b0; i < b1; ++i) {
            const double p = a.p[i];
            const double g = a.g[i] ? 1.0 : 0.0;
            const double w = a.w.empty() ? 1.0 : a.w[i];
            if (g != 0.0) part.numerator += w * std::pow(p, a.r);
            part.denominator += w * (a.alpha * p + a.beta * g);
            part.sum_p += p;
            part.sum_g += g;
        }
        parts[b] = part;
    }

    LossSums total;
    for (const auto& part : parts) {
        total.numerator += part.numerator;
        total.denominator += part.denominator;
        total.sum_p += part.sum_p;
        total.sum_g += part.sum_g;
    }
    return total;
}

}  // namespace bel::kernels::omp
