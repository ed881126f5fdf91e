#pragma once

// Data-parallel inner loops. Every kernel exists twice: `serial` is the plain
// reference kept for testing and benchmarking, `omp` is the OpenMP version the
// public API calls. Both must produce bit-identical output for any thread count.

#include <cstdint>
#include <array>
#include <span>
#include <vector>

#include "bel/volume.hpp"

namespace bel::kernels {

enum class Stencil { cross6, cube26 };

/// Accumulated sums of the ratio losses over one volume.
struct LossSums {
    double numerator = 0.0;    // sum w * p^r * g
    double denominator = 0.0;  // sum w * (alpha p + beta g)
    double sum_p = 0.0;
    double sum_g = 0.0;
};

struct LossSumArgs {
    std::span<const double> p;
    std::span<const std::uint8_t> g;
    std::span<const double> w;  // empty = all ones
    double r = 1.0;
    double alpha = 0.5;
    double beta = 0.5;
};

/// Fixed reduction block. Partial sums per block are combined in block order,
/// so the result does not depend on the number of threads.
inline constexpr std::int64_t kReduceBlock = 4096;

/// Squared-distance transform with nearest-seed labels. `seeds` holds 0 for
/// non-seed voxels and a positive label otherwise. On return `sqdist` holds the
/// exact squared distance to the nearest seed (+inf if none on the grid) and
/// `nearest` the smallest label among all seeds at that distance.
/// `weights` are the squared per-axis step lengths.
struct EdtResult {
    RealVolume sqdist;
    LabelVolume nearest;
};

namespace serial {
BinaryMask erode(const BinaryMask& m, Stencil s);
BinaryMask dilate(const BinaryMask& m, Stencil s);
RealVolume min_pool6(const RealVolume& x);
RealVolume max_pool6(const RealVolume& x);
EdtResult labeled_sqdist(const LabelVolume& seeds, const std::array<double, 3>& weights);
LossSums loss_sums(const LossSumArgs& a);
}  // namespace serial

namespace omp {
BinaryMask erode(const BinaryMask& m, Stencil s);
BinaryMask dilate(const BinaryMask& m, Stencil s);
RealVolume min_pool6(const RealVolume& x);
RealVolume max_pool6(const RealVolume& x);
EdtResult labeled_sqdist(const LabelVolume& seeds, const std::array<double, 3>& weights);
LossSums loss_sums(const LossSumArgs& a);
}  // namespace omp

/// One-dimensional lower envelope of sampled parabolas, shared by both EDT
/// variants. f[q] = +inf marks an empty sample. Writes
/// d[x] = min_q w*(x-q)^2 + f[q] and lab[x] = smallest label among the minimizers.
/// All arrays are contiguous with n entries; the scratch vectors are resized.
struct EnvelopeScratch {
    std::vector<std::int64_t> v;
    std::vector<double> z_num;
    std::vector<double> z_den;
};
void lower_envelope(std::int64_t n, double w, const double* f, const std::int32_t* lab_in,
                    double* d, std::int32_t* lab_out, EnvelopeScratch& scratch);

}  // namespace bel::kernels
