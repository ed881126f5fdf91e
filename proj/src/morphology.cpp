#include "bel/morphology.hpp"

#include <algorithm>
#include <cmath>

namespace bel {

BinaryMask erode(const BinaryMask& m, StructuringElement se) { return kernels::omp::erode(m, se); }

BinaryMask dilate(const BinaryMask& m, StructuringElement se) { return kernels::omp::dilate(m, se); }

BinaryMask boundary(const BinaryMask& m) {
    return mask_and_not(m, erode(m, StructuringElement::cross6));
}

namespace {
std::array<double, 3> axis_weights(const Spacing& s, bool spacing_aware) {
    if (!spacing_aware) return {1.0, 1.0, 1.0};
    return {s.sx * s.sx, s.sy * s.sy, s.sz * s.sz};
}
}  // namespace

kernels::EdtResult feature_transform(const LabelVolume& seeds, bool spacing_aware) {
    return kernels::omp::labeled_sqdist(seeds, axis_weights(seeds.spacing(), spacing_aware));
}

RealVolume edt_squared(const BinaryMask& reference, bool spacing_aware) {
    LabelVolume seeds = LabelVolume::like(reference);
    bool any = false;
    for (std::int64_t i = 0; i < reference.size(); ++i)
        if (reference[i]) {
            seeds[i] = 1;
            any = true;
        }
    if (!any) throw EmptyInputError("edt: reference set has no foreground voxels");
    return feature_transform(seeds, spacing_aware).sqdist;
}

DistanceVolume edt(const BinaryMask& reference, const BinaryMask& domain, bool spacing_aware) {
    require_same_dims(reference, domain, "edt");
    RealVolume sq = edt_squared(reference, spacing_aware);
    for (std::int64_t i = 0; i < sq.size(); ++i) sq[i] = domain[i] ? std::sqrt(sq[i]) : 0.0;
    return {std::move(sq), spacing_aware ? DistanceUnit::millimetres : DistanceUnit::voxels};
}

double max_distance(const DistanceVolume& d, const BinaryMask& over) {
    require_same_dims(d.values, over, "max_distance");
    double best = 0.0;
    bool any = false;
    for (std::int64_t i = 0; i < over.size(); ++i)
        if (over[i]) {
            any = true;
            best = std::max(best, d.values[i]);
        }
    if (!any) throw EmptyInputError("max_distance: mask has no foreground voxels");
    return best;
}

}  // namespace bel
