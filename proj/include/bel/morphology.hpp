#pragma once

#include "bel/kernels/kernels.hpp"
#include "bel/volume.hpp"

namespace bel {

/// Radius-1 structuring elements.
using StructuringElement = kernels::Stencil;

/// A voxel survives iff it and all its neighbors are foreground; outside the grid is background.
BinaryMask erode(const BinaryMask& m, StructuringElement se = StructuringElement::cross6);
/// A voxel becomes foreground iff it or any neighbor is foreground.
BinaryMask dilate(const BinaryMask& m, StructuringElement se = StructuringElement::cross6);

/// Foreground voxels with at least one background 6-neighbor (grid border counts as background).
BinaryMask boundary(const BinaryMask& m);

enum class DistanceUnit { voxels, millimetres };

/// Distances in voxels or mm. Zero outside the domain and on the reference set.
struct DistanceVolume {
    RealVolume values;
    DistanceUnit unit = DistanceUnit::voxels;
};

/// Squared distance from every voxel to the nearest reference voxel, exact in
/// voxel units. Throws EmptyInputError when `reference` is empty.
RealVolume edt_squared(const BinaryMask& reference, bool spacing_aware = false);

/// Euclidean distance from each `domain` voxel to the nearest `reference` voxel.
DistanceVolume edt(const BinaryMask& reference, const BinaryMask& domain, bool spacing_aware = false);

/// Nearest-seed assignment: `seeds` carries positive labels on seed voxels.
/// Ties between equidistant seeds go to the smaller label.
kernels::EdtResult feature_transform(const LabelVolume& seeds, bool spacing_aware = false);

/// Maximum of `d` over the foreground of `over`. May be zero (all-boundary masks).
double max_distance(const DistanceVolume& d, const BinaryMask& over);

}  // namespace bel
