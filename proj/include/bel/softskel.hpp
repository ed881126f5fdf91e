#pragma once

#include "bel/volume.hpp"

namespace bel {

/// Default number of erosion rounds for soft skeletons. Enough to reach the
/// core of tubes with radius up to about 10 voxels.
inline constexpr int kDefaultSkeletonIterations = 10;

/// Min over the 6-neighborhood (self included); outside the grid counts as 0.
RealVolume soft_erode(const RealVolume& x);
/// Max over the 6-neighborhood (self included); outside the grid counts as 0.
RealVolume soft_dilate(const RealVolume& x);
/// soft_dilate(soft_erode(x))
RealVolume soft_open(const RealVolume& x);

/// Continuous skeleton built from `iterations` rounds of soft erosion:
///
///     skel  = relu(x - open(x))
///     repeat: x = erode(x); delta = relu(x - open(x)); skel += relu(delta - skel*delta)
///
/// Values stay in [0,1] for inputs in [0,1].
RealVolume soft_skel(const RealVolume& x, int iterations = kDefaultSkeletonIterations);

/// Per-voxel skeleton deficit of the prediction: max(0, skel(g) - skel(p)).
RealVolume breakage_map(const BinaryMask& g, const ProbabilityVolume& p,
                        int iterations = kDefaultSkeletonIterations);

}  // namespace bel
