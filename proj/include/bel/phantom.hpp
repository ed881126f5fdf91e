#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "bel/skeleton.hpp"
#include "bel/volume.hpp"

namespace bel {

/// Parameters of a synthetic binary airway tree.
struct TreeSpec {
    int depth = 3;                 // generations below the root; 2^(depth+1) - 1 branches
    double root_radius = 4.0;      // voxels
    double radius_decay = 0.75;
    double root_length = 24.0;     // voxels
    double length_decay = 0.8;
    double branching_angle = 60.0; // degrees between sibling axes
    Dims dims{96, 96, 96};
    Spacing spacing{};
    std::uint64_t seed = 0;
    double azimuth_jitter = 20.0;  // degrees; random twist of each branching plane
    double margin = 2.0;           // free voxels kept between tubes and the grid border
    bool fill_crotch = true;       // fill the wedge between sibling tubes near each bifurcation

    void validate() const;
};

TreeSpec tree_spec_from_json(const nlohmann::json& j);
nlohmann::json tree_spec_to_json(const TreeSpec& s);

struct PhantomBranch {
    std::int32_t id = 0;
    std::int32_t parent = -1;
    int generation = 0;
    Index3 start{};  // voxel-center endpoints of the axis
    Index3 end{};
    double radius = 1.0;
    /// 26-connected walk start -> end. The first voxel is dropped for child
    /// branches (it belongs to the parent), as are voxels already claimed by a
    /// lower-id branch.
    std::vector<std::int64_t> centerline;
    /// Voxels whose nearest axis (among tubes that contain them) is this branch.
    std::int64_t owned_voxels = 0;
};

struct PhantomTruth {
    TreeSpec spec;
    BinaryMask mask;
    Centerline centerline;
    /// Branch id + 1 of the nearest containing axis, 0 on background.
    LabelVolume owner;
    std::vector<PhantomBranch> branches;

    std::int64_t total_centerline() const;

    /// Graph view of the exact centerline (one branch per phantom branch, ids
    /// and generations as generated), usable with dbr()/dlr_length().
    SkeletonGraph graph() const;
};

/// Rasterizes the tree: every voxel within `radius` of a branch's axis segment.
/// Throws ParameterError naming the first branch that leaves the grid.
PhantomTruth generate(const TreeSpec& spec);

/// Graph export in the skeleton JSON layout plus the phantom bookkeeping.
nlohmann::json truth_to_json(const PhantomTruth& t);

struct Degradation {
    BinaryMask mask;
    /// Exact-centerline voxels that were removed (break) or voxels added (leak).
    std::vector<std::int64_t> erased_centerline;
    std::int64_t added_voxels = 0;
    std::int64_t removed_voxels = 0;
};

/// Erases a `gap_voxels`-long slab of the branch's tube centred on the middle
/// of its axis. Voxels inside any other branch's tube are kept. A gap longer
/// than the branch erases all of its own tube.
Degradation break_branch(const PhantomTruth& t, const BinaryMask& mask, std::int32_t branch_id,
                         double gap_voxels);
Degradation break_branch(const PhantomTruth& t, std::int32_t branch_id, double gap_voxels);

/// Unions a ball of the given radius (voxels within distance <= radius of
/// `center`) into the mask. radius 0 leaves the mask unchanged.
Degradation add_leak(const PhantomTruth& t, const BinaryMask& mask, const Index3& center, double radius);
Degradation add_leak(const PhantomTruth& t, const Index3& center, double radius);

/// A voxel just outside the tube surface at the middle of a branch, for leak placement.
Index3 leak_site(const PhantomTruth& t, std::int32_t branch_id, double offset = 1.0);

}  // namespace bel
