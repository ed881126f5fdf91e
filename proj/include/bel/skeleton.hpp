#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bel/morphology.hpp"
#include "bel/volume.hpp"

namespace bel {

/// One-voxel-wide curve set, a subset of its source mask.
using Centerline = BinaryMask;

/// Topology-preserving thinning: directional peeling of simple points
/// (26-connected object, 6-connected background) in the fixed order
/// +z, -z, +y, -y, +x, -x, keeping curve endpoints. Deterministic.
Centerline thin(const BinaryMask& m);

/// 26-neighbors of voxel `i` inside `m`.
int neighbor_count26(const BinaryMask& m, std::int64_t i);

/// True when deleting voxel `i` from `m` preserves topology (26/6 connectivity).
bool is_simple_point(const BinaryMask& m, std::int64_t i);

enum class NodeKind { endpoint, junction, isolated, loop };

struct SkeletonNode {
    std::int32_t id = 0;
    NodeKind kind = NodeKind::endpoint;
    std::vector<std::int64_t> voxels;    // linear indices
    std::vector<std::int32_t> branches;  // incident branch ids, ascending
};

struct Branch {
    std::int32_t id = 0;
    std::int32_t parent = -1;
    int generation = 0;
    std::int32_t from_node = -1;  // parent side
    std::int32_t to_node = -1;
    std::vector<std::int64_t> voxels;  // ordered interior path, nodes excluded
    double length_mm = 0.0;

    std::int64_t length_voxels() const noexcept { return static_cast<std::int64_t>(voxels.size()); }
};

/// Which end of the z axis the airway tree enters from.
enum class RootSide { max_z, min_z };

/// Branches, nodes and generations of a centerline.
///
/// Node voxels are those with a 26-neighbor count other than two; adjacent
/// junction voxels form one node. Branches are the maximal runs of the
/// remaining voxels, plus direct node-to-node links. Branch ids follow
/// breadth-first order from the root, so a parent id is always smaller than
/// its children's.
struct SkeletonGraph {
    Dims dims{};
    Spacing spacing{};
    std::vector<SkeletonNode> nodes;
    std::vector<Branch> branches;
    std::int32_t root = -1;  // node id

    /// Voxels used to judge whether a branch was detected: its interior, or its
    /// end-node voxels when the branch has no interior.
    std::vector<std::int64_t> coverage_voxels(std::int32_t branch) const;

    /// Every node and branch voxel.
    Centerline centerline() const;

    /// Label volume with branch id + 1 on skeleton voxels. Node voxels take the
    /// incident branch with the lowest (generation, id).
    LabelVolume branch_seeds() const;

    int max_generation() const;
};

SkeletonGraph build_graph(const Centerline& c, RootSide side = RootSide::max_z);

/// JSON layout:
///   {"root": node id, "root_voxel": [x,y,z],
///    "branches": [{"id", "parent", "generation", "voxels": [[x,y,z],...], "length_mm"}],
///    "nodes": [{"id", "kind", "voxels": [[x,y,z],...]}]}
nlohmann::json graph_to_json(const SkeletonGraph& g);

/// Every foreground voxel of `m` labelled with the id of its nearest branch
/// (+1); background is 0.
LabelVolume branch_labels(const BinaryMask& m, const SkeletonGraph& g);

/// Removes the voxels of `m` whose nearest branch has generation < drop_generations.
/// drop_generations = 2 removes the trachea (0) and main bronchi (1).
BinaryMask small_airway_mask(const BinaryMask& m, const SkeletonGraph& g, int drop_generations = 2);

/// Distance of each foreground voxel to the nearest voxel of thin(m).
DistanceVolume centerline_distance(const BinaryMask& m, bool spacing_aware = false);

}  // namespace bel
