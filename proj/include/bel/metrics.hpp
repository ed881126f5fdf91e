#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "bel/skeleton.hpp"
#include "bel/volume.hpp"

namespace bel {

struct ConfusionCounts {
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::int64_t total() const noexcept { return tp + fp + fn + tn; }
};

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& gt);

struct OverlapMetrics {
    double iou = 0.0;
    double precision = 0.0;
    double leakage = 0.0;  // fp / (tp + fn)
    double amr = 0.0;      // fn / (tp + fn)
};

/// Ratios with zero denominators evaluate to 0.
OverlapMetrics overlap_metrics(const ConfusionCounts& c);

/// Fraction of centerline voxels covered by `pred`.
double dlr(const BinaryMask& pred, const Centerline& gt_centerline);

/// Length-weighted variant: fraction of the graph's mm path length whose steps
/// have both end voxels covered.
double dlr_length(const BinaryMask& pred, const SkeletonGraph& gt_graph);

/// Fraction of branches whose coverage voxels are inside `pred` at a rate >= threshold.
double dbr(const BinaryMask& pred, const SkeletonGraph& gt_graph, double threshold = 0.8);

struct EvalOptions {
    bool lcc = true;
    Connectivity connectivity = Connectivity::twentysix;
    bool small = false;
    int drop_generations = 2;
    double branch_threshold = 0.8;
    RootSide root_side = RootSide::max_z;
};

struct SmallAirwayMetrics {
    double iou = 0.0;
    double dlr = 0.0;
    double dbr = 0.0;
};

struct MetricsReport {
    double iou = 0.0, dlr = 0.0, dbr = 0.0, precision = 0.0, leakage = 0.0, amr = 0.0;
    std::optional<SmallAirwayMetrics> small;
    ConfusionCounts counts;
    std::int64_t centerline_voxels = 0;
    std::int64_t branches = 0;
    EvalOptions options;
};

/// Full panel. The ground-truth centerline and graph are always derived from
/// `gt`. With options.small, both volumes are restricted to the small-airway
/// region of `gt` before the small-airway metrics are computed.
MetricsReport evaluate(const BinaryMask& pred, const BinaryMask& gt, const EvalOptions& opts = {});

/// Same, with a precomputed ground-truth graph.
MetricsReport evaluate(const BinaryMask& pred, const BinaryMask& gt, const SkeletonGraph& gt_graph,
                       const EvalOptions& opts);

nlohmann::json report_to_json(const MetricsReport& r, const std::string& case_name = "");

inline constexpr const char* kCsvHeader = "case,iou,dlr,dbr,precision,leakage,amr,iou_s,dlr_s,dbr_s";
std::string report_to_csv_row(const MetricsReport& r, const std::string& case_name);

}  // namespace bel
