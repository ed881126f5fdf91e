#include "bel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace bel {

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& gt) {
    require_same_dims(pred, gt, "confusion");
    ConfusionCounts c;
    for (std::int64_t i = 0; i < gt.size(); ++i) {
        const bool p = pred[i] != 0, g = gt[i] != 0;
        c.tp += p && g;
        c.fp += p && !g;
        c.fn += !p && g;
        c.tn += !p && !g;
    }
    return c;
}

namespace {
double ratio(std::int64_t num, std::int64_t den) {
    return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}
}  // namespace

OverlapMetrics overlap_metrics(const ConfusionCounts& c) {
    return {ratio(c.tp, c.tp + c.fp + c.fn), ratio(c.tp, c.tp + c.fp), ratio(c.fp, c.tp + c.fn),
            ratio(c.fn, c.tp + c.fn)};
}

double dlr(const BinaryMask& pred, const Centerline& gt_centerline) {
    require_same_dims(pred, gt_centerline, "dlr");
    std::int64_t total = 0, hit = 0;
    for (std::int64_t i = 0; i < pred.size(); ++i)
        if (gt_centerline[i]) {
            ++total;
            hit += pred[i] != 0;
        }
    if (total == 0) throw EmptyInputError("dlr: ground-truth centerline is empty");
    return ratio(hit, total);
}

double dlr_length(const BinaryMask& pred, const SkeletonGraph& g) {
    if (pred.dims() != g.dims) throw ParameterError("dlr_length: mask and graph dims differ");
    if (g.branches.empty()) throw EmptyInputError("dlr_length: graph has no branches");
    double total = 0.0, hit = 0.0;
    auto step = [&](std::int64_t a, std::int64_t b) {
        const auto ca = pred.coords(a), cb = pred.coords(b);
        const double dx = double(ca[0] - cb[0]) * g.spacing.sx, dy = double(ca[1] - cb[1]) * g.spacing.sy,
                     dz = double(ca[2] - cb[2]) * g.spacing.sz;
        const double len = std::sqrt(dx * dx + dy * dy + dz * dz);
        total += len;
        if (pred[a] && pred[b]) hit += len;
    };
    for (const auto& b : g.branches) {
        std::vector<std::int64_t> path;
        // nearest voxel of each end node to the path
        auto attach = [&](std::int32_t node, std::int64_t near) {
            std::int64_t best = g.nodes[node].voxels.front();
            std::int64_t best_d = -1;
            const auto cn = pred.coords(near);
            for (auto v : g.nodes[node].voxels) {
                const auto cv = pred.coords(v);
                const std::int64_t d = std::max({std::abs(cv[0] - cn[0]), std::abs(cv[1] - cn[1]),
                                                 std::abs(cv[2] - cn[2])});
                if (best_d < 0 || d < best_d) {
                    best_d = d;
                    best = v;
                }
            }
            return best;
        };
        if (b.voxels.empty()) {
            const auto a = g.nodes[b.from_node].voxels.front();
            path = {a, attach(b.to_node, a)};
        } else {
            path.push_back(attach(b.from_node, b.voxels.front()));
            path.insert(path.end(), b.voxels.begin(), b.voxels.end());
            path.push_back(attach(b.to_node, b.voxels.back()));
        }
        for (std::size_t k = 1; k < path.size(); ++k) step(path[k - 1], path[k]);
    }
    return total > 0.0 ? hit / total : 0.0;
}

double dbr(const BinaryMask& pred, const SkeletonGraph& g, double threshold) {
    if (pred.dims() != g.dims) throw ParameterError("dbr: mask and graph dims differ");
    if (g.branches.empty()) throw EmptyInputError("dbr: graph has no branches");
    if (!(threshold > 0.0 && threshold <= 1.0)) throw ParameterError("dbr: threshold must lie in (0,1]");
    std::int64_t detected = 0;
    for (const auto& b : g.branches) {
        const auto vox = g.coverage_voxels(b.id);
        std::int64_t hit = 0;
        for (auto v : vox) hit += pred[v] != 0;
        if (!vox.empty() && static_cast<double>(hit) >= threshold * static_cast<double>(vox.size()))
            ++detected;
    }
    return ratio(detected, static_cast<std::int64_t>(g.branches.size()));
}

MetricsReport evaluate(const BinaryMask& pred, const BinaryMask& gt, const EvalOptions& opts) {
    require_same_dims(pred, gt, "evaluate");
    require_binary(gt, "ground truth");
    if (count_foreground(gt) == 0) throw EmptyInputError("evaluate: ground truth is empty");
    return evaluate(pred, gt, build_graph(thin(gt), opts.root_side), opts);
}

MetricsReport evaluate(const BinaryMask& pred_in, const BinaryMask& gt, const SkeletonGraph& graph,
                       const EvalOptions& opts) {
    require_same_dims(pred_in, gt, "evaluate");
    require_binary(pred_in, "prediction");
    require_binary(gt, "ground truth");
    if (count_foreground(gt) == 0) throw EmptyInputError("evaluate: ground truth is empty");

    const BinaryMask pred =
        (opts.lcc && count_foreground(pred_in) > 0) ? largest_component(pred_in, opts.connectivity) : pred_in;

    MetricsReport r;
    r.options = opts;
    r.counts = confusion(pred, gt);
    const OverlapMetrics om = overlap_metrics(r.counts);
    r.iou = om.iou;
    r.precision = om.precision;
    r.leakage = om.leakage;
    r.amr = om.amr;

    const Centerline cl = graph.centerline();
    r.centerline_voxels = count_foreground(cl);
    r.branches = static_cast<std::int64_t>(graph.branches.size());
    r.dlr = dlr(pred, cl);
    r.dbr = graph.branches.empty() ? (r.dlr >= opts.branch_threshold ? 1.0 : 0.0)
                                   : dbr(pred, graph, opts.branch_threshold);

    if (opts.small) {
        if (graph.max_generation() < opts.drop_generations)
            throw DegenerateInputError("evaluate: no branches of generation >= " +
                                       std::to_string(opts.drop_generations) + " in ground truth");
        const BinaryMask region = small_airway_mask(gt, graph, opts.drop_generations);
        const BinaryMask ps = mask_and(pred, region);
        const BinaryMask gs = mask_and(gt, region);
        SmallAirwayMetrics sm;
        sm.iou = overlap_metrics(confusion(ps, gs)).iou;

        // centerline voxels and branches of the retained generations
        SkeletonGraph sub;
        sub.dims = graph.dims;
        sub.spacing = graph.spacing;
        sub.nodes = graph.nodes;
        sub.root = graph.root;
        Centerline scl = Centerline::like(cl);
        for (const auto& b : graph.branches) {
            if (b.generation < opts.drop_generations) continue;
            Branch nb = b;
            nb.id = static_cast<std::int32_t>(sub.branches.size());
            sub.branches.push_back(nb);
            for (auto v : b.voxels) scl[v] = 1;
            if (b.voxels.empty())
                for (auto v : graph.coverage_voxels(b.id)) scl[v] = 1;
        }
        sm.dlr = dlr(pred, scl);
        sm.dbr = dbr(pred, sub, opts.branch_threshold);
        r.small = sm;
    }
    return r;
}

nlohmann::json report_to_json(const MetricsReport& r, const std::string& case_name) {
    nlohmann::json j = {
        {"iou", r.iou},
        {"dlr", r.dlr},
        {"dbr", r.dbr},
        {"precision", r.precision},
        {"leakage", r.leakage},
        {"amr", r.amr},
        {"counts", {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"fn", r.counts.fn}, {"tn", r.counts.tn}}},
        {"centerline_voxels", r.centerline_voxels},
        {"branches", r.branches},
        {"config",
         {{"lcc", r.options.lcc},
          {"connectivity", static_cast<int>(r.options.connectivity)},
          {"branch_threshold", r.options.branch_threshold},
          {"small", r.options.small},
          {"drop_generations", r.options.drop_generations}}},
    };
    if (!case_name.empty()) j["case"] = case_name;
    if (r.small) j["small"] = {{"iou_s", r.small->iou}, {"dlr_s", r.small->dlr}, {"dbr_s", r.small->dbr}};
    return j;
}

std::string report_to_csv_row(const MetricsReport& r, const std::string& case_name) {
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.10g", v);
        return std::string(buf);
    };
    std::string row = case_name;
    for (double v : {r.iou, r.dlr, r.dbr, r.precision, r.leakage, r.amr}) row += "," + num(v);
    if (r.small)
        for (double v : {r.small->iou, r.small->dlr, r.small->dbr}) row += "," + num(v);
    else
        row += ",,,";
    return row;
}

}  // namespace bel
