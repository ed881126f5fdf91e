// belt: command-line front end for weights, losses, metrics, skeletons and phantoms.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bel/errors.hpp"
#include "bel/losses.hpp"
#include "bel/metrics.hpp"
#include "bel/nifti.hpp"
#include "bel/phantom.hpp"
#include "bel/skeleton.hpp"
#include "bel/softskel.hpp"

using namespace bel;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kFailure = 1, kParameter = 2, kFormat = 3, kDegenerate = 4 };

json read_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw FormatError("file", "cannot open " + path);
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw FormatError("json", path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw FormatError("file", "cannot write " + path);
    f << text;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

RootSide root_side_from(const std::string& s) {
    return s == "min_z" ? RootSide::min_z : RootSide::max_z;
}

// ---------------------------------------------------------------------------
// Loss parameters: named preset, then values from a JSON file, then flags.

struct ParamFlags {
    std::string preset;
    std::string file;
    std::optional<double> alpha, r, gamma, mu, theta;
    std::optional<std::string> mode, dmax_scope;

    void add_to(CLI::App* app) {
        app->add_option("--preset", preset, "named configuration, e.g. bel_0.6/r0.5 or gul_1");
        app->add_option("--params", file, "JSON file with loss parameters")->check(CLI::ExistingFile);
        app->add_option("--alpha", alpha, "weight of p in the denominator; beta = 1 - alpha");
        app->add_option("--r", r, "exponent on p in the numerator, (0,1]");
        app->add_option("--gamma", gamma, "distance exponent");
        app->add_option("--mu", mu, "interior down-weighting, [0,1)");
        app->add_option("--theta", theta, "breakage emphasis");
        app->add_option("--mode", mode, "weight map: boundary|centerline|uniform")
            ->check(CLI::IsMember({"boundary", "centerline", "uniform"}));
        app->add_option("--dmax-scope", dmax_scope, "normalization of distances: global|per_component")
            ->check(CLI::IsMember({"global", "per_component"}));
    }

    LossParams resolve(LossParams base) const {
        json j = file.empty() ? json::object() : read_json(file);
        const std::string name = !preset.empty() ? preset : j.value("preset", std::string());
        LossParams p = name.empty() ? base : bel::preset(name);
        auto take = [&](const char* key, double& dst, const std::optional<double>& flag) {
            if (j.contains(key)) dst = j.at(key).get<double>();
            if (flag) dst = *flag;
        };
        try {
            take("alpha", p.alpha, alpha);
            p.beta = 1.0 - p.alpha;
            take("r", p.r, r);
            take("gamma", p.gamma, gamma);
            take("mu", p.mu, mu);
            take("theta", p.theta, theta);
            std::string m = j.value("mode", to_string(p.mode));
            if (mode) m = *mode;
            p.mode = weight_mode_from_string(m);
            std::string s = j.value("dmax_scope", std::string(p.dmax_scope == DmaxScope::global ? "global" : "per_component"));
            if (dmax_scope) s = *dmax_scope;
            if (s != "global" && s != "per_component") throw ParameterError("unknown dmax_scope '" + s + "'");
            p.dmax_scope = s == "global" ? DmaxScope::global : DmaxScope::per_component;
        } catch (const json::exception& e) {
            throw ParameterError(std::string("loss parameters: ") + e.what());
        }
        p.validate();
        return p;
    }
};

json params_to_json(const LossParams& p) {
    return {{"alpha", p.alpha}, {"beta", p.beta},   {"r", p.r},
            {"gamma", p.gamma}, {"mu", p.mu},       {"theta", p.theta},
            {"mode", to_string(p.mode)},
            {"dmax_scope", p.dmax_scope == DmaxScope::global ? "global" : "per_component"}};
}

// ---------------------------------------------------------------------------

struct WeightsCmd {
    std::string gt, pred, out;
    int iters = kDefaultSkeletonIterations;
    ParamFlags params;

    void run() const {
        const NiftiImage gi = read_nifti(gt);
        const BinaryMask g = to_mask(gi);
        const LossParams p = params.resolve(LossParams::standard(1.0, 0.7));
        std::optional<RealVolume> b;
        if (!pred.empty() && p.theta > 0.0 && p.mode == WeightMode::boundary) {
            const RealVolume pv = read_real(pred);
            require_probability(pv, "prediction");
            b = breakage_map(g, pv, iters);
        }
        write_nifti(weight_map(g, p, b ? &*b : nullptr), out, &gi.header);
    }
};

struct LossCmd {
    std::string pred, gt, loss = "bel", grad;
    int iters = kDefaultSkeletonIterations;
    double tversky_alpha = 0.2, tversky_beta = 0.8;
    ParamFlags params;

    void run() const {
        if (!grad.empty() && (loss == "dice" || loss == "tversky"))
            throw ParameterError("--grad is only available for bel and gul");
        const RealVolume p = read_real(pred);
        require_probability(p, "prediction");
        const NiftiImage gi = read_nifti(gt);
        const BinaryMask g = to_mask(gi);
        require_same_dims(p, g, "loss");

        json j = {{"type", loss}};
        LossValue v;
        if (loss == "dice") {
            v = dice_loss(p, g);
        } else if (loss == "tversky") {
            v = tversky_loss(p, g, tversky_alpha, tversky_beta);
            j["params"] = {{"alpha", tversky_alpha}, {"beta", tversky_beta}};
        } else {
            LossParams lp = params.resolve(LossParams::standard(1.0, 0.7));
            if (loss == "gul") {
                lp.mode = WeightMode::centerline;
                lp.theta = 0.0;
            }
            // B is taken from the prediction being scored
            std::optional<RealVolume> b;
            if (lp.theta > 0.0) b = breakage_map(g, p, iters);
            const WeightMap w = weight_map(g, lp, b ? &*b : nullptr);
            v = bel_loss(p, g, w, lp);
            if (!grad.empty()) write_nifti(bel_grad(p, g, w, lp), grad, &gi.header);
            j["params"] = params_to_json(lp);
        }
        j["loss"] = v.value;
        j["degenerate"] = v.degenerate;
        std::cout << j.dump() << "\n";
    }
};

struct MetricsCmd {
    std::string pred, gt, out, case_name;
    bool lcc = true, small = false;
    int connectivity = 26;
    int drop = 2;
    double threshold = 0.8;
    std::string root = "max_z";

    void run() const {
        const BinaryMask p = read_mask(pred);
        const BinaryMask g = read_mask(gt);
        EvalOptions o;
        o.lcc = lcc;
        o.small = small;
        o.connectivity = connectivity_from_int(connectivity);
        o.drop_generations = drop;
        o.branch_threshold = threshold;
        o.root_side = root_side_from(root);
        const MetricsReport r = evaluate(p, g, o);
        if (ends_with(out, ".csv"))
            write_text(out, std::string(kCsvHeader) + "\n" + report_to_csv_row(r, case_name) + "\n");
        else
            write_text(out, report_to_json(r, case_name).dump(2) + "\n");
    }
};

struct SkeletonCmd {
    std::string in, out, graph;
    std::string root = "max_z";

    void run() const {
        const NiftiImage img = read_nifti(in);
        const BinaryMask m = to_mask(img);
        const Centerline c = thin(m);
        write_nifti(c, out, &img.header);
        if (!graph.empty()) write_text(graph, graph_to_json(build_graph(c, root_side_from(root))).dump(2) + "\n");
    }
};

struct BreakageCmd {
    std::string gt, pred, out;
    int iters = kDefaultSkeletonIterations;

    void run() const {
        const NiftiImage gi = read_nifti(gt);
        const BinaryMask g = to_mask(gi);
        const RealVolume p = read_real(pred);
        require_probability(p, "prediction");
        write_nifti(breakage_map(g, p, iters), out, &gi.header);
    }
};

struct PhantomCmd {
    std::string spec, out, truth;
    std::optional<int> depth;
    std::optional<std::uint64_t> seed;
    std::optional<double> angle;
    std::vector<std::string> breaks, leaks;

    void run() const {
        TreeSpec s = spec.empty() ? TreeSpec{} : tree_spec_from_json(read_json(spec));
        if (depth) s.depth = *depth;
        if (seed) s.seed = *seed;
        if (angle) s.branching_angle = *angle;
        s.validate();
        const PhantomTruth t = generate(s);

        BinaryMask mask = t.mask;
        json log = json::array();
        for (const auto& b : breaks) {
            const auto colon = b.find(':');
            if (colon == std::string::npos) throw ParameterError("--break expects id:gap, got '" + b + "'");
            const int id = parse_int(b.substr(0, colon), "--break");
            const double gap = parse_double(b.substr(colon + 1), "--break");
            const Degradation d = break_branch(t, mask, id, gap);
            mask = d.mask;
            log.push_back({{"kind", "break"},
                           {"branch", id},
                           {"gap", gap},
                           {"removed_voxels", d.removed_voxels},
                           {"erased_centerline_voxels", d.erased_centerline.size()}});
        }
        for (const auto& l : leaks) {
            const auto colon = l.find(':');
            if (colon == std::string::npos) throw ParameterError("--leak expects x,y,z:r, got '" + l + "'");
            Index3 c{};
            std::string xyz = l.substr(0, colon);
            for (int a = 0; a < 3; ++a) {
                const auto comma = xyz.find(',');
                if ((a < 2) == (comma == std::string::npos))
                    throw ParameterError("--leak expects x,y,z:r, got '" + l + "'");
                c[a] = parse_int(xyz.substr(0, comma), "--leak");
                xyz = a < 2 ? xyz.substr(comma + 1) : "";
            }
            const double radius = parse_double(l.substr(colon + 1), "--leak");
            const Degradation d = add_leak(t, mask, c, radius);
            mask = d.mask;
            log.push_back({{"kind", "leak"},
                           {"center", {c[0], c[1], c[2]}},
                           {"radius", radius},
                           {"added_voxels", d.added_voxels}});
        }
        write_nifti(mask, out);
        if (!truth.empty()) {
            json j = truth_to_json(t);
            j["degradations"] = log;
            write_text(truth, j.dump(2) + "\n");
        }
    }

    static int parse_int(const std::string& s, const char* what) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(s, &used);
            if (used == s.size()) return v;
        } catch (const std::logic_error&) {
        }
        throw ParameterError(std::string(what) + ": '" + s + "' is not an integer");
    }
    static double parse_double(const std::string& s, const char* what) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used == s.size()) return v;
        } catch (const std::logic_error&) {
        }
        throw ParameterError(std::string(what) + ": '" + s + "' is not a number");
    }
};

struct PatchesCmd {
    std::string in;
    std::vector<std::int64_t> size{256};
    double overlap = 0.25;
    bool list = false;

    void run() const {
        const NiftiImage img = read_nifti(in);
        if (size.size() != 1 && size.size() != 3) throw ParameterError("--size takes 1 or 3 values");
        const Dims patch = size.size() == 1 ? Dims{size[0], size[0], size[0]} : Dims{size[0], size[1], size[2]};
        const PatchGrid grid = sliding_windows(img.header.dims, patch, overlap);
        json j = {{"dims", {img.header.dims.nx, img.header.dims.ny, img.header.dims.nz}},
                  {"patch", {grid.patch.nx, grid.patch.ny, grid.patch.nz}},
                  {"overlap", overlap},
                  {"count", grid.origins.size()}};
        if (list) {
            json o = json::array();
            for (const auto& c : grid.origins) o.push_back({c[0], c[1], c[2]});
            j["origins"] = std::move(o);
        }
        std::cout << j.dump() << "\n";
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"belt: weight maps, losses and metrics for tubular segmentation"};
    app.require_subcommand(1);

    WeightsCmd weights;
    auto* w = app.add_subcommand("weights", "write the per-voxel loss weight map");
    w->add_option("--gt", weights.gt, "ground-truth mask")->required()->check(CLI::ExistingFile);
    w->add_option("--pred", weights.pred, "prediction; enables the breakage term")->check(CLI::ExistingFile);
    w->add_option("--breakage-iters", weights.iters, "soft skeleton iterations")->check(CLI::PositiveNumber);
    w->add_option("--out", weights.out, "output NIfTI (float32)")->required();
    weights.params.add_to(w);

    LossCmd loss;
    auto* l = app.add_subcommand("loss", "print a loss value as JSON");
    l->add_option("--pred", loss.pred, "probability map")->required()->check(CLI::ExistingFile);
    l->add_option("--gt", loss.gt, "ground-truth mask")->required()->check(CLI::ExistingFile);
    l->add_option("--loss", loss.loss, "dice|tversky|gul|bel")
        ->check(CLI::IsMember({"dice", "tversky", "gul", "bel"}))
        ->capture_default_str();
    l->add_option("--grad", loss.grad, "write the gradient with respect to the prediction");
    l->add_option("--breakage-iters", loss.iters, "soft skeleton iterations")->check(CLI::PositiveNumber);
    l->add_option("--tversky-alpha", loss.tversky_alpha)->capture_default_str();
    l->add_option("--tversky-beta", loss.tversky_beta)->capture_default_str();
    loss.params.add_to(l);

    MetricsCmd metrics;
    auto* m = app.add_subcommand("metrics", "evaluate a binary prediction");
    m->add_option("--pred", metrics.pred, "predicted mask")->required()->check(CLI::ExistingFile);
    m->add_option("--gt", metrics.gt, "ground-truth mask")->required()->check(CLI::ExistingFile);
    m->add_flag("--lcc,!--no-lcc", metrics.lcc, "keep only the largest component of the prediction (default on)");
    m->add_option("--connectivity", metrics.connectivity, "6|18|26")->check(CLI::IsMember({6, 18, 26}));
    m->add_flag("--small", metrics.small, "add metrics restricted to the small airways");
    m->add_option("--drop-generations", metrics.drop, "generations excluded by --small")
        ->check(CLI::NonNegativeNumber);
    m->add_option("--branch-threshold", metrics.threshold, "covered fraction for a detected branch")
        ->check(CLI::Range(0.0, 1.0));
    m->add_option("--root-side", metrics.root, "max_z|min_z")->check(CLI::IsMember({"max_z", "min_z"}));
    m->add_option("--case", metrics.case_name, "case name recorded in the report");
    m->add_option("--out", metrics.out, "report path, .json or .csv (default: JSON on stdout)");

    SkeletonCmd skeleton;
    auto* s = app.add_subcommand("skeleton", "thin a mask to a one-voxel centerline");
    s->add_option("--in", skeleton.in, "input mask")->required()->check(CLI::ExistingFile);
    s->add_option("--out", skeleton.out, "centerline mask")->required();
    s->add_option("--graph", skeleton.graph, "branch graph JSON");
    s->add_option("--root-side", skeleton.root, "max_z|min_z")->check(CLI::IsMember({"max_z", "min_z"}));

    BreakageCmd breakage;
    auto* b = app.add_subcommand("breakage", "write the soft breakage map");
    b->add_option("--gt", breakage.gt, "ground-truth mask")->required()->check(CLI::ExistingFile);
    b->add_option("--pred", breakage.pred, "probability map")->required()->check(CLI::ExistingFile);
    b->add_option("--iters", breakage.iters, "soft skeleton iterations")->check(CLI::PositiveNumber);
    b->add_option("--out", breakage.out, "output NIfTI (float32)")->required();

    PhantomCmd phantom;
    auto* p = app.add_subcommand("phantom", "generate a synthetic tree, optionally degraded");
    p->add_option("--spec", phantom.spec, "tree spec JSON")->check(CLI::ExistingFile);
    p->add_option("--depth", phantom.depth, "overrides the spec file");
    p->add_option("--seed", phantom.seed, "overrides the spec file");
    p->add_option("--angle", phantom.angle, "branching angle in degrees; overrides the spec file");
    p->add_option("--out", phantom.out, "mask NIfTI")->required();
    p->add_option("--truth", phantom.truth, "truth JSON (graph, tubes, degradations)");
    p->add_option("--break", phantom.breaks, "erase a slab: id:gap (repeatable)");
    p->add_option("--leak", phantom.leaks, "add a ball: x,y,z:r (repeatable)");

    PatchesCmd patches;
    auto* t = app.add_subcommand("patches", "sliding-window origins for a volume");
    t->add_option("--in", patches.in, "input NIfTI")->required()->check(CLI::ExistingFile);
    t->add_option("--size", patches.size, "patch edge, or three edges")->expected(1, 3);
    t->add_option("--overlap", patches.overlap, "fractional overlap, [0,1)")->capture_default_str();
    t->add_flag("--list", patches.list, "print every origin");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kParameter;
    }

    try {
        if (*w) weights.run();
        if (*l) loss.run();
        if (*m) metrics.run();
        if (*s) skeleton.run();
        if (*b) breakage.run();
        if (*p) phantom.run();
        if (*t) patches.run();
    } catch (const FormatError& e) {
        std::cerr << "belt: format error: " << e.what() << "\n";
        return kFormat;
    } catch (const DegenerateInputError& e) {
        std::cerr << "belt: degenerate input: " << e.what() << "\n";
        return kDegenerate;
    } catch (const ParameterError& e) {
        std::cerr << "belt: " << e.what() << "\n";
        return kParameter;
    } catch (const EmptyInputError& e) {
        std::cerr << "belt: empty input: " << e.what() << "\n";
        return kParameter;
    } catch (const std::exception& e) {
        std::cerr << "belt: " << e.what() << "\n";
        return kFailure;
    }
    return kOk;
}
