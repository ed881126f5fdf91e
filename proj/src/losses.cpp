#include "bel/losses.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bel/kernels/kernels.hpp"
#include "bel/morphology.hpp"
#include "bel/skeleton.hpp"

namespace bel {

WeightMode weight_mode_from_string(const std::string& s) {
    if (s == "boundary") return WeightMode::boundary;
    if (s == "centerline") return WeightMode::centerline;
    if (s == "uniform") return WeightMode::uniform;
    throw ParameterError("unknown weight mode '" + s + "' (expected boundary|centerline|uniform)");
}

std::string to_string(WeightMode m) {
    switch (m) {
        case WeightMode::boundary: return "boundary";
        case WeightMode::centerline: return "centerline";
        default: return "uniform";
    }
}

LossParams LossParams::standard(double gamma, double r, WeightMode mode) {
    LossParams p;
    p.alpha = 0.2;
    p.beta = 1.0 - p.alpha;
    p.mu = (1.0 - 2.0 * p.alpha) / (1.0 - p.alpha);
    p.theta = 0.05;
    p.gamma = gamma;
    p.r = r;
    p.mode = mode;
    return p;
}

void LossParams::validate() const {
    auto fail = [](const std::string& what) { throw ParameterError("loss parameters: " + what); };
    for (double v : {alpha, beta, r, gamma, mu, theta, clamp})
        if (!std::isfinite(v)) fail("all values must be finite");
    if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0,1)");
    if (std::abs(alpha + beta - 1.0) > 1e-12) fail("alpha + beta must equal 1");
    if (!(r > 0.0 && r <= 1.0)) fail("r must lie in (0,1]");
    if (!(gamma > 0.0)) fail("gamma must be positive");
    if (!(mu >= 0.0 && mu < 1.0)) fail("mu must lie in [0,1)");
    if (!(theta >= 0.0)) fail("theta must be non-negative");
    if (!(clamp > 0.0 && clamp < 0.5)) fail("clamp must lie in (0,0.5)");
}

namespace {
std::string fmt_grid(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}
}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const char* family : {"bel", "gul"})
        for (double gm : kGammaGrid) {
            names.push_back(std::string(family) + "_" + fmt_grid(gm));
            for (double r : kRGrid)
                names.push_back(std::string(family) + "_" + fmt_grid(gm) + "/r" + fmt_grid(r));
        }
    return names;
}

LossParams preset(const std::string& name) {
    for (const char* family : {"bel", "gul"}) {
        const bool gul = std::string(family) == "gul";
        for (double gm : kGammaGrid) {
            const std::string base = std::string(family) + "_" + fmt_grid(gm);
            for (double r : {0.7, 0.5}) {
                const bool bare = r == 0.7 && name == base;
                if (bare || name == base + "/r" + fmt_grid(r)) {
                    LossParams p = LossParams::standard(
                        gm, r, gul ? WeightMode::centerline : WeightMode::boundary);
                    if (gul) p.theta = 0.0;
                    return p;
                }
            }
        }
    }
    throw ParameterError("unknown loss preset '" + name + "'");
}

// ---------------------------------------------------------------------------

WeightMap weight_map_from_distance(const BinaryMask& g, const RealVolume& distance,
                                   const LossParams& params, const RealVolume* breakage) {
    params.validate();
    require_same_dims(g, distance, "weight_map");
    if (breakage) require_same_dims(g, *breakage, "weight_map breakage");

    // d_max per scope; component labels only when needed
    std::vector<double> dmax;
    LabelVolume comp;
    if (params.dmax_scope == DmaxScope::per_component) {
        Components cc = connected_components(g, Connectivity::twentysix);
        dmax.assign(static_cast<std::size_t>(cc.count) + 1, 0.0);
        for (std::int64_t i = 0; i < g.size(); ++i)
            if (g[i]) dmax[cc.labels[i]] = std::max(dmax[cc.labels[i]], distance[i]);
        comp = std::move(cc.labels);
    } else {
        dmax.assign(1, 0.0);
        for (std::int64_t i = 0; i < g.size(); ++i)
            if (g[i]) dmax[0] = std::max(dmax[0], distance[i]);
    }

    WeightMap w = WeightMap::like(g, 1.0);
    const std::int64_t n = g.size();
    const bool per_comp = params.dmax_scope == DmaxScope::per_component;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        if (!g[i]) continue;
        const double dm = dmax[per_comp ? comp[i] : 0];
        const double ratio = dm > 0.0 ? distance[i] / dm : 0.0;
        const double b = breakage ? (*breakage)[i] : 0.0;
        w[i] = (1.0 - params.mu * std::pow(ratio, params.gamma)) * (1.0 + params.theta * b);
    }
    return w;
}

WeightMap weight_map(const BinaryMask& g, const LossParams& params, const RealVolume* breakage) {
    params.validate();
    require_binary(g, "ground truth");
    if (count_foreground(g) == 0) return weight_map_from_distance(g, RealVolume::like(g), params, breakage);
    switch (params.mode) {
        case WeightMode::boundary:
            return weight_map_from_distance(g, edt(boundary(g), g).values, params, breakage);
        case WeightMode::centerline:
            return weight_map_from_distance(g, centerline_distance(g).values, params, breakage);
        default:
            return weight_map_from_distance(g, RealVolume::like(g), params, breakage);
    }
}

// ---------------------------------------------------------------------------

namespace {

kernels::LossSums sums(const ProbabilityVolume& p, const BinaryMask& g, const WeightMap* w, double r,
                       double alpha, double beta) {
    require_same_dims(p, g, "loss");
    if (w) require_same_dims(p, *w, "loss weights");
    kernels::LossSumArgs a;
    a.p = p.values();
    a.g = g.values();
    if (w) a.w = w->values();
    a.r = r;
    a.alpha = alpha;
    a.beta = beta;
    return kernels::omp::loss_sums(a);
}

LossValue ratio_loss(double numerator, double denominator) {
    if (denominator == 0.0) return {0.0, true};
    return {1.0 - numerator / std::max(denominator, kDenominatorGuard), false};
}

}  // namespace

LossValue bel_loss(const ProbabilityVolume& p, const BinaryMask& g, const WeightMap& w,
                   const LossParams& params) {
    params.validate();
    const auto s = sums(p, g, &w, params.r, params.alpha, params.beta);
    return ratio_loss(s.numerator, s.denominator);
}

RealVolume bel_grad(const ProbabilityVolume& p, const BinaryMask& g, const WeightMap& w,
                    const LossParams& params) {
    params.validate();
    const auto s = sums(p, g, &w, params.r, params.alpha, params.beta);
    const double num = s.numerator;
    const double den = std::max(s.denominator, kDenominatorGuard);
    const double den2 = den * den;
    RealVolume grad = RealVolume::like(p);
    const std::int64_t n = p.size();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const double dnum =
            g[i] ? w[i] * params.r * std::pow(std::max(p[i], params.clamp), params.r - 1.0) : 0.0;
        const double dden = w[i] * params.alpha;
        grad[i] = -(dnum * den - num * dden) / den2;
    }
    return grad;
}

LossValue dice_loss(const ProbabilityVolume& p, const BinaryMask& g) {
    const auto s = sums(p, g, nullptr, 1.0, 0.5, 0.5);
    return ratio_loss(2.0 * s.numerator, s.sum_p + s.sum_g);
}

LossValue tversky_loss(const ProbabilityVolume& p, const BinaryMask& g, double alpha, double beta) {
    if (!(alpha >= 0.0 && beta >= 0.0 && alpha + beta > 0.0))
        throw ParameterError("tversky_loss: alpha and beta must be non-negative, not both zero");
    const auto s = sums(p, g, nullptr, 1.0, alpha, beta);
    return ratio_loss(s.numerator, s.denominator);
}

LossValue gul_loss(const ProbabilityVolume& p, const BinaryMask& g, const LossParams& params) {
    LossParams cp = params;
    cp.mode = WeightMode::centerline;
    const WeightMap w = weight_map(g, cp, nullptr);
    return bel_loss(p, g, w, cp);
}

}  // namespace bel
