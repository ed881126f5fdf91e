#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bel/volume.hpp"

namespace bel {

/// Source of the distance term in the weight map.
enum class WeightMode { boundary, centerline, uniform };

/// How d_max is taken: over the whole foreground, or per 26-connected component.
enum class DmaxScope { global, per_component };

WeightMode weight_mode_from_string(const std::string& s);
std::string to_string(WeightMode m);

/// Scalars of the weighted root-Tversky family.
struct LossParams {
    double alpha = 0.2;
    double beta = 0.8;
    double r = 0.7;
    double gamma = 1.0;
    double mu = 0.75;
    double theta = 0.05;
    WeightMode mode = WeightMode::boundary;
    DmaxScope dmax_scope = DmaxScope::global;
    /// Lower clamp applied to p before evaluating p^(r-1) in the gradient.
    double clamp = 1e-6;

    /// alpha = 0.2, beta = 1 - alpha, mu = (1 - 2 alpha)/(1 - alpha) = 0.75, theta = 0.05.
    static LossParams standard(double gamma, double r, WeightMode mode = WeightMode::boundary);

    /// Throws ParameterError when a field is out of range.
    void validate() const;
};

/// Named configurations: "bel_0.4" ... "bel_1" (r = 0.7), "bel_0.6/r0.5" style
/// names for every grid point, "gul_<gamma>" for the centerline variant.
LossParams preset(const std::string& name);
std::vector<std::string> preset_names();

/// Hyperparameter grid searched for the boundary and centerline losses.
inline constexpr double kGammaGrid[] = {0.4, 0.6, 0.8, 1.0};
inline constexpr double kRGrid[] = {0.5, 0.7};

using WeightMap = RealVolume;

/// Per-voxel weights: 1 on background, on foreground
///     (1 - mu (d/d_max)^gamma) (1 + theta B)
/// with d the boundary or centerline distance per `params.mode`. When d_max is 0
/// the ratio d/d_max is taken as 0.
WeightMap weight_map(const BinaryMask& g, const LossParams& params,
                     const RealVolume* breakage = nullptr);

/// Same, with the distance volume supplied by the caller.
WeightMap weight_map_from_distance(const BinaryMask& g, const RealVolume& distance,
                                   const LossParams& params, const RealVolume* breakage = nullptr);

struct LossValue {
    double value = 0.0;
    /// Set when the ratio is undefined (empty prediction and empty ground truth).
    bool degenerate = false;
};

inline constexpr double kDenominatorGuard = 1e-7;

/// 1 - sum(w p^r g) / sum(w (alpha p + beta g)).
LossValue bel_loss(const ProbabilityVolume& p, const BinaryMask& g, const WeightMap& w,
                   const LossParams& params);

/// d(bel_loss)/dp with w held constant.
RealVolume bel_grad(const ProbabilityVolume& p, const BinaryMask& g, const WeightMap& w,
                    const LossParams& params);

/// 1 - 2 sum(pg) / (sum p + sum g).
LossValue dice_loss(const ProbabilityVolume& p, const BinaryMask& g);

/// bel_loss with w = 1 and r = 1.
LossValue tversky_loss(const ProbabilityVolume& p, const BinaryMask& g, double alpha, double beta);

/// bel_loss with centerline-distance weights and no breakage term.
LossValue gul_loss(const ProbabilityVolume& p, const BinaryMask& g, const LossParams& params);

}  // namespace bel
