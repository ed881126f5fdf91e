#include "bel/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace bel {

namespace {

using Vec3 = std::array<double, 3>;

Vec3 add(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Vec3 scale(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
Vec3 normalized(const Vec3& a) { return scale(a, 1.0 / std::sqrt(dot(a, a))); }
Vec3 to_vec(const Index3& p) { return {double(p[0]), double(p[1]), double(p[2])}; }
Index3 round_vec(const Vec3& a) {
    return {static_cast<std::int64_t>(std::floor(a[0] + 0.5)), static_cast<std::int64_t>(std::floor(a[1] + 0.5)),
            static_cast<std::int64_t>(std::floor(a[2] + 0.5))};
}

// Squared distance from p to segment [a,b] and the axial coordinate of the projection (voxels from a).
std::pair<double, double> segment_distance2(const Vec3& p, const Vec3& a, const Vec3& b) {
    const Vec3 ab{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
    const Vec3 ap{p[0] - a[0], p[1] - a[1], p[2] - a[2]};
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(ap, ab) / len2 : 0.0;
    const double axial = len2 > 0.0 ? dot(ap, ab) / std::sqrt(len2) : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec3 q{a[0] + t * ab[0] - p[0], a[1] + t * ab[1] - p[1], a[2] + t * ab[2] - p[2]};
    return {dot(q, q), axial};
}

// floor(num / den) for den > 0
std::int64_t floor_div(std::int64_t num, std::int64_t den) {
    std::int64_t q = num / den;
    if ((num % den != 0) && (num < 0)) --q;
    return q;
}

// 26-connected walk between voxel centers; coordinates rounded half up in exact integer arithmetic.
std::vector<Index3> walk(const Index3& a, const Index3& b) {
    const std::int64_t n =
        std::max({std::abs(b[0] - a[0]), std::abs(b[1] - a[1]), std::abs(b[2] - a[2])});
    std::vector<Index3> out;
    if (n == 0) return {a};
    for (std::int64_t i = 0; i <= n; ++i) {
        Index3 p{};
        for (int k = 0; k < 3; ++k) p[k] = a[k] + floor_div(2 * (b[k] - a[k]) * i + n, 2 * n);
        out.push_back(p);
    }
    return out;
}

double unit_from(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);  // [0,1), 53 bits
}

// Sampled segment-to-segment distance, exact enough for a clearance test.
double segment_gap(const Vec3& a0, const Vec3& a1, const Vec3& b0, const Vec3& b1) {
    const Vec3 d = add(a1, scale(a0, -1.0));
    const int steps = std::max(1, static_cast<int>(std::ceil(4.0 * std::sqrt(dot(d, d)))));
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= steps; ++k)
        best = std::min(best, segment_distance2(add(a0, scale(d, double(k) / steps)), b0, b1).first);
    return std::sqrt(best);
}

double branch_length(const PhantomBranch& b) {
    const Vec3 d = add(to_vec(b.end), scale(to_vec(b.start), -1.0));
    return std::sqrt(dot(d, d));
}

}  // namespace

void TreeSpec::validate() const {
    auto fail = [](const std::string& w) { throw ParameterError("tree spec: " + w); };
    if (depth < 0 || depth > 12) fail("depth must lie in [0,12]");
    if (!(root_radius > 0.0)) fail("root_radius must be positive");
    if (!(radius_decay > 0.0 && radius_decay < 1.0)) fail("radius_decay must lie in (0,1)");
    if (!(root_length >= 1.0)) fail("root_length must be at least 1 voxel");
    if (!(length_decay > 0.0 && length_decay <= 1.0)) fail("length_decay must lie in (0,1]");
    if (!(branching_angle > 0.0 && branching_angle < 180.0)) fail("branching_angle must lie in (0,180)");
    if (!(azimuth_jitter >= 0.0 && azimuth_jitter <= 90.0)) fail("azimuth_jitter must lie in [0,90]");
    if (!(margin >= 0.0)) fail("margin must be non-negative");
    if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0) fail("dims must be positive");
}

TreeSpec tree_spec_from_json(const nlohmann::json& j) {
    TreeSpec s;
    try {
        s.depth = j.value("depth", s.depth);
        s.root_radius = j.value("root_radius", s.root_radius);
        s.radius_decay = j.value("radius_decay", s.radius_decay);
        s.root_length = j.value("root_length", s.root_length);
        s.length_decay = j.value("length_decay", s.length_decay);
        s.branching_angle = j.value("branching_angle", s.branching_angle);
        s.seed = j.value("seed", s.seed);
        s.azimuth_jitter = j.value("azimuth_jitter", s.azimuth_jitter);
        s.margin = j.value("margin", s.margin);
        s.fill_crotch = j.value("fill_crotch", s.fill_crotch);
        if (j.contains("dims")) {
            const auto& d = j.at("dims");
            s.dims = {d.at(0).get<std::int64_t>(), d.at(1).get<std::int64_t>(), d.at(2).get<std::int64_t>()};
        }
        if (j.contains("spacing")) {
            const auto& d = j.at("spacing");
            s.spacing = {d.at(0).get<double>(), d.at(1).get<double>(), d.at(2).get<double>()};
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("tree spec: ") + e.what());
    }
    s.validate();
    return s;
}

nlohmann::json tree_spec_to_json(const TreeSpec& s) {
    return {{"depth", s.depth},
            {"root_radius", s.root_radius},
            {"radius_decay", s.radius_decay},
            {"root_length", s.root_length},
            {"length_decay", s.length_decay},
            {"branching_angle", s.branching_angle},
            {"dims", {s.dims.nx, s.dims.ny, s.dims.nz}},
            {"spacing", {s.spacing.sx, s.spacing.sy, s.spacing.sz}},
            {"seed", s.seed},
            {"azimuth_jitter", s.azimuth_jitter},
            {"margin", s.margin},
            {"fill_crotch", s.fill_crotch}};
}

PhantomTruth generate(const TreeSpec& spec) {
    spec.validate();
    PhantomTruth t;
    t.spec = spec;
    t.mask = BinaryMask(spec.dims, 0, spec.spacing);
    t.centerline = Centerline(spec.dims, 0, spec.spacing);
    t.owner = LabelVolume(spec.dims, 0, spec.spacing);

    std::mt19937_64 rng(spec.seed);
    const double half = spec.branching_angle * std::numbers::pi / 360.0;
    const double jitter = spec.azimuth_jitter * std::numbers::pi / 180.0;

    // Axis geometry, breadth-first so ids grow with generation.
    struct Frame {
        Vec3 dir;
        Vec3 perp;  // unit, normal to dir; the next branching plane contains it
        double length;
    };
    std::vector<Frame> frames;
    {
        PhantomBranch root;
        root.id = 0;
        root.radius = std::max(1.0, spec.root_radius);
        const double top = double(spec.dims.nz - 1) - spec.margin - std::ceil(root.radius);
        root.start = round_vec({double(spec.dims.nx - 1) / 2.0, double(spec.dims.ny - 1) / 2.0, top});
        const Frame f{{0.0, 0.0, -1.0}, {1.0, 0.0, 0.0}, spec.root_length};
        root.end = round_vec(add(to_vec(root.start), scale(f.dir, f.length)));
        t.branches.push_back(root);
        frames.push_back(f);
    }
    for (std::size_t k = 0; k < t.branches.size(); ++k) {
        if (t.branches[k].generation >= spec.depth) continue;
        const Frame f = frames[k];
        const PhantomBranch parent = t.branches[k];
        const double len = f.length * spec.length_decay;
        const double radius = std::max(1.0, parent.radius * spec.radius_decay);

        // Smallest surface gap between the two children and every branch
        // placed so far except their parent.
        auto clearance = [&](const std::array<Index3, 2>& ends) {
            double worst = std::numeric_limits<double>::infinity();
            for (const auto& e : ends)
                for (const auto& o : t.branches) {
                    if (o.id == parent.id) continue;
                    const double gap = segment_gap(to_vec(parent.end), to_vec(e), to_vec(o.start), to_vec(o.end));
                    worst = std::min(worst, gap - radius - o.radius);
                }
            return worst;
        };

        // The branching plane is twisted by a random azimuth. Draws that bring
        // a child within kClearance of a non-adjacent tube are rejected; after
        // kAttempts the draw with the widest clearance is used.
        constexpr int kAttempts = 32;
        constexpr double kClearance = 2.0;
        Vec3 side{}, best_side{};
        std::array<Vec3, 2> dirs{}, best_dirs{};
        std::array<Index3, 2> ends{}, best_ends{};
        double best_gap = -std::numeric_limits<double>::infinity();
        for (int attempt = 0; attempt < kAttempts; ++attempt) {
            const double u = 2.0 * unit_from(rng) - 1.0;
            const double phi = attempt == 0 ? u * jitter : u * std::numbers::pi;
            side = add(scale(f.perp, std::cos(phi)), scale(cross(f.dir, f.perp), std::sin(phi)));
            for (int c = 0; c < 2; ++c) {
                const double sign = c == 0 ? 1.0 : -1.0;
                dirs[c] = normalized(add(scale(f.dir, std::cos(half)), scale(side, sign * std::sin(half))));
                ends[c] = round_vec(add(to_vec(parent.end), scale(dirs[c], len)));
            }
            const double gap = clearance(ends);
            if (gap > best_gap) {
                best_gap = gap;
                best_side = side;
                best_dirs = dirs;
                best_ends = ends;
            }
            if (gap >= kClearance) break;
        }
        const Vec3 normal = normalized(cross(f.dir, best_side));
        for (int c = 0; c < 2; ++c) {
            PhantomBranch b;
            b.id = static_cast<std::int32_t>(t.branches.size());
            b.parent = parent.id;
            b.generation = parent.generation + 1;
            b.radius = radius;
            b.start = parent.end;
            b.end = best_ends[c];
            if (b.end == b.start)
                throw ParameterError("tree spec: branch " + std::to_string(b.id) + " is shorter than one voxel");
            t.branches.push_back(b);
            frames.push_back({best_dirs[c], normal, len});
        }
    }

    for (const auto& b : t.branches)
        for (int a = 0; a < 3; ++a) {
            const double lo = double(std::min(b.start[a], b.end[a])) - b.radius;
            const double hi = double(std::max(b.start[a], b.end[a])) + b.radius;
            if (lo < spec.margin || hi > double(spec.dims[a] - 1) - spec.margin)
                throw ParameterError("tree spec: branch " + std::to_string(b.id) + " (generation " +
                                     std::to_string(b.generation) + ") leaves the volume along axis " +
                                     std::string(1, "xyz"[a]));
        }

    // Rasterize; owner = nearest containing axis, ties to the smaller id.
    RealVolume best(spec.dims, std::numeric_limits<double>::infinity());
    for (auto& b : t.branches) {
        const Vec3 a = to_vec(b.start), e = to_vec(b.end);
        const double r2 = b.radius * b.radius;
        const auto reach = static_cast<std::int64_t>(std::ceil(b.radius));
        for (std::int64_t z = std::min(b.start[2], b.end[2]) - reach; z <= std::max(b.start[2], b.end[2]) + reach; ++z)
            for (std::int64_t y = std::min(b.start[1], b.end[1]) - reach; y <= std::max(b.start[1], b.end[1]) + reach; ++y)
                for (std::int64_t x = std::min(b.start[0], b.end[0]) - reach; x <= std::max(b.start[0], b.end[0]) + reach; ++x) {
                    if (!t.mask.contains(x, y, z)) continue;
                    const double d2 = segment_distance2({double(x), double(y), double(z)}, a, e).first;
                    if (d2 > r2) continue;
                    const std::int64_t i = t.mask.index(x, y, z);
                    t.mask[i] = 1;
                    if (d2 < best[i]) {
                        best[i] = d2;
                        t.owner[i] = b.id + 1;
                    }
                }
    }
    // Crotch fill: where two sibling tubes are still closer than a couple of
    // voxels, discrete tubes touch diagonally and enclose small tunnels.
    // The wedge between the sibling axes is filled out to the point where
    // their surfaces are kClearance voxels apart.
    if (spec.fill_crotch)
        for (std::size_t k = 1; k + 1 < t.branches.size(); k += 2) {
            const PhantomBranch& c0 = t.branches[k];
            const PhantomBranch& c1 = t.branches[k + 1];
            const Vec3 o = to_vec(c0.start), e0 = to_vec(c0.end), e1 = to_vec(c1.end);
            const double l0 = branch_length(c0), l1 = branch_length(c1);
            const double sep = std::sin(half);  // half the axis separation per unit length
            const double reach_len = std::min({c0.radius / sep, l0, l1});
            const Vec3 a = add(o, scale(add(e0, scale(o, -1.0)), reach_len / l0));
            const Vec3 b = add(o, scale(add(e1, scale(o, -1.0)), reach_len / l1));
            const double r = c0.radius, r2 = r * r;
            const int samples = std::max(1, static_cast<int>(std::ceil(4.0 * reach_len)));
            std::array<std::int64_t, 3> lo{}, hi{};
            for (int ax = 0; ax < 3; ++ax) {
                lo[ax] = static_cast<std::int64_t>(std::floor(std::min({o[ax], a[ax], b[ax]}) - r));
                hi[ax] = static_cast<std::int64_t>(std::ceil(std::max({o[ax], a[ax], b[ax]}) + r));
            }
            for (std::int64_t z = lo[2]; z <= hi[2]; ++z)
                for (std::int64_t y = lo[1]; y <= hi[1]; ++y)
                    for (std::int64_t x = lo[0]; x <= hi[0]; ++x) {
                        if (!t.mask.contains(x, y, z)) continue;
                        const std::int64_t i = t.mask.index(x, y, z);
                        if (t.mask[i]) continue;
                        const Vec3 p{double(x), double(y), double(z)};
                        bool inside = false;
                        for (int s = 0; s <= samples && !inside; ++s) {
                            const double u = double(s) / samples;
                            const Vec3 pa = add(o, scale(add(a, scale(o, -1.0)), u));
                            const Vec3 pb = add(o, scale(add(b, scale(o, -1.0)), u));
                            inside = segment_distance2(p, pa, pb).first <= r2;
                        }
                        if (!inside) continue;
                        t.mask[i] = 1;
                        const double d0 = segment_distance2(p, o, e0).first, d1 = segment_distance2(p, o, e1).first;
                        t.owner[i] = (d1 < d0 ? c1.id : c0.id) + 1;
                    }
        }

    for (std::int64_t i = 0; i < t.owner.size(); ++i)
        if (t.owner[i]) ++t.branches[t.owner[i] - 1].owned_voxels;

    for (auto& b : t.branches) {
        const auto path = walk(b.start, b.end);
        for (std::size_t k = 0; k < path.size(); ++k) {
            if (k == 0 && b.parent >= 0) continue;
            const std::int64_t i = t.mask.index(path[k][0], path[k][1], path[k][2]);
            if (t.centerline[i]) continue;
            t.centerline[i] = 1;
            b.centerline.push_back(i);
        }
    }
    return t;
}

std::int64_t PhantomTruth::total_centerline() const { return count_foreground(centerline); }

SkeletonGraph PhantomTruth::graph() const {
    SkeletonGraph g;
    g.dims = mask.dims();
    g.spacing = mask.spacing();
    auto add_node = [&](NodeKind kind, std::int64_t voxel) {
        SkeletonNode n;
        n.id = static_cast<std::int32_t>(g.nodes.size());
        n.kind = kind;
        n.voxels = {voxel};
        g.nodes.push_back(n);
        return n.id;
    };
    auto idx = [&](const Index3& p) { return mask.index(p[0], p[1], p[2]); };

    std::vector<std::int32_t> end_node(branches.size(), -1);
    g.root = add_node(NodeKind::endpoint, idx(branches.front().start));
    for (const auto& pb : branches) {
        const bool leaf = pb.generation >= spec.depth;
        end_node[pb.id] = add_node(leaf ? NodeKind::endpoint : NodeKind::junction, idx(pb.end));
    }
    for (const auto& pb : branches) {
        Branch b;
        b.id = pb.id;
        b.parent = pb.parent;
        b.generation = pb.generation;
        b.from_node = pb.parent < 0 ? g.root : end_node[pb.parent];
        b.to_node = end_node[pb.id];
        const std::int64_t from_voxel = g.nodes[b.from_node].voxels.front();
        const std::int64_t to_voxel = g.nodes[b.to_node].voxels.front();
        for (auto v : pb.centerline)
            if (v != from_voxel && v != to_voxel) b.voxels.push_back(v);
        b.length_mm = 0.0;
        std::int64_t prev = from_voxel;
        auto step = [&](std::int64_t a, std::int64_t c) {
            const auto ca = mask.coords(a), cc = mask.coords(c);
            const double dx = double(ca[0] - cc[0]) * g.spacing.sx, dy = double(ca[1] - cc[1]) * g.spacing.sy,
                         dz = double(ca[2] - cc[2]) * g.spacing.sz;
            return std::sqrt(dx * dx + dy * dy + dz * dz);
        };
        for (auto v : walk(pb.start, pb.end)) {
            const std::int64_t i = idx(v);
            b.length_mm += step(prev, i);
            prev = i;
        }
        g.branches.push_back(std::move(b));
    }
    for (const auto& b : g.branches) {
        g.nodes[b.from_node].branches.push_back(b.id);
        g.nodes[b.to_node].branches.push_back(b.id);
    }
    for (auto& n : g.nodes) std::sort(n.branches.begin(), n.branches.end());
    return g;
}

nlohmann::json truth_to_json(const PhantomTruth& t) {
    nlohmann::json j = graph_to_json(t.graph());
    j["spec"] = tree_spec_to_json(t.spec);
    j["total_centerline_voxels"] = t.total_centerline();
    j["mask_voxels"] = count_foreground(t.mask);
    nlohmann::json tubes = nlohmann::json::array();
    for (const auto& b : t.branches)
        tubes.push_back({{"id", b.id},
                         {"parent", b.parent},
                         {"generation", b.generation},
                         {"start", b.start},
                         {"end", b.end},
                         {"radius", b.radius},
                         {"centerline_voxels", b.centerline.size()},
                         {"owned_voxels", b.owned_voxels}});
    j["tubes"] = std::move(tubes);
    return j;
}

// ---------------------------------------------------------------------------

Degradation break_branch(const PhantomTruth& t, const BinaryMask& mask, std::int32_t branch_id,
                         double gap_voxels) {
    require_same_dims(mask, t.mask, "break_branch");
    if (branch_id < 0 || branch_id >= static_cast<std::int32_t>(t.branches.size()))
        throw ParameterError("break_branch: no branch with id " + std::to_string(branch_id));
    Degradation out{mask, {}, 0, 0};
    if (!(gap_voxels > 0.0)) return out;

    const PhantomBranch& b = t.branches[branch_id];
    const double len = branch_length(b);
    const bool whole = gap_voxels >= len;
    const double lo = len / 2.0 - gap_voxels / 2.0, hi = len / 2.0 + gap_voxels / 2.0;
    const Vec3 a = to_vec(b.start), e = to_vec(b.end);
    const auto reach = static_cast<std::int64_t>(std::ceil(b.radius));

    for (std::int64_t z = std::min(b.start[2], b.end[2]) - reach; z <= std::max(b.start[2], b.end[2]) + reach; ++z)
        for (std::int64_t y = std::min(b.start[1], b.end[1]) - reach; y <= std::max(b.start[1], b.end[1]) + reach; ++y)
            for (std::int64_t x = std::min(b.start[0], b.end[0]) - reach; x <= std::max(b.start[0], b.end[0]) + reach; ++x) {
                if (!mask.contains(x, y, z)) continue;
                const std::int64_t i = mask.index(x, y, z);
                if (!out.mask[i]) continue;
                const Vec3 p{double(x), double(y), double(z)};
                const auto [d2, axial] = segment_distance2(p, a, e);
                if (d2 > b.radius * b.radius) continue;
                if (!whole && (axial < lo || axial > hi)) continue;
                bool shared = false;
                for (const auto& o : t.branches) {
                    if (o.id == b.id) continue;
                    if (segment_distance2(p, to_vec(o.start), to_vec(o.end)).first <= o.radius * o.radius) {
                        shared = true;
                        break;
                    }
                }
                if (shared) continue;
                out.mask[i] = 0;
                ++out.removed_voxels;
                if (t.centerline[i]) out.erased_centerline.push_back(i);
            }
    std::sort(out.erased_centerline.begin(), out.erased_centerline.end());
    return out;
}

Degradation break_branch(const PhantomTruth& t, std::int32_t branch_id, double gap_voxels) {
    return break_branch(t, t.mask, branch_id, gap_voxels);
}

Degradation add_leak(const PhantomTruth& t, const BinaryMask& mask, const Index3& c, double radius) {
    require_same_dims(mask, t.mask, "add_leak");
    if (!(radius >= 0.0)) throw ParameterError("add_leak: radius must be non-negative");
    Degradation out{mask, {}, 0, 0};
    if (radius == 0.0) return out;
    const auto reach = static_cast<std::int64_t>(std::ceil(radius));
    for (std::int64_t z = c[2] - reach; z <= c[2] + reach; ++z)
        for (std::int64_t y = c[1] - reach; y <= c[1] + reach; ++y)
            for (std::int64_t x = c[0] - reach; x <= c[0] + reach; ++x) {
                if (!mask.contains(x, y, z)) continue;
                const double dx = double(x - c[0]), dy = double(y - c[1]), dz = double(z - c[2]);
                if (dx * dx + dy * dy + dz * dz > radius * radius) continue;
                const std::int64_t i = mask.index(x, y, z);
                if (!out.mask[i]) {
                    out.mask[i] = 1;
                    ++out.added_voxels;
                }
            }
    return out;
}

Degradation add_leak(const PhantomTruth& t, const Index3& center, double radius) {
    return add_leak(t, t.mask, center, radius);
}

Index3 leak_site(const PhantomTruth& t, std::int32_t branch_id, double offset) {
    if (branch_id < 0 || branch_id >= static_cast<std::int32_t>(t.branches.size()))
        throw ParameterError("leak_site: no branch with id " + std::to_string(branch_id));
    const PhantomBranch& b = t.branches[branch_id];
    const Vec3 a = to_vec(b.start), e = to_vec(b.end);
    const Vec3 dir = normalized(add(e, scale(a, -1.0)));
    const Vec3 helper = std::abs(dir[0]) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    const Vec3 perp = normalized(cross(dir, helper));
    const Vec3 mid = scale(add(a, e), 0.5);
    return round_vec(add(mid, scale(perp, b.radius + offset)));
}

}  // namespace bel
