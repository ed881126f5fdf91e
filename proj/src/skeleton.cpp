#include "bel/skeleton.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>

namespace bel {

namespace {

// 3x3x3 neighborhood cells, c = (dx+1) + 3(dy+1) + 9(dz+1); 13 is the center.
constexpr int kCenter = 13;

struct CubeTables {
    std::array<std::array<int, 3>, 27> offset{};
    std::array<std::vector<int>, 27> adj26;
    std::array<std::vector<int>, 27> adj6;
    std::array<bool, 27> in18{};
    std::array<bool, 27> face{};

    CubeTables() {
        for (int c = 0; c < 27; ++c) offset[c] = {c % 3 - 1, (c / 3) % 3 - 1, c / 9 - 1};
        for (int a = 0; a < 27; ++a) {
            const auto& oa = offset[a];
            const int order = std::abs(oa[0]) + std::abs(oa[1]) + std::abs(oa[2]);
            in18[a] = a != kCenter && order <= 2;
            face[a] = order == 1;
            for (int b = 0; b < 27; ++b) {
                if (a == b) continue;
                const auto& ob = offset[b];
                const int dx = std::abs(oa[0] - ob[0]), dy = std::abs(oa[1] - ob[1]),
                          dz = std::abs(oa[2] - ob[2]);
                if (std::max({dx, dy, dz}) == 1) adj26[a].push_back(b);
                if (dx + dy + dz == 1) adj6[a].push_back(b);
            }
        }
    }
};

const CubeTables& cube() {
    static const CubeTables t;
    return t;
}

using Cube = std::array<bool, 27>;

Cube gather(const BinaryMask& m, std::int64_t i) {
    const auto [x, y, z] = m.coords(i);
    const auto& t = cube();
    Cube nb{};
    for (int c = 0; c < 27; ++c) {
        const auto& o = t.offset[c];
        const std::int64_t xx = x + o[0], yy = y + o[1], zz = z + o[2];
        nb[c] = m.contains(xx, yy, zz) && m.at(xx, yy, zz) != 0;
    }
    return nb;
}

bool simple(const Cube& nb) {
    const auto& t = cube();
    // foreground: exactly one 26-component among the 26 neighbors
    {
        int start = -1;
        int total = 0;
        for (int c = 0; c < 27; ++c)
            if (c != kCenter && nb[c]) {
                ++total;
                if (start < 0) start = c;
            }
        if (total == 0) return false;
        std::array<bool, 27> seen{};
        int stack[27];
        int top = 0, reached = 0;
        stack[top++] = start;
        seen[start] = true;
        while (top) {
            const int a = stack[--top];
            ++reached;
            for (int b : t.adj26[a])
                if (b != kCenter && nb[b] && !seen[b]) {
                    seen[b] = true;
                    stack[top++] = b;
                }
        }
        if (reached != total) return false;
    }
    // background: exactly one 6-component in N18 that touches a face of the center
    {
        std::array<bool, 27> seen{};
        int components = 0;
        for (int f = 0; f < 27; ++f) {
            if (!t.face[f] || nb[f] || seen[f]) continue;
            if (++components > 1) return false;
            int stack[27];
            int top = 0;
            stack[top++] = f;
            seen[f] = true;
            while (top) {
                const int a = stack[--top];
                for (int b : t.adj6[a])
                    if (t.in18[b] && !nb[b] && !seen[b]) {
                        seen[b] = true;
                        stack[top++] = b;
                    }
            }
        }
        return components == 1;
    }
}

int count_neighbors(const Cube& nb) {
    int n = 0;
    for (int c = 0; c < 27; ++c) n += (c != kCenter && nb[c]);
    return n;
}

}  // namespace

int neighbor_count26(const BinaryMask& m, std::int64_t i) { return count_neighbors(gather(m, i)); }

bool is_simple_point(const BinaryMask& m, std::int64_t i) { return simple(gather(m, i)); }

namespace {

// Thinning leaves short side curves where the surface is bumpy. A terminal
// curve counts as such a spur when it is no longer than the local radius of
// the mask at the junction it hangs from, plus one voxel.
bool prune_spurs(Centerline& c, const RealVolume& r2) {
    bool any = false;
    const auto& offs = neighbor_offsets(Connectivity::twentysix);
    auto nbrs = [&](std::int64_t i) {
        const auto [x, y, z] = c.coords(i);
        std::vector<std::int64_t> out;
        for (const auto& o : offs) {
            const std::int64_t xx = x + o[0], yy = y + o[1], zz = z + o[2];
            if (c.contains(xx, yy, zz) && c.at(xx, yy, zz)) out.push_back(c.index(xx, yy, zz));
        }
        return out;
    };
    for (bool changed = true; changed;) {
        changed = false;
        for (std::int64_t e = 0; e < c.size(); ++e) {
            if (!c[e] || nbrs(e).size() != 1) continue;
            std::vector<std::int64_t> path{e};
            std::int64_t prev = -1, at = e, junction = -1;
            for (;;) {
                auto nb = nbrs(at);
                std::erase(nb, prev);
                std::erase_if(nb, [&](std::int64_t v) { return std::find(path.begin(), path.end(), v) != path.end(); });
                if (nb.size() != 1) break;
                const std::int64_t next = nb.front();
                if (nbrs(next).size() >= 3) {
                    junction = next;
                    break;
                }
                prev = at;
                at = next;
                path.push_back(at);
            }
            if (junction < 0) continue;
            if (static_cast<double>(path.size()) > std::sqrt(r2[junction]) + 1.0) continue;
            for (auto v : path) {
                if (neighbor_count26(c, v) > 1 && !is_simple_point(c, v)) break;
                c[v] = 0;
                changed = any = true;
            }
        }
    }
    return any;
}

}  // namespace

Centerline thin(const BinaryMask& m) {
    Centerline cur = BinaryMask::like(m);
    std::vector<std::int64_t> alive;
    for (std::int64_t i = 0; i < m.size(); ++i)
        if (m[i]) {
            cur[i] = 1;
            alive.push_back(i);
        }

    static constexpr std::array<std::array<int, 3>, 6> kDirections{
        {{0, 0, 1}, {0, 0, -1}, {0, 1, 0}, {0, -1, 0}, {1, 0, 0}, {-1, 0, 0}}};

    // Squared distance to the background (or to the outside of the grid)
    // sets the spur length scale.
    RealVolume r2 = RealVolume::like(m);
    if (count_foreground(m) < m.size()) {
        r2 = edt_squared(complement(m));
    } else {
        for (std::int64_t i = 0; i < m.size(); ++i) {
            const auto [x, y, z] = m.coords(i);
            const double d = double(std::min({x + 1, y + 1, z + 1, m.dims().nx - x, m.dims().ny - y, m.dims().nz - z}));
            r2[i] = d * d;
        }
    }

    // removed_in[i] is the sub-iteration that deleted voxel i. The second
    // direction of an axis pair skips voxels whose opposite neighbour went in
    // the first one, so a two-voxel-wide strip loses one layer per axis and
    // is not unzipped from its tip.
    std::vector<std::int32_t> removed_in(static_cast<std::size_t>(m.size()), -1);
    std::vector<std::uint8_t> flag;
    std::int32_t sub = 0;
    auto peel = [&] {
        for (bool changed = true; changed;) {
            changed = false;
            for (std::size_t di = 0; di < kDirections.size(); ++di, ++sub) {
                const auto& dir = kDirections[di];
                const bool second = di % 2 == 1;
                // Candidate detection reads `cur` only and runs in parallel; deletion is
                // sequential in memory order with a re-check, which keeps topology.
                const auto n = static_cast<std::int64_t>(alive.size());
                flag.assign(alive.size(), 0);
#pragma omp parallel for schedule(static)
                for (std::int64_t k = 0; k < n; ++k) {
                    const std::int64_t i = alive[k];
                    const auto [x, y, z] = cur.coords(i);
                    const std::int64_t xx = x + dir[0], yy = y + dir[1], zz = z + dir[2];
                    if (cur.contains(xx, yy, zz) && cur.at(xx, yy, zz)) continue;
                    if (second) {
                        const std::int64_t ox = x - dir[0], oy = y - dir[1], oz = z - dir[2];
                        if (cur.contains(ox, oy, oz) && removed_in[cur.index(ox, oy, oz)] == sub - 1) continue;
                    }
                    const Cube nb = gather(cur, i);
                    if (count_neighbors(nb) >= 2 && simple(nb)) flag[k] = 1;
                }
                for (std::int64_t k = 0; k < n; ++k) {
                    if (!flag[k]) continue;
                    const std::int64_t i = alive[k];
                    const Cube nb = gather(cur, i);
                    if (count_neighbors(nb) >= 2 && simple(nb)) {
                        cur[i] = 0;
                        removed_in[i] = sub;
                        changed = true;
                    }
                }
                std::erase_if(alive, [&](std::int64_t i) { return cur[i] == 0; });
            }
        }
    };
    for (;;) {
        peel();
        if (!prune_spurs(cur, r2)) break;
        std::erase_if(alive, [&](std::int64_t i) { return cur[i] == 0; });
    }
    return cur;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::int64_t> skeleton_neighbors(const BinaryMask& c, std::int64_t i) {
    const auto [x, y, z] = c.coords(i);
    std::vector<std::int64_t> out;
    for (const auto& o : neighbor_offsets(Connectivity::twentysix)) {
        const std::int64_t xx = x + o[0], yy = y + o[1], zz = z + o[2];
        if (c.contains(xx, yy, zz) && c.at(xx, yy, zz)) out.push_back(c.index(xx, yy, zz));
    }
    std::sort(out.begin(), out.end());
    return out;
}

double step_mm(const Dims& d, const Spacing& s, std::int64_t a, std::int64_t b) {
    const auto ca = Index3{a % d.nx, (a / d.nx) % d.ny, a / (d.nx * d.ny)};
    const auto cb = Index3{b % d.nx, (b / d.nx) % d.ny, b / (d.nx * d.ny)};
    const double dx = double(ca[0] - cb[0]) * s.sx, dy = double(ca[1] - cb[1]) * s.sy,
                 dz = double(ca[2] - cb[2]) * s.sz;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Provisional edge between two nodes before generation ordering.
struct RawBranch {
    std::int32_t a = -1, b = -1;       // node ids at the two ends of `voxels`
    std::int64_t a_voxel = -1, b_voxel = -1;  // node voxels touching the path ends
    std::vector<std::int64_t> voxels;
};

}  // namespace

SkeletonGraph build_graph(const Centerline& c, RootSide side) {
    const Dims d = c.dims();
    SkeletonGraph g;
    g.dims = d;
    g.spacing = c.spacing();

    std::vector<std::int64_t> fg;
    for (std::int64_t i = 0; i < c.size(); ++i)
        if (c[i]) fg.push_back(i);
    if (fg.empty()) throw EmptyInputError("build_graph: centerline has no voxels");

    std::map<std::int64_t, std::vector<std::int64_t>> nbrs;
    for (auto i : fg) nbrs[i] = skeleton_neighbors(c, i);

    // node voxel -> node id, -1 for path voxels
    std::map<std::int64_t, std::int32_t> node_of;
    for (auto i : fg) node_of[i] = -1;

    auto add_node = [&](NodeKind kind, std::vector<std::int64_t> voxels) {
        SkeletonNode n;
        n.id = static_cast<std::int32_t>(g.nodes.size());
        n.kind = kind;
        n.voxels = std::move(voxels);
        for (auto v : n.voxels) node_of[v] = n.id;
        g.nodes.push_back(std::move(n));
    };

    for (auto i : fg) {
        if (node_of[i] >= 0) continue;
        const auto deg = nbrs[i].size();
        if (deg == 0) {
            add_node(NodeKind::isolated, {i});
        } else if (deg == 1) {
            add_node(NodeKind::endpoint, {i});
        } else if (deg >= 3) {
            // flood the 26-connected cluster of junction voxels
            std::vector<std::int64_t> cluster{i};
            node_of[i] = -2;
            for (std::size_t k = 0; k < cluster.size(); ++k)
                for (auto j : nbrs[cluster[k]])
                    if (node_of[j] == -1 && nbrs[j].size() >= 3) {
                        node_of[j] = -2;
                        cluster.push_back(j);
                    }
            std::sort(cluster.begin(), cluster.end());
            add_node(NodeKind::junction, std::move(cluster));
        }
    }

    // Components without any node are closed loops; cut each at its first voxel.
    {
        std::map<std::int64_t, bool> seen;
        for (auto i : fg) {
            if (seen[i]) continue;
            std::vector<std::int64_t> comp{i};
            seen[i] = true;
            bool has_node = false;
            for (std::size_t k = 0; k < comp.size(); ++k) {
                has_node = has_node || node_of[comp[k]] >= 0;
                for (auto j : nbrs[comp[k]])
                    if (!seen[j]) {
                        seen[j] = true;
                        comp.push_back(j);
                    }
            }
            if (!has_node) add_node(NodeKind::loop, {*std::min_element(comp.begin(), comp.end())});
        }
    }

    // Paths: runs of non-node voxels.
    std::vector<RawBranch> raw;
    std::map<std::int64_t, bool> used;
    auto path_neighbors = [&](std::int64_t v) {
        std::vector<std::int64_t> out;
        for (auto j : nbrs[v])
            if (node_of[j] < 0) out.push_back(j);
        return out;
    };
    auto node_neighbor = [&](std::int64_t v, std::int64_t exclude_voxel) -> std::int64_t {
        for (auto j : nbrs[v])
            if (node_of[j] >= 0 && j != exclude_voxel) return j;
        return -1;
    };
    for (auto i : fg) {
        if (node_of[i] >= 0 || used[i]) continue;
        // walk to one end of the run
        std::int64_t start = i, prev = -1;
        for (;;) {
            std::int64_t next = -1;
            for (auto j : path_neighbors(start))
                if (j != prev) {
                    next = j;
                    break;
                }
            if (next < 0 || next == i) break;
            prev = start;
            start = next;
        }
        // then collect the run from that end
        RawBranch rb;
        prev = -1;
        for (std::int64_t cur = start; cur >= 0;) {
            rb.voxels.push_back(cur);
            used[cur] = true;
            std::int64_t next = -1;
            for (auto j : path_neighbors(cur))
                if (j != prev && !used[j]) {
                    next = j;
                    break;
                }
            prev = cur;
            cur = next;
        }
        rb.a_voxel = node_neighbor(rb.voxels.front(), -1);
        rb.b_voxel = node_neighbor(rb.voxels.back(), rb.voxels.size() == 1 ? rb.a_voxel : -1);
        if (rb.b_voxel < 0) rb.b_voxel = rb.a_voxel;  // run closes onto a single node
        if (rb.a_voxel < 0) rb.a_voxel = rb.b_voxel;
        rb.a = node_of[rb.a_voxel];
        rb.b = node_of[rb.b_voxel];
        raw.push_back(std::move(rb));
    }
    // Direct node-to-node links.
    {
        std::map<std::pair<std::int32_t, std::int32_t>, std::pair<std::int64_t, std::int64_t>> links;
        for (auto i : fg) {
            const auto ni = node_of[i];
            if (ni < 0) continue;
            for (auto j : nbrs[i]) {
                const auto nj = node_of[j];
                if (nj < 0 || nj == ni) continue;
                const auto key = std::minmax(ni, nj);
                if (!links.count(key)) links[key] = ni < nj ? std::pair{i, j} : std::pair{j, i};
            }
        }
        for (const auto& [key, vox] : links) {
            RawBranch rb;
            rb.a = key.first;
            rb.b = key.second;
            rb.a_voxel = vox.first;
            rb.b_voxel = vox.second;
            raw.push_back(std::move(rb));
        }
    }

    // incidence on raw branches
    std::vector<std::vector<std::int32_t>> incident(g.nodes.size());
    for (std::size_t r = 0; r < raw.size(); ++r) {
        incident[raw[r].a].push_back(static_cast<std::int32_t>(r));
        if (raw[r].b != raw[r].a) incident[raw[r].b].push_back(static_cast<std::int32_t>(r));
    }

    auto node_z = [&](const SkeletonNode& n) { return c.coords(n.voxels.front())[2]; };
    auto better_root = [&](const SkeletonNode& a, const SkeletonNode& b) {
        // is `a` a better root candidate than `b`
        const auto za = node_z(a), zb = node_z(b);
        if (za != zb) return side == RootSide::max_z ? za > zb : za < zb;
        return a.voxels.front() < b.voxels.front();
    };
    auto pick_root = [&](const std::vector<bool>& node_done) {
        std::int32_t best = -1;
        for (int pass = 0; pass < 2 && best < 0; ++pass)
            for (const auto& n : g.nodes) {
                if (node_done[n.id]) continue;
                if (pass == 0 && n.kind != NodeKind::endpoint) continue;
                if (best < 0 || better_root(n, g.nodes[best])) best = n.id;
            }
        return best;
    };

    // Breadth-first from each component's root; ids assigned in visiting order.
    std::vector<std::int32_t> final_id(raw.size(), -1);
    std::vector<bool> node_done(g.nodes.size(), false);
    for (;;) {
        const std::int32_t root = pick_root(node_done);
        if (root < 0) break;
        if (g.root < 0) g.root = root;
        std::deque<std::pair<std::int32_t, std::int32_t>> queue;  // (node, arriving branch id)
        queue.emplace_back(root, -1);
        node_done[root] = true;
        while (!queue.empty()) {
            const auto [node, via] = queue.front();
            queue.pop_front();
            const int gen = via < 0 ? 0 : g.branches[via].generation + 1;
            for (auto r : incident[node]) {
                if (final_id[r] >= 0) continue;
                RawBranch& rb = raw[r];
                Branch b;
                b.id = static_cast<std::int32_t>(g.branches.size());
                final_id[r] = b.id;
                b.parent = via;
                b.generation = gen;
                std::int64_t from_voxel = rb.a_voxel, to_voxel = rb.b_voxel;
                b.from_node = rb.a;
                b.to_node = rb.b;
                b.voxels = rb.voxels;
                if (rb.a != node) {
                    std::swap(b.from_node, b.to_node);
                    std::swap(from_voxel, to_voxel);
                    std::reverse(b.voxels.begin(), b.voxels.end());
                }
                std::int64_t prev = from_voxel;
                for (auto v : b.voxels) {
                    b.length_mm += step_mm(d, g.spacing, prev, v);
                    prev = v;
                }
                if (b.to_node != b.from_node || !b.voxels.empty())
                    b.length_mm += step_mm(d, g.spacing, prev, to_voxel);
                g.branches.push_back(std::move(b));
                const std::int32_t far = g.branches.back().to_node;
                if (!node_done[far]) {
                    node_done[far] = true;
                    queue.emplace_back(far, g.branches.back().id);
                }
            }
        }
    }

    for (auto& n : g.nodes) {
        for (std::size_t r = 0; r < raw.size(); ++r)
            if (raw[r].a == n.id || raw[r].b == n.id) n.branches.push_back(final_id[r]);
        std::sort(n.branches.begin(), n.branches.end());
    }
    return g;
}

std::vector<std::int64_t> SkeletonGraph::coverage_voxels(std::int32_t branch) const {
    const Branch& b = branches.at(static_cast<std::size_t>(branch));
    if (!b.voxels.empty()) return b.voxels;
    std::vector<std::int64_t> out;
    for (auto n : {b.from_node, b.to_node})
        if (nodes[n].kind != NodeKind::junction)
            out.insert(out.end(), nodes[n].voxels.begin(), nodes[n].voxels.end());
    if (out.empty())
        for (auto n : {b.from_node, b.to_node})
            out.insert(out.end(), nodes[n].voxels.begin(), nodes[n].voxels.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Centerline SkeletonGraph::centerline() const {
    Centerline c(dims, 0, spacing);
    for (const auto& n : nodes)
        for (auto v : n.voxels) c[v] = 1;
    for (const auto& b : branches)
        for (auto v : b.voxels) c[v] = 1;
    return c;
}

LabelVolume SkeletonGraph::branch_seeds() const {
    LabelVolume seeds(dims, 0, spacing);
    for (const auto& b : branches)
        for (auto v : b.voxels) seeds[v] = b.id + 1;
    for (const auto& n : nodes) {
        std::int32_t best = -1;
        for (auto bid : n.branches) {
            const Branch& b = branches[bid];
            if (best < 0 || b.generation < branches[best].generation) best = bid;
        }
        if (best < 0) continue;
        for (auto v : n.voxels) seeds[v] = best + 1;
    }
    return seeds;
}

int SkeletonGraph::max_generation() const {
    int m = -1;
    for (const auto& b : branches) m = std::max(m, b.generation);
    return m;
}

nlohmann::json graph_to_json(const SkeletonGraph& g) {
    using nlohmann::json;
    auto xyz = [&](std::int64_t i) {
        const std::int64_t x = i % g.dims.nx, y = (i / g.dims.nx) % g.dims.ny,
                           z = i / (g.dims.nx * g.dims.ny);
        return json::array({x, y, z});
    };
    json branches = json::array();
    for (const auto& b : g.branches) {
        json vox = json::array();
        for (auto v : b.voxels) vox.push_back(xyz(v));
        branches.push_back({{"id", b.id},
                            {"parent", b.parent},
                            {"generation", b.generation},
                            {"from_node", b.from_node},
                            {"to_node", b.to_node},
                            {"voxels", std::move(vox)},
                            {"length_mm", b.length_mm}});
    }
    json nodes = json::array();
    static constexpr const char* kKind[] = {"endpoint", "junction", "isolated", "loop"};
    for (const auto& n : g.nodes) {
        json vox = json::array();
        for (auto v : n.voxels) vox.push_back(xyz(v));
        nodes.push_back({{"id", n.id}, {"kind", kKind[static_cast<int>(n.kind)]}, {"voxels", std::move(vox)}});
    }
    json out = {{"root", g.root}, {"branches", std::move(branches)}, {"nodes", std::move(nodes)}};
    if (g.root >= 0) out["root_voxel"] = xyz(g.nodes[g.root].voxels.front());
    out["dims"] = json::array({g.dims.nx, g.dims.ny, g.dims.nz});
    out["spacing"] = json::array({g.spacing.sx, g.spacing.sy, g.spacing.sz});
    return out;
}

// ---------------------------------------------------------------------------

LabelVolume branch_labels(const BinaryMask& m, const SkeletonGraph& g) {
    if (g.branches.empty()) throw EmptyInputError("branch_labels: skeleton graph has no branches");
    if (m.dims() != g.dims) throw ParameterError("branch_labels: mask and graph dims differ");
    LabelVolume seeds = g.branch_seeds();
    seeds.set_spacing(m.spacing());
    auto ft = feature_transform(seeds, false);
    LabelVolume out = LabelVolume::like(m);
    for (std::int64_t i = 0; i < m.size(); ++i) out[i] = m[i] ? ft.nearest[i] : 0;
    return out;
}

BinaryMask small_airway_mask(const BinaryMask& m, const SkeletonGraph& g, int drop_generations) {
    if (drop_generations < 0) throw ParameterError("small_airway_mask: drop_generations must be >= 0");
    if (g.branches.empty()) throw EmptyInputError("small_airway_mask: skeleton graph has no branches");
    if (drop_generations == 0) return m;
    const LabelVolume labels = branch_labels(m, g);
    BinaryMask out = BinaryMask::like(m);
    for (std::int64_t i = 0; i < m.size(); ++i)
        out[i] = (labels[i] > 0 && g.branches[labels[i] - 1].generation >= drop_generations) ? 1 : 0;
    return out;
}

DistanceVolume centerline_distance(const BinaryMask& m, bool spacing_aware) {
    if (count_foreground(m) == 0) throw EmptyInputError("centerline_distance: mask is empty");
    return edt(thin(m), m, spacing_aware);
}

}  // namespace bel
