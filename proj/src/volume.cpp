#include "bel/volume.hpp"

#include <algorithm>
#include <numeric>

namespace bel {

std::string to_string(const Dims& d) {
    return "(" + std::to_string(d.nx) + "," + std::to_string(d.ny) + "," + std::to_string(d.nz) + ")";
}

void require_binary(const BinaryMask& m, const char* what) {
    for (std::int64_t i = 0; i < m.size(); ++i)
        if (m[i] > 1)
            throw ParameterError(std::string(what) + ": value " + std::to_string(int(m[i])) +
                                 " at index " + std::to_string(i) + " is not 0 or 1");
}

void require_probability(const RealVolume& v, const char* what) {
    for (std::int64_t i = 0; i < v.size(); ++i)
        if (!(v[i] >= 0.0 && v[i] <= 1.0))
            throw ParameterError(std::string(what) + ": value at index " + std::to_string(i) +
                                 " is outside [0,1]");
}

std::int64_t count_foreground(const BinaryMask& m) {
    std::int64_t n = 0;
    for (auto v : m.values()) n += v != 0;
    return n;
}

namespace {
template <class Op>
BinaryMask combine(const BinaryMask& a, const BinaryMask& b, Op op, const char* what) {
    require_same_dims(a, b, what);
    BinaryMask out = BinaryMask::like(a);
    for (std::int64_t i = 0; i < a.size(); ++i) out[i] = op(a[i] != 0, b[i] != 0) ? 1 : 0;
    return out;
}
}  // namespace

BinaryMask complement(const BinaryMask& m) {
    BinaryMask out = BinaryMask::like(m);
    for (std::int64_t i = 0; i < m.size(); ++i) out[i] = m[i] ? 0 : 1;
    return out;
}

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
    return combine(a, b, [](bool x, bool y) { return x && y; }, "mask_and");
}
BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b) {
    return combine(a, b, [](bool x, bool y) { return x || y; }, "mask_or");
}
BinaryMask mask_and_not(const BinaryMask& a, const BinaryMask& b) {
    return combine(a, b, [](bool x, bool y) { return x && !y; }, "mask_and_not");
}

bool is_subset(const BinaryMask& a, const BinaryMask& b) {
    require_same_dims(a, b, "is_subset");
    for (std::int64_t i = 0; i < a.size(); ++i)
        if (a[i] && !b[i]) return false;
    return true;
}

RealVolume to_real(const BinaryMask& m) {
    RealVolume out = RealVolume::like(m);
    for (std::int64_t i = 0; i < m.size(); ++i) out[i] = m[i] ? 1.0 : 0.0;
    return out;
}

BinaryMask binarize(const RealVolume& v, double threshold) {
    BinaryMask out = BinaryMask::like(v);
    for (std::int64_t i = 0; i < v.size(); ++i) out[i] = v[i] >= threshold ? 1 : 0;
    return out;
}

RealVolume normalize_hu(const Volume3<std::int16_t>& v, double lo, double hi) {
    if (!(lo < hi)) throw ParameterError("normalize_hu: lower bound must be below upper bound");
    RealVolume out = RealVolume::like(v);
    const double scale = hi - lo;
    for (std::int64_t i = 0; i < v.size(); ++i)
        out[i] = std::clamp((static_cast<double>(v[i]) - lo) / scale, 0.0, 1.0);
    return out;
}

std::vector<std::int64_t> axis_starts(std::int64_t n, std::int64_t p, double overlap) {
    if (p <= 0) throw ParameterError("patch size must be positive");
    if (p > n)
        throw ParameterError("patch size " + std::to_string(p) + " exceeds volume extent " +
                             std::to_string(n));
    if (!(overlap >= 0.0 && overlap < 1.0))
        throw ParameterError("overlap fraction must lie in [0,1)");
    // round half up
    const auto stride = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::floor(static_cast<double>(p) * (1.0 - overlap) + 0.5)));
    std::vector<std::int64_t> starts;
    for (std::int64_t s = 0;; s += stride) {
        const std::int64_t clamped = std::min(s, n - p);
        if (starts.empty() || starts.back() != clamped) starts.push_back(clamped);
        if (s + p >= n) break;
    }
    return starts;
}

PatchGrid sliding_windows(const Dims& dims, const Dims& patch, double overlap) {
    PatchGrid grid{patch, overlap, {}};
    const auto xs = axis_starts(dims.nx, patch.nx, overlap);
    const auto ys = axis_starts(dims.ny, patch.ny, overlap);
    const auto zs = axis_starts(dims.nz, patch.nz, overlap);
    grid.origins.reserve(xs.size() * ys.size() * zs.size());
    for (auto z : zs)
        for (auto y : ys)
            for (auto x : xs) grid.origins.push_back({x, y, z});
    return grid;
}

// ---------------------------------------------------------------------------

Connectivity connectivity_from_int(int c) {
    switch (c) {
        case 6: return Connectivity::six;
        case 18: return Connectivity::eighteen;
        case 26: return Connectivity::twentysix;
        default: throw ParameterError("connectivity must be 6, 18 or 26, got " + std::to_string(c));
    }
}

namespace {
struct OffsetTables {
    std::vector<std::array<int, 3>> n6, n18, n26;
    OffsetTables() {
        for (int dz = -1; dz <= 1; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int order = std::abs(dx) + std::abs(dy) + std::abs(dz);
                    if (order == 0) continue;
                    n26.push_back({dx, dy, dz});
                    if (order <= 2) n18.push_back({dx, dy, dz});
                    if (order == 1) n6.push_back({dx, dy, dz});
                }
    }
};
const OffsetTables& offset_tables() {
    static const OffsetTables t;
    return t;
}

struct UnionFind {
    std::vector<std::int32_t> parent;
    std::int32_t make() {
        parent.push_back(static_cast<std::int32_t>(parent.size()));
        return parent.back();
    }
    std::int32_t find(std::int32_t a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }
    void unite(std::int32_t a, std::int32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        // keep the smaller provisional label as root so numbering follows first appearance
        if (b < a) std::swap(a, b);
        parent[b] = a;
    }
};
}  // namespace

std::span<const std::array<int, 3>> neighbor_offsets(Connectivity c) {
    const auto& t = offset_tables();
    switch (c) {
        case Connectivity::six: return t.n6;
        case Connectivity::eighteen: return t.n18;
        default: return t.n26;
    }
}

Components connected_components(const BinaryMask& m, Connectivity c) {
    const Dims d = m.dims();
    Components out{LabelVolume::like(m), 0, {}};
    LabelVolume& lab = out.labels;

    // Only the half of the neighborhood already visited in raster order.
    std::vector<std::array<int, 3>> back;
    for (const auto& o : neighbor_offsets(c))
        if (o[2] < 0 || (o[2] == 0 && (o[1] < 0 || (o[1] == 0 && o[0] < 0)))) back.push_back(o);

    UnionFind uf;
    uf.make();  // slot 0 = background
    for (std::int64_t z = 0; z < d.nz; ++z)
        for (std::int64_t y = 0; y < d.ny; ++y)
            for (std::int64_t x = 0; x < d.nx; ++x) {
                const std::int64_t i = m.index(x, y, z);
                if (!m[i]) continue;
                std::int32_t cur = 0;
                for (const auto& o : back) {
                    const std::int64_t xx = x + o[0], yy = y + o[1], zz = z + o[2];
                    if (!m.contains(xx, yy, zz)) continue;
                    const std::int32_t l = lab.at(xx, yy, zz);
                    if (l == 0) continue;
                    if (cur == 0)
                        cur = l;
                    else
                        uf.unite(cur, l);
                }
                lab[i] = cur != 0 ? cur : uf.make();
            }

    std::vector<std::int32_t> final_label(uf.parent.size(), 0);
    for (std::size_t k = 1; k < uf.parent.size(); ++k) {
        const auto root = uf.find(static_cast<std::int32_t>(k));
        if (final_label[root] == 0) {
            final_label[root] = ++out.count;
            out.sizes.push_back(0);
        }
        final_label[k] = final_label[root];
    }
    for (std::int64_t i = 0; i < lab.size(); ++i)
        if (lab[i]) {
            lab[i] = final_label[lab[i]];
            ++out.sizes[lab[i] - 1];
        }
    return out;
}

BinaryMask largest_component(const BinaryMask& m, Connectivity c) {
    const Components cc = connected_components(m, c);
    if (cc.count == 0) throw EmptyInputError("largest_component: mask has no foreground voxels");
    // labels follow first-voxel order, so max_element's first-hit rule is the tie-break
    const auto best = static_cast<std::int32_t>(
        std::max_element(cc.sizes.begin(), cc.sizes.end()) - cc.sizes.begin() + 1);
    BinaryMask out = BinaryMask::like(m);
    for (std::int64_t i = 0; i < m.size(); ++i) out[i] = cc.labels[i] == best ? 1 : 0;
    return out;
}

}  // namespace bel
