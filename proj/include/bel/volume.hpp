#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bel/errors.hpp"

namespace bel {

/// Grid extent in voxels. Memory layout is x-fastest: index = x + nx*(y + ny*z).
struct Dims {
    std::int64_t nx = 0;
    std::int64_t ny = 0;
    std::int64_t nz = 0;

    constexpr std::int64_t size() const noexcept { return nx * ny * nz; }
    constexpr std::int64_t operator[](int axis) const noexcept {
        return axis == 0 ? nx : (axis == 1 ? ny : nz);
    }
    friend constexpr bool operator==(const Dims&, const Dims&) = default;
};

/// Physical voxel size in mm.
struct Spacing {
    double sx = 1.0;
    double sy = 1.0;
    double sz = 1.0;

    constexpr double operator[](int axis) const noexcept {
        return axis == 0 ? sx : (axis == 1 ? sy : sz);
    }
    friend constexpr bool operator==(const Spacing&, const Spacing&) = default;
};

using Index3 = std::array<std::int64_t, 3>;

std::string to_string(const Dims& d);

/// Dense 3D scalar grid with voxel spacing.
template <class T>
class Volume3 {
public:
    using value_type = T;

    Volume3() = default;

    explicit Volume3(Dims dims, T fill = T{}, Spacing spacing = {})
        : dims_(checked(dims)), spacing_(checked(spacing)),
          data_(static_cast<std::size_t>(dims.size()), fill) {}

    Volume3(Dims dims, std::vector<T> data, Spacing spacing = {})
        : dims_(checked(dims)), spacing_(checked(spacing)), data_(std::move(data)) {
        if (static_cast<std::int64_t>(data_.size()) != dims_.size())
            throw ParameterError("volume data length " + std::to_string(data_.size()) +
                                 " does not match dims " + to_string(dims_));
    }

    /// Same geometry as `like`, new contents.
    template <class U>
    static Volume3 like(const Volume3<U>& other, T fill = T{}) {
        return Volume3(other.dims(), fill, other.spacing());
    }

    const Dims& dims() const noexcept { return dims_; }
    const Spacing& spacing() const noexcept { return spacing_; }
    void set_spacing(Spacing s) { spacing_ = checked(s); }

    std::int64_t size() const noexcept { return dims_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::int64_t index(std::int64_t x, std::int64_t y, std::int64_t z) const noexcept {
        return x + dims_.nx * (y + dims_.ny * z);
    }
    Index3 coords(std::int64_t i) const noexcept {
        const std::int64_t x = i % dims_.nx;
        const std::int64_t yz = i / dims_.nx;
        return {x, yz % dims_.ny, yz / dims_.ny};
    }
    bool contains(std::int64_t x, std::int64_t y, std::int64_t z) const noexcept {
        return x >= 0 && y >= 0 && z >= 0 && x < dims_.nx && y < dims_.ny && z < dims_.nz;
    }

    T& operator[](std::int64_t i) noexcept { return data_[static_cast<std::size_t>(i)]; }
    const T& operator[](std::int64_t i) const noexcept { return data_[static_cast<std::size_t>(i)]; }
    T& at(std::int64_t x, std::int64_t y, std::int64_t z) noexcept { return (*this)[index(x, y, z)]; }
    const T& at(std::int64_t x, std::int64_t y, std::int64_t z) const noexcept {
        return (*this)[index(x, y, z)];
    }

    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }
    const std::vector<T>& data() const noexcept { return data_; }

    friend bool operator==(const Volume3&, const Volume3&) = default;

private:
    static Dims checked(Dims d) {
        if (d.nx <= 0 || d.ny <= 0 || d.nz <= 0)
            throw ParameterError("volume dims must be positive, got " + to_string(d));
        return d;
    }
    static Spacing checked(Spacing s) {
        for (int a = 0; a < 3; ++a)
            if (!std::isfinite(s[a]) || s[a] <= 0.0)
                throw ParameterError("voxel spacing must be finite and positive");
        return s;
    }

    Dims dims_{};
    Spacing spacing_{};
    std::vector<T> data_;
};

/// Elements are exactly 0 or 1.
using BinaryMask = Volume3<std::uint8_t>;
/// Values in [0,1]; probabilities, soft skeletons, breakage maps.
using RealVolume = Volume3<double>;
using ProbabilityVolume = RealVolume;
using LabelVolume = Volume3<std::int32_t>;

void require_binary(const BinaryMask& m, const char* what = "mask");
void require_probability(const RealVolume& v, const char* what = "probability volume");

template <class A, class B>
void require_same_dims(const Volume3<A>& a, const Volume3<B>& b, const char* what) {
    if (a.dims() != b.dims())
        throw ParameterError(std::string(what) + ": shape mismatch " + to_string(a.dims()) +
                             " vs " + to_string(b.dims()));
}

std::int64_t count_foreground(const BinaryMask& m);

BinaryMask complement(const BinaryMask& m);
BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_and_not(const BinaryMask& a, const BinaryMask& b);
/// True when every foreground voxel of `a` is foreground in `b`.
bool is_subset(const BinaryMask& a, const BinaryMask& b);

RealVolume to_real(const BinaryMask& m);
/// v >= threshold -> 1.
BinaryMask binarize(const RealVolume& v, double threshold = 0.5);

// ---------------------------------------------------------------------------
// Intensity normalization and patch tiling

/// Clip HU values to [lo, hi] and rescale to [0,1].
RealVolume normalize_hu(const Volume3<std::int16_t>& v, double lo = -1000.0, double hi = 600.0);

struct PatchGrid {
    Dims patch{};
    double overlap = 0.0;
    std::vector<Index3> origins;
};

/// Window starts along one axis: 0, s, 2s, ... with s = round(p*(1-overlap)),
/// last start clamped to n-p.
std::vector<std::int64_t> axis_starts(std::int64_t n, std::int64_t p, double overlap);

PatchGrid sliding_windows(const Dims& dims, const Dims& patch, double overlap);

// ---------------------------------------------------------------------------
// Connected components

enum class Connectivity { six = 6, eighteen = 18, twentysix = 26 };

Connectivity connectivity_from_int(int c);

/// Neighbor offsets (excluding the center) for the given connectivity.
std::span<const std::array<int, 3>> neighbor_offsets(Connectivity c);

struct Components {
    LabelVolume labels;           // 0 background, 1..count foreground
    std::int32_t count = 0;
    std::vector<std::int64_t> sizes;  // sizes[k-1] = voxels with label k
};

/// Labels are numbered in order of each component's first voxel in memory order.
Components connected_components(const BinaryMask& m, Connectivity c = Connectivity::twentysix);

/// Keeps the component with most voxels; ties go to the component holding the
/// voxel that comes first in memory order.
BinaryMask largest_component(const BinaryMask& m, Connectivity c = Connectivity::twentysix);

}  // namespace bel
