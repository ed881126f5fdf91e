#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <variant>

#include "bel/volume.hpp"

namespace bel {

/// Single-file NIfTI-1 subset: 3D volumes of uint8, int16 or float32,
/// optionally gzip-compressed.
enum class NiftiType : std::int16_t { uint8 = 2, int16 = 4, float32 = 16 };

inline constexpr std::size_t kNiftiHeaderSize = 348;
inline constexpr std::int64_t kNiftiVoxOffset = 352;

struct NiftiHeader {
    Dims dims{};
    NiftiType datatype = NiftiType::float32;
    Spacing spacing{};
    double scl_slope = 0.0;
    double scl_inter = 0.0;
    double vox_offset = kNiftiVoxOffset;
    bool big_endian = false;
    /// Header bytes as read (host byte order is not applied); orientation and
    /// description fields are carried over verbatim when passed to a writer.
    std::array<std::uint8_t, kNiftiHeaderSize> raw{};

    bool has_scaling() const noexcept { return scl_slope != 0.0 && !(scl_slope == 1.0 && scl_inter == 0.0); }
};

using AnyVolume = std::variant<Volume3<std::uint8_t>, Volume3<std::int16_t>, Volume3<float>>;

struct NiftiImage {
    NiftiHeader header;
    AnyVolume volume;  // raw stored values, scaling not applied
};

/// Throws FormatError naming the offending field (magic, datatype, dim, payload, ...).
NiftiImage read_nifti(const std::filesystem::path& path);

/// Stored values with scl_slope/scl_inter applied.
RealVolume to_real(const NiftiImage& img);
/// Requires every (scaled) value to be 0 or 1.
BinaryMask to_mask(const NiftiImage& img);
/// Requires an int16 volume without scaling.
Volume3<std::int16_t> to_int16(const NiftiImage& img);

RealVolume read_real(const std::filesystem::path& path);
BinaryMask read_mask(const std::filesystem::path& path);

/// Writers produce little-endian single-file NIfTI-1 with vox_offset 352; a
/// path ending in ".gz" is gzip-compressed. `like` supplies orientation fields.
void write_nifti(const BinaryMask& mask, const std::filesystem::path& path, const NiftiHeader* like = nullptr);
void write_nifti(const Volume3<std::int16_t>& v, const std::filesystem::path& path,
                 const NiftiHeader* like = nullptr);
void write_nifti(const Volume3<float>& v, const std::filesystem::path& path, const NiftiHeader* like = nullptr);
/// Stored as float32.
void write_nifti(const RealVolume& v, const std::filesystem::path& path, const NiftiHeader* like = nullptr);
void write_nifti(const AnyVolume& v, const std::filesystem::path& path, const NiftiHeader* like = nullptr);

}  // namespace bel
