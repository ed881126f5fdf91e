#include "bel/nifti.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>

namespace bel {

namespace {

static_assert(std::endian::native == std::endian::little, "host must be little-endian");

template <class T>
T load(const std::uint8_t* p, bool swap) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    if (swap) {
        auto* b = reinterpret_cast<std::uint8_t*>(&v);
        std::reverse(b, b + sizeof(T));
    }
    return v;
}

template <class T>
void store(std::uint8_t* p, T v) {
    std::memcpy(p, &v, sizeof(T));
}

// byte offsets of the fields used here
constexpr std::size_t kOffDim = 40, kOffDatatype = 70, kOffBitpix = 72, kOffPixdim = 76, kOffVoxOffset = 108,
                      kOffSclSlope = 112, kOffSclInter = 116, kOffXyztUnits = 123, kOffMagic = 344;

int bytes_per_voxel(NiftiType t) {
    switch (t) {
        case NiftiType::uint8: return 1;
        case NiftiType::int16: return 2;
        default: return 4;
    }
}

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
    gzFile f = gzopen(path.string().c_str(), "rb");
    if (!f) throw FormatError("file", "cannot open " + path.string());
    std::vector<std::uint8_t> out;
    std::uint8_t buf[1 << 16];
    for (;;) {
        const int n = gzread(f, buf, sizeof buf);
        if (n < 0) {
            gzclose(f);
            throw FormatError("file", "decompression failed for " + path.string());
        }
        if (n == 0) break;
        out.insert(out.end(), buf, buf + n);
    }
    gzclose(f);
    return out;
}

void write_all(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    const std::string p = path.string();
    if (p.size() > 3 && p.compare(p.size() - 3, 3, ".gz") == 0) {
        gzFile f = gzopen(p.c_str(), "wb");
        if (!f) throw ParameterError("cannot write " + p);
        const int n = gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
        if (gzclose(f) != Z_OK || n != static_cast<int>(bytes.size())) throw ParameterError("cannot write " + p);
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ParameterError("cannot write " + p);
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw ParameterError("cannot write " + p);
}

template <class T>
Volume3<T> decode(const std::uint8_t* p, const Dims& d, const Spacing& s, bool swap) {
    std::vector<T> data(static_cast<std::size_t>(d.size()));
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = load<T>(p + i * sizeof(T), swap);
    return Volume3<T>(d, std::move(data), s);
}

template <class T>
void encode_and_write(const Volume3<T>& v, NiftiType type, const std::filesystem::path& path,
                      const NiftiHeader* like) {
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(kNiftiVoxOffset) +
                                    static_cast<std::size_t>(v.size()) * sizeof(T), 0);
    std::uint8_t* h = bytes.data();
    if (like && !like->big_endian) std::memcpy(h, like->raw.data(), kNiftiHeaderSize);
    store<std::int32_t>(h + 0, static_cast<std::int32_t>(kNiftiHeaderSize));
    const std::int16_t dim[8] = {3, static_cast<std::int16_t>(v.dims().nx), static_cast<std::int16_t>(v.dims().ny),
                                 static_cast<std::int16_t>(v.dims().nz), 1, 1, 1, 1};
    if (v.dims().nx > 32767 || v.dims().ny > 32767 || v.dims().nz > 32767)
        throw ParameterError("NIfTI-1 dims are limited to 32767 per axis");
    for (int k = 0; k < 8; ++k) store<std::int16_t>(h + kOffDim + 2 * k, dim[k]);
    store<std::int16_t>(h + kOffDatatype, static_cast<std::int16_t>(type));
    store<std::int16_t>(h + kOffBitpix, static_cast<std::int16_t>(8 * bytes_per_voxel(type)));
    float pixdim[8] = {1.0f, static_cast<float>(v.spacing().sx), static_cast<float>(v.spacing().sy),
                       static_cast<float>(v.spacing().sz), 1.0f, 1.0f, 1.0f, 1.0f};
    if (like && !like->big_endian) pixdim[0] = load<float>(like->raw.data() + kOffPixdim, false);
    if (pixdim[0] != -1.0f) pixdim[0] = 1.0f;
    for (int k = 0; k < 8; ++k) store<float>(h + kOffPixdim + 4 * k, pixdim[k]);
    store<float>(h + kOffVoxOffset, static_cast<float>(kNiftiVoxOffset));
    store<float>(h + kOffSclSlope, 1.0f);
    store<float>(h + kOffSclInter, 0.0f);
    h[kOffXyztUnits] = 2;  // mm
    std::memcpy(h + kOffMagic, "n+1\0", 4);
    std::memset(h + kNiftiHeaderSize, 0, 4);  // no extensions
    std::memcpy(h + kNiftiVoxOffset, v.values().data(), static_cast<std::size_t>(v.size()) * sizeof(T));
    write_all(path, bytes);
}

}  // namespace

NiftiImage read_nifti(const std::filesystem::path& path) {
    const auto bytes = read_all(path);
    if (bytes.size() < kNiftiHeaderSize) throw FormatError("sizeof_hdr", "file shorter than a NIfTI-1 header");
    const std::uint8_t* h = bytes.data();

    NiftiImage img;
    auto& hdr = img.header;
    std::memcpy(hdr.raw.data(), h, kNiftiHeaderSize);

    const auto size_le = load<std::int32_t>(h, false);
    const auto size_be = load<std::int32_t>(h, true);
    if (size_le == 348)
        hdr.big_endian = false;
    else if (size_be == 348)
        hdr.big_endian = true;
    else
        throw FormatError("sizeof_hdr", "expected 348, found " + std::to_string(size_le));
    const bool sw = hdr.big_endian;

    if (std::memcmp(h + kOffMagic, "n+1\0", 4) != 0)
        throw FormatError("magic", "not a single-file NIfTI-1 image (expected \"n+1\")");

    std::int16_t dim[8];
    for (int k = 0; k < 8; ++k) dim[k] = load<std::int16_t>(h + kOffDim + 2 * k, sw);
    if (dim[0] < 1 || dim[0] > 7) throw FormatError("dim", "dim[0] = " + std::to_string(dim[0]) + " out of range");
    for (int k = 1; k <= dim[0]; ++k)
        if (dim[k] < 1) throw FormatError("dim", "dim[" + std::to_string(k) + "] must be positive");
    for (int k = 4; k <= dim[0]; ++k)
        if (dim[k] != 1) throw FormatError("dim", "only 3D volumes are supported");
    hdr.dims = {dim[1], dim[0] >= 2 ? dim[2] : 1, dim[0] >= 3 ? dim[3] : 1};

    const auto code = load<std::int16_t>(h + kOffDatatype, sw);
    if (code != 2 && code != 4 && code != 16)
        throw FormatError("datatype", "unsupported datatype code " + std::to_string(code) +
                                          " (supported: 2 uint8, 4 int16, 16 float32)");
    hdr.datatype = static_cast<NiftiType>(code);

    auto spacing_of = [&](int k) {
        const double v = std::abs(load<float>(h + kOffPixdim + 4 * k, sw));
        return (std::isfinite(v) && v > 0.0) ? v : 1.0;
    };
    hdr.spacing = {spacing_of(1), spacing_of(2), spacing_of(3)};
    hdr.scl_slope = load<float>(h + kOffSclSlope, sw);
    hdr.scl_inter = load<float>(h + kOffSclInter, sw);
    hdr.vox_offset = load<float>(h + kOffVoxOffset, sw);
    if (!(hdr.vox_offset >= 352.0) || hdr.vox_offset != std::floor(hdr.vox_offset))
        throw FormatError("vox_offset", "must be an integer >= 352");

    const auto offset = static_cast<std::size_t>(hdr.vox_offset);
    const std::size_t need = static_cast<std::size_t>(hdr.dims.size()) * bytes_per_voxel(hdr.datatype);
    if (bytes.size() < offset + need)
        throw FormatError("payload", "truncated: expected " + std::to_string(need) + " bytes after offset " +
                                         std::to_string(offset) + ", found " +
                                         std::to_string(bytes.size() > offset ? bytes.size() - offset : 0));
    const std::uint8_t* p = h + offset;
    switch (hdr.datatype) {
        case NiftiType::uint8: img.volume = decode<std::uint8_t>(p, hdr.dims, hdr.spacing, sw); break;
        case NiftiType::int16: img.volume = decode<std::int16_t>(p, hdr.dims, hdr.spacing, sw); break;
        case NiftiType::float32: img.volume = decode<float>(p, hdr.dims, hdr.spacing, sw); break;
    }
    return img;
}

RealVolume to_real(const NiftiImage& img) {
    return std::visit(
        [&](const auto& v) {
            RealVolume out = RealVolume::like(v);
            const bool scaled = img.header.has_scaling();
            for (std::int64_t i = 0; i < v.size(); ++i) {
                const double x = static_cast<double>(v[i]);
                out[i] = scaled ? x * img.header.scl_slope + img.header.scl_inter : x;
            }
            return out;
        },
        img.volume);
}

BinaryMask to_mask(const NiftiImage& img) {
    const RealVolume r = to_real(img);
    BinaryMask m = BinaryMask::like(r);
    for (std::int64_t i = 0; i < r.size(); ++i) {
        if (r[i] != 0.0 && r[i] != 1.0)
            throw FormatError("payload", "mask value at index " + std::to_string(i) + " is not 0 or 1");
        m[i] = r[i] == 1.0 ? 1 : 0;
    }
    return m;
}

Volume3<std::int16_t> to_int16(const NiftiImage& img) {
    if (img.header.datatype != NiftiType::int16 || img.header.has_scaling())
        throw FormatError("datatype", "expected an unscaled int16 volume");
    return std::get<Volume3<std::int16_t>>(img.volume);
}

RealVolume read_real(const std::filesystem::path& path) { return to_real(read_nifti(path)); }

BinaryMask read_mask(const std::filesystem::path& path) { return to_mask(read_nifti(path)); }

void write_nifti(const BinaryMask& mask, const std::filesystem::path& path, const NiftiHeader* like) {
    require_binary(mask, "mask written as uint8");
    encode_and_write(mask, NiftiType::uint8, path, like);
}

void write_nifti(const Volume3<std::int16_t>& v, const std::filesystem::path& path, const NiftiHeader* like) {
    encode_and_write(v, NiftiType::int16, path, like);
}

void write_nifti(const Volume3<float>& v, const std::filesystem::path& path, const NiftiHeader* like) {
    encode_and_write(v, NiftiType::float32, path, like);
}

void write_nifti(const RealVolume& v, const std::filesystem::path& path, const NiftiHeader* like) {
    Volume3<float> f = Volume3<float>::like(v);
    for (std::int64_t i = 0; i < v.size(); ++i) f[i] = static_cast<float>(v[i]);
    encode_and_write(f, NiftiType::float32, path, like);
}

void write_nifti(const AnyVolume& v, const std::filesystem::path& path, const NiftiHeader* like) {
    std::visit([&](const auto& vol) { write_nifti(vol, path, like); }, v);
}

}  // namespace bel
