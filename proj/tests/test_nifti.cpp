#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "bel/errors.hpp"
#include "bel/nifti.hpp"
#include "oracles.hpp"

using namespace bel;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "bel_test_nifti";
    fs::create_directories(dir);
    return dir / name;
}

// Minimal hand-written single-file header followed by `payload`.
std::vector<char> fixture(std::int16_t nx, std::int16_t ny, std::int16_t nz, std::int16_t datatype,
                          std::int16_t bitpix, const std::vector<char>& payload, float slope = 0.0f,
                          float inter = 0.0f, const char* magic = "n+1") {
    std::vector<char> b(352, 0);
    auto put = [&](std::size_t off, const void* v, std::size_t n) { std::memcpy(b.data() + off, v, n); };
    const std::int32_t hdr = 348;
    put(0, &hdr, 4);
    const std::int16_t dim[8] = {3, nx, ny, nz, 1, 1, 1, 1};
    put(40, dim, sizeof dim);
    put(70, &datatype, 2);
    put(72, &bitpix, 2);
    const float pixdim[8] = {1.0f, 0.5f, 0.75f, 1.25f, 0, 0, 0, 0};
    put(76, pixdim, sizeof pixdim);
    const float off = 352.0f;
    put(108, &off, 4);
    put(112, &slope, 4);
    put(116, &inter, 4);
    std::memcpy(b.data() + 344, magic, 4);
    b.resize(352 + payload.size());
    if (!payload.empty()) std::memcpy(b.data() + 352, payload.data(), payload.size());
    return b;
}

void dump(const fs::path& p, const std::vector<char>& bytes) {
    std::ofstream f(p, std::ios::binary);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string field_of(const fs::path& p) {
    try {
        read_nifti(p);
    } catch (const FormatError& e) {
        return e.field();
    }
    return "";
}

}  // namespace

TEST_CASE("round trip for every datatype") {
    std::mt19937_64 rng(71);
    const Dims d{7, 5, 3};
    const Spacing sp{0.6, 0.7, 1.5};

    BinaryMask m = oracle::random_mask(rng, d, 0.4);
    m.set_spacing(sp);
    Volume3<std::int16_t> ct(d);
    std::uniform_int_distribution<int> hu(-1024, 3000);
    for (auto& v : ct.values()) v = static_cast<std::int16_t>(hu(rng));
    Volume3<float> f(d);
    std::normal_distribution<float> nd;
    for (auto& v : f.values()) v = nd(rng);

    for (const char* ext : {".nii", ".nii.gz"}) {
        const fs::path pm = scratch(std::string("m") + ext), pc = scratch(std::string("c") + ext),
                       pf = scratch(std::string("f") + ext);
        write_nifti(m, pm);
        write_nifti(ct, pc);
        write_nifti(f, pf);

        const NiftiImage im = read_nifti(pm);
        CHECK(im.header.datatype == NiftiType::uint8);
        CHECK(std::get<Volume3<std::uint8_t>>(im.volume).data() == m.data());
        CHECK(im.header.spacing.sx == doctest::Approx(0.6).epsilon(1e-6));
        CHECK(im.header.spacing.sz == doctest::Approx(1.5).epsilon(1e-6));
        CHECK(read_mask(pm).data() == m.data());

        const NiftiImage ic = read_nifti(pc);
        CHECK(ic.header.datatype == NiftiType::int16);
        CHECK(to_int16(ic).data() == ct.data());

        const NiftiImage ifl = read_nifti(pf);
        CHECK(ifl.header.datatype == NiftiType::float32);
        CHECK(std::get<Volume3<float>>(ifl.volume).data() == f.data());
        CHECK_FALSE(ifl.header.has_scaling());
    }
    // compressed and plain files decode to the same volume
    CHECK(read_real(scratch("f.nii")).data() == read_real(scratch("f.nii.gz")).data());
    CHECK(fs::file_size(scratch("m.nii.gz")) < fs::file_size(scratch("m.nii")));
}

TEST_CASE("real volumes are stored as float32") {
    RealVolume v(Dims{3, 3, 3});
    for (std::int64_t i = 0; i < v.size(); ++i) v[i] = 0.25 * double(i);
    write_nifti(v, scratch("r.nii"));
    CHECK(read_nifti(scratch("r.nii")).header.datatype == NiftiType::float32);
    CHECK(read_real(scratch("r.nii")).data() == v.data());
}

TEST_CASE("handcrafted 4x4x4 float32 fixture") {
    std::vector<char> payload(64 * 4);
    for (int i = 0; i < 64; ++i) {
        const float v = 10.0f * float(i) - 3.5f;
        std::memcpy(payload.data() + 4 * i, &v, 4);
    }
    dump(scratch("hand.nii"), fixture(4, 4, 4, 16, 32, payload));
    const NiftiImage img = read_nifti(scratch("hand.nii"));
    CHECK(img.header.dims == Dims{4, 4, 4});
    CHECK(img.header.spacing.sy == doctest::Approx(0.75));
    const RealVolume r = to_real(img);
    CHECK(r.at(0, 0, 0) == -3.5);
    CHECK(r.at(1, 0, 0) == 6.5);
    CHECK(r.at(0, 1, 0) == 36.5);  // x fastest, then y, then z
    CHECK(r.at(0, 0, 1) == 156.5);
    CHECK(r.at(3, 3, 3) == 626.5);

    // scl_slope/scl_inter applied on read
    dump(scratch("scaled.nii"), fixture(4, 4, 4, 16, 32, payload, 2.0f, 1.0f));
    const NiftiImage s = read_nifti(scratch("scaled.nii"));
    CHECK(s.header.has_scaling());
    CHECK(to_real(s).at(1, 0, 0) == 14.0);
    CHECK(std::get<Volume3<float>>(s.volume).at(1, 0, 0) == 6.5f);
}

TEST_CASE("format errors name the field") {
    std::vector<char> payload(8, 0);
    dump(scratch("magic.nii"), fixture(2, 2, 2, 2, 8, payload, 0, 0, "ni1"));
    CHECK(field_of(scratch("magic.nii")) == "magic");

    dump(scratch("dtype.nii"), fixture(2, 2, 2, 64, 64, std::vector<char>(64)));
    CHECK(field_of(scratch("dtype.nii")) == "datatype");

    dump(scratch("short.nii"), fixture(2, 2, 2, 2, 8, std::vector<char>(5)));
    CHECK(field_of(scratch("short.nii")) == "payload");

    dump(scratch("hdr.nii"), std::vector<char>(100, 0));
    CHECK(field_of(scratch("hdr.nii")) == "sizeof_hdr");

    CHECK(field_of(scratch("missing.nii")) == "file");

    std::vector<char> two(8, 0);
    two[3] = 2;
    dump(scratch("two.nii"), fixture(2, 2, 2, 2, 8, two));
    CHECK_NOTHROW(read_nifti(scratch("two.nii")));
    try {
        read_mask(scratch("two.nii"));
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.field()) == "payload");
    }
    CHECK_THROWS_AS(to_int16(read_nifti(scratch("two.nii"))), FormatError);
}

TEST_CASE("header pass-through") {
    BinaryMask m(Dims{3, 3, 3});
    m.at(1, 1, 1) = 1;
    write_nifti(m, scratch("src.nii"));
    NiftiImage src = read_nifti(scratch("src.nii"));
    std::memcpy(src.header.raw.data() + 148, "airway", 6);  // descrip
    write_nifti(m, scratch("dst.nii"), &src.header);
    const NiftiImage dst = read_nifti(scratch("dst.nii"));
    CHECK(std::memcmp(dst.header.raw.data() + 148, "airway", 6) == 0);
}
