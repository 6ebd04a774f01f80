#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include "mriq/error.hpp"
#include "mriq/rng.hpp"
#include "mriq/volume.hpp"
#include "support/oracles.hpp"
#include "support/phantoms.hpp"

using namespace mriq;
using namespace mriq::testing;

namespace {

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "mriq_volume_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

// Hand-built NIfTI-1 file, independent of save_volume.
void write_nifti_by_hand(const std::string& path, std::int16_t datatype,
                         const void* payload, std::size_t payload_bytes,
                         float slope = 0.0f, float inter = 0.0f) {
    std::vector<unsigned char> hdr(352, 0);
    auto put32 = [&](std::size_t off, std::int32_t v) { std::memcpy(&hdr[off], &v, 4); };
    auto put16 = [&](std::size_t off, std::int16_t v) { std::memcpy(&hdr[off], &v, 2); };
    auto putf = [&](std::size_t off, float v) { std::memcpy(&hdr[off], &v, 4); };
    put32(0, 348);
    put16(40, 3);              // dim[0]
    put16(42, 4); put16(44, 4); put16(46, 4);
    put16(48, 1); put16(50, 1); put16(52, 1); put16(54, 1);
    put16(70, datatype);
    putf(76 + 4, 1.0f); putf(76 + 8, 1.0f); putf(76 + 12, 1.0f);
    putf(108, 352.0f);         // vox_offset
    putf(112, slope);
    putf(116, inter);
    std::memcpy(&hdr[344], "n+1", 4);

    std::ofstream f(path, std::ios::binary);
    f.write(reinterpret_cast<const char*>(hdr.data()), 352);
    f.write(static_cast<const char*>(payload),
            static_cast<std::streamsize>(payload_bytes));
}

} // namespace

TEST_SUITE_BEGIN("volume");

TEST_CASE("load reads a hand-built float32 NIfTI bit-identically") {
    const auto path = (temp_dir() / "hand.nii").string();
    std::vector<float> payload(64);
    Rng rng(11);
    for (auto& x : payload)
        x = static_cast<float>(rng.uniform());
    write_nifti_by_hand(path, 16, payload.data(), payload.size() * 4);

    const Volume v = load_volume(path);
    CHECK(v.dims == std::array<int, 3>{4, 4, 4});
    CHECK(v.spacing == std::array<double, 3>{1.0, 1.0, 1.0});
    CHECK(v.source_type == ScalarType::F32);
    CHECK(std::memcmp(v.data.data(), payload.data(), payload.size() * 4) == 0);
}

TEST_CASE("save then load round-trips dims, spacing and bits") {
    Volume v = random_volume({5, 7, 3}, 21);
    v.spacing = {0.5, 1.25, 2.0};
    const auto path = (temp_dir() / "rt.nii").string();
    save_volume(v, path);
    const Volume back = load_volume(path);
    CHECK(back.dims == v.dims);
    CHECK(back.spacing[0] == doctest::Approx(0.5));
    CHECK(back.spacing[1] == doctest::Approx(1.25));
    CHECK(back.spacing[2] == doctest::Approx(2.0));
    CHECK(std::memcmp(back.data.data(), v.data.data(), v.data.size() * 4) == 0);

    // saving the reloaded volume again reproduces the same payload
    const auto path2 = (temp_dir() / "rt2.nii").string();
    save_volume(back, path2);
    const Volume again = load_volume(path2);
    CHECK(std::memcmp(again.data.data(), v.data.data(), v.data.size() * 4) == 0);
}

TEST_CASE("truncated header errors out as malformed") {
    const auto path = (temp_dir() / "short.nii").string();
    std::ofstream(path, std::ios::binary) << "n+1 but way too short";
    CHECK_THROWS_WITH_AS(load_volume(path),
                         doctest::Contains("malformed header"), io_error);
}

TEST_CASE("save to an unwritable location is an I/O error") {
    const Volume v({2, 2, 2}, 0.5f);
    CHECK_THROWS_AS(save_volume(v, "/nonexistent_dir_mriq/x.nii"), io_error);
}

TEST_CASE("224^3 payload size is exactly 224^3 * 4 bytes after the header") {
    const auto path = (temp_dir() / "big.nii").string();
    save_volume(Volume({224, 224, 224}, 0.25f), path);
    const auto size = std::filesystem::file_size(path);
    CHECK(size == 352 + 224ull * 224 * 224 * 4);
    std::filesystem::remove(path);
}

TEST_CASE("gzip twin loads identically to the plain file") {
    const Volume v = random_volume({6, 5, 4}, 33);
    const auto plain = (temp_dir() / "tw.nii").string();
    const auto gz = (temp_dir() / "tw.nii.gz").string();
    save_volume(v, plain);
    save_volume(v, gz);
    const Volume a = load_volume(plain);
    const Volume b = load_volume(gz);
    CHECK(a.dims == b.dims);
    CHECK(std::memcmp(a.data.data(), b.data.data(), a.data.size() * 4) == 0);
}

TEST_CASE("integer payloads honor scl_slope/scl_inter and keep raw scale") {
    const auto path = (temp_dir() / "i16.nii").string();
    std::vector<std::int16_t> payload(64);
    std::iota(payload.begin(), payload.end(), std::int16_t{0});
    write_nifti_by_hand(path, 4, payload.data(), payload.size() * 2, 2.0f, 10.0f);
    const Volume v = load_volume(path);
    CHECK(v.source_type == ScalarType::I16);
    CHECK(v.at(0, 0, 0) == doctest::Approx(10.0)); // 0*2+10
    CHECK(v.at(3, 0, 0) == doctest::Approx(16.0)); // 3*2+10
}

TEST_CASE("hdr/img pair with ni1 magic loads") {
    const auto hdr_path = (temp_dir() / "pair.hdr").string();
    const auto img_path = (temp_dir() / "pair.img").string();
    std::vector<float> payload(64, 0.75f);
    write_nifti_by_hand(hdr_path, 16, nullptr, 0);
    {
        // patch magic to ni1 and vox_offset to 0
        std::fstream f(hdr_path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(344);
        f.write("ni1", 4);
        const float zero = 0.0f;
        f.seekp(108);
        f.write(reinterpret_cast<const char*>(&zero), 4);
    }
    std::ofstream(img_path, std::ios::binary)
        .write(reinterpret_cast<const char*>(payload.data()), 64 * 4);
    const Volume v = load_volume(hdr_path);
    CHECK(v.dims == std::array<int, 3>{4, 4, 4});
    CHECK(v.at(3, 3, 3) == 0.75f);
}

TEST_CASE("byte-swapped (big-endian) files load transparently") {
    const auto path = (temp_dir() / "be.nii").string();
    std::vector<float> payload(64);
    Rng rng(14);
    for (auto& x : payload)
        x = static_cast<float>(rng.uniform());
    write_nifti_by_hand(path, 16, payload.data(), payload.size() * 4);
    {
        // swap every header field and payload word in place
        std::vector<unsigned char> bytes(352 + 64 * 4);
        std::ifstream in(path, std::ios::binary);
        in.read(reinterpret_cast<char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
        auto swap32 = [&](std::size_t off) {
            std::swap(bytes[off], bytes[off + 3]);
            std::swap(bytes[off + 1], bytes[off + 2]);
        };
        auto swap16 = [&](std::size_t off) { std::swap(bytes[off], bytes[off + 1]); };
        swap32(0);
        for (std::size_t i = 0; i < 8; ++i)
            swap16(40 + 2 * i); // dim
        swap16(70);             // datatype
        swap16(72);             // bitpix
        for (std::size_t i = 0; i < 8; ++i)
            swap32(76 + 4 * i); // pixdim
        swap32(108);            // vox_offset
        swap32(112);            // scl_slope
        swap32(116);            // scl_inter
        for (std::size_t i = 0; i < 64; ++i)
            swap32(352 + 4 * i);
        std::ofstream out(path, std::ios::binary);
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
    }
    const Volume v = load_volume(path);
    CHECK(v.dims == std::array<int, 3>{4, 4, 4});
    CHECK(std::memcmp(v.data.data(), payload.data(), payload.size() * 4) == 0);
}

TEST_CASE("4D headers with a single frame are accepted") {
    const auto path = (temp_dir() / "d4.nii").string();
    std::vector<float> payload(64, 0.5f);
    write_nifti_by_hand(path, 16, payload.data(), payload.size() * 4);
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        const std::int16_t four = 4, one = 1;
        f.seekp(40);
        f.write(reinterpret_cast<const char*>(&four), 2); // dim[0] = 4
        f.seekp(48);
        f.write(reinterpret_cast<const char*>(&one), 2); // dim[4] = 1
    }
    const Volume v = load_volume(path);
    CHECK(v.dims == std::array<int, 3>{4, 4, 4});

    // more than one frame is rejected
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        const std::int16_t two = 2;
        f.seekp(48);
        f.write(reinterpret_cast<const char*>(&two), 2);
    }
    CHECK_THROWS_AS(load_volume(path), io_error);
}

TEST_CASE("payload shorter than the header claims is rejected") {
    const auto path = (temp_dir() / "trunc_payload.nii").string();
    std::vector<float> payload(10, 1.0f); // header says 64 voxels
    write_nifti_by_hand(path, 16, payload.data(), payload.size() * 4);
    CHECK_THROWS_WITH_AS(load_volume(path),
                         doctest::Contains("inconsistent with payload"), io_error);
}

TEST_CASE("raw f32 sidecar round-trips") {
    Volume v = random_volume({3, 4, 5}, 5);
    v.spacing = {2.0, 2.0, 2.0};
    const auto path = (temp_dir() / "raw.f32raw").string();
    save_volume(v, path);
    const Volume back = load_volume(path);
    CHECK(back.dims == v.dims);
    CHECK(back.spacing == v.spacing);
    CHECK(std::memcmp(back.data.data(), v.data.data(), v.data.size() * 4) == 0);
}

TEST_CASE("normalize: uint8 values divide by 255") {
    Volume v({3, 1, 1});
    v.source_type = ScalarType::U8;
    v.data = {0.0f, 128.0f, 255.0f};
    const Volume n = normalize_intensity(v);
    CHECK(n.data[0] == doctest::Approx(0.0));
    CHECK(n.data[1] == doctest::Approx(128.0 / 255.0));
    CHECK(n.data[2] == doctest::Approx(1.0));
}

TEST_CASE("normalize: real data spanning [0,1] is unchanged and idempotent") {
    Volume v = random_volume({4, 4, 4}, 9);
    v.data[0] = 0.0f;
    v.data[1] = 1.0f;
    const Volume n = normalize_intensity(v);
    CHECK(max_abs_diff(n, v) == 0.0);
    CHECK(max_abs_diff(normalize_intensity(n), n) == 0.0);
}

TEST_CASE("normalize: constant volume maps to zeros") {
    const Volume n = normalize_intensity(Volume({3, 3, 3}, 7.0f));
    for (float x : n.data)
        CHECK(x == 0.0f);
}

TEST_CASE("normalize output is always inside [0,1]") {
    Volume v = random_volume({4, 4, 4}, 13);
    for (auto& x : v.data)
        x = x * 50.0f - 20.0f;
    CHECK(finite_in_unit_range(normalize_intensity(v)));
}

TEST_CASE("resample: identity when spacing already matches") {
    const Volume v = random_volume({4, 4, 4}, 3);
    CHECK(max_abs_diff(resample_isotropic(v, 1.0), v) == 0.0);
}

TEST_CASE("resample: 4^3 at 2mm to 1mm gives 8^3") {
    Volume v = random_volume({4, 4, 4}, 3);
    v.spacing = {2.0, 2.0, 2.0};
    const Volume r = resample_isotropic(v, 1.0);
    CHECK(r.dims == std::array<int, 3>{8, 8, 8});
    CHECK(r.spacing == std::array<double, 3>{1.0, 1.0, 1.0});
}

TEST_CASE("resample: ramp up 2x then back matches the ramp on the interior") {
    const Volume v = ramp_volume({12, 6, 6}, 0);
    const Volume back = resample_isotropic(resample_isotropic(v, 0.5), 1.0);
    REQUIRE(back.dims == v.dims);
    // direct evaluation of the ramp function, away from the zero-filled edge
    for (int z = 0; z < 6; ++z)
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 11; ++x) {
                const double expected = x / 11.0;
                CHECK(std::abs(back.at(x, y, z) - expected) < 1e-3);
            }
}

TEST_CASE("resample to zero-size volume is an error") {
    Volume v({2, 2, 2}, 0.1f);
    v.spacing = {0.1, 0.1, 0.1};
    CHECK_THROWS_AS(resample_isotropic(v, 10.0), data_error);
}

TEST_CASE("pad_center_crop: identity at target") {
    const Volume v = random_volume({224, 224, 224}, 17);
    CHECK(max_abs_diff(pad_center_crop(v, 224), v) == 0.0);
}

TEST_CASE("pad_center_crop: 200^3 input gets 12-voxel zero margins") {
    const Volume v({200, 200, 200}, 0.5f);
    const Volume p = pad_center_crop(v, 224);
    CHECK(p.dims == std::array<int, 3>{224, 224, 224});
    CHECK(p.at(11, 100, 100) == 0.0f);
    CHECK(p.at(12, 100, 100) == 0.5f);
    CHECK(p.at(211, 100, 100) == 0.5f);
    CHECK(p.at(212, 100, 100) == 0.0f);
}

TEST_CASE("pad_center_crop: 240^3 input keeps the central 224^3 block") {
    Volume v({240, 240, 240}, 0.0f);
    v.at(8, 8, 8) = 1.0f;   // (240-224)/2 = 8: first kept voxel
    v.at(7, 8, 8) = 0.25f;  // cropped away
    v.at(120, 120, 120) = 0.75f;
    const Volume p = pad_center_crop(v, 224);
    CHECK(p.dims == std::array<int, 3>{224, 224, 224});
    CHECK(p.at(0, 0, 0) == 1.0f);
    CHECK(p.at(112, 112, 112) == 0.75f);
}

TEST_CASE("pad_center_crop is idempotent") {
    const Volume v = random_volume({9, 17, 30}, 23);
    const Volume once = pad_center_crop(v, 24);
    const Volume twice = pad_center_crop(once, 24);
    CHECK(max_abs_diff(once, twice) == 0.0);
}

TEST_CASE("stats: constants and half-half") {
    const VolumeStats a = stats(Volume({4, 4, 4}, 0.5f));
    CHECK(a.mean == doctest::Approx(0.5));
    CHECK(a.std_dev == doctest::Approx(0.0));

    Volume v({2, 2, 2});
    v.data = {0, 0, 0, 0, 1, 1, 1, 1};
    const VolumeStats b = stats(v);
    CHECK(b.mean == doctest::Approx(0.5));
    CHECK(b.std_dev == doctest::Approx(0.5));
}

TEST_CASE("stats matches the two-pass oracle and ignores voxel order") {
    Volume v = random_volume({3, 3, 3}, 77);
    const VolumeStats s = stats(v);
    const MeanStd oracle = naive_mean_std(v.data);
    CHECK(std::abs(s.mean - oracle.mean) < 1e-12);
    CHECK(std::abs(s.std_dev - oracle.std_dev) < 1e-12);

    // permutation invariance
    std::reverse(v.data.begin(), v.data.end());
    std::swap(v.data[3], v.data[20]);
    const VolumeStats p = stats(v);
    CHECK(p.mean == doctest::Approx(s.mean).epsilon(1e-12));
    CHECK(p.std_dev == doctest::Approx(s.std_dev).epsilon(1e-12));
}

TEST_SUITE_END();
