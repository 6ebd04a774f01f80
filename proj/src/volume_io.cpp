#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include <zlib.h>

#include <json.hpp>

#include "mriq/error.hpp"
#include "mriq/volume.hpp"

namespace mriq {
namespace {

// NIfTI-1 header, 348 bytes, no padding on the ABIs we target.
struct Nifti1Header {
    std::int32_t sizeof_hdr;
    char data_type[10];
    char db_name[18];
    std::int32_t extents;
    std::int16_t session_error;
    char regular;
    char dim_info;
    std::int16_t dim[8];
    float intent_p1, intent_p2, intent_p3;
    std::int16_t intent_code;
    std::int16_t datatype;
    std::int16_t bitpix;
    std::int16_t slice_start;
    float pixdim[8];
    float vox_offset;
    float scl_slope;
    float scl_inter;
    std::int16_t slice_end;
    char slice_code;
    char xyzt_units;
    float cal_max, cal_min;
    float slice_duration;
    float toffset;
    std::int32_t glmax, glmin;
    char descrip[80];
    char aux_file[24];
    std::int16_t qform_code, sform_code;
    float quatern_b, quatern_c, quatern_d;
    float qoffset_x, qoffset_y, qoffset_z;
    float srow_x[4], srow_y[4], srow_z[4];
    char intent_name[16];
    char magic[4];
};
static_assert(sizeof(Nifti1Header) == 348, "NIfTI-1 header must pack to 348 bytes");
static_assert(std::endian::native == std::endian::little,
              "volume I/O assumes a little-endian host");

// NIfTI datatype codes.
constexpr std::int16_t DT_UINT8 = 2;
constexpr std::int16_t DT_INT16 = 4;
constexpr std::int16_t DT_INT32 = 8;
constexpr std::int16_t DT_FLOAT32 = 16;
constexpr std::int16_t DT_FLOAT64 = 64;

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<unsigned char> read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("cannot open file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return bytes;
}

std::vector<unsigned char> gunzip(const std::vector<unsigned char>& in,
                                  const std::string& path) {
    z_stream strm{};
    if (inflateInit2(&strm, 15 + 32) != Z_OK) // auto-detect gzip/zlib wrapper
        throw io_error("zlib init failed for: " + path);
    std::vector<unsigned char> out;
    out.reserve(in.size() * 4);
    unsigned char buf[1 << 16];
    strm.next_in = const_cast<unsigned char*>(in.data());
    strm.avail_in = static_cast<uInt>(in.size());
    int rc = Z_OK;
    do {
        strm.next_out = buf;
        strm.avail_out = sizeof(buf);
        rc = inflate(&strm, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&strm);
            throw io_error("corrupt gzip stream: " + path);
        }
        out.insert(out.end(), buf, buf + (sizeof(buf) - strm.avail_out));
    } while (rc != Z_STREAM_END);
    inflateEnd(&strm);
    return out;
}

void gzip_to_file(const void* data, std::size_t n, const std::string& path) {
    gzFile gz = gzopen(path.c_str(), "wb6");
    if (!gz)
        throw io_error("cannot open file for writing: " + path);
    std::size_t off = 0;
    const char* p = static_cast<const char*>(data);
    while (off < n) {
        const unsigned chunk =
            static_cast<unsigned>(std::min<std::size_t>(n - off, 1u << 28));
        if (gzwrite(gz, p + off, chunk) != static_cast<int>(chunk)) {
            gzclose(gz);
            throw io_error("gzip write failed: " + path);
        }
        off += chunk;
    }
    if (gzclose(gz) != Z_OK)
        throw io_error("gzip close failed: " + path);
}

template <typename T>
T byteswap_scalar(T v) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
}

void swap_header(Nifti1Header& h) {
    h.sizeof_hdr = byteswap_scalar(h.sizeof_hdr);
    for (auto& d : h.dim) d = byteswap_scalar(d);
    h.datatype = byteswap_scalar(h.datatype);
    h.bitpix = byteswap_scalar(h.bitpix);
    for (auto& p : h.pixdim) p = byteswap_scalar(p);
    h.vox_offset = byteswap_scalar(h.vox_offset);
    h.scl_slope = byteswap_scalar(h.scl_slope);
    h.scl_inter = byteswap_scalar(h.scl_inter);
}

template <typename T>
void decode_payload(const unsigned char* src, std::size_t nvox, bool swap,
                    std::vector<float>& dst) {
    dst.resize(nvox);
    for (std::size_t i = 0; i < nvox; ++i) {
        T raw;
        std::memcpy(&raw, src + i * sizeof(T), sizeof(T));
        if (swap)
            raw = byteswap_scalar(raw);
        dst[i] = static_cast<float>(raw);
    }
}

Volume load_raw_sidecar(const std::string& path) {
    const std::string json_path =
        path.substr(0, path.size() - std::strlen(".f32raw")) + ".json";
    nlohmann::json meta;
    {
        std::ifstream in(json_path);
        if (!in)
            throw io_error("missing raw sidecar metadata: " + json_path);
        try {
            in >> meta;
        } catch (const nlohmann::json::exception& e) {
            throw io_error("bad raw sidecar metadata (" + json_path + "): " + e.what());
        }
    }
    Volume v;
    try {
        for (int a = 0; a < 3; ++a) {
            v.dims[a] = meta.at("dims").at(a).get<int>();
            v.spacing[a] = meta.at("spacing").at(a).get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw io_error("bad raw sidecar metadata (" + json_path + "): " + e.what());
    }
    if (v.dims[0] < 1 || v.dims[1] < 1 || v.dims[2] < 1 || v.spacing[0] <= 0 ||
        v.spacing[1] <= 0 || v.spacing[2] <= 0)
        throw io_error("bad raw sidecar dims/spacing: " + json_path);

    const auto bytes = read_all(path);
    const std::size_t nvox =
        static_cast<std::size_t>(v.dims[0]) * v.dims[1] * v.dims[2];
    if (bytes.size() != nvox * 4)
        throw io_error("raw payload size does not match sidecar dims: " + path);
    decode_payload<float>(bytes.data(), nvox, false, v.data);
    v.source_type = ScalarType::F32;
    return v;
}

void save_raw_sidecar(const Volume& v, const std::string& path) {
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw io_error("cannot open file for writing: " + path);
        out.write(reinterpret_cast<const char*>(v.data.data()),
                  static_cast<std::streamsize>(v.data.size() * 4));
        if (!out)
            throw io_error("write failed: " + path);
    }
    const std::string json_path =
        path.substr(0, path.size() - std::strlen(".f32raw")) + ".json";
    nlohmann::json meta;
    meta["dims"] = {v.dims[0], v.dims[1], v.dims[2]};
    meta["spacing"] = {v.spacing[0], v.spacing[1], v.spacing[2]};
    std::ofstream out(json_path);
    if (!out)
        throw io_error("cannot open file for writing: " + json_path);
    out << meta.dump() << '\n';
    if (!out)
        throw io_error("write failed: " + json_path);
}

} // namespace

Volume load_volume(const std::string& path) {
    if (ends_with(path, ".f32raw"))
        return load_raw_sidecar(path);

    std::vector<unsigned char> bytes = read_all(path);
    if (bytes.size() >= 2 && bytes[0] == 0x1F && bytes[1] == 0x8B)
        bytes = gunzip(bytes, path);

    if (bytes.size() < sizeof(Nifti1Header))
        throw io_error("malformed header (file shorter than 348 bytes): " + path);

    Nifti1Header hdr;
    std::memcpy(&hdr, bytes.data(), sizeof(hdr));
    bool swap = false;
    if (hdr.sizeof_hdr != 348) {
        swap_header(hdr);
        swap = true;
        if (hdr.sizeof_hdr != 348)
            throw io_error("malformed header (bad sizeof_hdr): " + path);
    }

    const bool single_file = std::memcmp(hdr.magic, "n+1", 3) == 0 && hdr.magic[3] == 0;
    const bool pair_file = std::memcmp(hdr.magic, "ni1", 3) == 0 && hdr.magic[3] == 0;
    if (!single_file && !pair_file)
        throw io_error("not a NIfTI-1 file (bad magic): " + path);

    if (hdr.dim[0] != 3 && hdr.dim[0] != 4)
        throw io_error("unsupported dimensionality (dim[0] must be 3 or 4): " + path);
    if (hdr.dim[0] == 4 && hdr.dim[4] != 1)
        throw io_error("4D volumes with more than one frame are unsupported: " + path);

    Volume v;
    std::size_t nvox = 1;
    for (int a = 0; a < 3; ++a) {
        v.dims[a] = hdr.dim[a + 1];
        if (v.dims[a] < 1)
            throw io_error("malformed header (non-positive dim): " + path);
        nvox *= static_cast<std::size_t>(v.dims[a]);
        v.spacing[a] = hdr.pixdim[a + 1] > 0 ? hdr.pixdim[a + 1] : 1.0;
    }

    std::size_t elem_size = 0;
    switch (hdr.datatype) {
    case DT_UINT8:   v.source_type = ScalarType::U8;  elem_size = 1; break;
    case DT_INT16:   v.source_type = ScalarType::I16; elem_size = 2; break;
    case DT_INT32:   v.source_type = ScalarType::I32; elem_size = 4; break;
    case DT_FLOAT32: v.source_type = ScalarType::F32; elem_size = 4; break;
    case DT_FLOAT64: v.source_type = ScalarType::F64; elem_size = 8; break;
    default:
        throw io_error("unsupported NIfTI datatype " + std::to_string(hdr.datatype) +
                       ": " + path);
    }

    std::vector<unsigned char> img_bytes;
    const unsigned char* payload = nullptr;
    std::size_t avail = 0;
    if (single_file) {
        const std::size_t off =
            std::max<std::size_t>(static_cast<std::size_t>(hdr.vox_offset), 348);
        if (off > bytes.size())
            throw io_error("header dims inconsistent with payload size: " + path);
        payload = bytes.data() + off;
        avail = bytes.size() - off;
    } else {
        std::string img_path = path;
        if (ends_with(img_path, ".hdr"))
            img_path.replace(img_path.size() - 4, 4, ".img");
        else
            throw io_error("ni1 header without .hdr extension: " + path);
        img_bytes = read_all(img_path);
        if (img_bytes.size() >= 2 && img_bytes[0] == 0x1F && img_bytes[1] == 0x8B)
            img_bytes = gunzip(img_bytes, img_path);
        const std::size_t off = static_cast<std::size_t>(
            hdr.vox_offset > 0 ? hdr.vox_offset : 0.0f);
        if (off > img_bytes.size())
            throw io_error("header dims inconsistent with payload size: " + img_path);
        payload = img_bytes.data() + off;
        avail = img_bytes.size() - off;
    }
    if (avail < nvox * elem_size)
        throw io_error("header dims inconsistent with payload size: " + path);

    switch (v.source_type) {
    case ScalarType::U8:  decode_payload<std::uint8_t>(payload, nvox, swap, v.data); break;
    case ScalarType::I16: decode_payload<std::int16_t>(payload, nvox, swap, v.data); break;
    case ScalarType::I32: decode_payload<std::int32_t>(payload, nvox, swap, v.data); break;
    case ScalarType::F32: decode_payload<float>(payload, nvox, swap, v.data); break;
    case ScalarType::F64: decode_payload<double>(payload, nvox, swap, v.data); break;
    }

    // scl_slope == 0 means "no scaling" by convention.
    if (hdr.scl_slope != 0.0f && !(hdr.scl_slope == 1.0f && hdr.scl_inter == 0.0f)) {
        for (auto& x : v.data)
            x = x * hdr.scl_slope + hdr.scl_inter;
    }

    for (float x : v.data)
        if (!std::isfinite(x))
            throw io_error("volume payload contains non-finite values: " + path);
    return v;
}

void save_volume(const Volume& v, const std::string& path) {
    if (v.data.size() != static_cast<std::size_t>(v.dims[0]) * v.dims[1] * v.dims[2])
        throw data_error("save_volume: data size does not match dims");
    if (ends_with(path, ".f32raw")) {
        save_raw_sidecar(v, path);
        return;
    }

    Nifti1Header hdr{};
    hdr.sizeof_hdr = 348;
    hdr.regular = 'r';
    hdr.dim[0] = 3;
    for (int a = 0; a < 3; ++a) {
        hdr.dim[a + 1] = static_cast<std::int16_t>(v.dims[a]);
        hdr.pixdim[a + 1] = static_cast<float>(v.spacing[a]);
    }
    for (int a = 4; a < 8; ++a)
        hdr.dim[a] = 1;
    hdr.datatype = DT_FLOAT32;
    hdr.bitpix = 32;
    hdr.vox_offset = 352.0f;
    hdr.scl_slope = 0.0f; // no scaling; keeps round-trips bit-exact
    hdr.scl_inter = 0.0f;
    std::memcpy(hdr.magic, "n+1", 4);

    std::vector<unsigned char> out(352 + v.data.size() * 4, 0);
    std::memcpy(out.data(), &hdr, sizeof(hdr));
    // bytes 348..351: empty extension flag
    std::memcpy(out.data() + 352, v.data.data(), v.data.size() * 4);

    if (ends_with(path, ".gz")) {
        gzip_to_file(out.data(), out.size(), path);
    } else {
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw io_error("cannot open file for writing: " + path);
        f.write(reinterpret_cast<const char*>(out.data()),
                static_cast<std::streamsize>(out.size()));
        if (!f)
            throw io_error("write failed: " + path);
    }
}

} // namespace mriq
