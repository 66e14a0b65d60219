#include "msr/data/tensor_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace msr::data {
namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'M', 'S', 'R', 'T'};
constexpr std::uint8_t kVersion = 0x01;
constexpr std::size_t kMaxRank = 8;

std::uint8_t* put_u32(std::uint8_t* out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) *out++ = static_cast<std::uint8_t>(v >> (8 * i));
    return out;
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::vector<std::uint8_t> encode_array(std::span<const std::uint32_t> dims,
                                       std::span<const float> values) {
    if (dims.empty() || dims.size() > kMaxRank) throw ShapeError("tensor rank must be 1..8");
    std::uint64_t count = 1;
    for (auto d : dims) count *= d;
    if (count != values.size()) throw ShapeError("tensor dims do not match value count");

    std::vector<std::uint8_t> out(6 + 4 * dims.size() + 4 * values.size());
    std::uint8_t* p = std::copy(kMagic.begin(), kMagic.end(), out.data());
    *p++ = kVersion;
    *p++ = static_cast<std::uint8_t>(dims.size());
    for (auto d : dims) p = put_u32(p, d);
    for (float v : values) p = put_u32(p, std::bit_cast<std::uint32_t>(v));
    return out;
}

RawArray decode_array(std::span<const std::uint8_t> bytes) {
    if (bytes.empty()) throw ParseError(ParseErrorKind::kEmpty, "tensor file is empty");
    if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
        throw ParseError(ParseErrorKind::kBadMagic, "tensor file has wrong magic bytes");
    }
    if (bytes.size() < 6) throw ParseError(ParseErrorKind::kTruncated, "tensor header truncated");
    if (bytes[4] != kVersion) {
        throw ParseError(ParseErrorKind::kBadVersion,
                         "unsupported tensor version " + std::to_string(bytes[4]));
    }
    const std::size_t rank = bytes[5];
    if (rank == 0 || rank > kMaxRank) {
        throw ParseError(ParseErrorKind::kBadRank, "invalid tensor rank " + std::to_string(rank));
    }
    const std::size_t header = 6 + 4 * rank;
    if (bytes.size() < header) throw ParseError(ParseErrorKind::kTruncated, "tensor dims truncated");

    RawArray out;
    std::uint64_t count = 1;
    for (std::size_t i = 0; i < rank; ++i) {
        out.dims.push_back(get_u32(bytes.data() + 6 + 4 * i));
        count *= out.dims.back();
    }
    const std::uint64_t expected = header + 4 * count;
    if (bytes.size() < expected) {
        throw ParseError(ParseErrorKind::kTruncated,
                         "tensor payload truncated: expected " + std::to_string(expected) +
                             " bytes, got " + std::to_string(bytes.size()));
    }
    if (bytes.size() > expected) {
        throw ParseError(ParseErrorKind::kTrailingBytes, "tensor file has trailing bytes");
    }
    out.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.values[i] = std::bit_cast<float>(get_u32(bytes.data() + header + 4 * i));
    }
    return out;
}

void save_array(const std::filesystem::path& path, std::span<const std::uint32_t> dims,
                std::span<const float> values) {
    const auto bytes = encode_array(dims, values);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed: " + path.string());
}

RawArray load_array(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_array(bytes);
}

void save_tensor(const std::filesystem::path& path, const Tensor<float>& t) {
    const Shape& s = t.shape();
    const std::array<std::uint32_t, 4> dims{static_cast<std::uint32_t>(s.n), static_cast<std::uint32_t>(s.c),
                                            static_cast<std::uint32_t>(s.h), static_cast<std::uint32_t>(s.w)};
    save_array(path, dims, t.span());
}

Tensor<float> load_tensor(const std::filesystem::path& path) {
    RawArray raw = load_array(path);
    if (raw.dims.size() > 4) throw ShapeError("tensor rank exceeds 4: " + path.string());
    std::array<std::size_t, 4> d{1, 1, 1, 1};
    std::copy(raw.dims.begin(), raw.dims.end(), d.end() - static_cast<std::ptrdiff_t>(raw.dims.size()));
    return Tensor<float>(Shape{d[0], d[1], d[2], d[3]}, std::move(raw.values));
}

void save_image(const std::filesystem::path& path, const fourier::Image& image) {
    std::vector<float> values(image.data.begin(), image.data.end());
    const std::array<std::uint32_t, 2> dims{static_cast<std::uint32_t>(image.height),
                                            static_cast<std::uint32_t>(image.width)};
    save_array(path, dims, values);
}

fourier::Image load_image(const std::filesystem::path& path) {
    const Tensor<float> t = load_tensor(path);
    if (t.shape().n != 1 || t.shape().c != 1) throw ShapeError("not a single image: " + path.string());
    return fourier::Image(t.shape().h, t.shape().w, std::vector<double>(t.vec().begin(), t.vec().end()));
}

}  // namespace msr::data
