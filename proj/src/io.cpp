#include "lsc/io.hpp"

#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "lsc/errors.hpp"

namespace lsc {
namespace {

constexpr std::array<char, 4> kMagic = {'S', 'C', 'T', '1'};

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::string read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StorageError("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw StorageError("read failed: " + path.string());
    return bytes;
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageError("cannot open for writing: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw StorageError("write failed: " + path.string());
}

} // namespace

void save_tensor(const Tensor& t, const std::filesystem::path& path) {
    std::string bytes(kMagic.begin(), kMagic.end());
    bytes.push_back(static_cast<char>(t.rank()));
    for (std::size_t extent : t.dims()) put_u64(bytes, extent);
    bytes.reserve(bytes.size() + 8 * t.size());
    for (double v : t.data()) put_u64(bytes, std::bit_cast<std::uint64_t>(v));
    write_bytes(path, bytes);
}

Tensor load_tensor(const std::filesystem::path& path) {
    const std::string bytes = read_bytes(path);
    const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::string where = " in " + path.string();

    if (bytes.size() < 5 || std::memcmp(raw, kMagic.data(), kMagic.size()) != 0) {
        throw FormatError("bad magic, expected SCT1" + where);
    }
    const std::size_t rank = raw[4];
    if (rank > kMaxTensorRank) {
        throw FormatError("unsupported rank " + std::to_string(rank) + where);
    }
    const std::size_t header = 5 + 8 * rank;
    if (bytes.size() < header) {
        throw FormatError("truncated header: expected " + std::to_string(header) +
                          " bytes, got " + std::to_string(bytes.size()) + where);
    }
    std::vector<std::size_t> dims(rank);
    std::size_t count = 1;
    for (std::size_t i = 0; i < rank; ++i) {
        const std::uint64_t extent = get_u64(raw + 5 + 8 * i);
        if (extent == 0) throw FormatError("zero extent" + where);
        if (extent > (std::uint64_t{1} << 40) / count) throw FormatError("extent overflow" + where);
        dims[i] = static_cast<std::size_t>(extent);
        count *= dims[i];
    }
    const std::size_t expected = header + 8 * count;
    if (bytes.size() != expected) {
        throw FormatError("payload size mismatch: expected " + std::to_string(expected) +
                          " bytes, got " + std::to_string(bytes.size()) + where);
    }
    std::vector<double> data(count);
    for (std::size_t i = 0; i < count; ++i) {
        data[i] = std::bit_cast<double>(get_u64(raw + header + 8 * i));
        if (!std::isfinite(data[i])) {
            throw ValidationError("non-finite value at flat index " + std::to_string(i) + where);
        }
    }
    return Tensor(std::move(dims), std::move(data));
}

Tensor load_pgm(const std::filesystem::path& path) {
    const std::string bytes = read_bytes(path);
    const std::string where = " in " + path.string();
    std::size_t pos = 0;

    auto next_token = [&]() -> std::string {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
        const std::size_t start = pos;
        while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        return bytes.substr(start, pos - start);
    };
    auto next_int = [&]() -> long {
        const std::string tok = next_token();
        char* end = nullptr;
        const long v = std::strtol(tok.c_str(), &end, 10);
        if (tok.empty() || *end != '\0' || v <= 0) throw FormatError("bad PGM header" + where);
        return v;
    };

    if (next_token() != "P5") throw FormatError("not a binary PGM (P5)" + where);
    const long width = next_int();
    const long height = next_int();
    const long maxval = next_int();
    if (maxval > 65535) throw FormatError("PGM maxval above 65535" + where);
    ++pos;  // single whitespace byte before the raster

    const std::size_t sample_bytes = maxval > 255 ? 2 : 1;
    const std::size_t pixels = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    const std::size_t raster = pixels * sample_bytes;
    if (bytes.size() < pos + raster) {
        throw FormatError("truncated raster: expected " + std::to_string(raster) +
                          " bytes, got " + std::to_string(bytes.size() - std::min(pos, bytes.size())) +
                          where);
    }
    std::vector<double> data(pixels);
    for (std::size_t i = 0; i < pixels; ++i) {
        unsigned value = static_cast<unsigned char>(bytes[pos + i * sample_bytes]);
        if (sample_bytes == 2) {
            value = (value << 8) | static_cast<unsigned char>(bytes[pos + i * 2 + 1]);  // big-endian
        }
        data[i] = value / static_cast<double>(maxval);
    }
    return Tensor({static_cast<std::size_t>(height), static_cast<std::size_t>(width)}, std::move(data));
}

void save_pgm(const Tensor& image, const std::filesystem::path& path) {
    if (image.rank() != 2) throw ContractError("save_pgm needs an HxW tensor");
    std::string bytes = "P5\n" + std::to_string(image.dim(1)) + " " + std::to_string(image.dim(0)) +
                        "\n255\n";
    for (double v : image.data()) {
        const double clamped = std::clamp(v, 0.0, 1.0);
        bytes.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(clamped * 255.0))));
    }
    write_bytes(path, bytes);
}

Tensor load_images(const std::vector<std::filesystem::path>& paths) {
    if (paths.empty()) throw ConfigError("no image sources given");
    std::vector<Tensor> planes;
    for (const auto& p : paths) {
        Tensor t = p.extension() == ".pgm" ? load_pgm(p) : load_tensor(p);
        if (t.rank() == 3 && paths.size() == 1) return t;
        if (t.rank() != 2) {
            throw FormatError("image source must be HxW (or a single HxWxC), got " +
                              shape_string(t.dims()) + " in " + p.string());
        }
        if (!planes.empty() && t.dims() != planes.front().dims()) {
            throw FormatError("image sources differ in size: " + p.string());
        }
        planes.push_back(std::move(t));
    }
    if (planes.size() == 1) return std::move(planes.front());

    const std::size_t h = planes[0].dim(0), w = planes[0].dim(1), c = planes.size();
    Tensor stack({h, w, c});
    for (std::size_t k = 0; k < c; ++k) {
        for (std::size_t i = 0; i < h * w; ++i) stack[i * c + k] = planes[k][i];
    }
    return stack;
}

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t basis) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = basis;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
    const std::string bytes = read_bytes(path);
    return fnv1a64(bytes.data(), bytes.size());
}

std::string read_text_file(const std::filesystem::path& path) { return read_bytes(path); }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    write_bytes(path, text);
}

} // namespace lsc
