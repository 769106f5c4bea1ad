#include "dccs/png.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <string>

#include <zlib.h>

#include "dccs/errors.hpp"

namespace dccs {
namespace {

void put_be32(std::string &s, std::uint32_t v) {
    s += static_cast<char>((v >> 24) & 0xff);
    s += static_cast<char>((v >> 16) & 0xff);
    s += static_cast<char>((v >> 8) & 0xff);
    s += static_cast<char>(v & 0xff);
}

std::uint32_t get_be32(const unsigned char *p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | p[3];
}

void chunk(std::ostream &os, const char *type, const std::string &data) {
    std::string out;
    put_be32(out, static_cast<std::uint32_t>(data.size()));
    std::string body = std::string(type, 4) + data;
    out += body;
    put_be32(out, static_cast<std::uint32_t>(crc32(0, reinterpret_cast<const Bytef *>(body.data()),
                                                   static_cast<uInt>(body.size()))));
    os.write(out.data(), static_cast<std::streamsize>(out.size()));
}

constexpr unsigned char kSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

} // namespace

void write_png_gray(const std::filesystem::path &path, int width, int height, const std::vector<std::uint8_t> &pixels) {
    if (width < 1 || height < 1 || pixels.size() != static_cast<std::size_t>(width) * height) {
        throw InvalidValue("png dimensions do not match pixel buffer");
    }
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw FormatError("cannot open " + path.string());
    os.write(reinterpret_cast<const char *>(kSignature), 8);

    std::string ihdr;
    put_be32(ihdr, static_cast<std::uint32_t>(width));
    put_be32(ihdr, static_cast<std::uint32_t>(height));
    ihdr += static_cast<char>(8); // bit depth
    ihdr += static_cast<char>(0); // grayscale
    ihdr += std::string(3, '\0');
    chunk(os, "IHDR", ihdr);

    std::string raw;
    raw.reserve(static_cast<std::size_t>(width + 1) * height);
    for (int y = 0; y < height; ++y) {
        raw += '\0'; // filter: none
        raw.append(reinterpret_cast<const char *>(pixels.data()) + static_cast<std::size_t>(y) * width, width);
    }
    uLongf len = compressBound(static_cast<uLong>(raw.size()));
    std::string z(len, '\0');
    if (compress2(reinterpret_cast<Bytef *>(z.data()), &len, reinterpret_cast<const Bytef *>(raw.data()),
                  static_cast<uLong>(raw.size()), 9) != Z_OK) {
        throw FormatError("png compression failed");
    }
    z.resize(len);
    chunk(os, "IDAT", z);
    chunk(os, "IEND", "");
}

std::vector<std::uint8_t> read_png_gray(const std::filesystem::path &path, int &width, int &height) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kSignature, 8) != 0) throw FormatError("not a PNG file");
    std::string idat;
    std::size_t pos = 8;
    width = height = 0;
    while (pos + 12 <= bytes.size()) {
        const auto *p = reinterpret_cast<const unsigned char *>(bytes.data() + pos);
        const std::uint32_t len = get_be32(p);
        const std::string type(bytes.data() + pos + 4, 4);
        const std::string data = bytes.substr(pos + 8, len);
        if (type == "IHDR") {
            const auto *d = reinterpret_cast<const unsigned char *>(data.data());
            width = static_cast<int>(get_be32(d));
            height = static_cast<int>(get_be32(d + 4));
            if (d[8] != 8 || d[9] != 0) throw FormatError("only 8-bit grayscale PNG is supported");
        } else if (type == "IDAT") {
            idat += data;
        }
        pos += 12 + len;
    }
    uLongf raw_len = static_cast<uLongf>(width + 1) * height;
    std::string raw(raw_len, '\0');
    if (uncompress(reinterpret_cast<Bytef *>(raw.data()), &raw_len, reinterpret_cast<const Bytef *>(idat.data()),
                   static_cast<uLong>(idat.size())) != Z_OK) {
        throw FormatError("png decompression failed");
    }
    std::vector<std::uint8_t> px(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        if (raw[static_cast<std::size_t>(y) * (width + 1)] != 0) throw FormatError("unsupported PNG filter");
        std::memcpy(px.data() + static_cast<std::size_t>(y) * width, raw.data() + static_cast<std::size_t>(y) * (width + 1) + 1, width);
    }
    return px;
}

} // namespace dccs
