#include "dccs/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

namespace dccs::io {
namespace {

using json = nlohmann::json;

void put_u32(std::ostream &os, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                       static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    os.write(b, 4);
}

std::uint32_t get_u32(std::istream &is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char *>(b), 4)) throw FormatError("truncated file (length prefix)");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream &os, double v) { put_u32(os, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

double get_f32(std::istream &is) { return static_cast<double>(std::bit_cast<float>(get_u32(is))); }

void write_header(std::ostream &os, const char *magic, const json &header) {
    os.write(magic, 8);
    const std::string text = header.dump();
    put_u32(os, static_cast<std::uint32_t>(text.size()));
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
}

json read_header(std::istream &is, const char *magic) {
    char m[8];
    if (!is.read(m, 8)) throw FormatError("truncated file (magic)");
    if (std::memcmp(m, magic, 8) != 0) {
        throw FormatError("bad magic: expected " + std::string(magic, 8) + ", found " + std::string(m, 8));
    }
    const auto len = get_u32(is);
    if (len > (1u << 24)) throw FormatError("header length implausible");
    std::string text(len, '\0');
    if (!is.read(text.data(), len)) throw FormatError("truncated file (header)");
    try {
        return json::parse(text);
    } catch (const json::exception &e) {
        throw FormatError(std::string("malformed header JSON: ") + e.what());
    }
}

Shape shape_from(const json &h) {
    try {
        Shape s{h.at("nx").get<int>(), h.at("ny").get<int>(), h.at("nt").get<int>()};
        validate_shape(s);
        return s;
    } catch (const json::exception &e) {
        throw FormatError(std::string("header missing shape: ") + e.what());
    }
}

void put_bits(std::ostream &os, std::span<const std::uint8_t> mask) {
    std::string bytes((mask.size() + 7) / 8, '\0');
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) bytes[i / 8] = static_cast<char>(static_cast<unsigned char>(bytes[i / 8]) | (1u << (i % 8)));
    }
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::uint8_t> get_bits(std::istream &is, std::size_t n) {
    std::string bytes((n + 7) / 8, '\0');
    if (!is.read(bytes.data(), static_cast<std::streamsize>(bytes.size()))) throw FormatError("truncated mask payload");
    std::vector<std::uint8_t> mask(n);
    for (std::size_t i = 0; i < n; ++i) mask[i] = (static_cast<unsigned char>(bytes[i / 8]) >> (i % 8)) & 1u;
    return mask;
}

json pattern_header(const SamplingPattern &p) {
    const auto &s = p.shape();
    const auto &g = p.params();
    return json{{"nx", s.nx},
                {"ny", s.ny},
                {"nt", s.nt},
                {"layout", "fft"},
                {"count", p.count()},
                {"rays_per_frame", g.rays_per_frame},
                {"angle_increment", g.angle_increment},
                {"samples_per_ray", g.samples_per_ray},
                {"reset_per_frame", g.reset_per_frame}};
}

GoldenAngleParams params_from(const json &h, const Shape &s) {
    GoldenAngleParams g;
    g.nx = s.nx;
    g.ny = s.ny;
    g.nt = s.nt;
    g.rays_per_frame = h.value("rays_per_frame", 0);
    g.angle_increment = h.value("angle_increment", 111.25);
    g.samples_per_ray = h.value("samples_per_ray", 0);
    g.reset_per_frame = h.value("reset_per_frame", false);
    return g;
}

template <class T, class Writer>
void save_with(const std::filesystem::path &p, const T &v, Writer w) {
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw FormatError("cannot open " + p.string() + " for writing");
    w(os, v);
    if (!os) throw FormatError("write failed: " + p.string());
}

std::ifstream open_in(const std::filesystem::path &p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw FormatError("cannot open " + p.string());
    return is;
}

} // namespace

void write_dataset(std::ostream &os, const DynamicDataset &d) {
    const auto &s = d.shape();
    write_header(os, kDatasetMagic,
                 json{{"nx", s.nx}, {"ny", s.ny}, {"nt", s.nt}, {"dtype", "c64"}, {"pixel_spacing", d.pixel_spacing()}});
    for (const auto &z : d.values()) {
        put_f32(os, z.real());
        put_f32(os, z.imag());
    }
}

DynamicDataset read_dataset(std::istream &is) {
    const auto h = read_header(is, kDatasetMagic);
    const Shape s = shape_from(h);
    if (h.value("dtype", std::string{"c64"}) != "c64") throw FormatError("unsupported dtype");
    std::vector<cplx> v(s.size());
    for (auto &z : v) {
        const double re = get_f32(is);
        const double im = get_f32(is);
        z = cplx(re, im);
    }
    return DynamicDataset(s, std::move(v), h.value("pixel_spacing", 1.0));
}

void write_field(std::ostream &os, const DeformationField &f) {
    const auto &s = f.shape();
    write_header(os, kFieldMagic, json{{"nx", s.nx}, {"ny", s.ny}, {"nt", s.nt}, {"dtype", "f32x2"}});
    for (int t = 0; t < s.nt; ++t) {
        for (double v : f.dx_frame(t)) put_f32(os, v);
        for (double v : f.dy_frame(t)) put_f32(os, v);
    }
}

DeformationField read_field(std::istream &is) {
    const auto h = read_header(is, kFieldMagic);
    const Shape s = shape_from(h);
    DeformationField f(s);
    for (int t = 0; t < s.nt; ++t) {
        for (double &v : f.dx_frame(t)) v = get_f32(is);
        for (double &v : f.dy_frame(t)) v = get_f32(is);
    }
    if (!f.all_finite()) throw FormatError("deformation field contains non-finite values");
    return f;
}

void write_mask(std::ostream &os, const SamplingPattern &p) {
    write_header(os, kMaskMagic, pattern_header(p));
    put_bits(os, p.mask());
}

SamplingPattern read_mask(std::istream &is) {
    const auto h = read_header(is, kMaskMagic);
    const Shape s = shape_from(h);
    return SamplingPattern(s, get_bits(is, s.size()), params_from(h, s));
}

void write_kspace(std::ostream &os, const KSpaceData &b) {
    auto h = pattern_header(*b.pattern);
    h["noise_sigma"] = b.noise_sigma;
    h["dtype"] = "c64";
    write_header(os, kKSpaceMagic, h);
    put_bits(os, b.pattern->mask());
    for (const auto &z : b.samples) {
        put_f32(os, z.real());
        put_f32(os, z.imag());
    }
}

KSpaceData read_kspace(std::istream &is) {
    const auto h = read_header(is, kKSpaceMagic);
    const Shape s = shape_from(h);
    auto pattern = std::make_shared<const SamplingPattern>(s, get_bits(is, s.size()), params_from(h, s));
    std::vector<cplx> samples(pattern->count());
    for (auto &z : samples) {
        const double re = get_f32(is);
        const double im = get_f32(is);
        z = cplx(re, im);
    }
    return KSpaceData(std::move(pattern), std::move(samples), h.value("noise_sigma", 0.0));
}

void save(const std::filesystem::path &p, const DynamicDataset &d) { save_with(p, d, write_dataset); }
void save(const std::filesystem::path &p, const DeformationField &f) { save_with(p, f, write_field); }
void save(const std::filesystem::path &p, const SamplingPattern &m) { save_with(p, m, write_mask); }
void save(const std::filesystem::path &p, const KSpaceData &b) { save_with(p, b, write_kspace); }

DynamicDataset load_dataset(const std::filesystem::path &p) {
    auto is = open_in(p);
    return read_dataset(is);
}

DeformationField load_field(const std::filesystem::path &p) {
    auto is = open_in(p);
    return read_field(is);
}

SamplingPattern load_mask(const std::filesystem::path &p) {
    auto is = open_in(p);
    return read_mask(is);
}

KSpaceData load_kspace(const std::filesystem::path &p) {
    auto is = open_in(p);
    return read_kspace(is);
}

} // namespace dccs::io
