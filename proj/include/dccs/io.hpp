#pragma once

#include <filesystem>
#include <iosfwd>

#include "dccs/data_model.hpp"

// Binary containers. Every file is an 8-byte magic, a uint32 little-endian byte
// count, a UTF-8 JSON header of that length, then a little-endian payload.
//
//   DCD1  "DCCSDAT1"  dataset, interleaved re/im float32, frame-major
//   DCF1  "DCCSFLD1"  deformation field, per frame a dx float32 plane then a dy plane
//   DCM1  "DCCSMSK1"  sampling mask, bit-packed LSB-first, frame-major, FFT order
//   DCK1  "DCCSKSP1"  k-space samples: DCM1-style packed mask, then re/im float32 samples
namespace dccs::io {

inline constexpr char kDatasetMagic[] = "DCCSDAT1";
inline constexpr char kFieldMagic[] = "DCCSFLD1";
inline constexpr char kMaskMagic[] = "DCCSMSK1";
inline constexpr char kKSpaceMagic[] = "DCCSKSP1";

void write_dataset(std::ostream &os, const DynamicDataset &d);
DynamicDataset read_dataset(std::istream &is);
void write_field(std::ostream &os, const DeformationField &f);
DeformationField read_field(std::istream &is);
void write_mask(std::ostream &os, const SamplingPattern &p);
SamplingPattern read_mask(std::istream &is);
void write_kspace(std::ostream &os, const KSpaceData &b);
KSpaceData read_kspace(std::istream &is);

void save(const std::filesystem::path &p, const DynamicDataset &d);
void save(const std::filesystem::path &p, const DeformationField &f);
void save(const std::filesystem::path &p, const SamplingPattern &m);
void save(const std::filesystem::path &p, const KSpaceData &b);
DynamicDataset load_dataset(const std::filesystem::path &p);
DeformationField load_field(const std::filesystem::path &p);
SamplingPattern load_mask(const std::filesystem::path &p);
KSpaceData load_kspace(const std::filesystem::path &p);

} // namespace dccs::io
