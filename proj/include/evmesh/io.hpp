#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "evmesh/correlation.hpp"
#include "evmesh/events.hpp"
#include "evmesh/grid.hpp"
#include "evmesh/meshflow.hpp"
#include "evmesh/representation.hpp"

namespace evmesh {

// Binary containers, all little-endian with a 4-byte ASCII magic.
//   EVT1: u16 W, u16 H, u64 count, then 16-byte records
//         (u16 x, u16 y, i64 t_us, i8 p, 3 zero pad bytes)
//   VOX1: u32 B, u32 H, u32 W, then B*H*W f32, bin-major
//   FLO1: u32 W, u32 H, then H*W (u, v) f32 pairs, row-major
//   MSH1: u32 cells_x, u32 cells_y, then (cy+1)*(cx+1) (u, v) f32 pairs
// Decoders throw ParseError on a wrong magic, truncation or trailing bytes.

std::string encode_evt1(const EventStream& stream);
/// t_start / t_end are taken from the first and last event (0 when empty).
EventStream decode_evt1(std::string_view bytes);

std::string encode_vox1(const VoxelGrid& grid);
VoxelGrid decode_vox1(std::string_view bytes);
/// Offsets become bins.
VoxelGrid cost_volume_as_grid(const CostVolume& volume);

std::string encode_flo1(const DenseFlow& flow);
DenseFlow decode_flo1(std::string_view bytes);

std::string encode_msh1(const MeshFlow& mesh);
MeshFlow decode_msh1(std::string_view bytes);

/// "x,y,t,p" header, one event per line.
std::string events_csv(const EventStream& stream);

/// Binary P5, maxval 65535: value v maps to round((v - lo) / (hi - lo) * 65535),
/// clamped.
std::string encode_pgm(const ImageF& image, double lo = 0.0, double hi = 1.0);
/// Returns samples / maxval in [0, 1].
ImageF decode_pgm(std::string_view bytes);

/// Standard flow color wheel; hue is direction, saturation is magnitude
/// relative to `max_radius` (the field maximum when <= 0).
std::string encode_flow_ppm(const DenseFlow& flow, double max_radius = 0.0);

/// Throws IoError when the file cannot be opened or written.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

inline EventStream read_evt1(const std::filesystem::path& p) { return decode_evt1(read_file(p)); }
inline void write_evt1(const std::filesystem::path& p, const EventStream& s) { write_file(p, encode_evt1(s)); }
inline DenseFlow read_flo1(const std::filesystem::path& p) { return decode_flo1(read_file(p)); }
inline void write_flo1(const std::filesystem::path& p, const DenseFlow& f) { write_file(p, encode_flo1(f)); }
inline MeshFlow read_msh1(const std::filesystem::path& p) { return decode_msh1(read_file(p)); }
inline void write_msh1(const std::filesystem::path& p, const MeshFlow& m) { write_file(p, encode_msh1(m)); }
inline VoxelGrid read_vox1(const std::filesystem::path& p) { return decode_vox1(read_file(p)); }
inline void write_vox1(const std::filesystem::path& p, const VoxelGrid& g) { write_file(p, encode_vox1(g)); }

}  // namespace evmesh
