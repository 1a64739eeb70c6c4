#pragma once

#include <filesystem>

#include "frequalize/grid.hpp"

namespace frequalize {

/// FQLZ field container.
///
/// 32-byte little-endian header followed by components * N^dim float64 samples
/// in component-major, row-major order:
///
///   offset  size  field
///        0     4  magic "FQLZ"
///        4     4  uint32 version (= 1)
///        8     4  uint32 dim
///       12     4  uint32 points per axis N
///       16     8  float64 box length L
///       24     4  uint32 components
///       28     4  uint32 reserved (0)
inline constexpr unsigned kFieldDumpVersion = 1;

void write_field_dump(const std::filesystem::path& path, const PhysicalField& f);
PhysicalField read_field_dump(const std::filesystem::path& path);

}  // namespace frequalize
