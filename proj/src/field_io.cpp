#include "frequalize/field_io.hpp"

#include <fmt/format.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "frequalize/error.hpp"

namespace frequalize {

static_assert(std::endian::native == std::endian::little,
              "FQLZ dumps are written with native little-endian layout");

namespace {

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

void write_field_dump(const std::filesystem::path& path, const PhysicalField& f) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(fmt::format("cannot open '{}' for writing", path.string()));
  out.write("FQLZ", 4);
  put<std::uint32_t>(out, kFieldDumpVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid.dim()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid.points_per_axis()));
  put<double>(out, f.grid.box_length());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.components));
  put<std::uint32_t>(out, 0);
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!out) throw InputError(fmt::format("failed writing field dump '{}'", path.string()));
}

PhysicalField read_field_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open field dump '{}'", path.string()));
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "FQLZ", 4) != 0)
    throw InputError(fmt::format("'{}' is not an FQLZ field dump", path.string()));
  const auto version = get<std::uint32_t>(in);
  if (version != kFieldDumpVersion)
    throw InputError(fmt::format("unsupported FQLZ version {} in '{}'", version, path.string()));
  const auto dim = get<std::uint32_t>(in);
  const auto n = get<std::uint32_t>(in);
  const auto length = get<double>(in);
  const auto comps = get<std::uint32_t>(in);
  (void)get<std::uint32_t>(in);
  if (!in) throw InputError(fmt::format("truncated FQLZ header in '{}'", path.string()));
  PhysicalField f(TorusGrid(static_cast<int>(dim), length, static_cast<int>(n)),
                  static_cast<int>(comps));
  in.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!in) throw InputError(fmt::format("truncated FQLZ payload in '{}'", path.string()));
  return f;
}

}  // namespace frequalize
