#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

namespace kolmo {

// Little-endian primitive encoding shared by every binary container.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void bytes(std::string_view raw);
  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void f64s(std::span<const double> v);

 private:
  std::ostream& out_;
};

class BinaryReader {
 public:
  BinaryReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  /// Throws Format when the next bytes do not spell `magic`.
  void expect_magic(std::string_view magic);
  /// Throws VersionMismatch when the stored version differs.
  std::uint32_t expect_version(std::uint32_t supported);

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  void f64s(std::span<double> out);
  bool at_end();

 private:
  void read_raw(char* dst, std::size_t n);

  std::istream& in_;
  std::string source_;
};

/// Writes through a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer,
                       bool binary = true);

}  // namespace kolmo
