#include "kolmo/binary_io.hpp"

#include <bit>
#include <fstream>
#include <istream>
#include <ostream>

#include "kolmo/error.hpp"

namespace kolmo {

namespace {

template <class T>
void put_le(std::ostream& out, T v) {
  char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, sizeof(T));
}

template <class T>
T get_le(const unsigned char* buf) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void BinaryWriter::bytes(std::string_view raw) { out_.write(raw.data(), static_cast<std::streamsize>(raw.size())); }
void BinaryWriter::u8(std::uint8_t v) { put_le(out_, v); }
void BinaryWriter::u32(std::uint32_t v) { put_le(out_, v); }
void BinaryWriter::u64(std::uint64_t v) { put_le(out_, v); }
void BinaryWriter::f64(double v) { put_le(out_, std::bit_cast<std::uint64_t>(v)); }
void BinaryWriter::f64s(std::span<const double> v) {
  for (double x : v) f64(x);
}

void BinaryReader::read_raw(char* dst, std::size_t n) {
  in_.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in_.gcount()) != n) fail(ErrorKind::Format, source_ + ": unexpected end of file");
}

void BinaryReader::expect_magic(std::string_view magic) {
  std::string got(magic.size(), '\0');
  read_raw(got.data(), got.size());
  if (got != magic) fail(ErrorKind::Format, source_ + ": bad magic, expected " + std::string(magic));
}

std::uint32_t BinaryReader::expect_version(std::uint32_t supported) {
  const auto v = u32();
  if (v != supported)
    fail(ErrorKind::VersionMismatch,
         source_ + ": version " + std::to_string(v) + ", supported " + std::to_string(supported));
  return v;
}

std::uint8_t BinaryReader::u8() {
  unsigned char b[1];
  read_raw(reinterpret_cast<char*>(b), 1);
  return b[0];
}

std::uint32_t BinaryReader::u32() {
  unsigned char b[4];
  read_raw(reinterpret_cast<char*>(b), 4);
  return get_le<std::uint32_t>(b);
}

std::uint64_t BinaryReader::u64() {
  unsigned char b[8];
  read_raw(reinterpret_cast<char*>(b), 8);
  return get_le<std::uint64_t>(b);
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

void BinaryReader::f64s(std::span<double> out) {
  for (double& x : out) x = f64();
}

bool BinaryReader::at_end() { return in_.peek() == std::char_traits<char>::eof(); }

void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer, bool binary) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
    writer(out);
    out.flush();
    if (!out) fail(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::Io, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

}  // namespace kolmo
