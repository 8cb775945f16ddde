#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace consroute {

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// Appends little-endian encodings to an in-memory buffer.
class ByteWriter {
 public:
  void raw(std::string_view bytes);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void f64s(std::span<const double> values);

  // Appends the FNV-1a checksum of everything written so far.
  void seal();

  const std::vector<std::uint8_t>& bytes() const { return buf_; }
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::uint8_t> buf_;
};

// Reads what ByteWriter wrote. Every short read throws Error(integrity).
class ByteReader {
 public:
  explicit ByteReader(std::vector<std::uint8_t> bytes, std::string what);
  static ByteReader from_file(const std::filesystem::path& path);

  // Verifies and strips the trailing checksum.
  void verify_seal();
  void expect_magic(std::string_view magic);

  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::vector<double> f64s(std::size_t count);
  bool at_end() const { return pos_ == end_; }

 private:
  void need(std::size_t n) const;

  std::vector<std::uint8_t> buf_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
  std::string what_;
};

}  // namespace consroute
