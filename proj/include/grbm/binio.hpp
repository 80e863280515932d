#ifndef GRBM_BINIO_HPP
#define GRBM_BINIO_HPP

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "grbm/common.hpp"

namespace grbm::binio {

// All on-disk numeric fields are little-endian regardless of host order.

inline void write_u32(std::ostream& out, std::uint32_t value) {
  char bytes[4];
  for (int i = 0; i < 4; ++i)
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
  out.write(bytes, 4);
}

inline void write_u64(std::ostream& out, std::uint64_t value) {
  char bytes[8];
  for (int i = 0; i < 8; ++i)
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
  out.write(bytes, 8);
}

inline void write_f64(std::ostream& out, double value) {
  write_u64(out, std::bit_cast<std::uint64_t>(value));
}

inline std::uint32_t read_u32(std::istream& in, const std::string& what) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  if (!in) throw FormatError("truncated file while reading " + what);
  std::uint32_t value = 0;
  for (int i = 0; i < 4; ++i)
    value |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return value;
}

inline std::uint64_t read_u64(std::istream& in, const std::string& what) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw FormatError("truncated file while reading " + what);
  std::uint64_t value = 0;
  for (int i = 0; i < 8; ++i)
    value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return value;
}

inline double read_f64(std::istream& in, const std::string& what) {
  return std::bit_cast<double>(read_u64(in, what));
}

inline void write_magic(std::ostream& out, const char* magic) {
  out.write(magic, 4);
}

inline void expect_magic(std::istream& in, const char* magic,
                         const std::string& what) {
  char bytes[4];
  in.read(bytes, 4);
  if (!in || std::string(bytes, 4) != std::string(magic, 4))
    throw FormatError(what + ": bad magic, expected \"" +
                      std::string(magic, 4) + "\"");
}

}  // namespace grbm::binio

#endif
