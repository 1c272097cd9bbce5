#pragma once

// Little-endian binary primitives shared by the FSEQ, PSYEMB1 and PSYCKPT formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace psyling::io {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written with native little-endian stores");

template <class T>
void put(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.write(buf, sizeof(T));
}

/// Throws std::runtime_error("truncated") at end of stream.
template <class T>
T get(std::istream& in) {
  static_assert(std::is_trivially_copyable_v<T>);
  char buf[sizeof(T)];
  if (!in.read(buf, sizeof(T))) throw std::runtime_error("truncated");
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

inline void put_bytes(std::ostream& out, const std::string& s) { out.write(s.data(), static_cast<std::streamsize>(s.size())); }

inline std::string get_bytes(std::istream& in, std::size_t n) {
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), static_cast<std::streamsize>(n))) throw std::runtime_error("truncated");
  return s;
}

/// True when the stream has no more bytes.
inline bool at_end(std::istream& in) { return in.peek() == std::char_traits<char>::eof(); }

}  // namespace psyling::io
