#pragma once

// PSYCKPT layout (little-endian):
//   "PSYCKPT" u8 version
//   u32 arch_id
//   u32 n + n bytes      hyperparameters, JSON
//   u32 blob count, then per blob:
//     u16 n + name, u32 rows, u32 cols, rows·cols f64 (column-major)
//   u32 n + n bytes      training metadata, JSON (seed, best_epoch, ...)
// Writing the same Checkpoint twice yields identical bytes.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "psyling/binary_io.hpp"
#include "psyling/error.hpp"
#include "psyling/neural/tensor.hpp"

namespace psyling::neural {

inline constexpr char kCkptMagic[7] = {'P', 'S', 'Y', 'C', 'K', 'P', 'T'};
inline constexpr std::uint8_t kCkptVersion = 1;

struct Blob {
  std::string name;
  std::uint32_t rows = 0, cols = 0;
  std::vector<double> data;  // column-major
  bool operator==(const Blob&) const = default;
};

struct Checkpoint {
  std::uint32_t arch_id = 0;
  nlohmann::json hyper = nlohmann::json::object();
  std::vector<Blob> blobs;
  nlohmann::json meta = nlohmann::json::object();

  const Blob* find(const std::string& name) const {
    for (const auto& b : blobs)
      if (b.name == name) return &b;
    return nullptr;
  }
  bool operator==(const Checkpoint&) const = default;
};

template <class S>
Blob to_blob(const std::string& name, const Mat<S>& m) {
  Blob b{name, static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols()), {}};
  b.data.resize(static_cast<std::size_t>(m.size()));
  for (Eigen::Index k = 0; k < m.size(); ++k) b.data[static_cast<std::size_t>(k)] = static_cast<double>(m.data()[k]);
  return b;
}

template <class S>
void from_blob(const Blob& b, Mat<S>& m) {
  if (b.rows != m.rows() || b.cols != m.cols())
    throw ArchitectureMismatch(b.name + ": checkpoint shape " + std::to_string(b.rows) + "x" +
                               std::to_string(b.cols) + ", model " + std::to_string(m.rows()) + "x" +
                               std::to_string(m.cols()));
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = static_cast<S>(b.data[static_cast<std::size_t>(k)]);
}

template <class S>
void store_params(Checkpoint& ck, const ParamList<S>& params) {
  for (auto* p : params) ck.blobs.push_back(to_blob(p->name, p->value));
}

/// Every parameter must be present with a matching shape.
template <class S>
void restore_params(const Checkpoint& ck, const ParamList<S>& params) {
  for (auto* p : params) {
    const Blob* b = ck.find(p->name);
    if (b == nullptr) throw ArchitectureMismatch("checkpoint has no parameter " + p->name);
    from_blob(*b, p->value);
  }
}

inline void write_checkpoint(std::ostream& out, const Checkpoint& ck) {
  auto put_str32 = [&](const std::string& s) {
    io::put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    io::put_bytes(out, s);
  };
  out.write(kCkptMagic, sizeof kCkptMagic);
  io::put<std::uint8_t>(out, kCkptVersion);
  io::put<std::uint32_t>(out, ck.arch_id);
  put_str32(ck.hyper.dump());
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(ck.blobs.size()));
  for (const auto& b : ck.blobs) {
    io::put<std::uint16_t>(out, static_cast<std::uint16_t>(b.name.size()));
    io::put_bytes(out, b.name);
    io::put<std::uint32_t>(out, b.rows);
    io::put<std::uint32_t>(out, b.cols);
    out.write(reinterpret_cast<const char*>(b.data.data()), static_cast<std::streamsize>(b.data.size() * sizeof(double)));
  }
  put_str32(ck.meta.dump());
}

inline Checkpoint read_checkpoint(std::istream& in) {
  Checkpoint ck;
  try {
    if (io::get_bytes(in, sizeof kCkptMagic) != std::string(kCkptMagic, sizeof kCkptMagic))
      throw MalformedCheckpoint("bad magic");
    if (auto v = io::get<std::uint8_t>(in); v != kCkptVersion)
      throw MalformedCheckpoint("unsupported version " + std::to_string(v));
    auto get_str32 = [&] { return io::get_bytes(in, io::get<std::uint32_t>(in)); };
    ck.arch_id = io::get<std::uint32_t>(in);
    ck.hyper = nlohmann::json::parse(get_str32());
    const auto n = io::get<std::uint32_t>(in);
    for (std::uint32_t k = 0; k < n; ++k) {
      Blob b;
      b.name = io::get_bytes(in, io::get<std::uint16_t>(in));
      b.rows = io::get<std::uint32_t>(in);
      b.cols = io::get<std::uint32_t>(in);
      const std::size_t count = std::size_t{b.rows} * b.cols;
      std::string raw = io::get_bytes(in, count * sizeof(double));
      b.data.resize(count);
      std::memcpy(b.data.data(), raw.data(), raw.size());
      ck.blobs.push_back(std::move(b));
    }
    ck.meta = nlohmann::json::parse(get_str32());
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const Error*>(&e)) throw;
    throw MalformedCheckpoint(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw MalformedCheckpoint(e.what());
  }
  return ck;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  write_checkpoint(out, ck);
  if (!out) throw MalformedCheckpoint("cannot write " + path.string());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingCheckpoint(path.string());
  return read_checkpoint(in);
}

}  // namespace psyling::neural
