#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dtgi/numerics/params.hpp"

namespace dtgi::num {

// Binary parameter file, little-endian:
//   "DTGI" | version u32 | count u32 |
//   count x ( name_len u16 | name bytes | dtype u8 | rank u8 | extents u32[rank] | payload )
// dtype 0 = f32, 1 = f64. Entries are written in store (name) order.
inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class Dtype : std::uint8_t { kF32 = 0, kF64 = 1 };

template <typename T>
std::vector<std::uint8_t> encode_checkpoint(const ParamStore<T>& ps);

// Every decoded tensor is trainable; payloads are converted to T.
template <typename T>
ParamStore<T> decode_checkpoint(std::span<const std::uint8_t> bytes);

// Copies values into an existing store. Shapes must match. With
// require_all, every store entry must be present in the file.
template <typename T>
void load_checkpoint_into(ParamStore<T>& ps, std::span<const std::uint8_t> bytes, bool require_all = true);

void write_file(const std::string& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file(const std::string& path);

template <typename T>
void save_checkpoint(const std::string& path, const ParamStore<T>& ps) {
  write_file(path, encode_checkpoint(ps));
}

}  // namespace dtgi::num
