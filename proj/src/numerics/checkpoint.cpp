#include "dtgi/numerics/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "dtgi/common/bytes.hpp"
#include "dtgi/common/error.hpp"

namespace dtgi::num {

namespace {

struct Entry {
  std::string name;
  std::vector<std::uint32_t> shape;
  Dtype dtype;
  std::vector<double> f64;
  std::vector<float> f32;
};

std::vector<Entry> parse(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "checkpoint");
  if (r.raw(4) != "DTGI") throw FormatError("checkpoint: bad magic");
  const auto version = r.u32();
  if (version != kCheckpointVersion) throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  const auto count = r.u32();
  std::vector<Entry> out;
  out.reserve(count);
  for (std::uint64_t e = 0; e < count; ++e) {
    Entry en;
    en.name = r.str16();
    const auto dt = r.u8();
    if (dt > 1) throw FormatError("checkpoint: bad dtype for " + en.name);
    en.dtype = static_cast<Dtype>(dt);
    const auto rank = r.u8();
    if (rank == 0) throw FormatError("checkpoint: zero rank for " + en.name);
    std::size_t n = 1;
    for (unsigned i = 0; i < rank; ++i) {
      en.shape.push_back(r.u32());
      n *= en.shape.back();
    }
    if (en.dtype == Dtype::kF32) {
      en.f32.resize(n);
      for (auto& v : en.f32) v = r.f32();
    } else {
      en.f64.resize(n);
      for (auto& v : en.f64) v = r.f64();
    }
    out.push_back(std::move(en));
  }
  r.expect_done();
  return out;
}

template <typename T>
void copy_payload(const Entry& en, Mat<T>& dst) {
  const std::size_t n = en.dtype == Dtype::kF32 ? en.f32.size() : en.f64.size();
  if (static_cast<std::size_t>(dst.size()) != n) throw ShapeError("checkpoint: size mismatch for " + en.name);
  for (std::size_t i = 0; i < n; ++i) {
    dst.data()[i] = en.dtype == Dtype::kF32 ? static_cast<T>(en.f32[i]) : static_cast<T>(en.f64[i]);
  }
}

}  // namespace

template <typename T>
std::vector<std::uint8_t> encode_checkpoint(const ParamStore<T>& ps) {
  ByteWriter out;
  out.raw("DTGI");
  out.u32(kCheckpointVersion);
  out.u32(static_cast<std::uint32_t>(ps.size()));
  for (const auto& [name, p] : ps) {
    out.str16(name);
    out.u8(static_cast<std::uint8_t>(std::is_same_v<T, float> ? Dtype::kF32 : Dtype::kF64));
    out.u8(static_cast<std::uint8_t>(p.shape.size()));
    for (auto e : p.shape) out.u32(e);
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      if constexpr (std::is_same_v<T, float>) {
        out.f32(p.value.data()[i]);
      } else {
        out.f64(p.value.data()[i]);
      }
    }
  }
  return out.take();
}

template <typename T>
ParamStore<T> decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ParamStore<T> ps;
  for (const Entry& en : parse(bytes)) {
    Param<T>& p = ps.add(en.name, en.shape);
    copy_payload(en, p.value);
  }
  return ps;
}

template <typename T>
void load_checkpoint_into(ParamStore<T>& ps, std::span<const std::uint8_t> bytes, bool require_all) {
  std::size_t matched = 0;
  for (const Entry& en : parse(bytes)) {
    if (!ps.contains(en.name)) throw LookupError("checkpoint: unexpected tensor " + en.name);
    Param<T>& p = ps.at(en.name);
    if (p.shape != en.shape) throw ShapeError("checkpoint: shape mismatch for " + en.name);
    copy_payload(en, p.value);
    ++matched;
  }
  if (require_all && matched != ps.size()) {
    throw LookupError("checkpoint: " + std::to_string(ps.size() - matched) + " tensors missing");
  }
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LookupError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template std::vector<std::uint8_t> encode_checkpoint<float>(const ParamStore<float>&);
template std::vector<std::uint8_t> encode_checkpoint<double>(const ParamStore<double>&);
template ParamStore<float> decode_checkpoint<float>(std::span<const std::uint8_t>);
template ParamStore<double> decode_checkpoint<double>(std::span<const std::uint8_t>);
template void load_checkpoint_into<float>(ParamStore<float>&, std::span<const std::uint8_t>, bool);
template void load_checkpoint_into<double>(ParamStore<double>&, std::span<const std::uint8_t>, bool);

}  // namespace dtgi::num
