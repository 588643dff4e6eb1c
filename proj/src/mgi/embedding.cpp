#include "dtgi/mgi/embedding.hpp"

#include <cctype>
#include <cmath>
#include <random>

#include "dtgi/common/bytes.hpp"
#include "dtgi/common/error.hpp"
#include "dtgi/common/hash.hpp"
#include "dtgi/numerics/checkpoint.hpp"

namespace dtgi::mgi {

namespace {

void normalize(std::vector<float>& v) {
  double ss = 0;
  for (float x : v) ss += static_cast<double>(x) * x;
  if (ss <= 0) return;
  const double inv = 1.0 / std::sqrt(ss);
  for (float& x : v) x = static_cast<float>(x * inv);
}

// Accumulates weight * g into acc, g ~ N(0, I) drawn from a stream seeded by key.
void add_gaussian(std::vector<double>& acc, std::uint64_t key, double weight) {
  std::mt19937_64 rng(key);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (double& a : acc) a += weight * nd(rng);
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) != 0) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

std::vector<float> to_float(const std::vector<double>& v) {
  std::vector<float> out(v.begin(), v.end());
  normalize(out);
  return out;
}

}  // namespace

std::string frame_key(const Frame& frame) {
  if (frame.data.empty()) return "img:" + sha256_hex("path:" + frame.path);
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(frame.shape.size()));
  for (auto e : frame.shape) w.u32(e);
  for (float x : frame.data) w.f32(x);
  return "img:" + sha256_hex(std::span<const std::uint8_t>(w.bytes()));
}

std::string text_key(const std::string& text) { return "txt:" + sha256_hex(text); }

std::string guidance_text(const GuidanceStep& step) {
  std::string out = step.text + " | action " + std::to_string(step.action_id);
  for (const auto& b : step.boxes) {
    out += " | " + b.label + " " + std::to_string(b.a) + " " + std::to_string(b.b) + " " + std::to_string(b.c) +
           " " + std::to_string(b.d);
  }
  return out;
}

std::vector<float> SyntheticProvider::embed_frame(const Frame& frame) const {
  if (frame.data.empty()) throw LookupError("synthetic provider needs inline frame data (" + frame.path + ")");
  std::vector<double> acc(static_cast<std::size_t>(dim_), 0.0);
  const std::uint64_t base = mix_seed(seed_, 0x696d67ULL);
  for (std::size_t i = 0; i < frame.data.size(); ++i) {
    if (frame.data[i] != 0.0f) add_gaussian(acc, mix_seed(base, i), frame.data[i]);
  }
  bool any = false;
  for (double a : acc) any = any || a != 0.0;
  if (!any) add_gaussian(acc, mix_seed(base, ~0ULL), 1.0);
  return to_float(acc);
}

std::vector<float> SyntheticProvider::embed_text(const std::string& text) const {
  std::vector<std::string> words = tokenize(text);
  if (words.empty()) words.push_back("<empty>");
  std::vector<double> acc(static_cast<std::size_t>(dim_), 0.0);
  const std::uint64_t base = mix_seed(seed_, 0x747874ULL);
  for (std::size_t i = 0; i < words.size(); ++i) {
    add_gaussian(acc, fnv1a64(words[i], base), 1.0);
    if (i + 1 < words.size()) add_gaussian(acc, fnv1a64(words[i] + " " + words[i + 1], base), 1.0);
  }
  return to_float(acc);
}

FileProvider::FileProvider(const std::string& path) {
  const auto bytes = num::read_file(path);
  table_ = num::decode_checkpoint<float>(bytes);
  for (auto& [name, p] : table_) {
    p.frozen = true;
    if (dim_ == 0) dim_ = static_cast<int>(p.value.cols());
    if (p.value.rows() != 1 || p.value.cols() != dim_) {
      throw FormatError(path + ": embedding '" + name + "' has inconsistent shape");
    }
  }
}

std::vector<float> FileProvider::lookup(const std::string& key) const {
  if (!table_.contains(key)) throw LookupError("embedding cache has no entry for key " + key);
  const auto& v = table_.value(key);
  return std::vector<float>(v.data(), v.data() + v.size());
}

std::vector<float> FileProvider::embed_frame(const Frame& frame) const { return lookup(frame_key(frame)); }
std::vector<float> FileProvider::embed_text(const std::string& text) const { return lookup(text_key(text)); }

InstructionEmbedding embed_instruction(const Instruction& ins, const EmbeddingProvider& p, int dim) {
  if (p.image_dim() != dim || p.text_dim() != dim) {
    throw ShapeError("embedding provider dims (" + std::to_string(p.image_dim()) + ", " +
                     std::to_string(p.text_dim()) + ") do not match " + std::to_string(dim));
  }
  auto row = [dim](const std::vector<float>& v, num::Mat<float>& m, Eigen::Index r) {
    if (static_cast<int>(v.size()) != dim) throw ShapeError("embedding provider returned wrong width");
    for (int j = 0; j < dim; ++j) m(r, j) = v[static_cast<std::size_t>(j)];
  };
  InstructionEmbedding e;
  e.desc.resize(1, dim);
  row(p.embed_text(ins.description), e.desc, 0);
  const auto m = static_cast<Eigen::Index>(ins.frames.size());
  e.frames.resize(m, dim);
  e.guidance.resize(static_cast<Eigen::Index>(ins.guidance.size()), dim);
  for (Eigen::Index i = 0; i < m; ++i) row(p.embed_frame(ins.frames[static_cast<std::size_t>(i)]), e.frames, i);
  for (Eigen::Index i = 0; i < e.guidance.rows(); ++i) {
    row(p.embed_text(guidance_text(ins.guidance[static_cast<std::size_t>(i)])), e.guidance, i);
  }
  return e;
}

void write_embedding_cache(const std::string& path, const std::vector<InstructionSet>& sets,
                           const EmbeddingProvider& p) {
  num::ParamStore<float> out;
  auto put = [&](const std::string& key, const std::vector<float>& v) {
    if (out.contains(key)) return;
    num::Mat<float> m(1, static_cast<Eigen::Index>(v.size()));
    for (std::size_t j = 0; j < v.size(); ++j) m(0, static_cast<Eigen::Index>(j)) = v[j];
    out.add_frozen(key, m);
  };
  for (const auto& set : sets) {
    for (const auto& ins : set.instructions) {
      put(text_key(ins.description), p.embed_text(ins.description));
      for (const auto& f : ins.frames) put(frame_key(f), p.embed_frame(f));
      for (const auto& g : ins.guidance) {
        const std::string t = guidance_text(g);
        put(text_key(t), p.embed_text(t));
      }
    }
  }
  num::save_checkpoint(path, out);
}

}  // namespace dtgi::mgi
