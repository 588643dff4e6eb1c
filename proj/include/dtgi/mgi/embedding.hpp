#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dtgi/mgi/instruction.hpp"
#include "dtgi/numerics/params.hpp"

namespace dtgi::mgi {

// Frozen frame/text encoder standing in for CLIP. Implementations must
// return identical vectors for identical inputs for the life of the process.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual int image_dim() const = 0;
  virtual int text_dim() const = 0;
  virtual std::vector<float> embed_frame(const Frame& frame) const = 0;
  virtual std::vector<float> embed_text(const std::string& text) const = 0;
};

// Content keys used by embedding caches.
std::string frame_key(const Frame& frame);        // "img:<sha256>"
std::string text_key(const std::string& text);    // "txt:<sha256>"

// Text fed to the text encoder for one guidance step: the guidance sentence
// followed by the action and the labelled boxes.
std::string guidance_text(const GuidanceStep& step);

// Seeded random projection of frame contents and a seeded hash-bag of
// unigram and bigram tokens for text; both unit-normalised.
class SyntheticProvider : public EmbeddingProvider {
 public:
  explicit SyntheticProvider(int dim = 512, std::uint64_t seed = 0) : dim_(dim), seed_(seed) {}
  int image_dim() const override { return dim_; }
  int text_dim() const override { return dim_; }
  std::vector<float> embed_frame(const Frame& frame) const override;
  std::vector<float> embed_text(const std::string& text) const override;

 private:
  int dim_;
  std::uint64_t seed_;
};

// Looks vectors up by content key in an embedding cache file (checkpoint
// layout, one 1 x dim tensor per key).
class FileProvider : public EmbeddingProvider {
 public:
  explicit FileProvider(const std::string& path);
  int image_dim() const override { return dim_; }
  int text_dim() const override { return dim_; }
  std::vector<float> embed_frame(const Frame& frame) const override;
  std::vector<float> embed_text(const std::string& text) const override;

 private:
  std::vector<float> lookup(const std::string& key) const;
  num::ParamStore<float> table_;
  int dim_ = 0;
};

struct InstructionEmbedding {
  num::Mat<float> desc;      // 1 x dim
  num::Mat<float> frames;    // m x dim
  num::Mat<float> guidance;  // m x dim
};

// Throws ShapeError unless both provider dims equal `dim`.
InstructionEmbedding embed_instruction(const Instruction& ins, const EmbeddingProvider& p, int dim = 512);

// Embeds every frame and text of the given sets with `p` and writes them as
// a cache file readable by FileProvider.
void write_embedding_cache(const std::string& path, const std::vector<InstructionSet>& sets,
                           const EmbeddingProvider& p);

}  // namespace dtgi::mgi
