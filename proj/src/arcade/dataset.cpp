#include "dtgi/arcade/dataset.hpp"

#include <sstream>

#include "dtgi/common/bytes.hpp"
#include "dtgi/common/error.hpp"

namespace dtgi::arcade {

namespace {
constexpr std::uint32_t kDatasetVersion = 1;
}

std::string PolicyMix::label() const {
  std::ostringstream out;
  out << "mix(expert=" << expert << ",noisy-expert=" << noisy << ",random=" << random
      << ",epsilon=" << noisy_epsilon << ")";
  return out.str();
}

std::vector<std::pair<std::size_t, std::size_t>> OfflineDataset::episodes() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    if (transitions[i].done) {
      out.emplace_back(begin, i + 1);
      begin = i + 1;
    }
  }
  return out;
}

OfflineDataset gen_offline(const GameSpec& spec, std::size_t budget, const PolicyMix& mix, std::uint64_t seed) {
  if (budget == 0) throw ConfigError("gen_offline: budget must be at least 1");
  if (mix.expert < 0 || mix.noisy < 0 || mix.random < 0 || mix.expert + mix.noisy + mix.random <= 0) {
    throw ConfigError("gen_offline: policy mix must have positive total weight");
  }
  validate(spec);
  OfflineDataset ds;
  ds.game_id = spec.game_id;
  ds.obs_shape = spec.obs_shape();
  ds.seed = seed;
  ds.policy_label = mix.label();

  Rng rng(seed);
  std::discrete_distribution<int> pick({mix.expert, mix.noisy, mix.random});
  static constexpr PolicyKind kKinds[] = {PolicyKind::kExpert, PolicyKind::kNoisyExpert, PolicyKind::kRandom};
  while (true) {
    const PolicyKind kind = kKinds[pick(rng)];
    GameState s = reset(spec, rng);
    std::vector<Transition> episode;
    while (!s.done) {
      Transition t;
      t.obs = observe(spec, s);
      t.action = policy_action(kind, spec, s, rng, mix.noisy_epsilon);
      StepResult r = step(spec, s, t.action, rng);
      t.reward = static_cast<float>(r.reward);
      t.done = r.done;
      episode.push_back(std::move(t));
      s = std::move(r.next);
    }
    if (ds.transitions.size() + episode.size() > budget) break;
    for (auto& t : episode) ds.transitions.push_back(std::move(t));
  }
  return ds;
}

std::vector<std::uint8_t> encode_dataset(const OfflineDataset& ds) {
  std::size_t obs_size = 1;
  for (auto e : ds.obs_shape) obs_size *= e;
  ByteWriter w;
  w.raw("DTGD");
  w.u32(kDatasetVersion);
  w.str16(ds.game_id);
  w.u8(static_cast<std::uint8_t>(ds.obs_shape.size()));
  for (auto e : ds.obs_shape) w.u32(e);
  w.u32(static_cast<std::uint32_t>(ds.action_count));
  w.u64(ds.seed);
  w.str16(ds.policy_label);
  const auto eps = ds.episodes();
  std::size_t covered = eps.empty() ? 0 : eps.back().second;
  if (covered != ds.transitions.size()) throw FormatError(ds.game_id + ": dataset ends mid-episode");
  w.u32(static_cast<std::uint32_t>(eps.size()));
  for (const auto& [b, e] : eps) {
    w.u32(static_cast<std::uint32_t>(e - b));
    for (std::size_t i = b; i < e; ++i) {
      const Transition& t = ds.transitions[i];
      if (t.obs.size() != obs_size) throw FormatError(ds.game_id + ": observation size mismatch");
      for (float v : t.obs) w.f32(v);
      w.u32(static_cast<std::uint32_t>(t.action));
      w.f32(t.reward);
      w.u8(t.done ? 1 : 0);
    }
  }
  return w.take();
}

OfflineDataset decode_dataset(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "dataset");
  if (r.raw(4) != "DTGD") throw FormatError("dataset: bad magic");
  if (r.u32() != kDatasetVersion) throw FormatError("dataset: unsupported version");
  OfflineDataset ds;
  ds.game_id = r.str16();
  const unsigned rank = r.u8();
  std::size_t obs_size = 1;
  for (unsigned i = 0; i < rank; ++i) {
    ds.obs_shape.push_back(r.u32());
    obs_size *= ds.obs_shape.back();
  }
  ds.action_count = static_cast<int>(r.u32());
  ds.seed = r.u64();
  ds.policy_label = r.str16();
  const std::uint32_t episodes = r.u32();
  for (std::uint32_t e = 0; e < episodes; ++e) {
    const std::uint32_t len = r.u32();
    if (len == 0) throw FormatError("dataset: empty episode");
    for (std::uint32_t i = 0; i < len; ++i) {
      Transition t;
      t.obs.resize(obs_size);
      for (auto& v : t.obs) v = r.f32();
      t.action = static_cast<int>(r.u32());
      if (t.action < 0 || t.action >= ds.action_count) throw FormatError("dataset: action out of range");
      t.reward = r.f32();
      t.done = r.u8() != 0;
      if (t.done != (i + 1 == len)) throw FormatError("dataset: episode delimiter mismatch");
      ds.transitions.push_back(std::move(t));
    }
  }
  r.expect_done();
  return ds;
}

}  // namespace dtgi::arcade
