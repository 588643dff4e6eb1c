#include "dtgi/hyper/hyperadapter.hpp"

#include "dtgi/common/error.hpp"
#include "dtgi/numerics/ops.hpp"

namespace dtgi::hyper {

namespace {

const char* kLayerEmbed = "hyper.layer_embed";

int input_width(const HyperConfig& c) { return c.feature_dim + (c.per_layer ? c.layer_embed : 0); }

template <typename T>
Mat<T> reshape_row(const Mat<T>& m, Eigen::Index row, int rows, int cols) {
  return Eigen::Map<const Mat<T>>(m.row(row).data(), rows, cols);
}

}  // namespace

HyperNet::HyperNet(const std::string& name, Role role_, int in, int hidden, int out)
    : role(role_), w_down(name + ".w_down", in, hidden), w_up(name + ".w_up", hidden, out) {}

template <typename T>
void HyperNet::init(ParamStore<T>& ps, num::Rng& rng, double stddev, double up_stddev) const {
  w_down.init(ps, rng, stddev);
  w_up.init(ps, rng, up_stddev);
}

template <typename T>
AdapterParams<T> Candidates<T>::candidate(int tau) const {
  return {reshape_row(down, tau, d, b), reshape_row(up, tau, b, d)};
}

template <typename T>
Candidates<T> generate_candidates(const ParamStore<T>& ps, const Mat<T>& features, const HyperNet& down,
                                  const HyperNet& up, const HyperConfig& cfg, CandidateCache<T>* cache) {
  if (features.cols() != down.w_down.in || down.w_up.out != cfg.model_dim * cfg.bottleneck ||
      up.w_up.out != cfg.model_dim * cfg.bottleneck) {
    throw ConfigError("generate_candidates: shape mismatch (features " + std::to_string(features.cols()) +
                      " wide; d'=" + std::to_string(cfg.feature_dim) + ", h=" + std::to_string(cfg.hidden) +
                      ", b=" + std::to_string(cfg.bottleneck) + ", d=" + std::to_string(cfg.model_dim) + ")");
  }
  CandidateCache<T> local;
  CandidateCache<T>& c = cache ? *cache : local;
  c.input = features;
  c.down_pre = down.w_down.forward(ps, features);
  c.down_hidden = num::activate(c.down_pre, num::Activation::kRelu);
  c.up_pre = up.w_down.forward(ps, features);
  c.up_hidden = num::activate(c.up_pre, num::Activation::kRelu);
  Candidates<T> out;
  out.d = cfg.model_dim;
  out.b = cfg.bottleneck;
  out.down = down.w_up.forward(ps, c.down_hidden);
  out.up = up.w_up.forward(ps, c.up_hidden);
  return out;
}

template <typename T>
Mat<T> generate_candidates_backward(ParamStore<T>& ps, const CandidateCache<T>& c, const HyperNet& down,
                                    const HyperNet& up, const Mat<T>& d_down, const Mat<T>& d_up) {
  Mat<T> dh = down.w_up.backward(ps, c.down_hidden, d_down);
  Mat<T> dx = down.w_down.backward(ps, c.input, num::activate_backward(c.down_pre, dh, num::Activation::kRelu));
  dh = up.w_up.backward(ps, c.up_hidden, d_up);
  dx += up.w_down.backward(ps, c.input, num::activate_backward(c.up_pre, dh, num::Activation::kRelu));
  return dx;
}

template <typename T>
AdapterParams<T> fuse_candidates(const Candidates<T>& cands, std::span<const T> scores) {
  if (static_cast<Eigen::Index>(scores.size()) != cands.down.rows()) {
    throw ContractError("fuse_candidates: " + std::to_string(cands.down.rows()) + " candidates but " +
                        std::to_string(scores.size()) + " scores");
  }
  const Eigen::Map<const num::RowVec<T>> s(scores.data(), static_cast<Eigen::Index>(scores.size()));
  const num::RowVec<T> dflat = s * cands.down;
  const num::RowVec<T> uflat = s * cands.up;
  return {Eigen::Map<const Mat<T>>(dflat.data(), cands.d, cands.b),
          Eigen::Map<const Mat<T>>(uflat.data(), cands.b, cands.d)};
}

template <typename T>
void fuse_candidates_backward(const Candidates<T>& cands, std::span<const T> scores, const AdapterParams<T>& grad,
                              Mat<T>& d_down, Mat<T>& d_up, std::vector<T>& d_scores) {
  const Eigen::Index n = cands.down.rows();
  const Eigen::Map<const num::RowVec<T>> gd(grad.d_hat.data(), grad.d_hat.size());
  const Eigen::Map<const num::RowVec<T>> gu(grad.u_hat.data(), grad.u_hat.size());
  d_down.resize(n, cands.down.cols());
  d_up.resize(n, cands.up.cols());
  d_scores.assign(static_cast<std::size_t>(n), T(0));
  for (Eigen::Index i = 0; i < n; ++i) {
    const T s = scores[static_cast<std::size_t>(i)];
    d_down.row(i) = s * gd;
    d_up.row(i) = s * gu;
    d_scores[static_cast<std::size_t>(i)] = cands.down.row(i).dot(gd) + cands.up.row(i).dot(gu);
  }
}

template <typename T>
Mat<T> adapter_forward(const Mat<T>& z, const AdapterParams<T>& p) {
  if (z.cols() != p.d_hat.rows()) {
    throw ShapeError("adapter_forward: input width " + std::to_string(z.cols()) + " != " +
                     std::to_string(p.d_hat.rows()));
  }
  Mat<T> h = (z * p.d_hat).cwiseMax(T(0));
  return h * p.u_hat;
}

template <typename T>
Mat<T> adapter_backward(const Mat<T>& z, const AdapterParams<T>& p, const Mat<T>& dy, AdapterParams<T>& grad) {
  const Mat<T> pre = z * p.d_hat;
  const Mat<T> h = pre.cwiseMax(T(0));
  grad.u_hat.noalias() += h.transpose() * dy;
  Mat<T> dpre = (dy * p.u_hat.transpose()).cwiseProduct((pre.array() > T(0)).template cast<T>().matrix());
  grad.d_hat.noalias() += z.transpose() * dpre;
  return dpre * p.d_hat.transpose();
}

HyperGenerator::HyperGenerator(const HyperConfig& cfg)
    : cfg_(cfg),
      down_("hyper.down", Role::kDown, input_width(cfg), cfg.hidden, cfg.model_dim * cfg.bottleneck),
      up_("hyper.up", Role::kUp, input_width(cfg), cfg.hidden, cfg.bottleneck * cfg.model_dim) {
  if (cfg.feature_dim < 1 || cfg.hidden < 1 || cfg.bottleneck < 1 || cfg.model_dim < 1) {
    throw ConfigError("hypernetwork dims must be positive (d'=" + std::to_string(cfg.feature_dim) +
                      ", h=" + std::to_string(cfg.hidden) + ", b=" + std::to_string(cfg.bottleneck) +
                      ", d=" + std::to_string(cfg.model_dim) + ")");
  }
  if (cfg.per_layer && (cfg.layers < 1 || cfg.layer_embed < 1)) {
    throw ConfigError("per-layer hypernetwork mode needs positive layers and layer_embed");
  }
}

template <typename T>
void HyperGenerator::init(ParamStore<T>& ps, num::Rng& rng, double stddev) const {
  down_.init(ps, rng, stddev, stddev);
  up_.init(ps, rng, stddev, 0.0);
  if (cfg_.per_layer) {
    auto& e = ps.add(kLayerEmbed, {static_cast<std::uint32_t>(cfg_.layers), static_cast<std::uint32_t>(cfg_.layer_embed)});
    num::init_normal(e.value, rng, 1.0);
  }
}

std::size_t HyperGenerator::param_count() const {
  return down_.param_count() + up_.param_count() +
         (cfg_.per_layer ? static_cast<std::size_t>(cfg_.layers) * cfg_.layer_embed : 0);
}

std::size_t HyperGenerator::expected_param_count(const HyperConfig& c) {
  const std::size_t in = static_cast<std::size_t>(input_width(c));
  const std::size_t h = static_cast<std::size_t>(c.hidden);
  const std::size_t bd = static_cast<std::size_t>(c.bottleneck) * static_cast<std::size_t>(c.model_dim);
  std::size_t n = in * h * 2 + h * bd * 2 + h * 2 + bd * 2;
  if (c.per_layer) n += static_cast<std::size_t>(c.layers) * c.layer_embed;
  return n;
}

template <typename T>
std::vector<AdapterParams<T>> HyperGenerator::generate(const ParamStore<T>& ps, const Mat<T>& features,
                                                       std::span<const T> scores, GeneratorCache<T>* cache) const {
  if (features.cols() != cfg_.feature_dim) {
    throw ConfigError("hypernetwork input width " + std::to_string(features.cols()) + " != d'=" +
                      std::to_string(cfg_.feature_dim) + " (h=" + std::to_string(cfg_.hidden) +
                      ", b=" + std::to_string(cfg_.bottleneck) + ", d=" + std::to_string(cfg_.model_dim) + ")");
  }
  GeneratorCache<T> local;
  GeneratorCache<T>& c = cache ? *cache : local;
  c.scores.assign(scores.begin(), scores.end());
  const int count = cfg_.per_layer ? cfg_.layers : 1;
  c.layers.assign(static_cast<std::size_t>(count), {});
  c.cands.clear();
  std::vector<AdapterParams<T>> out;
  for (int l = 0; l < count; ++l) {
    Mat<T> input = features;
    if (cfg_.per_layer) {
      input.conservativeResize(Eigen::NoChange, input_width(cfg_));
      input.rightCols(cfg_.layer_embed).rowwise() = ps.value(kLayerEmbed).row(l);
    }
    c.cands.push_back(generate_candidates(ps, input, down_, up_, cfg_, &c.layers[static_cast<std::size_t>(l)]));
    out.push_back(fuse_candidates<T>(c.cands.back(), scores));
  }
  return out;
}

template <typename T>
void HyperGenerator::backward(ParamStore<T>& ps, const GeneratorCache<T>& c,
                              const std::vector<AdapterParams<T>>& dadapters, Mat<T>& dfeatures,
                              std::vector<T>& dscores) const {
  if (dadapters.size() != c.cands.size()) throw ContractError("hyper backward: adapter count mismatch");
  const Eigen::Index n = c.cands.front().down.rows();
  dfeatures = Mat<T>::Zero(n, cfg_.feature_dim);
  dscores.assign(static_cast<std::size_t>(n), T(0));
  for (std::size_t l = 0; l < dadapters.size(); ++l) {
    Mat<T> d_down, d_up;
    std::vector<T> ds;
    fuse_candidates_backward<T>(c.cands[l], c.scores, dadapters[l], d_down, d_up, ds);
    for (std::size_t i = 0; i < ds.size(); ++i) dscores[i] += ds[i];
    Mat<T> dx = generate_candidates_backward(ps, c.layers[l], down_, up_, d_down, d_up);
    dfeatures += dx.leftCols(cfg_.feature_dim);
    if (cfg_.per_layer) {
      auto& e = ps.at(kLayerEmbed);
      if (!e.frozen) e.grad.row(static_cast<Eigen::Index>(l)) += dx.rightCols(cfg_.layer_embed).colwise().sum();
    }
  }
}

#define DTGI_INSTANTIATE(T)                                                                                      \
  template void HyperNet::init<T>(ParamStore<T>&, num::Rng&, double, double) const;                             \
  template struct Candidates<T>;                                                                                 \
  template Candidates<T> generate_candidates<T>(const ParamStore<T>&, const Mat<T>&, const HyperNet&,          \
                                                const HyperNet&, const HyperConfig&, CandidateCache<T>*);        \
  template Mat<T> generate_candidates_backward<T>(ParamStore<T>&, const CandidateCache<T>&, const HyperNet&,   \
                                                  const HyperNet&, const Mat<T>&, const Mat<T>&);                \
  template AdapterParams<T> fuse_candidates<T>(const Candidates<T>&, std::span<const T>);                       \
  template void fuse_candidates_backward<T>(const Candidates<T>&, std::span<const T>, const AdapterParams<T>&,  \
                                            Mat<T>&, Mat<T>&, std::vector<T>&);                                  \
  template Mat<T> adapter_forward<T>(const Mat<T>&, const AdapterParams<T>&);                                    \
  template Mat<T> adapter_backward<T>(const Mat<T>&, const AdapterParams<T>&, const Mat<T>&, AdapterParams<T>&); \
  template void HyperGenerator::init<T>(ParamStore<T>&, num::Rng&, double) const;                               \
  template std::vector<AdapterParams<T>> HyperGenerator::generate<T>(const ParamStore<T>&, const Mat<T>&,       \
                                                                     std::span<const T>, GeneratorCache<T>*)    \
      const;                                                                                                     \
  template void HyperGenerator::backward<T>(ParamStore<T>&, const GeneratorCache<T>&,                           \
                                            const std::vector<AdapterParams<T>>&, Mat<T>&, std::vector<T>&)     \
      const;

DTGI_INSTANTIATE(float)
DTGI_INSTANTIATE(double)
#undef DTGI_INSTANTIATE

}  // namespace dtgi::hyper
