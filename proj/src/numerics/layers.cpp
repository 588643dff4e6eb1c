#include "dtgi/numerics/layers.hpp"

#include <cmath>

#include "dtgi/common/error.hpp"

namespace dtgi::num {

template <typename T>
void Linear::init(ParamStore<T>& ps, Rng& rng, double stddev) const {
  auto& w = ps.add(name + ".w", {static_cast<std::uint32_t>(in), static_cast<std::uint32_t>(out)}, true);
  if (stddev > 0) init_normal(w.value, rng, stddev);
  if (bias) ps.add(name + ".b", {static_cast<std::uint32_t>(out)});
}

template <typename T>
Mat<T> Linear::forward(const ParamStore<T>& ps, const Mat<T>& x) const {
  if (x.cols() != in) {
    throw ShapeError(name + ": expected " + std::to_string(in) + " input columns, got " +
                     std::to_string(x.cols()));
  }
  Mat<T> y = x * ps.value(name + ".w");
  if (bias) y.rowwise() += ps.value(name + ".b").row(0);
  return y;
}

template <typename T>
Mat<T> Linear::backward(ParamStore<T>& ps, const Mat<T>& x, const Mat<T>& dy) const {
  auto& w = ps.at(name + ".w");
  if (!w.frozen) w.grad.noalias() += x.transpose() * dy;
  if (bias) {
    auto& b = ps.at(name + ".b");
    if (!b.frozen) b.grad.row(0) += dy.colwise().sum();
  }
  return dy * w.value.transpose();
}

template <typename T>
void LayerNorm::init(ParamStore<T>& ps) const {
  ps.add(name + ".g", {static_cast<std::uint32_t>(dim)}).value.setOnes();
  ps.add(name + ".b", {static_cast<std::uint32_t>(dim)});
}

template <typename T>
Mat<T> LayerNorm::forward(const ParamStore<T>& ps, const Mat<T>& x, LayerNormCache<T>* cache) const {
  if (x.cols() != dim) throw ShapeError(name + ": layer norm width mismatch");
  const Eigen::Index n = x.rows();
  Mat<T> xhat(n, dim);
  Eigen::Matrix<T, Eigen::Dynamic, 1> rstd(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const T mean = x.row(r).mean();
    const T var = (x.row(r).array() - mean).square().mean();
    rstd(r) = T(1) / std::sqrt(var + static_cast<T>(kLayerNormEps));
    xhat.row(r) = (x.row(r).array() - mean) * rstd(r);
  }
  const auto& g = ps.value(name + ".g");
  const auto& b = ps.value(name + ".b");
  Mat<T> y = xhat.array().rowwise() * g.row(0).array();
  y.rowwise() += b.row(0);
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->rstd = std::move(rstd);
  }
  return y;
}

template <typename T>
Mat<T> LayerNorm::backward(ParamStore<T>& ps, const LayerNormCache<T>& cache, const Mat<T>& dy) const {
  auto& g = ps.at(name + ".g");
  auto& b = ps.at(name + ".b");
  if (!g.frozen) g.grad.row(0) += dy.cwiseProduct(cache.xhat).colwise().sum();
  if (!b.frozen) b.grad.row(0) += dy.colwise().sum();
  Mat<T> dxhat = dy.array().rowwise() * g.value.row(0).array();
  Mat<T> dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const T m1 = dxhat.row(r).mean();
    const T m2 = dxhat.row(r).dot(cache.xhat.row(r)) / static_cast<T>(dim);
    dx.row(r) = cache.rstd(r) * (dxhat.row(r).array() - m1 - cache.xhat.row(r).array() * m2);
  }
  return dx;
}

template <typename T>
void Embedding::init(ParamStore<T>& ps, Rng& rng, double stddev) const {
  auto& t = ps.add(name + ".table", {static_cast<std::uint32_t>(vocab), static_cast<std::uint32_t>(dim)});
  init_normal(t.value, rng, stddev);
}

template <typename T>
Mat<T> Embedding::forward(const ParamStore<T>& ps, std::span<const int> ids) const {
  const auto& table = ps.value(name + ".table");
  Mat<T> out(static_cast<Eigen::Index>(ids.size()), dim);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= vocab) {
      throw ContractError(name + ": index " + std::to_string(ids[i]) + " out of range");
    }
    out.row(static_cast<Eigen::Index>(i)) = table.row(ids[i]);
  }
  return out;
}

template <typename T>
void Embedding::backward(ParamStore<T>& ps, std::span<const int> ids, const Mat<T>& dy) const {
  auto& t = ps.at(name + ".table");
  if (t.frozen) return;
  for (std::size_t i = 0; i < ids.size(); ++i) t.grad.row(ids[i]) += dy.row(static_cast<Eigen::Index>(i));
}

template <typename T>
Mat<T> dropout(const Mat<T>& x, double p, const ForwardContext& ctx, Mat<T>& mask) {
  if (!ctx.train || ctx.rng == nullptr || p <= 0.0) {
    mask.resize(0, 0);
    return x;
  }
  std::bernoulli_distribution keep(1.0 - p);
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  mask.resize(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(*ctx.rng) ? scale : T(0);
  return x.cwiseProduct(mask);
}

template <typename T>
Mat<T> dropout_backward(const Mat<T>& dy, const Mat<T>& mask) {
  if (mask.size() == 0) return dy;
  return dy.cwiseProduct(mask);
}

#define DTGI_INSTANTIATE(T)                                                                     \
  template void Linear::init<T>(ParamStore<T>&, Rng&, double) const;                            \
  template Mat<T> Linear::forward<T>(const ParamStore<T>&, const Mat<T>&) const;                \
  template Mat<T> Linear::backward<T>(ParamStore<T>&, const Mat<T>&, const Mat<T>&) const;      \
  template void LayerNorm::init<T>(ParamStore<T>&) const;                                       \
  template Mat<T> LayerNorm::forward<T>(const ParamStore<T>&, const Mat<T>&, LayerNormCache<T>*) \
      const;                                                                                    \
  template Mat<T> LayerNorm::backward<T>(ParamStore<T>&, const LayerNormCache<T>&, const Mat<T>&) \
      const;                                                                                    \
  template void Embedding::init<T>(ParamStore<T>&, Rng&, double) const;                         \
  template Mat<T> Embedding::forward<T>(const ParamStore<T>&, std::span<const int>) const;      \
  template void Embedding::backward<T>(ParamStore<T>&, std::span<const int>, const Mat<T>&)     \
      const;                                                                                    \
  template Mat<T> dropout<T>(const Mat<T>&, double, const ForwardContext&, Mat<T>&);            \
  template Mat<T> dropout_backward<T>(const Mat<T>&, const Mat<T>&);

DTGI_INSTANTIATE(float)
DTGI_INSTANTIATE(double)
#undef DTGI_INSTANTIATE

}  // namespace dtgi::num
