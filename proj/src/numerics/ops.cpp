#include "dtgi/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dtgi/common/error.hpp"

namespace dtgi::num {

template <typename T>
std::vector<T> softmax(std::span<const T> v) {
  if (v.empty()) return {};
  for (T x : v) {
    if (!std::isfinite(x)) throw NumericDomainError("softmax: non-finite input");
  }
  const T mx = *std::max_element(v.begin(), v.end());
  std::vector<T> out(v.size());
  T sum = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - mx);
    sum += out[i];
  }
  for (T& x : out) x /= sum;
  return out;
}

template <typename T>
std::vector<T> softmax_backward(std::span<const T> p, std::span<const T> dp) {
  if (p.size() != dp.size()) throw ShapeError("softmax_backward: length mismatch");
  T dot = 0;
  for (std::size_t i = 0; i < p.size(); ++i) dot += p[i] * dp[i];
  std::vector<T> dv(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) dv[i] = p[i] * (dp[i] - dot);
  return dv;
}

template <typename T>
std::vector<T> layer_norm(std::span<const T> x, std::span<const T> gain, std::span<const T> bias) {
  if (x.size() != gain.size() || x.size() != bias.size()) {
    throw ShapeError("layer_norm: length mismatch");
  }
  if (x.size() < 2) throw ShapeError("layer_norm: need at least 2 elements");
  const T n = static_cast<T>(x.size());
  T mean = 0;
  for (T v : x) mean += v;
  mean /= n;
  T var = 0;
  for (T v : x) var += (v - mean) * (v - mean);
  var /= n;
  const T rstd = T(1) / std::sqrt(var + static_cast<T>(kLayerNormEps));
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) * rstd * gain[i] + bias[i];
  return out;
}

template <typename T>
Mat<T> activate(const Mat<T>& x, Activation act) {
  if (act == Activation::kRelu) return x.cwiseMax(T(0));
  // tanh-approximated GeLU
  constexpr T c = static_cast<T>(0.7978845608028654);  // sqrt(2/pi)
  constexpr T k = static_cast<T>(0.044715);
  const auto a = x.array();
  return (static_cast<T>(0.5) * a * (T(1) + (c * (a + k * a.cube())).tanh())).matrix();
}

template <typename T>
Mat<T> activate_backward(const Mat<T>& x, const Mat<T>& dy, Activation act) {
  if (act == Activation::kRelu) {
    return dy.cwiseProduct(x.unaryExpr([](T v) { return v > T(0) ? T(1) : T(0); }));
  }
  constexpr T c = static_cast<T>(0.7978845608028654);
  constexpr T k = static_cast<T>(0.044715);
  const auto a = x.array();
  const auto th = (c * (a + k * a.cube())).tanh().eval();
  const auto du = c * (T(1) + T(3) * k * a.square());
  return (dy.array() * (static_cast<T>(0.5) * (T(1) + th) + static_cast<T>(0.5) * a * (T(1) - th.square()) * du))
      .matrix();
}

template <typename T>
void softmax_rows(Mat<T>& s) {
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    auto row = s.row(r);
    const T mx = row.maxCoeff();
    const T neg_inf = -std::numeric_limits<T>::infinity();
    row = (row.array() == neg_inf).select(T(0), (row.array() - mx).exp()).matrix();
    row /= row.sum();
  }
}

template <typename T>
T cross_entropy(const Mat<T>& logits, std::span<const int> targets, Mat<T>* dlogits) {
  if (static_cast<std::size_t>(logits.rows()) != targets.size()) {
    throw ShapeError("cross_entropy: target count mismatch");
  }
  std::size_t count = 0;
  for (int t : targets) {
    if (t >= 0) {
      if (t >= logits.cols()) throw ContractError("cross_entropy: target out of range");
      ++count;
    }
  }
  if (dlogits) dlogits->setZero(logits.rows(), logits.cols());
  if (count == 0) return T(0);
  T loss = 0;
  const T inv = T(1) / static_cast<T>(count);
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const int t = targets[static_cast<std::size_t>(r)];
    if (t < 0) continue;
    const auto row = logits.row(r);
    const T mx = row.maxCoeff();
    T sum = 0;
    for (Eigen::Index c = 0; c < row.size(); ++c) sum += std::exp(row(c) - mx);
    const T lse = mx + std::log(sum);
    loss += lse - row(t);
    if (dlogits) {
      for (Eigen::Index c = 0; c < row.size(); ++c) {
        (*dlogits)(r, c) = std::exp(row(c) - lse) * inv;
      }
      (*dlogits)(r, t) -= inv;
    }
  }
  return loss * inv;
}

#define DTGI_INSTANTIATE(T)                                                                  \
  template std::vector<T> softmax<T>(std::span<const T>);                                    \
  template std::vector<T> softmax_backward<T>(std::span<const T>, std::span<const T>);       \
  template std::vector<T> layer_norm<T>(std::span<const T>, std::span<const T>,              \
                                        std::span<const T>);                                 \
  template Mat<T> activate<T>(const Mat<T>&, Activation);                                    \
  template Mat<T> activate_backward<T>(const Mat<T>&, const Mat<T>&, Activation);            \
  template void softmax_rows<T>(Mat<T>&);                                                    \
  template T cross_entropy<T>(const Mat<T>&, std::span<const int>, Mat<T>*);

DTGI_INSTANTIATE(float)
DTGI_INSTANTIATE(double)
#undef DTGI_INSTANTIATE

}  // namespace dtgi::num
