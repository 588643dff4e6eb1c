#include "dtgi/numerics/optim.hpp"

#include <cmath>

#include "dtgi/common/error.hpp"

namespace dtgi::num {

template <typename T>
void AdamW<T>::step(ParamStore<T>& ps, double lr) {
  ++steps_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
  const T b1 = static_cast<T>(cfg_.beta1);
  const T b2 = static_cast<T>(cfg_.beta2);
  const T step_size = static_cast<T>(lr / bc1);
  const T inv_sqrt_bc2 = static_cast<T>(1.0 / std::sqrt(bc2));
  const T eps = static_cast<T>(cfg_.eps);
  for (auto& [name, p] : ps) {
    if (p.frozen) continue;
    auto [mit, m_new] = m_.try_emplace(name, Mat<T>::Zero(p.value.rows(), p.value.cols()));
    auto [vit, v_new] = v_.try_emplace(name, Mat<T>::Zero(p.value.rows(), p.value.cols()));
    Mat<T>& m = mit->second;
    Mat<T>& v = vit->second;
    if (p.decay && cfg_.weight_decay > 0) p.value *= static_cast<T>(1.0 - lr * cfg_.weight_decay);
    m = b1 * m + (T(1) - b1) * p.grad;
    v = b2 * v + (T(1) - b2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= step_size * m.array() / (v.array().sqrt() * inv_sqrt_bc2 + eps);
  }
}

template <typename T>
void AdamW<T>::export_state(ParamStore<T>& out) const {
  for (const auto& [name, m] : m_) {
    auto& p = out.add("adam.m/" + name, {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())});
    p.value = m;
  }
  for (const auto& [name, v] : v_) {
    auto& p = out.add("adam.v/" + name, {static_cast<std::uint32_t>(v.rows()), static_cast<std::uint32_t>(v.cols())});
    p.value = v;
  }
  out.add("adam.step", {1}).value(0, 0) = static_cast<T>(steps_);
}

template <typename T>
void AdamW<T>::import_state(const ParamStore<T>& in) {
  m_.clear();
  v_.clear();
  for (const auto& [name, p] : in) {
    if (name.rfind("adam.m/", 0) == 0) m_[name.substr(7)] = p.value;
    if (name.rfind("adam.v/", 0) == 0) v_[name.substr(7)] = p.value;
  }
  if (!in.contains("adam.step")) throw LookupError("optimizer state missing adam.step");
  steps_ = static_cast<long>(in.value("adam.step")(0, 0));
}

template <typename T>
double clip_grad_norm(ParamStore<T>& ps, double max_norm) {
  double sq = 0;
  for (const auto& [_, p] : ps) {
    if (!p.frozen) sq += static_cast<double>(p.grad.squaredNorm());
  }
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw NumericDomainError("gradient norm is not finite");
  if (norm > max_norm && norm > 0) {
    const T scale = static_cast<T>(max_norm / (norm + 1e-6));
    for (auto& [_, p] : ps) {
      if (!p.frozen) p.grad *= scale;
    }
  }
  return norm;
}

template class AdamW<float>;
template class AdamW<double>;
template double clip_grad_norm<float>(ParamStore<float>&, double);
template double clip_grad_norm<double>(ParamStore<double>&, double);

}  // namespace dtgi::num
