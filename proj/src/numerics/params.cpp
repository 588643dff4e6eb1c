#include "dtgi/numerics/params.hpp"

#include <cmath>
#include <cstring>

#include "dtgi/common/error.hpp"
#include "dtgi/common/hash.hpp"

namespace dtgi::num {

template <typename T>
void require_finite(const Mat<T>& m, const char* where) {
  if (!m.allFinite()) throw NumericDomainError(std::string("non-finite value in ") + where);
}

template <typename T>
Param<T>& ParamStore<T>::add(const std::string& name, std::vector<std::uint32_t> shape, bool decay) {
  if (shape.empty()) throw ShapeError("param " + name + ": empty shape");
  std::size_t rows = 1;
  for (std::size_t i = 0; i + 1 < shape.size(); ++i) rows *= shape[i];
  for (auto e : shape) {
    if (e == 0) throw ShapeError("param " + name + ": zero extent");
  }
  auto [it, inserted] = map_.try_emplace(name);
  if (!inserted) throw ContractError("param " + name + " registered twice");
  Param<T>& p = it->second;
  p.shape = std::move(shape);
  p.value = Mat<T>::Zero(static_cast<Eigen::Index>(rows), p.shape.back());
  p.grad = Mat<T>::Zero(p.value.rows(), p.value.cols());
  p.decay = decay;
  return p;
}

template <typename T>
Param<T>& ParamStore<T>::add_frozen(const std::string& name, const Mat<T>& value) {
  Param<T>& p = add(name, {static_cast<std::uint32_t>(value.rows()), static_cast<std::uint32_t>(value.cols())});
  p.value = value;
  p.frozen = true;
  return p;
}

template <typename T>
Param<T>& ParamStore<T>::at(const std::string& name) {
  auto it = map_.find(name);
  if (it == map_.end()) throw LookupError("unknown param " + name);
  return it->second;
}

template <typename T>
const Param<T>& ParamStore<T>::at(const std::string& name) const {
  auto it = map_.find(name);
  if (it == map_.end()) throw LookupError("unknown param " + name);
  return it->second;
}

template <typename T>
void ParamStore<T>::zero_grad() {
  for (auto& [_, p] : map_) p.grad.setZero(p.value.rows(), p.value.cols());
}

template <typename T>
std::size_t ParamStore<T>::trainable_count(const std::string& prefix) const {
  std::size_t n = 0;
  for (const auto& [name, p] : map_) {
    if (!p.frozen && name.compare(0, prefix.size(), prefix) == 0) n += p.numel();
  }
  return n;
}

template <typename T>
void init_normal(Mat<T>& m, Rng& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(dist(rng));
}

namespace {

template <typename T>
std::string hash_selected(const ParamStore<T>& store, bool frozen_only) {
  std::vector<std::uint8_t> bytes;
  for (const auto& [name, p] : store) {
    if (frozen_only && !p.frozen) continue;
    bytes.insert(bytes.end(), name.begin(), name.end());
    bytes.push_back(0);
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      double v = static_cast<double>(p.value.data()[i]);
      std::uint8_t b[8];
      std::memcpy(b, &v, 8);
      bytes.insert(bytes.end(), b, b + 8);
    }
  }
  return sha256_hex(bytes);
}

}  // namespace

template <typename T>
std::string frozen_hash(const ParamStore<T>& store) {
  return hash_selected(store, true);
}

template <typename T>
std::string store_hash(const ParamStore<T>& store) {
  return hash_selected(store, false);
}

template void require_finite<float>(const Mat<float>&, const char*);
template void require_finite<double>(const Mat<double>&, const char*);
template class ParamStore<float>;
template class ParamStore<double>;
template void init_normal<float>(Mat<float>&, Rng&, double);
template void init_normal<double>(Mat<double>&, Rng&, double);
template std::string frozen_hash<float>(const ParamStore<float>&);
template std::string frozen_hash<double>(const ParamStore<double>&);
template std::string store_hash<float>(const ParamStore<float>&);
template std::string store_hash<double>(const ParamStore<double>&);

}  // namespace dtgi::num
