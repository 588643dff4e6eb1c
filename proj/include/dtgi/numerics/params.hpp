#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace dtgi::num {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;

using Rng = std::mt19937_64;

// Throws NumericDomainError naming `where` if any entry is NaN or Inf.
template <typename T>
void require_finite(const Mat<T>& m, const char* where);

// A named trainable (or frozen) tensor. Values are stored as a 2-D row-major
// matrix whose row count is the product of all leading extents; rank-1
// tensors are 1 x n.
template <typename T>
struct Param {
  std::vector<std::uint32_t> shape;
  Mat<T> value;
  Mat<T> grad;
  bool frozen = false;
  bool decay = false;  // subject to decoupled weight decay

  std::size_t numel() const { return static_cast<std::size_t>(value.size()); }
};

// Ordered name -> Param map. Iteration order is lexicographic, which keeps
// checkpoints and optimizer updates deterministic.
template <typename T>
class ParamStore {
 public:
  using Map = std::map<std::string, Param<T>>;

  // Registers a zero-initialised tensor. Each name has exactly one owner:
  // registering an existing name is a ContractError.
  Param<T>& add(const std::string& name, std::vector<std::uint32_t> shape, bool decay = false);

  // Registers a frozen tensor holding `value` (e.g. provider embeddings).
  Param<T>& add_frozen(const std::string& name, const Mat<T>& value);

  Param<T>& at(const std::string& name);
  const Param<T>& at(const std::string& name) const;
  bool contains(const std::string& name) const { return map_.count(name) != 0; }

  const Mat<T>& value(const std::string& name) const { return at(name).value; }
  Mat<T>& grad(const std::string& name) { return at(name).grad; }

  void freeze(const std::string& name) { at(name).frozen = true; }
  void zero_grad();

  // Sum of element counts over trainable tensors whose name starts with prefix.
  std::size_t trainable_count(const std::string& prefix = "") const;
  std::size_t size() const { return map_.size(); }

  typename Map::iterator begin() { return map_.begin(); }
  typename Map::iterator end() { return map_.end(); }
  typename Map::const_iterator begin() const { return map_.begin(); }
  typename Map::const_iterator end() const { return map_.end(); }

  void erase(const std::string& name) { map_.erase(name); }

  template <typename U>
  ParamStore<U> cast() const {
    ParamStore<U> out;
    for (const auto& [name, p] : map_) {
      Param<U>& q = out.add(name, p.shape, p.decay);
      q.value = p.value.template cast<U>();
      q.frozen = p.frozen;
    }
    return out;
  }

 private:
  Map map_;
};

// Fills with N(0, stddev^2) draws in row-major order.
template <typename T>
void init_normal(Mat<T>& m, Rng& rng, double stddev);

// Hash of every frozen tensor's bytes (converted to f64) in name order.
template <typename T>
std::string frozen_hash(const ParamStore<T>& store);

// Hash of every tensor's bytes (converted to f64) in name order.
template <typename T>
std::string store_hash(const ParamStore<T>& store);

}  // namespace dtgi::num
