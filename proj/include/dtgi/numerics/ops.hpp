#pragma once

#include <span>
#include <vector>

#include "dtgi/numerics/params.hpp"

namespace dtgi::num {

inline constexpr double kLayerNormEps = 1e-5;

// Max-subtracted softmax. Throws NumericDomainError on non-finite input.
template <typename T>
std::vector<T> softmax(std::span<const T> v);

// Vector-Jacobian product of softmax: given probabilities p and dL/dp,
// returns dL/dv.
template <typename T>
std::vector<T> softmax_backward(std::span<const T> p, std::span<const T> dp);

// Single-vector layer norm (population variance, eps inside the root).
template <typename T>
std::vector<T> layer_norm(std::span<const T> x, std::span<const T> gain, std::span<const T> bias);

enum class Activation { kRelu, kGelu };

template <typename T>
Mat<T> activate(const Mat<T>& x, Activation act);

// dL/dx given the pre-activation x and dL/dy.
template <typename T>
Mat<T> activate_backward(const Mat<T>& x, const Mat<T>& dy, Activation act);

// In-place row-wise softmax over a score matrix; entries equal to -inf are
// treated as masked.
template <typename T>
void softmax_rows(Mat<T>& scores);

// Mean cross-entropy over rows whose target is >= 0; rows with a negative
// target are padding and contribute nothing. Writes dL/dlogits when
// dlogits != nullptr. Returns the loss (0 when every row is padding).
template <typename T>
T cross_entropy(const Mat<T>& logits, std::span<const int> targets, Mat<T>* dlogits);

}  // namespace dtgi::num
