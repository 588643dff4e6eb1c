#include <doctest.h>

#include <cmath>
#include <vector>

#include "dtgi/common/config.hpp"
#include "dtgi/common/error.hpp"
#include "dtgi/numerics/attention.hpp"
#include "dtgi/numerics/checkpoint.hpp"
#include "dtgi/numerics/grad_check.hpp"
#include "dtgi/numerics/optim.hpp"

using namespace dtgi;
using namespace dtgi::num;
using MD = Mat<double>;

namespace {

MD random_mat(Rng& rng, Eigen::Index r, Eigen::Index c, double sd = 1.0) {
  MD m(r, c);
  init_normal(m, rng, sd);
  return m;
}

// e^x / sum e^x, evaluated directly
std::vector<double> softmax_oracle(const std::vector<double>& x) {
  double z = 0.0;
  for (double v : x) z += std::exp(v);
  std::vector<double> out;
  for (double v : x) out.push_back(std::exp(v) / z);
  return out;
}

}  // namespace

TEST_SUITE("numerics") {
  TEST_CASE("softmax matches direct evaluation") {
    const std::vector<double> x{1, 1, 0};
    const auto p = softmax<double>(x);
    const auto want = softmax_oracle(x);
    for (std::size_t i = 0; i < 3; ++i) CHECK(p[i] == doctest::Approx(want[i]).epsilon(1e-15));
    CHECK(p[0] == doctest::Approx(0.42231879825).epsilon(1e-10));
    CHECK(p[2] == doctest::Approx(0.15536240350).epsilon(1e-10));

    const auto u = softmax<double>(std::vector<double>{0, 0, 0});
    for (double v : u) CHECK(v == doctest::Approx(1.0 / 3.0));

    const auto shifted = softmax<double>(std::vector<double>{101, 101, 100});
    for (std::size_t i = 0; i < 3; ++i) CHECK(shifted[i] == doctest::Approx(p[i]).epsilon(1e-12));
  }

  TEST_CASE("softmax rows leave masked entries at exactly zero") {
    MD s(2, 3);
    s << 1, -INFINITY, -INFINITY, 0.5, 0.5, -INFINITY;
    softmax_rows(s);
    CHECK(s(0, 0) == 1.0);
    CHECK(s(0, 1) == 0.0);
    CHECK(s(1, 0) == doctest::Approx(0.5));
    CHECK(s(1, 2) == 0.0);
  }

  TEST_CASE("layer norm oracle values") {
    const std::vector<double> g{1, 1}, b{0, 0};
    const auto y = layer_norm<double>(std::vector<double>{1, -1}, g, b);
    const double want = 1.0 / std::sqrt(1.0 + 1e-5);
    CHECK(y[0] == doctest::Approx(want).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(-want).epsilon(1e-12));

    const std::vector<double> g3{1, 1, 1}, b3{0.5, -2, 3};
    for (double v : layer_norm<double>(std::vector<double>{4, 4, 4}, g3, std::vector<double>{0, 0, 0})) CHECK(v == 0.0);
    const auto zero_gain = layer_norm<double>(std::vector<double>{1, 5, -2}, std::vector<double>{0, 0, 0}, b3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(zero_gain[i] == b3[i]);
  }

  TEST_CASE("cross entropy ignores padded targets") {
    MD logits(3, 2);
    logits << 0, 0, 1, 0, 5, 5;
    MD d;
    const std::vector<int> targets{0, 1, -1};
    const double ce = cross_entropy<double>(logits, targets, &d);
    const double want = (std::log(2.0) + std::log(1.0 + std::exp(1.0))) / 2.0;
    CHECK(ce == doctest::Approx(want).epsilon(1e-12));
    CHECK(d.row(2).cwiseAbs().sum() == 0.0);
  }

  TEST_CASE("grad_check on a quadratic") {
    ParamStore<double> ps;
    ps.add("x", {3}).value << 1, 2, 3;
    const LossFn f = [](ParamStore<double>& p, bool grad) {
      const auto& x = p.value("x");
      if (grad) p.grad("x") += 2.0 * x;
      return x.squaredNorm();
    };
    const auto r = grad_check(f, ps);
    CHECK(r.max_rel_error < 1e-7);
    CHECK(r.coords_checked == 3);
  }

  TEST_CASE("grad_check on softmax cross entropy, frozen tensors skipped") {
    ParamStore<double> ps;
    ps.add("logits", {1, 4}).value << 0.3, -1.2, 2.0, 0.7;
    ps.add_frozen("scale", MD::Constant(1, 1, 2.0));
    const std::vector<int> target{2};
    const LossFn f = [&](ParamStore<double>& p, bool grad) {
      const MD z = p.value("logits") * p.value("scale")(0, 0);
      MD d;
      const double ce = cross_entropy<double>(z, target, grad ? &d : nullptr);
      if (grad) p.grad("logits") += d * p.value("scale")(0, 0);
      return ce;
    };
    const auto r = grad_check(f, ps);
    CHECK(r.max_rel_error < 1e-6);
    CHECK(r.coords_checked == 4);
  }

  TEST_CASE("causal attention ignores the future") {
    Rng rng(2);
    AttentionConfig cfg{8, 2, 16, Activation::kGelu, true, 0.0};
    AttentionBlock block("blk", cfg);
    ParamStore<double> ps;
    block.init(ps, rng, 0.3);
    MD x = random_mat(rng, 5, 8);
    const MD y = block.forward<double>(ps, x, 5, {}, nullptr);
    x.row(3) += random_mat(rng, 1, 8);
    x.row(4) += random_mat(rng, 1, 8);
    const MD y2 = block.forward<double>(ps, x, 5, {}, nullptr);
    CHECK(y.topRows(3) == y2.topRows(3));
    CHECK((y.bottomRows(2) - y2.bottomRows(2)).norm() > 1e-6);

    const MD single = block.forward<double>(ps, random_mat(rng, 1, 8), 1, {}, nullptr);
    CHECK(single.rows() == 1);
    CHECK(single.cols() == 8);
  }

  TEST_CASE("attention block gradients") {
    Rng rng(5);
    AttentionBlock block("blk", {8, 2, 12, Activation::kGelu, true, 0.0});
    ParamStore<double> ps;
    block.init(ps, rng, 0.4);
    for (auto& [_, p] : ps) p.value += random_mat(rng, p.value.rows(), p.value.cols(), 0.1);
    const MD x = random_mat(rng, 6, 8), w = random_mat(rng, 6, 8);
    const LossFn f = [&](ParamStore<double>& p, bool grad) {
      BlockCache<double> c;
      const MD y = block.forward(p, x, 3, {}, &c);
      if (grad) block.backward(p, c, w, 3);
      return y.cwiseProduct(w).sum();
    };
    CHECK(grad_check(f, ps).max_rel_error < 1e-6);
    CHECK_THROWS_AS(AttentionBlock("bad", {10, 3, 4, Activation::kGelu, false, 0.0}), ConfigError);
  }

  TEST_CASE("zero projections make a block the identity") {
    Rng rng(3);
    AttentionBlock block("blk", {8, 2, 16, Activation::kRelu, false, 0.0});
    ParamStore<double> ps;
    block.init(ps, rng, 0.0);
    const MD x = random_mat(rng, 4, 8);
    CHECK(block.forward<double>(ps, x, 4, {}, nullptr) == x);
  }

  TEST_CASE("parameter ownership and frozen tensors") {
    ParamStore<float> ps;
    ps.add("a", {2, 2}, true);
    CHECK_THROWS_AS(ps.add("a", {2, 2}), ContractError);
    Mat<float> f(1, 3);
    f << 1, 2, 3;
    ps.add_frozen("f", f);
    ps.grad("a").setConstant(1.0f);
    AdamW<float> opt;
    opt.step(ps, 0.1);
    CHECK(ps.value("f") == f);
    CHECK(ps.value("a")(0, 0) != 0.0f);
  }

  TEST_CASE("gradient clipping") {
    ParamStore<double> ps;
    ps.add("a", {2}).grad << 3, 4;
    const double norm = clip_grad_norm(ps, 1.0);
    CHECK(norm == doctest::Approx(5.0));
    CHECK(ps.grad("a").norm() == doctest::Approx(1.0));
  }

  TEST_CASE("checkpoint round trip and shape checks") {
    Rng rng(4);
    ParamStore<double> ps;
    ps.add("w", {3, 2}).value = random_mat(rng, 3, 2);
    ps.add("b", {2}).value = random_mat(rng, 1, 2);
    const auto bytes = encode_checkpoint(ps);
    const auto back = decode_checkpoint<double>(bytes);
    CHECK(back.value("w") == ps.value("w"));
    CHECK(encode_checkpoint(back) == bytes);

    ParamStore<double> other;
    other.add("w", {2, 3});
    other.add("b", {2});
    CHECK_THROWS(load_checkpoint_into(other, bytes));
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS(decode_checkpoint<double>(bad));
  }

  TEST_CASE("config rejects unknown keys and round-trips") {
    Config c({{"a.x", "1"}, {"b.y", "two"}});
    CHECK_THROWS_AS(c.set("a.z", "3"), ConfigError);
    std::string msg;
    try {
      c.set_override("nope=1");
    } catch (const ConfigError& e) {
      msg = e.what();
    }
    CHECK(msg.find("a.x") != std::string::npos);
    CHECK(msg.find("b.y") != std::string::npos);
    c.load_text("[a]\nx = 42\n");
    CHECK(c.integer("a.x") == 42);
    Config d({{"a.x", "0"}, {"b.y", ""}});
    d.load_text(c.to_text());
    CHECK(d.to_text() == c.to_text());
  }
}
