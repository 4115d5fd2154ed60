// Copyright 2026 The tarfvae Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>
#include <functional>

#include "tarfvae/adam.hpp"
#include "tarfvae/autodiff.hpp"
#include "tarfvae/grad_check.hpp"
#include "tarfvae/layers.hpp"
#include "tarfvae/param_store.hpp"
#include "test_support.hpp"

using namespace tarfvae;
using tarfvae::testing::bit_equal;
using tarfvae::testing::max_abs_diff;
using tarfvae::testing::random_matrix;
using tarfvae::testing::set_param;

namespace {

// Weighted sum so every output coordinate carries an O(1), distinct gradient.
ad::Var probe(const ad::Var& out, const NdArray& weights) {
  return ad::sum(ad::mul(out, ad::Var::constant(weights)));
}

double primitive_grad_error(const std::function<ad::Var(const std::vector<ad::Var>&)>& op,
                            const std::vector<NdArray>& inputs, std::uint64_t seed) {
  ParamStore store;
  std::vector<ad::Var> vars;
  for (std::size_t i = 0; i < inputs.size(); ++i) vars.push_back(store.add("in" + std::to_string(i), inputs[i]));
  NdArray weights;
  {
    ad::NoGradGuard ng;
    const NdArray shape_probe = op(vars).value();
    Rng rng(seed);
    weights = random_matrix(rng, shape_probe.rows(), shape_probe.cols());
  }
  return grad_check([&] { return probe(op(vars), weights); }, store, 1e-5).max_rel_error;
}

}  // namespace

TEST_SUITE("nn_core") {

TEST_CASE("ndarray shape bookkeeping and errors") {
  NdArray a = NdArray::from_rows({{1, 2, 3}, {4, 5, 6}});
  CHECK(a.rows() == 2);
  CHECK(a.cols() == 3);
  CHECK(a(1, 2) == 6);
  CHECK(a.shape_str() == "[2x3]");
  CHECK_THROWS_AS(NdArray({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
  NdArray v({3});
  CHECK_THROWS_AS(v.rows(), ShapeError);
}

TEST_CASE("f32 rounding") {
  NdArray a = NdArray::from_rows({{0.1}});
  a.round_to_f32();
  CHECK(a[0] == static_cast<double>(0.1f));
}

TEST_CASE("linear: identity, hand value and homogeneity") {
  ad::Var x = ad::Var::constant(NdArray::from_rows({{1, 2}}));
  ad::Var eye = ad::Var::constant(NdArray::from_rows({{1, 0}, {0, 1}}));
  CHECK(bit_equal(ad::linear(x, eye, ad::Var()).value(), x.value()));

  ad::Var w = ad::Var::constant(NdArray::from_rows({{1, 1}, {0, 1}}));
  ad::Var b = ad::Var::constant(NdArray::from_rows({{0, 1}}));
  const NdArray out = ad::linear(x, w, b).value();
  CHECK(out(0, 0) == doctest::Approx(3.0));
  CHECK(out(0, 1) == doctest::Approx(3.0));

  Rng rng(3);
  ad::Var xr = ad::Var::constant(random_matrix(rng, 4, 5));
  ad::Var wr = ad::Var::constant(random_matrix(rng, 3, 5));
  ad::PrecisionGuard pg(Precision::F64);
  const NdArray base = ad::linear(xr, wr, ad::Var()).value();
  const NdArray scaled = ad::linear(ad::scale(xr, 2.5), wr, ad::Var()).value();
  for (std::size_t i = 0; i < base.size(); ++i) CHECK(scaled[i] == doctest::Approx(2.5 * base[i]).epsilon(1e-12));

  CHECK_THROWS_AS(ad::linear(xr, ad::Var::constant(random_matrix(rng, 3, 4)), ad::Var()), ShapeError);
}

TEST_CASE("gelu values") {
  ad::PrecisionGuard pg(Precision::F64);
  const NdArray out = ad::gelu(ad::Var::constant(NdArray::from_rows({{0.0, 10.0, 1.0}}))).value();
  CHECK(out[0] == 0.0);
  CHECK(std::abs(out[1] - 10.0) <= 1e-6);
  // 1 * Phi(1), see tests/oracles/hand_cases.py
  CHECK(out[2] == doctest::Approx(0.8413447460685429).epsilon(1e-12));
}

TEST_CASE("every primitive's gradient matches central differences") {
  ad::PrecisionGuard pg(Precision::F64);
  Rng rng(11);
  for (int trial = 0; trial < 3; ++trial) {
    const std::size_t r = 2 + static_cast<std::size_t>(rng.uniform(0, 3));
    const std::size_t c = 2 + static_cast<std::size_t>(rng.uniform(0, 3));
    const NdArray a = random_matrix(rng, r, c);
    const NdArray b = random_matrix(rng, r, c);
    const auto seed = static_cast<std::uint64_t>(trial);
    using V = std::vector<ad::Var>;
    CAPTURE(trial);
    CHECK(primitive_grad_error([](const V& v) { return ad::add(v[0], v[1]); }, {a, b}, seed) <= 1e-6);
    CHECK(primitive_grad_error([](const V& v) { return ad::sub(v[0], v[1]); }, {a, b}, seed) <= 1e-6);
    CHECK(primitive_grad_error([](const V& v) { return ad::mul(v[0], v[1]); }, {a, b}, seed) <= 1e-6);
    CHECK(primitive_grad_error([](const V& v) { return ad::mul(v[0], v[0]); }, {a}, seed) <= 1e-6);
    CHECK(primitive_grad_error([](const V& v) { return ad::scale(v[0], -1.7); }, {a}, seed) <= 1e-6);
    CHECK(primitive_grad_error([](const V& v) { return ad::exp(v[0]); }, {a}, seed) <= 1e-6);
    CHECK(primitive_grad_error([](const V& v) { return ad::tanh(v[0]); }, {a}, seed) <= 1e-6);
    CHECK(primitive_grad_error([](const V& v) { return ad::square(v[0]); }, {a}, seed) <= 1e-6);
    CHECK(primitive_grad_error([](const V& v) { return ad::gelu(v[0]); }, {a}, seed) <= 1e-6);
    CHECK(primitive_grad_error([](const V& v) { return ad::sum(v[0]); }, {a}, seed) <= 1e-6);
    CHECK(primitive_grad_error([](const V& v) { return ad::shift_rows_down(v[0]); }, {a}, seed) <= 1e-6);
    CHECK(primitive_grad_error([](const V& v) { return ad::reverse_rows(v[0]); }, {a}, seed) <= 1e-6);
    CHECK(primitive_grad_error([](const V& v) { return ad::slice_cols(v[0], 1, 1); }, {a}, seed) <= 1e-6);

    // Keep clamp inputs away from the kinks.
    NdArray spread = a;
    for (double& x : spread.data()) x = x < 0 ? x - 0.5 : x + 0.5;
    CHECK(primitive_grad_error([](const V& v) { return ad::clamp(v[0], -1.0, 1.0); }, {spread}, seed) <= 1e-6);

    const NdArray w = random_matrix(rng, 3, c);
    const NdArray bias = random_matrix(rng, 1, 3);
    CHECK(primitive_grad_error([](const V& v) { return ad::linear(v[0], v[1], v[2]); }, {a, w, bias}, seed) <= 1e-6);

    const NdArray stacked = random_matrix(rng, 2 * r, c);
    CHECK(primitive_grad_error([r](const V& v) { return ad::group_transpose(v[0], r); }, {stacked}, seed) <= 1e-6);

    const NdArray q = random_matrix(rng, 3, 4);
    const NdArray k = random_matrix(rng, 3, 4);
    const NdArray vv = random_matrix(rng, 3, 4);
    CHECK(primitive_grad_error([](const V& v) { return ad::attention(v[0], v[1], v[2], 2, true); }, {q, k, vv},
                               seed) <= 1e-6);
    const NdArray k5 = random_matrix(rng, 5, 4);
    const NdArray v5 = random_matrix(rng, 5, 4);
    CHECK(primitive_grad_error([](const V& v) { return ad::attention(v[0], v[1], v[2], 1, false); }, {q, k5, v5},
                               seed) <= 1e-6);
  }
}

TEST_CASE("non-finite values raise NumericError naming the op") {
  ad::Var big = ad::Var::constant(NdArray::from_rows({{1000.0}}));
  try {
    ad::exp(big);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(e.op() == "exp");
  }
}

TEST_CASE("group_transpose layout") {
  // Two stacked 2x3 blocks.
  NdArray a = NdArray::from_rows({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}, {10, 11, 12}});
  const NdArray t = ad::group_transpose(ad::Var::constant(a), 2).value();
  REQUIRE(t.rows() == 6);
  REQUIRE(t.cols() == 2);
  CHECK(t(0, 0) == 1);
  CHECK(t(0, 1) == 4);
  CHECK(t(2, 1) == 6);
  CHECK(t(3, 0) == 7);
  CHECK(t(5, 1) == 12);
}

TEST_CASE("attention: singleton, row sums, uniform weights and causality") {
  ad::PrecisionGuard pg(Precision::F64);
  Rng rng(5);
  // m = 1: every query gets the single value row.
  const NdArray v1 = random_matrix(rng, 1, 4);
  const NdArray out1 =
      ad::attention(ad::Var::constant(random_matrix(rng, 3, 4)), ad::Var::constant(random_matrix(rng, 1, 4)),
                    ad::Var::constant(v1), 1, false)
          .value();
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(out1(i, j) == doctest::Approx(v1(0, j)).epsilon(1e-12));

  // Row sums: with V = ones every output entry equals its row's weight sum.
  const NdArray ones = NdArray::matrix(5, 4, 1.0);
  for (bool causal : {false, true}) {
    const NdArray s = ad::attention(ad::Var::constant(random_matrix(rng, 5, 4, 3.0)),
                                    ad::Var::constant(random_matrix(rng, 5, 4, 3.0)), ad::Var::constant(ones), 2,
                                    causal)
                          .value();
    for (double x : s.data()) CHECK(std::abs(x - 1.0) <= 1e-6);
  }

  // Q orthogonal to every K: all scores are 0, so weights are uniform.
  NdArray q = NdArray::from_rows({{50.0, 0.0}});
  NdArray k = NdArray::from_rows({{0.0, 1.0}, {0.0, -2.0}, {0.0, 7.0}});
  NdArray v = NdArray::from_rows({{1.0, 2.0}, {3.0, 5.0}, {8.0, -1.0}});
  const NdArray u = ad::attention(ad::Var::constant(q), ad::Var::constant(k), ad::Var::constant(v), 1, false).value();
  CHECK(std::abs(u(0, 0) - 4.0) <= 1e-4);
  CHECK(std::abs(u(0, 1) - 2.0) <= 1e-4);

  // Causal: output rows < j are bit-identical when row j changes.
  const NdArray base_in = random_matrix(rng, 5, 4);
  const NdArray base = ad::attention(ad::Var::constant(base_in), ad::Var::constant(base_in),
                                     ad::Var::constant(base_in), 2, true)
                           .value();
  for (std::size_t j = 0; j < 5; ++j) {
    NdArray pert = base_in;
    for (std::size_t c = 0; c < 4; ++c) pert(j, c) += 0.37;
    const NdArray out =
        ad::attention(ad::Var::constant(pert), ad::Var::constant(pert), ad::Var::constant(pert), 2, true).value();
    for (std::size_t i = 0; i < j; ++i)
      for (std::size_t c = 0; c < 4; ++c) CHECK(out(i, c) == base(i, c));
  }
  CHECK_THROWS_AS(ad::attention(ad::Var::constant(random_matrix(rng, 2, 4)),
                                ad::Var::constant(random_matrix(rng, 3, 4)),
                                ad::Var::constant(random_matrix(rng, 3, 4)), 1, true),
                  ShapeError);
}

TEST_CASE("forward ops are deterministic") {
  Rng rng(9);
  const NdArray x = random_matrix(rng, 4, 6);
  ParamStore s1, s2;
  Rng r1(42), r2(42);
  nn::CausalTransformerBlock b1(s1, "t", 6, 12, 2, r1);
  nn::CausalTransformerBlock b2(s2, "t", 6, 12, 2, r2);
  CHECK(bit_equal(b1(ad::Var::constant(x)).value(), b2(ad::Var::constant(x)).value()));
  CHECK(bit_equal(b1(ad::Var::constant(x)).value(), b1(ad::Var::constant(x)).value()));
}

TEST_CASE("mlp_block: residual identity and hand value") {
  ad::PrecisionGuard pg(Precision::F64);
  ParamStore store;
  Rng rng(1);
  nn::MlpBlock block(store, "blk", 3, 4, 8, 6, rng);
  testing::zero_params(store);
  Rng in_rng(2);
  const NdArray h = random_matrix(in_rng, 3, 4);
  CHECK(bit_equal(block(ad::Var::constant(h)).value(), h));

  // C = 1 with zero channel-mix weights: only the feature mix acts.
  ParamStore one;
  nn::MlpBlock single(one, "blk", 1, 2, 2, 2, rng);
  set_param(one, "blk.feat_in.weight", NdArray::from_rows({{0.5, -0.25}, {0.1, 0.2}}));
  set_param(one, "blk.feat_in.bias", NdArray::from_rows({{0.1, -0.1}}));
  set_param(one, "blk.feat_out.weight", NdArray::from_rows({{0.3, -0.2}, {0.4, 0.1}}));
  set_param(one, "blk.feat_out.bias", NdArray::from_rows({{0.05, 0.0}}));
  testing::zero_params(one, "blk.chan");
  const NdArray x = NdArray::from_rows({{1.0, -2.0}});
  const NdArray feat_only = single(ad::Var::constant(x)).value();
  // Feature mix alone, written out: h + W2 gelu(W1 h + b1) + b2.
  auto g = [](double v) { return 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0))); };
  const double a0 = g(0.5 * 1.0 - 0.25 * -2.0 + 0.1);
  const double a1 = g(0.1 * 1.0 + 0.2 * -2.0 - 0.1);
  CHECK(feat_only(0, 0) == doctest::Approx(1.0 + 0.3 * a0 - 0.2 * a1 + 0.05).epsilon(1e-12));
  CHECK(feat_only(0, 1) == doctest::Approx(-2.0 + 0.4 * a0 + 0.1 * a1).epsilon(1e-12));

  // Full block with channel mix; reference in tests/oracles/hand_cases.py.
  set_param(one, "blk.chan_in.weight", NdArray::from_rows({{0.7}, {-0.3}}));
  set_param(one, "blk.chan_in.bias", NdArray::from_rows({{0.0, 0.2}}));
  set_param(one, "blk.chan_out.weight", NdArray::from_rows({{0.25, 0.5}}));
  set_param(one, "blk.chan_out.bias", NdArray::from_rows({{-0.1}}));
  const NdArray full = single(ad::Var::constant(x)).value();
  CHECK(full(0, 0) == doctest::Approx(1.4171572229436125).epsilon(1e-12));
  CHECK(full(0, 1) == doctest::Approx(-1.5091547536040528).epsilon(1e-12));

  CHECK_THROWS_AS(block(ad::Var::constant(random_matrix(in_rng, 3, 5))), ShapeError);
}

TEST_CASE("mlp_block mixes stacked samples independently") {
  ad::PrecisionGuard pg(Precision::F64);
  ParamStore store;
  Rng rng(4);
  nn::MlpBlock block(store, "blk", 3, 4, 8, 6, rng);
  const NdArray a = random_matrix(rng, 3, 4);
  const NdArray b = random_matrix(rng, 3, 4);
  NdArray stacked = NdArray::matrix(6, 4);
  for (std::size_t i = 0; i < 12; ++i) {
    stacked[i] = a[i];
    stacked[12 + i] = b[i];
  }
  const NdArray out = block(ad::Var::constant(stacked)).value();
  const NdArray oa = block(ad::Var::constant(a)).value();
  const NdArray ob = block(ad::Var::constant(b)).value();
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(out[i] == doctest::Approx(oa[i]).epsilon(1e-12));
    CHECK(out[12 + i] == doctest::Approx(ob[i]).epsilon(1e-12));
  }
}

TEST_CASE("causal transformer block: identity, causality and hand value") {
  ad::PrecisionGuard pg(Precision::F64);
  Rng rng(8);
  ParamStore store;
  nn::CausalTransformerBlock block(store, "tb", 4, 8, 2, rng);
  const NdArray tok = random_matrix(rng, 5, 4);

  const NdArray base = block(ad::Var::constant(tok)).value();
  for (std::size_t j = 0; j < 5; ++j) {
    NdArray pert = tok;
    for (std::size_t c = 0; c < 4; ++c) pert(j, c) -= 1.3;
    const NdArray out = block(ad::Var::constant(pert)).value();
    for (std::size_t i = 0; i < j; ++i)
      for (std::size_t c = 0; c < 4; ++c) CHECK(out(i, c) == base(i, c));
  }

  testing::zero_params(store);
  CHECK(bit_equal(block(ad::Var::constant(tok)).value(), tok));

  // C = 2, one head, identity q/k/v/o, hand feed-forward; see tests/oracles/hand_cases.py.
  ParamStore hs;
  nn::CausalTransformerBlock hand(hs, "tb", 2, 2, 1, rng);
  testing::zero_params(hs);
  const NdArray eye = NdArray::from_rows({{1, 0}, {0, 1}});
  for (const char* p : {"q", "k", "v", "o"}) set_param(hs, std::string("tb.attn.") + p + ".weight", eye);
  set_param(hs, "tb.ff_in.weight", NdArray::from_rows({{0.2, -0.1}, {0.3, 0.4}}));
  set_param(hs, "tb.ff_in.bias", NdArray::from_rows({{0.0, 0.1}}));
  set_param(hs, "tb.ff_out.weight", NdArray::from_rows({{1.0, 0.0}, {-0.5, 0.5}}));
  const NdArray out = hand(ad::Var::constant(NdArray::from_rows({{1.0, 0.0}, {0.5, 2.0}}))).value();
  CHECK(out(0, 0) == doctest::Approx(2.26216869664413).epsilon(1e-12));
  CHECK(out(0, 1) == doctest::Approx(0.1342283733998596).epsilon(1e-12));
  CHECK(out(1, 0) == doctest::Approx(0.9557162903843467).epsilon(1e-12));
  CHECK(out(1, 1) == doctest::Approx(4.860800868601334).epsilon(1e-12));
}

TEST_CASE("series embedding: identity, equivariance, hand value, length check") {
  ad::PrecisionGuard pg(Precision::F64);
  Rng rng(12);
  ParamStore store;
  nn::SeriesEmbedding emb(store, "emb", 3, 3, rng);
  set_param(store, "emb.weight", NdArray::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
  set_param(store, "emb.bias", NdArray::matrix(1, 3));
  const NdArray x = NdArray::from_rows({{1, 2, 4}, {-1, 0.5, 3}});
  CHECK(bit_equal(emb(ad::Var::constant(x)).value(), x));

  ParamStore rs;
  nn::SeriesEmbedding remb(rs, "emb", 3, 5, rng);
  const NdArray fwd = remb(ad::Var::constant(x)).value();
  const NdArray swapped = remb(ad::Var::constant(NdArray::from_rows({{-1, 0.5, 3}, {1, 2, 4}}))).value();
  for (std::size_t e = 0; e < 5; ++e) {
    CHECK(swapped(0, e) == fwd(1, e));
    CHECK(swapped(1, e) == fwd(0, e));
  }

  ParamStore hs;
  nn::SeriesEmbedding hand(hs, "emb", 3, 2, rng);
  set_param(hs, "emb.weight", NdArray::from_rows({{1.0, 0.0, -1.0}, {0.5, 0.5, 0.5}}));
  set_param(hs, "emb.bias", NdArray::from_rows({{0.1, -0.2}}));
  const NdArray tok = hand(ad::Var::constant(NdArray::from_rows({{1.0, 2.0, 4.0}}))).value();
  CHECK(tok(0, 0) == doctest::Approx(-2.9).epsilon(1e-12));
  CHECK(tok(0, 1) == doctest::Approx(3.3).epsilon(1e-12));

  CHECK_THROWS_AS(hand(ad::Var::constant(NdArray::matrix(1, 4))), ShapeError);
}

TEST_CASE("linear init ranges") {
  ParamStore store;
  Rng rng(1);
  nn::Linear lin(store, "l", 16, 8, rng);
  const double bound = std::sqrt(1.0 / 16.0);
  for (double w : lin.weight().value().data()) CHECK(std::abs(w) <= bound);
  for (double b : lin.bias().value().data()) CHECK(b == 0.0);
  nn::Linear z(store, "z", 4, 4, rng, nn::Init::Zero);
  for (double w : z.weight().value().data()) CHECK(w == 0.0);
}

TEST_CASE("param store: unique names, order, snapshot/restore") {
  ParamStore s;
  s.add("a", NdArray::matrix(2, 2, 1.0));
  s.add("b", NdArray::matrix(1, 3, 2.0));
  CHECK_THROWS_AS(s.add("a", NdArray::matrix(1, 1)), Error);
  CHECK(s.entries()[0].first == "a");
  CHECK(s.entries()[1].first == "b");
  CHECK(s.scalar_count() == 7);
  auto snap = s.snapshot();
  ad::Var a = s.get("a");
  a.mutable_value()(0, 0) = 9.0;
  s.restore(snap);
  CHECK(s.get("a").value()(0, 0) == 1.0);
  CHECK_THROWS(s.get("missing"));
}

TEST_CASE("adam: fixed point, hand step, descent, errors") {
  ParamStore s;
  s.add("p", NdArray::from_rows({{0.0}}));
  AdamState st = AdamState::zeros_like(s);
  AdamConfig cfg;
  cfg.lr = 0.1;

  adam_step(s, {NdArray::from_rows({{0.0}})}, st, cfg);
  CHECK(s.get("p").item() == 0.0);
  CHECK(st.t == 1);

  ParamStore s2;
  s2.add("p", NdArray::from_rows({{0.0}}));
  AdamState st2 = AdamState::zeros_like(s2);
  adam_step(s2, {NdArray::from_rows({{1.0}})}, st2, cfg);
  // m_hat = 1, v_hat = 1: p = -lr / (1 + eps)
  CHECK(s2.get("p").item() == doctest::Approx(-0.1 / (1.0 + 1e-8)).epsilon(1e-12));

  // Convex quadratic f(p) = (p - 3)^2 decreases over two steps.
  ParamStore q;
  q.add("p", NdArray::from_rows({{0.0}}));
  AdamState qs = AdamState::zeros_like(q);
  auto f = [&] { return std::pow(q.get("p").item() - 3.0, 2); };
  const double f0 = f();
  for (int i = 0; i < 2; ++i) adam_step(q, {NdArray::from_rows({{2.0 * (q.get("p").item() - 3.0)}})}, qs, cfg);
  CHECK(f() < f0);

  CHECK_THROWS_AS(adam_step(q, {NdArray::matrix(1, 2)}, qs, cfg), ShapeError);
  try {
    adam_step(q, {NdArray::from_rows({{std::nan("")}})}, qs, cfg);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("p") != std::string::npos);
  }
}

TEST_CASE("grad_check: quadratic, constant, and a wrong gradient is caught") {
  ParamStore s;
  Rng rng(2);
  ad::Var p = s.add("p", random_matrix(rng, 3, 2));
  auto quad = grad_check([&] { return ad::scale(ad::sum(ad::square(p)), 0.5); }, s);
  CHECK(quad.max_rel_error <= 1e-8);
  CHECK(quad.coords_checked == 6);

  auto constant = grad_check([&] { return ad::Var::constant(NdArray({1, 1}, 4.0)); }, s);
  CHECK(constant.max_rel_error == 0.0);

  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(0.0, 0.0) == 0.0);
  CHECK(relative_error(2.0, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a = Rng::stream(7, "init");
  Rng b = Rng::stream(7, "init");
  Rng c = Rng::stream(7, "noise");
  const auto x = a.next();
  CHECK(x == b.next());
  CHECK(x != c.next());
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 5) == derive_seed(1, 5));
}

}  // TEST_SUITE
