#include "doctest.h"

#include <cmath>
#include <sstream>

#include "rulfdia/errors.hpp"
#include "rulfdia/nn/layers.hpp"
#include "rulfdia/nn/model.hpp"
#include "rulfdia/nn/optimizer.hpp"
#include "rulfdia/nn/serialize.hpp"

using namespace rulfdia;
using namespace rulfdia::nn;

// Reference values from a 30-digit evaluation (mpmath):
//   sigmoid(1)           = 0.731058578630004879
//   tanh(1)              = 0.761594155955764888
//   sigmoid(1) * tanh(1) = 0.556769941145939744
//   0.5 * tanh(0.5)      = 0.231058578630004879
constexpr double kSigmoid1 = 0.731058578630004879;
constexpr double kTanh1 = 0.761594155955764888;
constexpr double kGruScalar = 0.556769941145939744;
constexpr double kLstmScalar = 0.231058578630004879;

TEST_CASE("activations") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(tanh_act(0.0) == 0.0);
  CHECK(sigmoid(1.0) == doctest::Approx(kSigmoid1).epsilon(1e-15));
  CHECK(relu(-3.0) == 0.0);
  CHECK(relu(2.5) == 2.5);
  for (double x : {-1e3, -700.0, 700.0, 1e3}) {
    CHECK(std::isfinite(sigmoid(x)));
    CHECK(sigmoid(x) >= 0.0);
    CHECK(sigmoid(x) <= 1.0);
    CHECK(std::abs(tanh_act(x)) <= 1.0);
  }
  CHECK(sigmoid(-1e3) == 0.0);
  CHECK(sigmoid(1e3) == 1.0);
}

TEST_CASE("gru_cell") {
  SUBCASE("all zero") {
    auto p = GruLayerParams::zeros(3, 2);
    auto s = gru_step(p, std::vector<double>{0.7, -1.2}, std::vector<double>(3, 0.0));
    for (int k = 0; k < 3; ++k) {
      CHECK(s.z[k] == 0.5);
      CHECK(s.r[k] == 0.5);
      CHECK(s.candidate[k] == 0.0);
      CHECK(s.h[k] == 0.0);
    }
  }
  SUBCASE("closed update gate keeps the state") {
    auto p = GruLayerParams::zeros(2, 1);
    p.w_h.fill(0.3);
    p.b_z.fill(-1e9);
    std::vector<double> h_prev{0.25, -0.8};
    auto h = gru_cell(p, std::vector<double>{2.0}, h_prev);
    CHECK(h[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(h[1] == doctest::Approx(-0.8).epsilon(1e-12));
  }
  SUBCASE("scalar hand computation") {
    auto p = GruLayerParams::zeros(1, 1);
    p.w_z.fill(1.0);
    p.w_r.fill(1.0);
    p.w_h.fill(1.0);
    auto s = gru_step(p, std::vector<double>{1.0}, std::vector<double>{0.0});
    CHECK(s.z[0] == doctest::Approx(kSigmoid1).epsilon(1e-12));
    CHECK(s.r[0] == doctest::Approx(kSigmoid1).epsilon(1e-12));
    CHECK(s.candidate[0] == doctest::Approx(kTanh1).epsilon(1e-12));
    CHECK(std::abs(s.h[0] - kGruScalar) < 1e-5);
  }
  SUBCASE("shape mismatch") {
    auto p = GruLayerParams::zeros(2, 3);
    CHECK_THROWS_AS(gru_cell(p, std::vector<double>{1.0}, std::vector<double>(2, 0.0)), ShapeError);
    CHECK_THROWS_AS(gru_cell(p, std::vector<double>(3, 0.0), std::vector<double>(1, 0.0)),
                    ShapeError);
  }
}

TEST_CASE("lstm_cell") {
  SUBCASE("saturated forget/input gates keep the cell") {
    auto p = LstmLayerParams::zeros(2, 1);
    p.w_c.fill(0.9);
    p.b_f.fill(1e9);
    p.b_i.fill(-1e9);
    auto [h, c] = lstm_cell(p, std::vector<double>{1.5}, std::vector<double>{0.1, 0.2},
                            std::vector<double>{0.4, -2.0});
    CHECK(c[0] == 0.4);
    CHECK(c[1] == -2.0);
  }
  SUBCASE("zero weights with c_prev = 1") {
    auto p = LstmLayerParams::zeros(1, 1);
    auto s = lstm_step(p, std::vector<double>{3.0}, std::vector<double>{0.0},
                       std::vector<double>{1.0});
    CHECK(s.i[0] == 0.5);
    CHECK(s.f[0] == 0.5);
    CHECK(s.o[0] == 0.5);
    CHECK(s.candidate[0] == 0.0);
    CHECK(s.c[0] == 0.5);
    CHECK(std::abs(s.h[0] - kLstmScalar) < 1e-5);
  }
  SUBCASE("all zero") {
    auto p = LstmLayerParams::zeros(2, 2);
    auto [h, c] = lstm_cell(p, std::vector<double>(2, 0.0), std::vector<double>(2, 0.0),
                            std::vector<double>(2, 0.0));
    CHECK(h == std::vector<double>(2, 0.0));
    CHECK(c == std::vector<double>(2, 0.0));
  }
}

TEST_CASE("property: gate ranges and GRU contraction") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t q = 1 + rng.below(6), in = 1 + rng.below(5);
    auto gp = GruLayerParams::zeros(q, in);
    auto lp = LstmLayerParams::zeros(q, in);
    for (auto* m : {&gp.w_z, &gp.w_r, &gp.w_h, &gp.b_z, &gp.b_r, &gp.b_h})
      for (auto& v : m->values()) v = rng.uniform(-3, 3);
    for (auto* m : {&lp.w_i, &lp.w_f, &lp.w_o, &lp.w_c, &lp.b_i, &lp.b_f, &lp.b_o, &lp.b_c})
      for (auto& v : m->values()) v = rng.uniform(-3, 3);
    std::vector<double> x(in), h(q), c(q);
    for (auto& v : x) v = rng.uniform(-2, 2);
    for (auto& v : h) v = rng.uniform(-1, 1);
    for (auto& v : c) v = rng.uniform(-3, 3);

    auto g = gru_step(gp, x, h);
    auto l = lstm_step(lp, x, h, c);
    for (std::size_t k = 0; k < q; ++k) {
      CHECK((g.z[k] > 0 && g.z[k] < 1));
      CHECK((g.r[k] > 0 && g.r[k] < 1));
      CHECK(std::abs(g.candidate[k]) < 1.0);
      CHECK(std::abs(g.h[k]) <= 1.0);
      CHECK((l.i[k] > 0 && l.i[k] < 1));
      CHECK((l.f[k] > 0 && l.f[k] < 1));
      CHECK((l.o[k] > 0 && l.o[k] < 1));
      CHECK(std::abs(l.candidate[k]) < 1.0);
      CHECK(std::abs(l.h[k]) < 1.0);
    }
  }
}

TEST_CASE("conv1d") {
  SUBCASE("identity kernel") {
    auto p = Conv1dLayerParams::zeros(1, 3, 1);
    p.weight(0, 1, 0) = 1.0;
    Matrix seq(6, 1);
    for (std::size_t t = 0; t < 6; ++t) seq(t, 0) = 0.5 + static_cast<double>(t);
    CHECK(conv1d(p, seq) == seq);
  }
  SUBCASE("ones kernel on constant input") {
    auto p = Conv1dLayerParams::zeros(1, 3, 1);
    p.kernels.fill(1.0);
    Matrix seq(5, 1, 1.0);
    auto out = conv1d(p, seq);
    CHECK(out(0, 0) == 2.0);
    CHECK(out(1, 0) == 3.0);
    CHECK(out(2, 0) == 3.0);
    CHECK(out(3, 0) == 3.0);
    CHECK(out(4, 0) == 2.0);
  }
  SUBCASE("negative pre-activation clipped") {
    auto p = Conv1dLayerParams::zeros(1, 3, 1);
    p.kernels.fill(-1.0);
    auto out = conv1d(p, Matrix(4, 1, 1.0));
    for (double v : out.values()) CHECK(v == 0.0);
  }
  SUBCASE("multi-channel shapes and errors") {
    auto p = Conv1dLayerParams::zeros(4, 3, 2);
    CHECK(conv1d(p, Matrix(7, 2)).cols() == 4);
    CHECK_THROWS_AS(conv1d(p, Matrix(7, 3)), ShapeError);
    CHECK_THROWS_AS(conv1d(p, Matrix(2, 2)), ShapeError);
  }
}

TEST_CASE("dropout") {
  Rng rng(1);
  std::vector<double> x(100, 2.0);
  CHECK(dropout(x, 0.0, rng, true) == x);
  CHECK(dropout(x, 0.7, rng, false) == x);

  std::vector<double> big(100000, 1.0);
  Rng seeded(2024);
  auto out = dropout(big, 0.2, seeded, true);
  std::size_t zeros = 0;
  for (double v : out) {
    if (v == 0.0)
      ++zeros;
    else
      CHECK(v == doctest::Approx(1.25));
  }
  const double frac = static_cast<double>(zeros) / static_cast<double>(big.size());
  CHECK(frac == doctest::Approx(0.2).epsilon(0.1));  // 0.2 +- 0.02
}

namespace {

ModelSpec small_spec(ModelKind kind, std::vector<std::size_t> widths = {4, 3}) {
  ModelSpec s;
  s.kind = kind;
  s.layer_widths = std::move(widths);
  s.seq_len = 6;
  s.input_dim = 3;
  s.dropout_rate = 0.2;
  s.dense_width = 5;
  return s;
}

}  // namespace

TEST_CASE("forward: zero weights give the dense bias") {
  for (auto kind : {ModelKind::Gru, ModelKind::Lstm, ModelKind::Cnn}) {
    auto p = ModelParams::zeros(small_spec(kind));
    p.dense.back().b(0, 0) = 42.0;
    Matrix window(6, 3, 0.3);
    CHECK(forward(p, window, Mode::Infer, nullptr) == 42.0);
    CHECK(forward(p, Matrix(6, 3), Mode::Infer, nullptr) == 42.0);
  }
}

TEST_CASE("forward: determinism and shape checks") {
  for (auto kind : {ModelKind::Gru, ModelKind::Lstm, ModelKind::Cnn}) {
    Rng a(9), b(9);
    auto pa = ModelParams::random_init(small_spec(kind), a);
    auto pb = ModelParams::random_init(small_spec(kind), b);
    CHECK(pa == pb);
    Matrix window(6, 3);
    Rng w(5);
    for (auto& v : window.values()) v = w.uniform();
    CHECK(forward(pa, window, Mode::Infer, nullptr) == forward(pb, window, Mode::Infer, nullptr));
    Rng d1(3), d2(3);
    CHECK(forward(pa, window, Mode::Train, &d1) == forward(pb, window, Mode::Train, &d2));
    CHECK_THROWS_AS(forward(pa, Matrix(5, 3), Mode::Infer, nullptr), ShapeError);
    CHECK_THROWS_AS(forward(pa, window, Mode::Train, nullptr), std::invalid_argument);
  }
}

TEST_CASE("forward: output scale multiplies the head") {
  auto spec = small_spec(ModelKind::Gru);
  spec.output_scale = 130.0;
  auto p = ModelParams::zeros(spec);
  p.dense[0].b(0, 0) = 0.5;
  CHECK(forward(p, Matrix(6, 3), Mode::Infer, nullptr) == 65.0);
}

TEST_CASE("loss_mse and batch mean") {
  CHECK(loss_mse(5, 5) == 0.0);
  CHECK(loss_mse(0, 3) == 9.0);

  auto p = ModelParams::zeros(small_spec(ModelKind::Gru));
  SequenceSample s1{1, 6, Matrix(6, 3), 1.0}, s2{1, 7, Matrix(6, 3), 2.0};
  std::vector<const SequenceSample*> batch{&s1, &s2};
  ModelParams grads;
  CHECK(batch_gradients(p, batch, Mode::Infer, nullptr, grads) == 2.5);
  // d/db of mean (b - t)^2 at b = 0: mean of 2 * (0 - t) = -3.
  CHECK(grads.dense[0].b(0, 0) == doctest::Approx(-3.0));
}

TEST_CASE("backward: zero-loss batch has zero head-bias gradient") {
  Rng rng(4);
  auto p = ModelParams::random_init(small_spec(ModelKind::Lstm), rng);
  Matrix window(6, 3, 0.25);
  const double pred = forward(p, window, Mode::Infer, nullptr);
  SequenceSample s{1, 6, window, pred};
  std::vector<const SequenceSample*> batch{&s};
  ModelParams grads;
  CHECK(batch_gradients(p, batch, Mode::Infer, nullptr, grads) == 0.0);
  CHECK(grads.dense[0].b(0, 0) == 0.0);
}

TEST_CASE("backward: head-bias gradient is mean of 2(pred - target)") {
  Rng rng(6);
  for (auto kind : {ModelKind::Gru, ModelKind::Lstm, ModelKind::Cnn}) {
    auto p = ModelParams::random_init(small_spec(kind), rng);
    std::vector<SequenceSample> samples;
    for (int i = 0; i < 4; ++i) {
      Matrix w(6, 3);
      for (auto& v : w.values()) v = rng.uniform();
      samples.push_back({1, 6 + i, w, rng.uniform(0, 3)});
    }
    std::vector<const SequenceSample*> batch;
    double expected = 0.0;
    for (const auto& s : samples) {
      batch.push_back(&s);
      expected += 2.0 * (forward(p, s.window, Mode::Infer, nullptr) - s.target_rul);
    }
    expected /= 4.0;
    ModelParams grads;
    batch_gradients(p, batch, Mode::Infer, nullptr, grads);
    CHECK(grads.dense.back().b(0, 0) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("adam") {
  auto spec = small_spec(ModelKind::Gru, {2});
  Rng rng(1);
  auto params = ModelParams::random_init(spec, rng);

  SUBCASE("zero gradient leaves params unchanged") {
    auto before = params;
    AdamOptimizer adam(params, {});
    adam.step(params, ModelParams::zeros(spec));
    CHECK(params == before);
  }
  SUBCASE("first step moves by about lr against the gradient sign") {
    auto before = params;
    auto grads = ModelParams::zeros(spec);
    grads.gru[0].w_z(0, 0) = 0.37;
    grads.gru[0].w_z(0, 1) = 0.37;
    grads.dense[0].b(0, 0) = -2.0;
    AdamOptimizer adam(params, {});
    adam.step(params, grads);
    const double lr = 1e-3;
    CHECK(params.gru[0].w_z(0, 0) - before.gru[0].w_z(0, 0) ==
          doctest::Approx(-lr * 0.37 / (0.37 + 1e-8)).epsilon(1e-9));
    CHECK(params.dense[0].b(0, 0) - before.dense[0].b(0, 0) ==
          doctest::Approx(lr * 2.0 / (2.0 + 1e-8)).epsilon(1e-9));
    // Equal gradients, equal updates.
    CHECK(params.gru[0].w_z(0, 0) - before.gru[0].w_z(0, 0) ==
          params.gru[0].w_z(0, 1) - before.gru[0].w_z(0, 1));
  }
  SUBCASE("non-finite gradient names the parameter") {
    auto grads = ModelParams::zeros(spec);
    grads.gru[0].b_r(1, 0) = std::nan("");
    AdamOptimizer adam(params, {});
    auto before = params;
    try {
      adam.step(params, grads);
      FAIL("expected domain_error");
    } catch (const std::domain_error& e) {
      CHECK(std::string(e.what()).find("gru0.b_r") != std::string::npos);
    }
    CHECK(params == before);
  }
}

TEST_CASE("weights: save/load round trip and errors") {
  ModelSpec spec;
  spec.kind = ModelKind::Gru;
  spec.layer_widths = {100, 100, 100};
  spec.seq_len = 80;
  spec.input_dim = 17;
  spec.output_scale = 130.0;
  Rng rng(12);
  auto params = ModelParams::random_init(spec, rng);
  std::stringstream buf;
  save_params(buf, params);
  const auto bytes = buf.str();
  std::istringstream in(bytes);
  auto loaded = load_params(in);
  CHECK(loaded == params);
  CHECK(loaded.spec.seq_len == 80);
  CHECK(loaded.spec.label() == "GRU(100,100,100) lh(80)");

  std::stringstream tagged;
  save_params(tagged, params, "seed=3 note");
  std::string meta;
  CHECK(load_params(tagged, &meta) == params);
  CHECK(meta == "seed=3 note");

  std::istringstream truncated(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(load_params(truncated), ParseError);

  auto bad_version = bytes;
  bad_version[8] = 9;
  std::istringstream bv(bad_version);
  CHECK_THROWS_AS(load_params(bv), ParseError);

  for (auto kind : {ModelKind::Lstm, ModelKind::Cnn}) {
    auto p = ModelParams::random_init(small_spec(kind), rng);
    std::stringstream b2;
    save_params(b2, p);
    CHECK(load_params(b2) == p);
  }
}

TEST_CASE("model spec validation and labels") {
  auto s = small_spec(ModelKind::Cnn, {64, 64, 64, 64});
  s.seq_len = 100;
  CHECK(s.label() == "CNN(64,64,64,64) lh(100)");
  s.kernel_len = 4;
  CHECK_THROWS(s.validate());
  auto e = small_spec(ModelKind::Gru, {});
  CHECK_THROWS(e.validate());
  auto d = small_spec(ModelKind::Gru);
  d.dropout_rate = 1.0;
  CHECK_THROWS(d.validate());
}
