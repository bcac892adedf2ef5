#include <cmath>
#include <cstddef>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "sigdiag/common.hpp"
#include "sigdiag/rng.hpp"
#include "sigdiag/siamese.hpp"

using namespace sigdiag;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Head with documented parameters used by the hand-computed fixtures:
//   fc1 (identity, 2 -> 2):  W = [[1, 0], [0, -1]], b = (0, 0.5)
//   cls_head (sigmoid, 2 -> 1): W = [[0.5, -0.25]], b = (0.125)
SiameseHead fixture_head() {
  SiameseHead head;
  head.fc1 = DenseLayer(2, 2, Activation::Identity);
  head.fc1.weights(0, 0) = 1.0;
  head.fc1.weights(0, 1) = 0.0;
  head.fc1.weights(1, 0) = 0.0;
  head.fc1.weights(1, 1) = -1.0;
  head.fc1.biases = {0.0, 0.5};
  head.cls_head = DenseLayer(2, 1, Activation::Sigmoid);
  head.cls_head.weights(0, 0) = 0.5;
  head.cls_head.weights(0, 1) = -0.25;
  head.cls_head.biases = {0.125};
  return head;
}

}  // namespace

TEST_CASE("cosine similarity: documented value") {
  // (1,2,3,4) . (4,3,2,1) = 20, norms sqrt(30) each -> 20/30.
  const Vector a{1, 2, 3, 4};
  const Vector b{4, 3, 2, 1};
  CHECK(cosine_similarity(a, b) == doctest::Approx(20.0 / 30.0).epsilon(1e-12));
}

TEST_CASE("cosine similarity: properties") {
  Rng rng(3);
  for (int it = 0; it < 50; ++it) {
    Vector a(5);
    Vector b(5);
    for (std::size_t k = 0; k < 5; ++k) {
      a[k] = rng.uniform(-2.0, 2.0);
      b[k] = rng.uniform(-2.0, 2.0);
    }
    const double c = cosine_similarity(a, b);
    CHECK(std::abs(c) <= 1.0 + 1e-12);
    CHECK(cosine_similarity(b, a) == doctest::Approx(c).epsilon(1e-12));  // symmetry
    Vector a3 = a;
    for (double& v : a3) {
      v *= 3.0;
    }
    CHECK(cosine_similarity(a3, b) == doctest::Approx(c).epsilon(1e-10));  // scale invariance
  }
  CHECK(cosine_similarity(Vector{1, 1}, Vector{1, 1}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine_similarity(Vector{1, 0}, Vector{-1, 0}) ==
        doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(cosine_similarity(Vector{0, 0}, Vector{1, 2}) == 0.0);  // zero-norm convention
  CHECK_THROWS_AS(cosine_similarity(Vector{1, 2}, Vector{1, 2, 3}), SchemaError);
}

TEST_CASE("verification_forward: hand-computed fixture") {
  const SiameseHead head = fixture_head();
  // c_i = (2, 1):  v_i = (2, 0.5 - 1)   = (2, -0.5)
  // c_j = (1, -1): v_j = (1, 0.5 + 1)   = (1, 1.5)
  // cos = (2*1 - 0.5*1.5) / (sqrt(4.25) * sqrt(3.25)) = 1.25 / sqrt(13.8125)
  // prob_i = sigmoid(0.5*2 - 0.25*(-0.5) + 0.125) = sigmoid(1.25)
  // prob_j = sigmoid(0.5*1 - 0.25*1.5 + 0.125)    = sigmoid(0.25)
  const VerificationOutputs out = verification_forward(head, Vector{2, 1}, Vector{1, -1});
  REQUIRE(out.v_i.size() == 2);
  CHECK(out.v_i[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(out.v_i[1] == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(out.v_j[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(out.v_j[1] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(out.pair_similarity ==
        doctest::Approx(1.25 / std::sqrt(4.25 * 3.25)).epsilon(1e-12));
  CHECK(out.prob_i == doctest::Approx(sigmoid(1.25)).epsilon(1e-12));
  CHECK(out.prob_j == doctest::Approx(sigmoid(0.25)).epsilon(1e-12));
}

TEST_CASE("verification_forward: identical codes give similarity 1, swap exchanges branches") {
  const SiameseHead head = fixture_head();
  const VerificationOutputs same = verification_forward(head, Vector{2, 1}, Vector{2, 1});
  CHECK(same.pair_similarity == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(same.prob_i == doctest::Approx(same.prob_j).epsilon(1e-15));

  const VerificationOutputs ab = verification_forward(head, Vector{2, 1}, Vector{1, -1});
  const VerificationOutputs ba = verification_forward(head, Vector{1, -1}, Vector{2, 1});
  CHECK(ab.pair_similarity == doctest::Approx(ba.pair_similarity).epsilon(1e-15));
  CHECK(ab.prob_i == doctest::Approx(ba.prob_j).epsilon(1e-15));
  CHECK(ab.prob_j == doctest::Approx(ba.prob_i).epsilon(1e-15));
}

TEST_CASE("multitask loss: documented verification-branch value") {
  // Different-label pair (y = 0) whose mapped similarity is p = 0.8 at
  // alpha = 1, gamma = 2: the verification term is
  //   -(0.8)^2 * log(1 - 0.8) ~= 1.0301,
  // penalizing a confidently-similar embedding of a mismatched pair.
  VerificationOutputs out;
  out.pair_similarity = 0.6;  // p = (0.6 + 1)/2 = 0.8
  out.prob_i = 0.5;           // CE = log 2 each
  out.prob_j = 0.5;
  LossWeights w;  // alpha 1, gamma 2
  const double loss_diff = multitask_loss(out, /*same_label=*/false, 1, 0, w);
  const double expected_ver = -(0.8 * 0.8) * std::log(0.2);
  CHECK(expected_ver == doctest::Approx(1.0301).epsilon(1e-3));  // anchor the constant
  CHECK(loss_diff ==
        doctest::Approx(expected_ver + 2.0 * std::log(2.0)).epsilon(1e-10));

  // Same pair with matching labels: focal term at p = 0.8, y = 1.
  const double loss_same = multitask_loss(out, /*same_label=*/true, 1, 1, w);
  const double expected_same = -(0.2 * 0.2) * std::log(0.8);
  CHECK(loss_same ==
        doctest::Approx(expected_same + 2.0 * std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("multitask loss: gamma zero degenerates to cross-entropy on the mapped similarity") {
  VerificationOutputs out;
  out.pair_similarity = 0.6;
  out.prob_i = 0.7;
  out.prob_j = 0.3;
  LossWeights w;
  w.gamma = 0.0;
  const double loss = multitask_loss(out, true, 1, 0, w);
  const double expected = cross_entropy_loss(0.8, 1) + cross_entropy_loss(0.7, 1) +
                          cross_entropy_loss(0.3, 0);
  CHECK(loss == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("multitask loss is non-negative across the input range") {
  LossWeights w;
  for (double cos : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    for (double pi : {0.01, 0.5, 0.99}) {
      for (double pj : {0.01, 0.5, 0.99}) {
        for (bool same : {false, true}) {
          VerificationOutputs out;
          out.pair_similarity = cos;
          out.prob_i = pi;
          out.prob_j = pj;
          CHECK(multitask_loss(out, same, 1, same ? 1 : 0, w) >= 0.0);
        }
      }
    }
  }
}

TEST_CASE("train_siamese learns a separable embedding") {
  // Codes already carry the class signal: class 1 near (1,1,0), class 0 near
  // (0,0,1). The head only needs a linear map.
  Rng rng(19);
  std::vector<Vector> subjects;
  std::vector<Label> labels;
  for (int i = 0; i < 24; ++i) {
    const bool asd = i < 12;
    Vector c(3);
    c[0] = (asd ? 1.0 : 0.0) + 0.05 * rng.normal();
    c[1] = (asd ? 1.0 : 0.0) + 0.05 * rng.normal();
    c[2] = (asd ? 0.0 : 1.0) + 0.05 * rng.normal();
    subjects.push_back(c);
    labels.push_back(asd ? Label::Asd : Label::Nc);
  }
  const auto pairs = make_pairs(labels);
  SiameseConfig cfg;
  cfg.sim_dim = 4;
  cfg.epochs = 60;
  cfg.batch_pairs = 64;
  cfg.optimizer.learning_rate = 5e-3;
  cfg.seed = 23;
  SiameseStats stats;
  const SiameseHead head = train_siamese(nullptr, subjects, labels, pairs, cfg, &stats);

  REQUIRE(stats.epoch_loss.size() == 60);
  CHECK(stats.epoch_loss.back() < stats.epoch_loss.front());
  CHECK(stats.train_verification_accuracy >= 0.95);

  // Same-class pairs end up more similar than cross-class pairs.
  const VerificationOutputs same =
      verification_forward(head, subjects[0], subjects[1]);
  const VerificationOutputs diff =
      verification_forward(head, subjects[0], subjects[23]);
  CHECK(same.pair_similarity > diff.pair_similarity);
  // And the classification branch separates the classes.
  CHECK(verification_forward(head, subjects[2], subjects[3]).prob_i > 0.5);
  CHECK(verification_forward(head, subjects[20], subjects[21]).prob_i < 0.5);
}

TEST_CASE("train_siamese is deterministic in the seed and leaves the stack untouched") {
  Rng rng(29);
  std::vector<Vector> subjects;
  std::vector<Label> labels;
  for (int i = 0; i < 12; ++i) {
    Vector v(16);
    for (double& x : v) {
      x = rng.uniform() < 0.5 ? 0.0 : 1.0;
    }
    subjects.push_back(v);
    labels.push_back(i < 6 ? Label::Asd : Label::Nc);
  }
  const auto pairs = make_pairs(labels);

  AutoencoderConfig acfg;
  acfg.hidden_dim = 10;
  acfg.code_dim = 5;
  acfg.outer_epochs = 2;
  acfg.inner_epochs = 2;
  acfg.batch_pairs = 16;
  acfg.seed = 31;
  const AutoencoderStack stack = train_hierarchical(subjects, pairs, acfg);
  const Vector stack_before = testsupport::flatten_params(stack.net);

  SiameseConfig cfg;
  cfg.sim_dim = 4;
  cfg.epochs = 5;
  cfg.batch_pairs = 16;
  cfg.seed = 37;
  const SiameseHead a = train_siamese(&stack, subjects, labels, pairs, cfg);
  const SiameseHead b = train_siamese(&stack, subjects, labels, pairs, cfg);
  CHECK(a.fc1.weights.data == b.fc1.weights.data);
  CHECK(a.fc1.biases == b.fc1.biases);
  CHECK(a.cls_head.weights.data == b.cls_head.weights.data);
  CHECK(a.cls_head.biases == b.cls_head.biases);

  SiameseConfig other = cfg;
  other.seed = 38;
  const SiameseHead c = train_siamese(&stack, subjects, labels, pairs, other);
  CHECK(a.fc1.weights.data != c.fc1.weights.data);

  // The compressor is an input, never a trainee.
  CHECK(testsupport::flatten_params(stack.net) == stack_before);

  // Head shapes follow the configuration: fc1 maps code -> sim_dim.
  CHECK(a.fc1.in_dim() == 5);
  CHECK(a.fc1.out_dim() == 4);
  CHECK(a.cls_head.in_dim() == 4);
  CHECK(a.cls_head.out_dim() == 1);
}

TEST_CASE("train_siamese validates its inputs") {
  std::vector<Vector> subjects = {{0, 1}, {1, 0}, {1, 1}};
  std::vector<Label> labels = {Label::Asd, Label::Nc, Label::Nc};
  const auto pairs = make_pairs(labels);
  SiameseConfig cfg;

  SUBCASE("label count mismatch") {
    std::vector<Label> short_labels = {Label::Asd, Label::Nc};
    CHECK_THROWS_AS(train_siamese(nullptr, subjects, short_labels, pairs, cfg),
                    SchemaError);
  }
  SUBCASE("no pairs") {
    CHECK_THROWS_AS(
        train_siamese(nullptr, subjects, labels, std::vector<TrainingPair>{}, cfg),
        InsufficientDataError);
  }
  SUBCASE("zero sim_dim") {
    cfg.sim_dim = 0;
    CHECK_THROWS_AS(train_siamese(nullptr, subjects, labels, pairs, cfg), ConfigError);
  }
}
