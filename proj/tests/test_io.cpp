#include <cmath>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "sigdiag/checkpoint.hpp"
#include "sigdiag/common.hpp"
#include "sigdiag/io_util.hpp"
#include "sigdiag/rng.hpp"

using namespace sigdiag;

namespace {

FoldModel sample_model(std::uint64_t seed) {
  FoldModel model;
  model.fold_index = 3;
  model.ablation.no_gender = true;

  const std::size_t dim = 12;
  Rng rng(seed);
  model.thresholds.medians.resize(dim);
  for (double& m : model.thresholds.medians) {
    m = rng.uniform(-5.0, 5.0);
  }

  model.has_stack = true;
  model.stack.net.layers.emplace_back(dim, 6, Activation::Relu);
  model.stack.net.layers.emplace_back(6, 3, Activation::Relu);
  model.stack.net.layers.emplace_back(3, 6, Activation::Relu);
  model.stack.net.layers.emplace_back(6, dim, Activation::Sigmoid);
  xavier_init(model.stack.net, rng);
  // Bias values with awkward decimal expansions must survive the trip.
  model.stack.net.layers[0].biases[0] = 0.1 + 0.2;
  model.stack.net.layers[1].biases[1] = -1.0 / 3.0;
  model.stack.stage = StackStage::Trained;

  model.head.fc1 = DenseLayer(3, 4, Activation::Identity);
  model.head.cls_head = DenseLayer(4, 1, Activation::Sigmoid);
  xavier_init(model.head.fc1, rng);
  xavier_init(model.head.cls_head, rng);
  return model;
}

Vector model_params(const FoldModel& m) {
  Vector out = m.thresholds.medians;
  out.insert(out.end(), m.norm_min.begin(), m.norm_min.end());
  out.insert(out.end(), m.norm_range.begin(), m.norm_range.end());
  if (m.has_stack) {
    const Vector s = testsupport::flatten_params(m.stack.net);
    out.insert(out.end(), s.begin(), s.end());
  }
  for (const DenseLayer* layer : {&m.head.fc1, &m.head.cls_head}) {
    out.insert(out.end(), layer->weights.data.begin(), layer->weights.data.end());
    out.insert(out.end(), layer->biases.begin(), layer->biases.end());
  }
  return out;
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  const std::vector<double> values = {
      0.0,
      1.0,
      -1.0,
      0.1,
      1.0 / 3.0,
      0.1 + 0.2,
      6.02214076e23,
      -2.2250738585072014e-308,  // smallest normal
      1.7976931348623157e308,    // largest finite
      5e-324,                    // smallest denormal
      123456789.123456789,
  };
  for (double v : values) {
    const std::string s = format_double(v);
    CHECK(parse_double(s, "test") == v);
  }
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    const double v = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.below(80)) - 40);
    CHECK(parse_double(format_double(v), "test") == v);
  }
}

TEST_CASE("parse_double is strict") {
  CHECK(parse_double("2.5", "t") == 2.5);
  CHECK(parse_double("-0.125e2", "t") == -12.5);
  CHECK_THROWS_AS(parse_double("", "t"), IoError);
  CHECK_THROWS_AS(parse_double("abc", "t"), IoError);
  CHECK_THROWS_AS(parse_double("1.5x", "t"), IoError);  // trailing junk
  CHECK_THROWS_AS(parse_double(" 1.5", "t"), IoError);  // leading space
  CHECK_THROWS_AS(parse_double("nan", "t"), IoError);   // non-finite rejected
  CHECK_THROWS_AS(parse_double("inf", "t"), IoError);
  try {
    parse_double("zzz", "file.csv:7: column 'area'");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("file.csv:7: column 'area'") != std::string::npos);
  }
}

TEST_CASE("write_file_atomic replaces content and leaves no temp files") {
  testsupport::TmpDir dir;
  const std::string path = dir.file("data.txt");
  write_file_atomic(path, "first");
  CHECK(read_file(path) == "first");
  write_file_atomic(path, "second version");
  CHECK(read_file(path) == "second version");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) {
    ++entries;
  }
  CHECK(entries == 1);
  CHECK_THROWS_AS(read_file(dir.file("missing.txt")), IoError);
  CHECK_THROWS_AS(write_file_atomic(dir.file("no/such/dir/file.txt"), "x"), IoError);
}

TEST_CASE("fold model JSON round-trips bit-identically") {
  const FoldModel model = sample_model(7);
  const std::string text = fold_model_json(model);
  const FoldModel back = fold_model_from_json(text);

  CHECK(back.fold_index == model.fold_index);
  CHECK(back.ablation.no_gender == model.ablation.no_gender);
  CHECK(back.ablation.no_ae == model.ablation.no_ae);
  CHECK(back.has_stack);
  CHECK(back.stack.stage == StackStage::Trained);
  REQUIRE(back.stack.net.layers.size() == 4);
  CHECK(back.stack.net.layers[0].activation == Activation::Relu);
  CHECK(back.stack.net.layers[3].activation == Activation::Sigmoid);
  CHECK(back.head.fc1.activation == Activation::Identity);
  CHECK(model_params(back) == model_params(model));  // bitwise

  // Serialization is deterministic, so round-tripping is a fixed point.
  CHECK(fold_model_json(back) == text);
}

TEST_CASE("fold model save/load through files") {
  testsupport::TmpDir dir;
  const FoldModel model = sample_model(11);
  const std::string path = dir.file("fold_03.model.json");
  save_fold_model(path, model);
  const FoldModel back = load_fold_model(path);
  CHECK(model_params(back) == model_params(model));
  CHECK_THROWS_AS(load_fold_model(dir.file("absent.json")), IoError);
}

TEST_CASE("fold model without a stack omits it") {
  FoldModel model;
  model.fold_index = 0;
  model.ablation.no_ae = true;
  model.has_stack = false;
  model.thresholds.medians = {0.5, 1.5};
  model.head.fc1 = DenseLayer(2, 2, Activation::Identity);
  model.head.cls_head = DenseLayer(2, 1, Activation::Sigmoid);
  Rng rng(3);
  xavier_init(model.head.fc1, rng);
  xavier_init(model.head.cls_head, rng);

  const std::string text = fold_model_json(model);
  const FoldModel back = fold_model_from_json(text);
  CHECK_FALSE(back.has_stack);
  CHECK(back.ablation.no_ae);
  CHECK(model_params(back) == model_params(model));
}

TEST_CASE("fold model parsing rejects damage") {
  const FoldModel model = sample_model(13);
  const std::string text = fold_model_json(model);

  SUBCASE("malformed JSON") {
    CHECK_THROWS_AS(fold_model_from_json(text.substr(0, text.size() / 2)), IoError);
    CHECK_THROWS_AS(fold_model_from_json("not json at all"), IoError);
  }
  SUBCASE("unknown schema") {
    std::string bad = text;
    const auto at = bad.find("sigdiag.fold_model");
    REQUIRE(at != std::string::npos);
    bad.replace(at, 18, "sigdiag.other_doc!");
    CHECK_THROWS_AS(fold_model_from_json(bad), SchemaError);
  }
  SUBCASE("unsupported version") {
    nlohmann::json doc = nlohmann::json::parse(text);
    doc["format_version"] = 9;
    CHECK_THROWS_AS(fold_model_from_json(doc.dump()), SchemaError);
  }
  SUBCASE("missing field") {
    nlohmann::json doc = nlohmann::json::parse(text);
    doc.erase("head");
    CHECK_THROWS_AS(fold_model_from_json(doc.dump()), SchemaError);
  }
  SUBCASE("inconsistent layer shape") {
    // Truncate one weight row: row arrays must all match the layer width.
    nlohmann::json doc = nlohmann::json::parse(text);
    auto& row = doc["stack"]["layers"][0]["weights"][0];
    REQUIRE(row.is_array());
    row.erase(row.size() - 1);
    CHECK_THROWS_AS(fold_model_from_json(doc.dump()), SchemaError);
  }
  SUBCASE("wrong value type") {
    nlohmann::json doc = nlohmann::json::parse(text);
    doc["fold_index"] = "three";
    CHECK_THROWS_AS(fold_model_from_json(doc.dump()), SchemaError);
  }
}
