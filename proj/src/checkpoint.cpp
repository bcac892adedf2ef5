#include "sigdiag/checkpoint.hpp"

#include <exception>
#include <utility>

#include "json.hpp"
#include "sigdiag/io_util.hpp"
#include "sigdiag/version.hpp"

namespace sigdiag {

namespace {

using json = nlohmann::ordered_json;

json layer_to_json(const DenseLayer& layer) {
  json rows = json::array();
  for (std::size_t r = 0; r < layer.weights.rows; ++r) {
    const double* row = layer.weights.row(r);
    rows.push_back(json(std::vector<double>(row, row + layer.weights.cols)));
  }
  return json{{"in_dim", layer.in_dim()},
              {"out_dim", layer.out_dim()},
              {"activation", to_string(layer.activation)},
              {"weights", std::move(rows)},
              {"biases", layer.biases}};
}

DenseLayer layer_from_json(const json& j) {
  const std::size_t in = j.at("in_dim").get<std::size_t>();
  const std::size_t out = j.at("out_dim").get<std::size_t>();
  DenseLayer layer(in, out, activation_from_string(j.at("activation").get<std::string>()));
  const json& rows = j.at("weights");
  if (rows.size() != out) {
    throw SchemaError("model layer: expected " + std::to_string(out) + " weight rows, found " +
                      std::to_string(rows.size()));
  }
  for (std::size_t r = 0; r < out; ++r) {
    const auto row = rows[r].get<std::vector<double>>();
    if (row.size() != in) {
      throw SchemaError("model layer: weight row " + std::to_string(r) + " has " +
                        std::to_string(row.size()) + " entries, expected " + std::to_string(in));
    }
    std::copy(row.begin(), row.end(), layer.weights.row(r));
  }
  layer.biases = j.at("biases").get<Vector>();
  if (layer.biases.size() != out) {
    throw SchemaError("model layer: bias length mismatch");
  }
  return layer;
}

json ablation_to_json(const AblationFlags& a) {
  return json{{"no_binarization", a.no_binarization},
              {"no_ps", a.no_ps},
              {"no_ps_shrink", a.no_ps_shrink},
              {"no_ae", a.no_ae},
              {"no_weight", a.no_weight},
              {"comp_weight", a.comp_weight},
              {"no_gender", a.no_gender}};
}

AblationFlags ablation_from_json(const json& j) {
  AblationFlags a;
  a.no_binarization = j.at("no_binarization").get<bool>();
  a.no_ps = j.at("no_ps").get<bool>();
  a.no_ps_shrink = j.at("no_ps_shrink").get<bool>();
  a.no_ae = j.at("no_ae").get<bool>();
  a.no_weight = j.at("no_weight").get<bool>();
  a.comp_weight = j.at("comp_weight").get<bool>();
  a.no_gender = j.at("no_gender").get<bool>();
  return a;
}

}  // namespace

FoldModel fold_model_from_artifacts(const FoldArtifacts& fold, const RunConfig& config) {
  FoldModel model;
  model.fold_index = fold.fold_index;
  model.layout = FeatureLayout{config.cortical_level, config.volume_level};
  model.ablation = config.ablation;
  model.thresholds = fold.thresholds;
  model.norm_min = fold.norm_min;
  model.norm_range = fold.norm_range;
  model.has_stack = fold.has_stack;
  if (fold.has_stack) {
    model.stack = fold.stack;
  }
  model.head = fold.head;
  return model;
}

std::string fold_model_json(const FoldModel& model) {
  json doc;
  doc["format"] = "sigdiag.fold_model";
  doc["format_version"] = 1;
  doc["tool_version"] = kVersionString;
  doc["fold_index"] = model.fold_index;
  doc["layout"] = json{{"cortical_level", model.layout.cortical_level},
                       {"volume_level", model.layout.volume_level}};
  doc["ablation"] = ablation_to_json(model.ablation);
  if (model.ablation.no_binarization) {
    doc["preprocess"] = json{{"mode", "minmax"},
                             {"min", model.norm_min},
                             {"range", model.norm_range}};
  } else {
    doc["preprocess"] =
        json{{"mode", "median_binarize"}, {"thresholds", model.thresholds.medians}};
  }
  if (model.has_stack) {
    json layers = json::array();
    for (const DenseLayer& layer : model.stack.net.layers) {
      layers.push_back(layer_to_json(layer));
    }
    doc["stack"] = json{{"layers", std::move(layers)}};
  } else {
    doc["stack"] = nullptr;
  }
  doc["head"] =
      json{{"fc1", layer_to_json(model.head.fc1)}, {"cls_head", layer_to_json(model.head.cls_head)}};
  return doc.dump(2) + "\n";
}

FoldModel fold_model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const std::exception& e) {
    throw IoError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "sigdiag.fold_model") {
      throw SchemaError("model file: unknown format tag");
    }
    if (doc.at("format_version").get<int>() != 1) {
      throw SchemaError("model file: unsupported format_version");
    }
    FoldModel model;
    model.fold_index = doc.at("fold_index").get<std::size_t>();
    model.layout.cortical_level = doc.at("layout").at("cortical_level").get<std::size_t>();
    model.layout.volume_level = doc.at("layout").at("volume_level").get<std::size_t>();
    model.ablation = ablation_from_json(doc.at("ablation"));
    const json& pre = doc.at("preprocess");
    const auto mode = pre.at("mode").get<std::string>();
    if (mode == "median_binarize") {
      model.thresholds.medians = pre.at("thresholds").get<Vector>();
    } else if (mode == "minmax") {
      model.norm_min = pre.at("min").get<Vector>();
      model.norm_range = pre.at("range").get<Vector>();
    } else {
      throw SchemaError("model file: unknown preprocess mode '" + mode + "'");
    }
    if (!doc.at("stack").is_null()) {
      for (const json& jl : doc.at("stack").at("layers")) {
        model.stack.net.layers.push_back(layer_from_json(jl));
      }
      model.stack.net.validate_chain();
      model.stack.stage = StackStage::Trained;
      model.has_stack = true;
    }
    model.head.fc1 = layer_from_json(doc.at("head").at("fc1"));
    model.head.cls_head = layer_from_json(doc.at("head").at("cls_head"));
    return model;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("model file: ") + e.what());
  }
}

void save_fold_model(const std::string& path, const FoldModel& model) {
  write_file_atomic(path, fold_model_json(model));
}

FoldModel load_fold_model(const std::string& path) {
  return fold_model_from_json(read_file(path));
}

}  // namespace sigdiag
