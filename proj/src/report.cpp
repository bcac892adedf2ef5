#include "sigdiag/report.hpp"

#include "json.hpp"
#include "sigdiag/version.hpp"

namespace sigdiag {

namespace {

using json = nlohmann::ordered_json;

json metrics_to_json(const MetricsReport& m) {
  return json{{"tp", m.tp},
              {"fp", m.fp},
              {"tn", m.tn},
              {"fn", m.fn},
              {"accuracy", m.accuracy},
              {"sensitivity", m.sensitivity},
              {"specificity", m.specificity},
              {"precision", m.precision},
              {"f1", m.f1},
              {"degenerate",
               json{{"sensitivity", m.sensitivity_degenerate},
                    {"specificity", m.specificity_degenerate},
                    {"precision", m.precision_degenerate},
                    {"f1", m.f1_degenerate}}}};
}

json config_to_json(const RunConfig& c) {
  return json{{"seed", c.seed},
              {"folds", c.folds},
              {"cortical_level", c.cortical_level},
              {"volume_level", c.volume_level},
              {"hidden_dim", c.hidden_dim},
              {"code_dim", c.code_dim},
              {"sim_dim", c.sim_dim},
              {"outer_epochs", c.outer_epochs},
              {"inner_epochs", c.inner_epochs},
              {"siamese_epochs", c.siamese_epochs},
              {"batch_pairs", c.batch_pairs},
              {"patience", c.patience},
              {"focal_alpha", c.focal_alpha},
              {"focal_gamma", c.focal_gamma},
              {"optimizer",
               json{{"rule", to_string(c.optimizer.rule)},
                    {"learning_rate", c.optimizer.learning_rate},
                    {"beta1", c.optimizer.beta1},
                    {"beta2", c.optimizer.beta2},
                    {"epsilon", c.optimizer.epsilon}}},
              {"ablation",
               json{{"no_binarization", c.ablation.no_binarization},
                    {"no_ps", c.ablation.no_ps},
                    {"no_ps_shrink", c.ablation.no_ps_shrink},
                    {"no_ae", c.ablation.no_ae},
                    {"no_weight", c.ablation.no_weight},
                    {"comp_weight", c.ablation.comp_weight},
                    {"no_gender", c.ablation.no_gender}}}};
}

}  // namespace

std::string metrics_json(const CrossValResult& result, const RunConfig& config) {
  json doc;
  doc["format"] = "sigdiag.metrics";
  doc["format_version"] = 1;
  doc["tool_version"] = kVersionString;
  doc["config"] = config_to_json(config);
  doc["pooled"] = metrics_to_json(result.pooled);
  json folds = json::array();
  for (const FoldArtifacts& fold : result.folds) {
    folds.push_back(json{{"fold", fold.fold_index},
                         {"test_size", fold.test_indices.size()},
                         {"metrics", metrics_to_json(fold.metrics)}});
  }
  doc["folds"] = std::move(folds);
  return doc.dump(2) + "\n";
}

}  // namespace sigdiag
