// sigdiag: synthetic cohorts, featurization, cross-validated training, and
// region-importance reports for the signature-based early-diagnosis pipeline.
//
// Exit codes: 0 ok, 1 usage/config, 2 data (parse, schema, missing file,
// insufficient cohort), 3 runtime.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sigdiag/checkpoint.hpp"
#include "sigdiag/common.hpp"
#include "sigdiag/config.hpp"
#include "sigdiag/features.hpp"
#include "sigdiag/importance.hpp"
#include "sigdiag/inference.hpp"
#include "sigdiag/io_util.hpp"
#include "sigdiag/report.hpp"
#include "sigdiag/version.hpp"

namespace fs = std::filesystem;

namespace {

// -o beats --out-dir beats $SIGDIAG_OUT_DIR beats the working directory.
fs::path out_dir_base(const std::string& dir_flag) {
  if (!dir_flag.empty()) {
    return dir_flag;
  }
  const char* env = std::getenv("SIGDIAG_OUT_DIR");
  if (env != nullptr && *env != '\0') {
    return env;
  }
  return ".";
}

fs::path resolve_output(const std::string& explicit_path, const std::string& dir_flag,
                        const char* default_name) {
  if (!explicit_path.empty()) {
    return explicit_path;
  }
  return out_dir_base(dir_flag) / default_name;
}

void ensure_parent_dir(const fs::path& file) {
  const fs::path parent = file.parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) {
      throw sigdiag::IoError("cannot create directory '" + parent.string() +
                             "': " + ec.message());
    }
  }
}

const std::vector<std::string> kAblationNames = {
    "no_binarization", "no_ps", "no_ps_shrink", "no_ae", "no_weight", "comp_weight",
    "no_gender"};

void apply_ablations(const std::vector<std::string>& names, sigdiag::AblationFlags& flags) {
  for (const std::string& name : names) {
    if (name == "no_binarization") {
      flags.no_binarization = true;
    } else if (name == "no_ps") {
      flags.no_ps = true;
    } else if (name == "no_ps_shrink") {
      flags.no_ps_shrink = true;
    } else if (name == "no_ae") {
      flags.no_ae = true;
    } else if (name == "no_weight") {
      flags.no_weight = true;
    } else if (name == "comp_weight") {
      flags.comp_weight = true;
    } else if (name == "no_gender") {
      flags.no_gender = true;
    } else {
      throw sigdiag::ConfigError("unknown ablation '" + name + "'");
    }
  }
}

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
  sigdiag::SynthConfig config;
  std::string out;
  std::string out_dir;
};

void cmd_synth(const SynthArgs& args) {
  const std::vector<sigdiag::SubjectRecord> cohort =
      sigdiag::generate_synthetic_cohort(args.config);
  const fs::path path = resolve_output(args.out, args.out_dir, "cohort.csv");
  ensure_parent_dir(path);
  sigdiag::write_subject_csv(path.string(), cohort);
  std::cout << "wrote " << cohort.size() << " subjects to " << path.string() << "\n";
}

// ---- featurize ---------------------------------------------------------------

struct FeaturizeArgs {
  std::string input;
  std::string out;
  std::string out_dir;
  std::size_t cortical_level = 3;
  std::size_t volume_level = 1;
  bool binarized = false;
};

void cmd_featurize(const FeaturizeArgs& args) {
  const std::vector<sigdiag::SubjectRecord> cohort = sigdiag::read_subject_csv(args.input);
  const sigdiag::FeatureLayout layout{args.cortical_level, args.volume_level};

  std::vector<sigdiag::FeatureVector> features;
  features.reserve(cohort.size());
  for (const sigdiag::SubjectRecord& rec : cohort) {
    features.push_back(sigdiag::assemble_feature(rec, layout));
  }
  sigdiag::BinarizationThresholds thresholds;
  if (args.binarized) {
    thresholds = sigdiag::fit_thresholds(features);
  }

  std::string csv = "subject_id,label";
  for (std::size_t k = 0; k < layout.total_dim(); ++k) {
    char col[16];
    std::snprintf(col, sizeof col, ",f%04zu", k);
    csv += col;
  }
  csv += '\n';
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    csv += cohort[i].subject_id;
    csv += ',';
    csv += sigdiag::to_string(cohort[i].label);
    if (args.binarized) {
      const sigdiag::BinarizedVector bits = sigdiag::binarize(features[i], thresholds);
      for (double b : bits.bits) {
        csv += b > 0.5 ? ",1" : ",0";
      }
    } else {
      for (double v : features[i].values) {
        csv += ',';
        csv += sigdiag::format_double(v);
      }
    }
    csv += '\n';
  }

  const fs::path path = resolve_output(args.out, args.out_dir, "features.csv");
  ensure_parent_dir(path);
  sigdiag::write_file_atomic(path, csv);
  std::cout << "wrote " << cohort.size() << "x" << layout.total_dim() << " feature matrix to "
            << path.string() << "\n";
}

// ---- crossval ----------------------------------------------------------------

struct CrossvalArgs {
  std::string input;
  std::string out_dir;
  std::string metrics_path;
  std::string audit_path;
  std::string models_dir;
  bool skip_models = false;
  std::vector<std::string> ablations;
  sigdiag::RunConfig config;
  std::string optimizer_rule = "adam";
};

void cmd_crossval(CrossvalArgs& args) {
  apply_ablations(args.ablations, args.config.ablation);
  args.config.optimizer.rule = sigdiag::optimizer_rule_from_string(args.optimizer_rule);
  args.config.validate();

  const std::vector<sigdiag::SubjectRecord> cohort = sigdiag::read_subject_csv(args.input);
  const sigdiag::CrossValResult result = sigdiag::run_cross_validation(cohort, args.config);

  const fs::path metrics_path = resolve_output(args.metrics_path, args.out_dir, "metrics.json");
  ensure_parent_dir(metrics_path);
  sigdiag::write_file_atomic(metrics_path, sigdiag::metrics_json(result, args.config));

  std::vector<sigdiag::PredictionRecord> pooled;
  pooled.reserve(cohort.size());
  for (const sigdiag::FoldArtifacts& fold : result.folds) {
    pooled.insert(pooled.end(), fold.predictions.begin(), fold.predictions.end());
  }
  const fs::path audit_path = resolve_output(args.audit_path, args.out_dir, "audit.csv");
  ensure_parent_dir(audit_path);
  sigdiag::write_file_atomic(audit_path, sigdiag::audit_csv(pooled));

  if (!args.skip_models) {
    const fs::path models_base = args.models_dir.empty()
                                     ? out_dir_base(args.out_dir) / "models"
                                     : fs::path(args.models_dir);
    std::error_code ec;
    fs::create_directories(models_base, ec);
    if (ec) {
      throw sigdiag::IoError("cannot create directory '" + models_base.string() +
                             "': " + ec.message());
    }
    for (const sigdiag::FoldArtifacts& fold : result.folds) {
      char name[32];
      std::snprintf(name, sizeof name, "fold_%02zu.model.json", fold.fold_index);
      sigdiag::save_fold_model((models_base / name).string(),
                               sigdiag::fold_model_from_artifacts(fold, args.config));
    }
  }

  const sigdiag::MetricsReport& m = result.pooled;
  std::cout << "pooled over " << result.folds.size() << " folds: ACC="
            << sigdiag::format_double(m.accuracy) << " SEN=" << sigdiag::format_double(m.sensitivity)
            << " SPE=" << sigdiag::format_double(m.specificity)
            << " F1=" << sigdiag::format_double(m.f1) << "\n"
            << "metrics: " << metrics_path.string() << "\n"
            << "audit:   " << audit_path.string() << "\n";
}

// ---- importance --------------------------------------------------------------

struct ImportanceArgs {
  std::vector<std::string> models;
  std::string out;
  std::string out_dir;
};

void cmd_importance(const ImportanceArgs& args) {
  std::vector<sigdiag::ImportanceVector> per_fold;
  per_fold.reserve(args.models.size());
  sigdiag::FeatureLayout layout;
  for (std::size_t i = 0; i < args.models.size(); ++i) {
    const sigdiag::FoldModel model = sigdiag::load_fold_model(args.models[i]);
    if (!model.has_stack) {
      throw sigdiag::SchemaError("model '" + args.models[i] +
                                 "' has no autoencoder stack (no_ae run?)");
    }
    if (i == 0) {
      layout = model.layout;
    } else if (model.layout.cortical_level != layout.cortical_level ||
               model.layout.volume_level != layout.volume_level) {
      throw sigdiag::SchemaError("model '" + args.models[i] +
                                 "' uses a different feature layout than the first model");
    }
    per_fold.push_back(sigdiag::input_importance(model.stack));
  }
  const sigdiag::RegionImportanceReport report =
      sigdiag::aggregate_regions_mean(per_fold, layout);

  const fs::path path = resolve_output(args.out, args.out_dir, "regions.csv");
  ensure_parent_dir(path);
  sigdiag::write_file_atomic(path, sigdiag::region_report_csv(report));
  std::cout << "wrote region report (" << args.models.size() << " fold models averaged) to "
            << path.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signature-feature early-diagnosis pipeline"};
  app.set_version_flag("--version", std::string(sigdiag::kVersionString));
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key=value config file; CLI flags take precedence");
  app.get_config_ptr()->configurable(false);

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a deterministic synthetic cohort CSV");
  synth_cmd->add_option("--asd", synth.config.n_asd, "ASD subject count")->capture_default_str();
  synth_cmd->add_option("--nc", synth.config.n_nc, "NC subject count")->capture_default_str();
  synth_cmd->add_option("--effect", synth.config.effect_size,
                        "Group mean shift on signal regions, in within-group sd units")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.config.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("-o,--out", synth.out, "Output CSV path (default <out-dir>/cohort.csv)");
  synth_cmd->add_option("--out-dir", synth.out_dir,
                        "Output directory (default $SIGDIAG_OUT_DIR or .)");

  FeaturizeArgs feat;
  CLI::App* feat_cmd =
      app.add_subcommand("featurize", "Assemble feature vectors from a cohort CSV");
  feat_cmd->add_option("input", feat.input, "Cohort CSV")->required();
  feat_cmd->add_option("-o,--out", feat.out, "Output CSV path (default <out-dir>/features.csv)");
  feat_cmd->add_option("--out-dir", feat.out_dir,
                       "Output directory (default $SIGDIAG_OUT_DIR or .)");
  feat_cmd->add_option("--cortical-level", feat.cortical_level, "PS truncation level (cortical)")
      ->capture_default_str();
  feat_cmd->add_option("--volume-level", feat.volume_level, "PS truncation level (volume)")
      ->capture_default_str();
  feat_cmd->add_flag("--binarized", feat.binarized,
                     "Emit median-binarized bits (medians fitted over this input)");

  CrossvalArgs cv;
  CLI::App* cv_cmd = app.add_subcommand(
      "crossval", "Stratified K-fold training and evaluation over a cohort CSV");
  cv_cmd->add_option("input", cv.input, "Cohort CSV")->required();
  cv_cmd->add_option("--out-dir", cv.out_dir, "Output directory (default $SIGDIAG_OUT_DIR or .)");
  cv_cmd->add_option("--metrics", cv.metrics_path,
                     "Metrics JSON path (default <out-dir>/metrics.json)");
  cv_cmd->add_option("--audit", cv.audit_path, "Audit CSV path (default <out-dir>/audit.csv)");
  cv_cmd->add_option("--models-dir", cv.models_dir,
                     "Checkpoint directory (default <out-dir>/models)");
  cv_cmd->add_flag("--no-save-models", cv.skip_models, "Skip writing fold checkpoints");
  cv_cmd->add_option("--seed", cv.config.seed, "Run seed")->capture_default_str();
  cv_cmd->add_option("-k,--folds", cv.config.folds, "Fold count")->capture_default_str();
  cv_cmd->add_option("--cortical-level", cv.config.cortical_level,
                     "PS truncation level (cortical)")
      ->capture_default_str();
  cv_cmd->add_option("--volume-level", cv.config.volume_level, "PS truncation level (volume)")
      ->capture_default_str();
  cv_cmd->add_option("--hidden-dim", cv.config.hidden_dim, "AE hidden width")
      ->capture_default_str();
  cv_cmd->add_option("--code-dim", cv.config.code_dim, "AE code width")->capture_default_str();
  cv_cmd->add_option("--sim-dim", cv.config.sim_dim, "Similarity feature width")
      ->capture_default_str();
  cv_cmd->add_option("--outer-epochs", cv.config.outer_epochs, "AE stage-1 epochs")
      ->capture_default_str();
  cv_cmd->add_option("--inner-epochs", cv.config.inner_epochs, "AE stage-2 epochs")
      ->capture_default_str();
  cv_cmd->add_option("--siamese-epochs", cv.config.siamese_epochs, "Verification head epochs")
      ->capture_default_str();
  cv_cmd->add_option("--batch-pairs", cv.config.batch_pairs, "Pairs per minibatch")
      ->capture_default_str();
  cv_cmd->add_option("--patience", cv.config.patience,
                     "Epochs without improvement before a convergence warning")
      ->capture_default_str();
  cv_cmd->add_option("--alpha", cv.config.focal_alpha, "Focal loss alpha")->capture_default_str();
  cv_cmd->add_option("--gamma", cv.config.focal_gamma, "Focal loss gamma")->capture_default_str();
  cv_cmd->add_option("--optimizer", cv.optimizer_rule, "Optimizer rule")
      ->check(CLI::IsMember({"adam", "sgd"}))
      ->capture_default_str();
  cv_cmd->add_option("--lr", cv.config.optimizer.learning_rate, "Learning rate")
      ->capture_default_str();
  cv_cmd->add_option("--beta1", cv.config.optimizer.beta1, "Adam beta1")->capture_default_str();
  cv_cmd->add_option("--beta2", cv.config.optimizer.beta2, "Adam beta2")->capture_default_str();
  cv_cmd->add_option("--adam-eps", cv.config.optimizer.epsilon, "Adam epsilon")
      ->capture_default_str();
  cv_cmd->add_option("-j,--jobs", cv.config.jobs,
                     "Max folds trained concurrently (0 = hardware default)")
      ->capture_default_str();
  cv_cmd
      ->add_option("--ablate", cv.ablations,
                   "Ablation arm(s), comma separated: no_binarization, no_ps, no_ps_shrink, "
                   "no_ae, no_weight, comp_weight, no_gender")
      ->delimiter(',')
      ->check(CLI::IsMember(kAblationNames));

  ImportanceArgs imp;
  CLI::App* imp_cmd = app.add_subcommand(
      "importance", "Region-importance report from crossval fold checkpoints");
  imp_cmd->add_option("models", imp.models, "fold_*.model.json checkpoint(s)")
      ->required()
      ->expected(-1);
  imp_cmd->add_option("-o,--out", imp.out, "Output CSV path (default <out-dir>/regions.csv)");
  imp_cmd->add_option("--out-dir", imp.out_dir,
                      "Output directory (default $SIGDIAG_OUT_DIR or .)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message
    return 1;
  }

  try {
    if (app.got_subcommand(synth_cmd)) {
      cmd_synth(synth);
    } else if (app.got_subcommand(feat_cmd)) {
      cmd_featurize(feat);
    } else if (app.got_subcommand(cv_cmd)) {
      cmd_crossval(cv);
    } else if (app.got_subcommand(imp_cmd)) {
      cmd_importance(imp);
    }
    return 0;
  } catch (const sigdiag::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const sigdiag::SchemaError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const sigdiag::InsufficientDataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const sigdiag::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 3;
  }
}
