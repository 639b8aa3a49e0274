#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trailgate/augment.hpp"
#include "trailgate/dataset.hpp"
#include "trailgate/forest.hpp"
#include "trailgate/ifs.hpp"
#include "trailgate/metrics.hpp"
#include "trailgate/neural.hpp"
#include "trailgate/noise.hpp"
#include "trailgate/ranking.hpp"

namespace trailgate {

enum class ClassifierKind { forest, net };

struct PipelineConfig {
  LabelScheme task = LabelScheme::binary;
  double pcc_threshold = 0.0;  // 0 = per-task default (0.7 binary, 0.9 multi)
  double augment_ratio = 1.0;
  int augment_k = 5;
  ForestParams forest;  // stage-1 gate, n_estimators = 300
  NetConfig net;        // seq_len and num_classes are filled during build
  int cl_folds = 10;
  int cl_probe_trees = 50;
  int cl_probe_max_depth = 0;
  int ifs_forest_trees = 50;
  int ifs_epochs = 3;  // reduced budget per k for the deep-model sweep
  double dma_threshold = 0.005;
  double split_ratio = 0.7;
  int net_folds = 1;  // 1 = single split; 10 reproduces the paper's CV
  std::size_t abnormal_cap = 0;  // 0 = inject all deduplicated abnormal rows
  bool unknown_as_attack = false;
  StopRule stage1_rule = StopRule::dma;
  StopRule stage2_rule = StopRule::peak;
  // Ablation switches.
  bool use_augment = true;
  bool use_selection = true;
  ClassifierKind stage1_classifier = ClassifierKind::forest;
  ClassifierKind stage2_classifier = ClassifierKind::net;
  bool two_stage = true;
  std::uint64_t seed = 42;

  double effective_pcc_threshold() const {
    if (pcc_threshold > 0.0) return pcc_threshold;
    return task == LabelScheme::binary ? 0.7 : 0.9;
  }
};

// Canonical key=value dump; hashed into the provenance record.
std::string describe_config(const PipelineConfig& config);

struct StageModel {
  ClassifierKind kind = ClassifierKind::forest;
  std::vector<std::size_t> features;  // column indices into the schema
  std::optional<Forest> forest;
  std::optional<NetParams> net;
  NetConfig net_config;

  // Predicts class indices from a full-width encoded table.
  std::vector<int> predict(const FeatureTable& table) const;
};

struct PipelinePrediction {
  std::vector<int> final_labels;  // task-scheme class indices
  std::vector<int> stage1_labels; // binary gate verdicts
  std::size_t stage2_invocations = 0;
};

class TrainedPipeline {
 public:
  Schema schema;
  LabelScheme task = LabelScheme::binary;
  bool two_stage = true;
  bool unknown_as_attack = false;
  StageModel stage1;  // binary gate (or the solo model when two_stage is off)
  StageModel stage2;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string library_version = "0.1.0";

  PipelinePrediction predict(const FeatureTable& table) const;

  void save(const std::string& dir) const;
  static TrainedPipeline load(const std::string& dir);
};

struct BuildArtifacts {
  EncodeStats encode_stats;
  AugmentReport augment_initial;
  FeatureRanking ranking;
  std::vector<std::string> feature_names;
  NoiseReport noise;
  bool noise_valid = false;
  std::size_t abnormal_injected = 0;
  IfsCurve ifs_stage1, ifs_stage2;
  AugmentReport augment_stage1, augment_stage2;
  TrainLog stage2_train_log;
  std::vector<std::pair<std::string, double>> timings;  // (module, seconds)
};

using LogFn = std::function<void(const std::string&)>;

TrainedPipeline build(const std::string& train_path, const PipelineConfig& config,
                      BuildArtifacts* artifacts = nullptr, const LogFn& log = nullptr);

struct EvalResult {
  ConfusionMatrix cm;
  double accuracy = 0.0;
  std::optional<MetricSet> binary;            // set for the binary task
  std::map<int, MetricSet> per_class;
  MacroMetrics macro_metrics;
  EncodeStats encode_stats;
  PipelinePrediction prediction;
  double seconds = 0.0;
};

EvalResult evaluate(const TrainedPipeline& pipeline, const std::string& test_path);
EvalResult evaluate_table(const TrainedPipeline& pipeline, const FeatureTable& table,
                          const LabelVector& labels);

void write_metrics_json(const EvalResult& result, const LabelVector& label_scheme,
                        const std::string& path);
void write_timings_csv(const std::vector<std::pair<std::string, double>>& timings,
                       const std::string& path);

// Ablation arms: "<strategy>:<combo>" with strategy in {Raw, Aug, FS,
// Aug+FS} and combo in {RF, BT, RF+BT, BT+RF, RF+RF, BT+BT}; a bare
// strategy implies BT, a bare combo implies Aug+FS.
struct AblationArm {
  std::string name;
  std::string strategy;
  std::string combo;
};

AblationArm parse_ablation_arm(const std::string& name);
PipelineConfig apply_arm(const PipelineConfig& base, const AblationArm& arm);

struct AblationRow {
  std::string arm;
  double accuracy = 0.0;
  std::optional<MetricSet> metrics;
};

std::vector<AblationRow> ablate(const PipelineConfig& base, const std::vector<std::string>& arms,
                                const std::string& train_path, const std::string& test_path,
                                const LogFn& log = nullptr);

}  // namespace trailgate
