#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pairfilter/corpus/self_label.h"
#include "pairfilter/model/pair_score_model.h"

namespace pairfilter {

struct AdamWOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

// Adam with decoupled weight decay.
class AdamW {
 public:
  AdamW(std::vector<ag::Param*> params, AdamWOptions options);

  // `grads[i]` belongs to the i-th parameter passed at construction.
  void Step(const std::vector<ag::Matrix>& grads);

 private:
  std::vector<ag::Param*> params_;
  AdamWOptions options_;
  std::vector<ag::Matrix> m_;
  std::vector<ag::Matrix> v_;
  long step_ = 0;
};

struct TrainConfig {
  int epochs = 20;
  double learning_rate = 2e-3;
  int batch_size = 8;
  std::uint64_t seed = 13;
  EncoderMode encoder_mode = EncoderMode::kToy;
  std::string optimizer = "adamw";
  int d2 = 64;
  bool rope_enabled = true;
  bool mean_reduction = false;  // default: sum over labeled cells per batch
  double weight_decay = 0.01;
  // Probability of replacing a content token with [UNK] in a training pass.
  double token_dropout = 0.1;
  ToyEncoderConfig toy;

  // Throws kConfig on out-of-range values.
  void Validate() const;

  static TrainConfig FromJson(const Json& j);
  Json ToJson() const;
};

struct EpochReport {
  int epoch = 0;            // 1-based
  double running_loss = 0;  // mean per sentence over the epoch's batches
};

struct TrainResult {
  std::unique_ptr<PairScoreModel> model;
  std::vector<EpochReport> history;
  double initial_loss = 0;  // mean per-sentence loss before the first step
  double final_loss = 0;    // same measure after the last epoch
  std::size_t skipped = 0;  // sentences without any labeled cell
};

struct TrainHooks {
  // When set, epoch-NNN.ckpt is written after every epoch.
  std::filesystem::path checkpoint_dir;
  std::function<void(const EpochReport&)> on_epoch;
  // Required for the pretrained-adapter encoder mode.
  std::shared_ptr<const FeatureStore> features;
};

// Single-threaded and deterministic given config.seed. Throws kTraining when
// the loss becomes non-finite and kValidation when no sentence carries a
// label.
TrainResult Train(const std::vector<LabeledSentence>& data, const TrainConfig& config,
                  const TrainHooks& hooks = {});

// Mean per-sentence masked loss of `model` over `data` (sum reduction).
double EvaluateLoss(const PairScoreModel& model, const std::vector<LabeledSentence>& data);

}  // namespace pairfilter
