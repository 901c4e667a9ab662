#include "pairfilter/model/trainer.h"

#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <numeric>

#include "pairfilter/error.h"
#include "pairfilter/model/loss.h"
#include "pairfilter/random.h"

namespace pairfilter {

AdamW::AdamW(std::vector<ag::Param*> params, AdamWOptions options)
    : params_(std::move(params)), options_(options) {
  for (const auto* p : params_) {
    m_.push_back(ag::Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(ag::Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void AdamW::Step(const std::vector<ag::Matrix>& grads) {
  if (grads.size() != params_.size()) {
    Fail(ErrorKind::kShape, "optimizer got " + std::to_string(grads.size()) +
                                " gradients for " + std::to_string(params_.size()) +
                                " parameters");
  }
  ++step_;
  const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& value = params_[i]->value;
    m_[i] = options_.beta1 * m_[i] + (1.0 - options_.beta1) * grads[i];
    v_[i] = options_.beta2 * v_[i] + (1.0 - options_.beta2) * grads[i].cwiseProduct(grads[i]);
    value *= 1.0 - options_.learning_rate * options_.weight_decay;
    value.array() -= options_.learning_rate * (m_[i].array() / c1) /
                     ((v_[i].array() / c2).sqrt() + options_.epsilon);
  }
}

void TrainConfig::Validate() const {
  if (epochs < 1) Fail(ErrorKind::kConfig, "epochs must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    Fail(ErrorKind::kConfig, "learning rate must be positive");
  }
  if (batch_size < 1) Fail(ErrorKind::kConfig, "batch size must be at least 1");
  if (d2 < 1) Fail(ErrorKind::kConfig, "d2 must be positive");
  if (rope_enabled && d2 % 2 != 0) Fail(ErrorKind::kConfig, "d2 must be even with rope");
  if (optimizer != "adamw") Fail(ErrorKind::kConfig, "unsupported optimizer " + optimizer);
  if (weight_decay < 0.0) Fail(ErrorKind::kConfig, "weight decay must be non-negative");
  if (token_dropout < 0.0 || token_dropout >= 1.0) {
    Fail(ErrorKind::kConfig, "token dropout must be in [0, 1)");
  }
}

TrainConfig TrainConfig::FromJson(const Json& j) {
  TrainConfig c;
  try {
    c.epochs = j.value("epochs", c.epochs);
    c.learning_rate = j.value("learningRate", c.learning_rate);
    c.batch_size = j.value("batchSize", c.batch_size);
    c.seed = j.value("seed", c.seed);
    if (j.contains("encoderMode")) {
      c.encoder_mode = ParseEncoderMode(j.at("encoderMode").get<std::string>());
    }
    c.optimizer = j.value("optimizer", c.optimizer);
    c.d2 = j.value("d2", c.d2);
    c.rope_enabled = j.value("rope", c.rope_enabled);
    c.mean_reduction = j.value("meanReduction", c.mean_reduction);
    c.weight_decay = j.value("weightDecay", c.weight_decay);
    c.token_dropout = j.value("tokenDropout", c.token_dropout);
    if (j.contains("toy")) c.toy = ToyEncoderConfig::FromJson(j.at("toy"));
  } catch (const Json::exception& e) {
    Fail(ErrorKind::kConfig, std::string("training config: ") + e.what());
  }
  return c;
}

Json TrainConfig::ToJson() const {
  return {{"epochs", epochs},
          {"learningRate", learning_rate},
          {"batchSize", batch_size},
          {"seed", seed},
          {"encoderMode", ToString(encoder_mode)},
          {"optimizer", optimizer},
          {"d2", d2},
          {"rope", rope_enabled},
          {"meanReduction", mean_reduction},
          {"weightDecay", weight_decay},
          {"tokenDropout", token_dropout},
          {"toy", toy.ToJson()}};
}

double EvaluateLoss(const PairScoreModel& model, const std::vector<LabeledSentence>& data) {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : data) {
    ag::Tape tape(/*record=*/false);
    const auto scores = model.Forward(tape, s.tokens);
    total += MaskedBceLoss(tape.value(scores), s.labels);
  }
  return total / static_cast<double>(data.size());
}

TrainResult Train(const std::vector<LabeledSentence>& data, const TrainConfig& config,
                  const TrainHooks& hooks) {
  config.Validate();
  TrainResult result;

  std::vector<const LabeledSentence*> usable;
  for (const auto& s : data) {
    if (s.labels.AllZero()) {
      ++result.skipped;
    } else {
      usable.push_back(&s);
    }
  }
  if (usable.empty()) {
    Fail(ErrorKind::kValidation, "training data has no labeled token pairs");
  }
  if (result.skipped > 0) {
    spdlog::info("skipping {} sentences without labeled pairs", result.skipped);
  }

  std::unique_ptr<Encoder> encoder;
  if (config.encoder_mode == EncoderMode::kToy) {
    std::vector<std::vector<std::string>> corpus;
    for (const auto* s : usable) corpus.push_back(s->tokens);
    encoder = std::make_unique<ToyTransformerEncoder>(
        config.toy, ToyTransformerEncoder::BuildVocab(corpus), config.seed);
  } else {
    if (!hooks.features) {
      Fail(ErrorKind::kConfig, "pretrained-adapter mode needs a features file");
    }
    encoder = std::make_unique<PretrainedAdapterEncoder>(hooks.features);
  }
  auto decoder = DecoderParams::Init(encoder->hidden_dim(), config.d2, config.rope_enabled,
                                     config.seed + 1);
  result.model = std::make_unique<PairScoreModel>(std::move(encoder), std::move(decoder),
                                                  config.seed);
  auto& model = *result.model;
  model.train_config = config.ToJson();

  std::vector<LabeledSentence> usable_copy;
  usable_copy.reserve(usable.size());
  for (const auto* s : usable) usable_copy.push_back(*s);
  result.initial_loss = EvaluateLoss(model, usable_copy);

  const auto params = model.parameters();
  AdamW optimizer(params, {.learning_rate = config.learning_rate,
                           .weight_decay = config.weight_decay});
  PortableRng rng(config.seed + 2);
  PortableRng corrupt(config.seed + 3);
  std::vector<std::size_t> order(usable.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.Shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      double weight = 1.0;
      if (config.mean_reduction) {
        std::size_t labeled = 0;
        for (std::size_t b = start; b < stop; ++b) {
          const auto& lab = usable[order[b]]->labels;
          labeled += lab.size() * lab.size() - lab.Count(0);
        }
        weight = 1.0 / static_cast<double>(labeled);
      }

      std::vector<ag::Matrix> grads;
      for (const auto* p : params) {
        grads.push_back(ag::Matrix::Zero(p->value.rows(), p->value.cols()));
      }
      double batch_loss = 0.0;
      for (std::size_t b = start; b < stop; ++b) {
        const auto& s = *usable[order[b]];
        auto tokens = s.tokens;
        if (config.token_dropout > 0.0) {
          for (std::size_t i = 1; i + 1 < tokens.size(); ++i) {
            if (corrupt.Unit() < config.token_dropout) tokens[i] = "[UNK]";
          }
        }
        ag::Tape tape;
        const auto loss = ag::MaskedBce(tape, model.Forward(tape, tokens), s.labels, weight);
        batch_loss += tape.value(loss)(0, 0);
        tape.Backward(loss);
        for (std::size_t i = 0; i < params.size(); ++i) grads[i] += tape.ParamGrad(*params[i]);
      }
      if (!std::isfinite(batch_loss)) {
        Fail(ErrorKind::kTraining, "loss became non-finite at epoch " + std::to_string(epoch) +
                                       ", batch starting at " + std::to_string(start) +
                                       "; lower the learning rate");
      }
      epoch_loss += config.mean_reduction ? batch_loss / weight : batch_loss;
      optimizer.Step(grads);
    }

    EpochReport report{epoch, epoch_loss / static_cast<double>(usable.size())};
    result.history.push_back(report);
    spdlog::info("epoch {:3d}  loss {:.6f}", epoch, report.running_loss);
    if (hooks.on_epoch) hooks.on_epoch(report);
    if (!hooks.checkpoint_dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch-%03d.ckpt", epoch);
      model.MarkReady();
      SaveCheckpoint(model, hooks.checkpoint_dir / name);
    }
  }
  result.final_loss = EvaluateLoss(model, usable_copy);
  model.MarkReady();
  return result;
}

}  // namespace pairfilter
