#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "pairfilter/corpus/sentence.h"
#include "pairfilter/model/decoder.h"
#include "pairfilter/model/encoder.h"

namespace pairfilter {

// Anything that turns a sentence into a token-pair score matrix in one pass.
class PairScorer {
 public:
  virtual ~PairScorer() = default;
  virtual ScoreMatrix InferMatrix(const AnnotatedSentence& sentence) const = 0;
  virtual std::string identity() const = 0;
};

// Encoder plus the one-head decoder. Immutable once ready, so concurrent
// InferMatrix() calls are safe.
class PairScoreModel : public PairScorer {
 public:
  PairScoreModel(std::unique_ptr<Encoder> encoder, DecoderParams decoder,
                 std::uint64_t seed);

  // One encoder pass and one decoder pass. kState before training or loading.
  ScoreMatrix InferMatrix(const AnnotatedSentence& sentence) const override;
  ScoreMatrix InferTokens(const std::vector<std::string>& tokens) const;
  std::string identity() const override;

  // Recorded forward pass returning the N x N logits.
  ag::Var Forward(ag::Tape& tape, const std::vector<std::string>& tokens) const;

  Encoder& encoder() { return *encoder_; }
  const Encoder& encoder() const { return *encoder_; }
  DecoderParams& decoder() { return decoder_; }
  const DecoderParams& decoder() const { return decoder_; }

  // Encoder parameters followed by the decoder's.
  std::vector<ag::Param*> parameters();
  std::vector<const ag::Param*> parameters() const;

  bool ready() const { return ready_; }
  void MarkReady() { ready_ = true; }
  std::uint64_t seed() const { return seed_; }

  Json train_config;  // snapshot stored in checkpoints

 private:
  std::unique_ptr<Encoder> encoder_;
  DecoderParams decoder_;
  std::uint64_t seed_;
  bool ready_ = false;
};

// Binary checkpoint: "PFCK", u32 version, u64 header length, JSON header
// (encoder config, d1, d2, rope flag, seed, parameter manifest), then each
// parameter's values as little-endian doubles in column-major order.
std::string SerializeCheckpoint(const PairScoreModel& model);
void SaveCheckpoint(const PairScoreModel& model, const std::filesystem::path& path);

// `features` is required for pretrained-adapter checkpoints.
std::unique_ptr<PairScoreModel> LoadCheckpoint(
    const std::filesystem::path& path,
    std::shared_ptr<const FeatureStore> features = nullptr);
std::unique_ptr<PairScoreModel> DeserializeCheckpoint(
    std::string_view bytes, std::shared_ptr<const FeatureStore> features = nullptr);

}  // namespace pairfilter
