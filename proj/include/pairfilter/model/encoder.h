#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pairfilter/corpus/tokenizer.h"
#include "pairfilter/model/autograd.h"
#include "pairfilter/util.h"

namespace pairfilter {

// h_1..h_N as rows of an N x d1 matrix.
struct HiddenSequence {
  Eigen::MatrixXd vectors;

  std::size_t size() const { return static_cast<std::size_t>(vectors.rows()); }
  int dim() const { return static_cast<int>(vectors.cols()); }
};

enum class EncoderMode { kToy, kPretrainedAdapter };

std::string ToString(EncoderMode mode);
EncoderMode ParseEncoderMode(const std::string& name);

// Maps a token sequence (with boundary tokens) to hidden vectors. Every
// forward pass, training or inference, increments an invocation counter.
class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual EncoderMode mode() const = 0;
  virtual int hidden_dim() const = 0;
  virtual std::size_t max_length() const = 0;

  // Trainable parameters; empty for frozen encoders.
  virtual std::vector<ag::Param*> parameters() = 0;
  virtual std::vector<const ag::Param*> parameters() const = 0;

  // Everything needed to rebuild the encoder apart from parameter values.
  virtual Json config() const = 0;

  // Throws kLength above max_length() and kValidation below 3 tokens.
  ag::Var Forward(ag::Tape& tape, const std::vector<std::string>& tokens) const;
  HiddenSequence Encode(const std::vector<std::string>& tokens) const;

  std::size_t invocation_count() const { return invocations_.load(); }
  void ResetInvocationCount() { invocations_ = 0; }

 protected:
  virtual ag::Var DoForward(ag::Tape& tape,
                            const std::vector<std::string>& tokens) const = 0;

 private:
  mutable std::atomic<std::size_t> invocations_{0};
};

struct ToyEncoderConfig {
  int d_model = 32;
  int layers = 2;
  int heads = 4;
  int ffn = 64;
  int max_length = 160;
  // Rotary positions inside self-attention; learned absolute embeddings
  // when off.
  bool rotary_attention = true;

  Json ToJson() const;
  static ToyEncoderConfig FromJson(const Json& j);
};

// Small pre-norm transformer trained from scratch: token embeddings, `layers`
// blocks of multi-head self-attention and a ReLU MLP, final layer norm.
class ToyTransformerEncoder : public Encoder {
 public:
  ToyTransformerEncoder(ToyEncoderConfig config, std::vector<std::string> vocab,
                        std::uint64_t seed);

  // Sorted distinct tokens of the corpus plus the special tokens.
  static std::vector<std::string> BuildVocab(
      const std::vector<std::vector<std::string>>& corpus);

  EncoderMode mode() const override { return EncoderMode::kToy; }
  int hidden_dim() const override { return config_.d_model; }
  std::size_t max_length() const override {
    return static_cast<std::size_t>(config_.max_length);
  }
  std::vector<ag::Param*> parameters() override;
  std::vector<const ag::Param*> parameters() const override;
  Json config() const override;

  const std::vector<std::string>& vocab() const { return vocab_; }
  int TokenId(const std::string& token) const;

 protected:
  ag::Var DoForward(ag::Tape& tape, const std::vector<std::string>& tokens) const override;

 private:
  struct Block {
    ag::Param ln1_gain, ln1_bias;
    ag::Param wq, bq, wk, bk, wv, bv, wo, bo;
    ag::Param ln2_gain, ln2_bias;
    ag::Param w1, b1, w2, b2;
  };

  ToyEncoderConfig config_;
  std::vector<std::string> vocab_;
  std::map<std::string, int> index_;
  ag::Param token_embedding_;
  ag::Param position_embedding_;
  std::vector<Block> blocks_;
  ag::Param final_gain_, final_bias_;
};

// Hidden states exported from an external pretrained encoder, one record per
// sentence: {"text", "tokens", "offsets": [[b,e],...], "hidden": [[...],...]}.
// The store doubles as the tokenizer so that spans line up with the vectors.
class FeatureStore : public Tokenizer {
 public:
  static std::shared_ptr<FeatureStore> Load(const std::filesystem::path& path);

  std::string name() const override { return "precomputed"; }
  // kLookup when the text was not exported.
  TokenizedText Tokenize(std::string_view text) const override;

  const Eigen::MatrixXd& Lookup(const std::vector<std::string>& tokens) const;
  int hidden_dim() const { return dim_; }
  const std::string& digest() const { return digest_; }
  const std::string& source() const { return source_; }

  void Add(std::string text, TokenizedText tokens, Eigen::MatrixXd hidden);

 private:
  std::map<std::string, TokenizedText> by_text_;
  std::map<std::vector<std::string>, Eigen::MatrixXd> by_tokens_;
  int dim_ = 0;
  std::string digest_;
  std::string source_;
};

// Frozen adapter over a FeatureStore. Only the decoder trains in this mode.
class PretrainedAdapterEncoder : public Encoder {
 public:
  explicit PretrainedAdapterEncoder(std::shared_ptr<const FeatureStore> store,
                                    std::size_t max_length = 512);

  EncoderMode mode() const override { return EncoderMode::kPretrainedAdapter; }
  int hidden_dim() const override { return store_->hidden_dim(); }
  std::size_t max_length() const override { return max_length_; }
  std::vector<ag::Param*> parameters() override { return {}; }
  std::vector<const ag::Param*> parameters() const override { return {}; }
  Json config() const override;

 protected:
  ag::Var DoForward(ag::Tape& tape, const std::vector<std::string>& tokens) const override;

 private:
  std::shared_ptr<const FeatureStore> store_;
  std::size_t max_length_;
};

}  // namespace pairfilter
