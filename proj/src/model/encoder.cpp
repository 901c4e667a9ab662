#include "pairfilter/model/encoder.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "pairfilter/error.h"
#include "pairfilter/model/rope.h"
#include "pairfilter/random.h"

namespace pairfilter {
namespace {

constexpr const char* kPadToken = "[PAD]";
constexpr const char* kUnkToken = "[UNK]";

ag::Param Gaussian(std::string name, int rows, int cols, double stddev,
                   PortableRng& rng) {
  ag::Matrix m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) m(r, c) = stddev * rng.Normal();
  }
  return {std::move(name), std::move(m)};
}

ag::Param Constant(std::string name, int rows, int cols, double value) {
  return {std::move(name), ag::Matrix::Constant(rows, cols, value)};
}

}  // namespace

std::string ToString(EncoderMode mode) {
  return mode == EncoderMode::kToy ? "toy-from-scratch" : "pretrained-adapter";
}

EncoderMode ParseEncoderMode(const std::string& name) {
  if (name == "toy-from-scratch" || name == "toy") return EncoderMode::kToy;
  if (name == "pretrained-adapter" || name == "pretrained") {
    return EncoderMode::kPretrainedAdapter;
  }
  Fail(ErrorKind::kConfig, "unknown encoder mode \"" + name + "\"");
}

ag::Var Encoder::Forward(ag::Tape& tape, const std::vector<std::string>& tokens) const {
  if (tokens.size() < 3) {
    Fail(ErrorKind::kValidation, "encoder needs at least 3 tokens, got " +
                                     std::to_string(tokens.size()));
  }
  if (tokens.size() > max_length()) {
    Fail(ErrorKind::kLength, "sequence of " + std::to_string(tokens.size()) +
                                 " tokens exceeds the encoder limit of " +
                                 std::to_string(max_length()));
  }
  ++invocations_;
  return DoForward(tape, tokens);
}

HiddenSequence Encoder::Encode(const std::vector<std::string>& tokens) const {
  ag::Tape tape(/*record=*/false);
  const auto out = Forward(tape, tokens);
  return {tape.value(out)};
}

// --- toy transformer -------------------------------------------------------

Json ToyEncoderConfig::ToJson() const {
  return {{"d_model", d_model}, {"layers", layers}, {"heads", heads},
          {"ffn", ffn}, {"max_length", max_length}, {"rotary_attention", rotary_attention}};
}

ToyEncoderConfig ToyEncoderConfig::FromJson(const Json& j) {
  ToyEncoderConfig c;
  c.d_model = j.value("d_model", c.d_model);
  c.layers = j.value("layers", c.layers);
  c.heads = j.value("heads", c.heads);
  c.ffn = j.value("ffn", c.ffn);
  c.max_length = j.value("max_length", c.max_length);
  c.rotary_attention = j.value("rotary_attention", c.rotary_attention);
  return c;
}

std::vector<std::string> ToyTransformerEncoder::BuildVocab(
    const std::vector<std::vector<std::string>>& corpus) {
  std::set<std::string> distinct;
  for (const auto& tokens : corpus) distinct.insert(tokens.begin(), tokens.end());
  std::vector<std::string> vocab{kPadToken, kUnkToken, kClsToken, kSepToken};
  for (const auto& t : distinct) {
    if (std::find(vocab.begin(), vocab.end(), t) == vocab.end()) vocab.push_back(t);
  }
  return vocab;
}

ToyTransformerEncoder::ToyTransformerEncoder(ToyEncoderConfig config,
                                             std::vector<std::string> vocab,
                                             std::uint64_t seed)
    : config_(config), vocab_(std::move(vocab)) {
  if (config_.d_model <= 0 || config_.layers < 0 || config_.heads <= 0 ||
      config_.d_model % config_.heads != 0 || config_.ffn <= 0 ||
      config_.max_length < 3) {
    Fail(ErrorKind::kConfig, "invalid toy encoder configuration");
  }
  if (config_.rotary_attention && (config_.d_model / config_.heads) % 2 != 0) {
    Fail(ErrorKind::kConfig, "rotary attention needs an even head width");
  }
  if (std::find(vocab_.begin(), vocab_.end(), kUnkToken) == vocab_.end()) {
    vocab_.insert(vocab_.begin(), kUnkToken);
  }
  for (int i = 0; i < static_cast<int>(vocab_.size()); ++i) index_.emplace(vocab_[i], i);

  PortableRng rng(seed);
  const int d = config_.d_model;
  const double w_std = 1.0 / std::sqrt(static_cast<double>(d));
  token_embedding_ = Gaussian("token_embedding", static_cast<int>(vocab_.size()), d, 1.0, rng);
  if (!config_.rotary_attention) {
    position_embedding_ = Gaussian("position_embedding", config_.max_length, d, 0.5, rng);
  }
  for (int l = 0; l < config_.layers; ++l) {
    const std::string p = "block" + std::to_string(l) + ".";
    Block b;
    b.ln1_gain = Constant(p + "ln1_gain", 1, d, 1.0);
    b.ln1_bias = Constant(p + "ln1_bias", 1, d, 0.0);
    b.wq = Gaussian(p + "wq", d, d, w_std, rng);
    b.bq = Constant(p + "bq", 1, d, 0.0);
    b.wk = Gaussian(p + "wk", d, d, w_std, rng);
    b.bk = Constant(p + "bk", 1, d, 0.0);
    b.wv = Gaussian(p + "wv", d, d, w_std, rng);
    b.bv = Constant(p + "bv", 1, d, 0.0);
    b.wo = Gaussian(p + "wo", d, d, w_std, rng);
    b.bo = Constant(p + "bo", 1, d, 0.0);
    b.ln2_gain = Constant(p + "ln2_gain", 1, d, 1.0);
    b.ln2_bias = Constant(p + "ln2_bias", 1, d, 0.0);
    b.w1 = Gaussian(p + "w1", config_.ffn, d, w_std, rng);
    b.b1 = Constant(p + "b1", 1, config_.ffn, 0.0);
    b.w2 = Gaussian(p + "w2", d, config_.ffn,
                    1.0 / std::sqrt(static_cast<double>(config_.ffn)), rng);
    b.b2 = Constant(p + "b2", 1, d, 0.0);
    blocks_.push_back(std::move(b));
  }
  final_gain_ = Constant("final_gain", 1, d, 1.0);
  final_bias_ = Constant("final_bias", 1, d, 0.0);
}

int ToyTransformerEncoder::TokenId(const std::string& token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? index_.at(kUnkToken) : it->second;
}

std::vector<ag::Param*> ToyTransformerEncoder::parameters() {
  std::vector<ag::Param*> out{&token_embedding_};
  if (!config_.rotary_attention) out.push_back(&position_embedding_);
  for (auto& b : blocks_) {
    for (auto* p : {&b.ln1_gain, &b.ln1_bias, &b.wq, &b.bq, &b.wk, &b.bk, &b.wv,
                    &b.bv, &b.wo, &b.bo, &b.ln2_gain, &b.ln2_bias, &b.w1, &b.b1,
                    &b.w2, &b.b2}) {
      out.push_back(p);
    }
  }
  out.push_back(&final_gain_);
  out.push_back(&final_bias_);
  return out;
}

std::vector<const ag::Param*> ToyTransformerEncoder::parameters() const {
  auto mutable_params = const_cast<ToyTransformerEncoder*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

Json ToyTransformerEncoder::config() const {
  return {{"mode", ToString(mode())}, {"toy", config_.ToJson()}, {"vocab", vocab_}};
}

ag::Var ToyTransformerEncoder::DoForward(ag::Tape& t,
                                         const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  std::vector<int> positions;
  ids.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    ids.push_back(TokenId(tokens[i]));
    positions.push_back(static_cast<int>(i));
  }
  ag::Var x = ag::GatherRows(t, t.Parameter(token_embedding_), ids);
  if (!config_.rotary_attention) {
    x = ag::Add(t, x, ag::GatherRows(t, t.Parameter(position_embedding_), positions));
  }

  const int head_dim = config_.d_model / config_.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  for (const auto& b : blocks_) {
    const auto a = ag::LayerNormRows(t, x, t.Parameter(b.ln1_gain), t.Parameter(b.ln1_bias));
    const auto q = ag::Linear(t, a, t.Parameter(b.wq), t.Parameter(b.bq));
    const auto k = ag::Linear(t, a, t.Parameter(b.wk), t.Parameter(b.bk));
    const auto v = ag::Linear(t, a, t.Parameter(b.wv), t.Parameter(b.bv));
    std::vector<ag::Var> heads;
    for (int h = 0; h < config_.heads; ++h) {
      const int at = h * head_dim;
      auto qh = ag::ColSlice(t, q, at, head_dim);
      auto kh = ag::ColSlice(t, k, at, head_dim);
      if (config_.rotary_attention) {
        qh = ag::RopeRows(t, qh, 0, kRopeBase);
        kh = ag::RopeRows(t, kh, 0, kRopeBase);
      }
      const auto vh = ag::ColSlice(t, v, at, head_dim);
      const auto weights = ag::SoftmaxRows(t, ag::Scale(t, ag::MatMulT(t, qh, kh), scale));
      heads.push_back(ag::MatMul(t, weights, vh));
    }
    const auto attended = ag::Linear(t, ag::HConcat(t, heads), t.Parameter(b.wo),
                                     t.Parameter(b.bo));
    x = ag::Add(t, x, attended);

    const auto f = ag::LayerNormRows(t, x, t.Parameter(b.ln2_gain), t.Parameter(b.ln2_bias));
    const auto hidden = ag::Relu(t, ag::Linear(t, f, t.Parameter(b.w1), t.Parameter(b.b1)));
    x = ag::Add(t, x, ag::Linear(t, hidden, t.Parameter(b.w2), t.Parameter(b.b2)));
  }
  return ag::LayerNormRows(t, x, t.Parameter(final_gain_), t.Parameter(final_bias_));
}

// --- precomputed features --------------------------------------------------

std::shared_ptr<FeatureStore> FeatureStore::Load(const std::filesystem::path& path) {
  auto store = std::make_shared<FeatureStore>();
  store->source_ = path.string();
  store->digest_ = Sha256Hex(ReadFile(path));
  ForEachJsonLine(path, [&](std::size_t line_no, const Json& r) {
    const auto where = path.string() + ":" + std::to_string(line_no);
    try {
      TokenizedText tt;
      tt.tokens = r.at("tokens").get<std::vector<std::string>>();
      for (const auto& o : r.at("offsets")) {
        tt.offsets.push_back({o.at(0).get<std::size_t>(), o.at(1).get<std::size_t>()});
      }
      const auto& rows = r.at("hidden");
      if (tt.offsets.size() != tt.tokens.size() || rows.size() != tt.tokens.size() ||
          rows.empty()) {
        Fail(ErrorKind::kParse, where + ": tokens, offsets and hidden differ in length");
      }
      const auto dim = static_cast<Eigen::Index>(rows.at(0).size());
      Eigen::MatrixXd hidden(static_cast<Eigen::Index>(rows.size()), dim);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != dim) {
          Fail(ErrorKind::kParse, where + ": ragged hidden vectors");
        }
        for (Eigen::Index c = 0; c < dim; ++c) {
          hidden(static_cast<Eigen::Index>(i), c) = rows[i][static_cast<std::size_t>(c)].get<double>();
        }
      }
      store->Add(r.at("text").get<std::string>(), std::move(tt), std::move(hidden));
    } catch (const Json::exception& e) {
      Fail(ErrorKind::kParse, where + ": " + e.what());
    }
  });
  return store;
}

void FeatureStore::Add(std::string text, TokenizedText tokens, Eigen::MatrixXd hidden) {
  if (dim_ == 0) dim_ = static_cast<int>(hidden.cols());
  if (hidden.cols() != dim_) Fail(ErrorKind::kShape, "feature store: mixed hidden sizes");
  by_tokens_[tokens.tokens] = std::move(hidden);
  by_text_[std::move(text)] = std::move(tokens);
}

TokenizedText FeatureStore::Tokenize(std::string_view text) const {
  const auto it = by_text_.find(std::string(text));
  if (it == by_text_.end()) {
    Fail(ErrorKind::kLookup, "no precomputed features for text \"" +
                                 std::string(text.substr(0, 60)) + "\"");
  }
  return it->second;
}

const Eigen::MatrixXd& FeatureStore::Lookup(const std::vector<std::string>& tokens) const {
  const auto it = by_tokens_.find(tokens);
  if (it == by_tokens_.end()) {
    Fail(ErrorKind::kLookup, "no precomputed features for a " +
                                 std::to_string(tokens.size()) + "-token sequence");
  }
  return it->second;
}

PretrainedAdapterEncoder::PretrainedAdapterEncoder(std::shared_ptr<const FeatureStore> store,
                                                   std::size_t max_length)
    : store_(std::move(store)), max_length_(max_length) {
  if (!store_) Fail(ErrorKind::kConfig, "pretrained adapter needs a feature store");
}

Json PretrainedAdapterEncoder::config() const {
  return {{"mode", ToString(mode())},
          {"features_digest", store_->digest()},
          {"features_source", store_->source()},
          {"d1", store_->hidden_dim()},
          {"max_length", max_length_}};
}

ag::Var PretrainedAdapterEncoder::DoForward(ag::Tape& t,
                                            const std::vector<std::string>& tokens) const {
  return t.Constant(store_->Lookup(tokens));
}

}  // namespace pairfilter
