#include "pairfilter/model/pair_score_model.h"

#include <cstring>

#include "pairfilter/error.h"

namespace pairfilter {
namespace {

constexpr char kMagic[4] = {'P', 'F', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void PutRaw(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T GetRaw(std::string_view bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) Fail(ErrorKind::kParse, "checkpoint truncated");
  T value;
  std::memcpy(&value, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace

PairScoreModel::PairScoreModel(std::unique_ptr<Encoder> encoder, DecoderParams decoder,
                               std::uint64_t seed)
    : encoder_(std::move(encoder)), decoder_(std::move(decoder)), seed_(seed) {
  if (!encoder_) Fail(ErrorKind::kConfig, "model needs an encoder");
  if (encoder_->hidden_dim() != decoder_.d1()) {
    Fail(ErrorKind::kShape, "encoder width " + std::to_string(encoder_->hidden_dim()) +
                                " does not match decoder d1 " +
                                std::to_string(decoder_.d1()));
  }
}

ScoreMatrix PairScoreModel::InferTokens(const std::vector<std::string>& tokens) const {
  if (!ready_) Fail(ErrorKind::kState, "model is neither trained nor loaded");
  const auto hidden = encoder_->Encode(tokens);
  return ComputeScores(ProjectQk(hidden, decoder_), decoder_);
}

ScoreMatrix PairScoreModel::InferMatrix(const AnnotatedSentence& sentence) const {
  return InferTokens(sentence.tokens);
}

std::string PairScoreModel::identity() const {
  return ToString(encoder_->mode()) + "/d1=" + std::to_string(decoder_.d1()) +
         "/d2=" + std::to_string(decoder_.d2()) +
         (decoder_.rope_enabled ? "/rope" : "/norope");
}

ag::Var PairScoreModel::Forward(ag::Tape& tape, const std::vector<std::string>& tokens) const {
  return DecodeScores(tape, encoder_->Forward(tape, tokens), decoder_);
}

std::vector<ag::Param*> PairScoreModel::parameters() {
  auto out = encoder_->parameters();
  for (auto* p : decoder_.parameters()) out.push_back(p);
  return out;
}

std::vector<const ag::Param*> PairScoreModel::parameters() const {
  auto mutable_params = const_cast<PairScoreModel*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

std::string SerializeCheckpoint(const PairScoreModel& model) {
  Json header;
  header["encoder"] = model.encoder().config();
  header["d1"] = model.decoder().d1();
  header["d2"] = model.decoder().d2();
  header["rope_enabled"] = model.decoder().rope_enabled;
  header["rope_base"] = model.decoder().rope_base;
  header["seed"] = model.seed();
  header["train_config"] = model.train_config;
  auto manifest = Json::array();
  const auto params = model.parameters();
  for (const auto* p : params) {
    manifest.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
  }
  header["parameters"] = manifest;

  const std::string header_text = header.dump();
  std::string out(kMagic, sizeof kMagic);
  PutRaw(out, kVersion);
  PutRaw(out, static_cast<std::uint64_t>(header_text.size()));
  out += header_text;
  for (const auto* p : params) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) PutRaw(out, p->value.data()[i]);
  }
  return out;
}

void SaveCheckpoint(const PairScoreModel& model, const std::filesystem::path& path) {
  WriteFile(path, SerializeCheckpoint(model));
}

std::unique_ptr<PairScoreModel> DeserializeCheckpoint(
    std::string_view bytes, std::shared_ptr<const FeatureStore> features) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    Fail(ErrorKind::kParse, "not a pairfilter checkpoint");
  }
  std::size_t pos = sizeof kMagic;
  const auto version = GetRaw<std::uint32_t>(bytes, pos);
  if (version != kVersion) {
    Fail(ErrorKind::kParse, "unsupported checkpoint version " + std::to_string(version));
  }
  const auto header_len = GetRaw<std::uint64_t>(bytes, pos);
  if (pos + header_len > bytes.size()) Fail(ErrorKind::kParse, "checkpoint truncated");
  Json header;
  try {
    header = Json::parse(bytes.substr(pos, header_len));
  } catch (const Json::exception& e) {
    Fail(ErrorKind::kParse, std::string("checkpoint header: ") + e.what());
  }
  pos += header_len;

  const auto& enc = header.at("encoder");
  const auto mode = ParseEncoderMode(enc.at("mode").get<std::string>());
  const auto seed = header.at("seed").get<std::uint64_t>();
  std::unique_ptr<Encoder> encoder;
  if (mode == EncoderMode::kToy) {
    encoder = std::make_unique<ToyTransformerEncoder>(
        ToyEncoderConfig::FromJson(enc.at("toy")),
        enc.at("vocab").get<std::vector<std::string>>(), seed);
  } else {
    if (!features) {
      Fail(ErrorKind::kConfig, "checkpoint uses a pretrained adapter; supply its features file");
    }
    if (features->digest() != enc.at("features_digest").get<std::string>()) {
      Fail(ErrorKind::kConfig, "features file differs from the one used in training");
    }
    encoder = std::make_unique<PretrainedAdapterEncoder>(
        std::move(features), enc.at("max_length").get<std::size_t>());
  }
  const int d1 = header.at("d1").get<int>();
  const int d2 = header.at("d2").get<int>();
  auto decoder = DecoderParams::Init(d1, d2, header.at("rope_enabled").get<bool>(), seed);
  decoder.rope_base = header.at("rope_base").get<double>();

  auto model = std::make_unique<PairScoreModel>(std::move(encoder), std::move(decoder), seed);
  model->train_config = header.value("train_config", Json());
  const auto params = model->parameters();
  const auto& manifest = header.at("parameters");
  if (manifest.size() != params.size()) {
    Fail(ErrorKind::kParse, "checkpoint parameter count does not match its encoder");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto* p = params[i];
    if (manifest[i].at("name") != p->name || manifest[i].at("rows") != p->value.rows() ||
        manifest[i].at("cols") != p->value.cols()) {
      Fail(ErrorKind::kParse, "checkpoint parameter " + p->name + " has the wrong shape");
    }
    for (Eigen::Index k = 0; k < p->value.size(); ++k) {
      p->value.data()[k] = GetRaw<double>(bytes, pos);
    }
  }
  if (pos != bytes.size()) Fail(ErrorKind::kParse, "trailing bytes in checkpoint");
  model->MarkReady();
  return model;
}

std::unique_ptr<PairScoreModel> LoadCheckpoint(const std::filesystem::path& path,
                                               std::shared_ptr<const FeatureStore> features) {
  return DeserializeCheckpoint(ReadFile(path), std::move(features));
}

}  // namespace pairfilter
