#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "pairfilter/corpus/self_label.h"
#include "pairfilter/corpus/synthetic.h"
#include "pairfilter/corpus/tokenizer.h"
#include "pairfilter/error.h"
#include "pairfilter/model/autograd.h"
#include "pairfilter/model/decoder.h"
#include "pairfilter/model/loss.h"
#include "pairfilter/model/rope.h"
#include "pairfilter/model/trainer.h"
#include "pairfilter/random.h"
#include "support.h"

using namespace pairfilter;
namespace pt = pairfilter::testing;

namespace {

Eigen::MatrixXd RandomMatrix(int rows, int cols, std::uint64_t seed, double scale = 1.0) {
  PortableRng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.Normal();
  return m;
}

PairLabelMatrix RandomLabels(std::size_t n, std::uint64_t seed) {
  PortableRng rng(seed);
  PairLabelMatrix m(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    for (std::size_t j = 1; j + 1 < n; ++j) {
      m.set(i, j, static_cast<std::int8_t>(rng.Between(-1, 1)));
    }
  }
  return m;
}

ToyEncoderConfig TinyToy() {
  ToyEncoderConfig c;
  c.d_model = 8;
  c.layers = 1;
  c.heads = 2;
  c.ffn = 12;
  c.max_length = 40;
  return c;
}

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kIo;
}

// Central differences over every entry of every parameter, compared with the
// tape gradient.
void CheckGradients(PairScoreModel& model, const std::vector<std::string>& tokens,
                    const PairLabelMatrix& labels) {
  const auto params = model.parameters();
  ag::Tape tape;
  const auto loss = ag::MaskedBce(tape, model.Forward(tape, tokens), labels, 1.0);
  tape.Backward(loss);
  std::vector<ag::Matrix> analytic;
  for (auto* p : params) analytic.push_back(tape.ParamGrad(*p));

  auto eval = [&] {
    ag::Tape t(false);
    return t.value(ag::MaskedBce(t, model.Forward(t, tokens), labels, 1.0))(0, 0);
  };
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& value = params[k]->value;
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      const double keep = value.data()[i];
      value.data()[i] = keep + h;
      const double up = eval();
      value.data()[i] = keep - h;
      const double down = eval();
      value.data()[i] = keep;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic[k].data()[i];
      const double rel = std::abs(numeric - a) / std::max(1.0, std::abs(numeric) + std::abs(a));
      worst = std::max(worst, rel);
      if (rel > 1e-5) {
        INFO(params[k]->name << "[" << i << "] numeric " << numeric << " analytic " << a);
        CHECK(rel <= 1e-5);
      }
    }
  }
  CHECK(worst < 1e-5);
}

std::vector<LabeledSentence> SmallLabeled(std::size_t count, std::uint64_t seed) {
  BasicTokenizer tok;
  return pt::LabelAll(GenerateSynthetic(pt::DenseConfig(seed, 1, 3), count, tok));
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("rope matches complex rotation") {
  for (int d : {2, 8, 64}) {
    const Eigen::VectorXd v = RandomMatrix(d, 1, 40 + d).col(0);
    for (long pos : {0L, 1L, 7L, 159L}) {
      CHECK((RopeRotate(v, pos) - pt::ComplexRope(v, pos)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  CHECK(KindOf([] { RopeRotate(Eigen::VectorXd::Ones(3), 1); }) == ErrorKind::kConfig);
}

TEST_CASE("rope preserves norms and depends on relative position") {
  const Eigen::VectorXd q = RandomMatrix(16, 1, 1).col(0);
  const Eigen::VectorXd k = RandomMatrix(16, 1, 2).col(0);
  CHECK(RopeRotate(q, 37).norm() == doctest::Approx(q.norm()).epsilon(1e-12));
  const double a = RopeRotate(q, 3).dot(RopeRotate(k, 10));
  const double b = RopeRotate(q, 50).dot(RopeRotate(k, 57));
  CHECK(a == doctest::Approx(b).epsilon(1e-10));
  const Eigen::MatrixXd rows = RandomMatrix(5, 16, 3);
  const auto back = RopeRotateRows(RopeRotateRows(rows, 2), 2, kRopeBase, true);
  CHECK((back - rows).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("decoder projection matches loop linear") {
  const auto params = DecoderParams::Init(6, 4, true, 9);
  HiddenSequence hidden{RandomMatrix(5, 6, 4)};
  const auto qk = ProjectQk(hidden, params);
  CHECK((qk.q - pt::LoopLinear(hidden.vectors, params.wq.value, params.bq.value))
            .cwiseAbs().maxCoeff() < 1e-12);
  CHECK((qk.k - pt::LoopLinear(hidden.vectors, params.wk.value, params.bk.value))
            .cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("decoder scores match the per-cell formula") {
  for (bool rope : {true, false}) {
    auto params = DecoderParams::Init(6, 4, rope, 11);
    params.bq.value = RandomMatrix(1, 4, 12);
    params.bk.value = RandomMatrix(1, 4, 13);
    HiddenSequence hidden{RandomMatrix(7, 6, 5)};
    const auto qk = ProjectQk(hidden, params);
    const auto scores = ComputeScores(qk, params);
    REQUIRE(scores.size() == 7);
    for (int i = 0; i < 7; ++i) {
      for (int j = 0; j < 7; ++j) {
        Eigen::VectorXd q = qk.q.row(i).transpose();
        Eigen::VectorXd k = qk.k.row(j).transpose();
        if (rope) {
          q = pt::ComplexRope(q, i);
          k = pt::ComplexRope(k, j);
        }
        CHECK(scores.at(i, j) == doctest::Approx(q.dot(k) / 2.0).epsilon(1e-10));
      }
    }
    ag::Tape tape(false);
    const auto taped = tape.value(DecodeScores(tape, tape.Constant(hidden.vectors), params));
    CHECK((taped - scores.scores).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("decoder scores are directional") {
  auto params = DecoderParams::Init(6, 4, true, 21);
  HiddenSequence hidden{RandomMatrix(5, 6, 22)};
  const auto s = ComputeScores(ProjectQk(hidden, params), params);
  CHECK(std::abs(s.at(1, 3) - s.at(3, 1)) > 1e-6);
}

TEST_CASE("masked loss matches the loop oracle") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto n = 3 + seed % 9;
    const auto logits = RandomMatrix(n, n, seed, 4.0);
    const auto labels = RandomLabels(n, seed + 100);
    CHECK(MaskedBceLoss(logits, labels) ==
          doctest::Approx(pt::LoopLoss(logits, labels)).epsilon(1e-12));
  }
}

TEST_CASE("masked loss ignores unlabeled cells") {
  const auto labels = RandomLabels(8, 5);
  auto logits = RandomMatrix(8, 8, 6);
  const double before = MaskedBceLoss(logits, labels);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      if (labels.at(i, j) == 0) logits(i, j) = 1e6 * ((i + j) % 2 ? 1 : -1);
    }
  }
  CHECK(MaskedBceLoss(logits, labels) == before);
  CHECK(MaskedBceGradient(logits, labels).cwiseAbs().maxCoeff() < 10.0);
}

TEST_CASE("masked loss edge cases") {
  PairLabelMatrix zero(4);
  CHECK(MaskedBceLoss(Eigen::MatrixXd::Zero(4, 4), zero) == 0.0);
  PairLabelMatrix one(3);
  one.set(1, 1, 1);
  Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(3, 3);
  CHECK(MaskedBceLoss(logits, one) == doctest::Approx(std::log(2.0)));
  logits(1, 1) = 800.0;
  CHECK(std::isfinite(MaskedBceLoss(logits, one)));
  one.set(1, 1, -1);
  CHECK(MaskedBceLoss(logits, one) == doctest::Approx(800.0));
  CHECK(Softplus(-800.0) >= 0.0);
  CHECK(Softplus(800.0) == doctest::Approx(800.0));
}

TEST_CASE("loss gradient matches finite differences") {
  const auto labels = RandomLabels(6, 8);
  auto logits = RandomMatrix(6, 6, 9, 2.0);
  const auto g = MaskedBceGradient(logits, labels, 0.5);
  const double h = 1e-6;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      const double keep = logits(i, j);
      logits(i, j) = keep + h;
      const double up = MaskedBceLoss(logits, labels, 0.5);
      logits(i, j) = keep - h;
      const double down = MaskedBceLoss(logits, labels, 0.5);
      logits(i, j) = keep;
      CHECK(g(i, j) == doctest::Approx((up - down) / (2 * h)).epsilon(1e-6));
    }
  }
}

TEST_CASE("full model gradients match finite differences") {
  const auto s = pt::GatesSentence();
  const auto labels = SelfLabel(s).matrix;
  const auto vocab = ToyTransformerEncoder::BuildVocab({s.tokens});
  for (bool rotary : {true, false}) {
    CAPTURE(rotary);
    auto config = TinyToy();
    config.rotary_attention = rotary;
    auto encoder = std::make_unique<ToyTransformerEncoder>(config, vocab, 3);
    PairScoreModel model(std::move(encoder), DecoderParams::Init(8, 4, true, 4), 3);
    CheckGradients(model, s.tokens, labels);
  }
}

TEST_CASE("encoder guards") {
  const auto s = pt::GatesSentence();
  ToyTransformerEncoder enc(TinyToy(), ToyTransformerEncoder::BuildVocab({s.tokens}), 1);
  CHECK(enc.Encode(s.tokens).size() == s.size());
  CHECK(enc.Encode(s.tokens).dim() == 8);
  std::vector<std::string> long_tokens(41, "x");
  CHECK(KindOf([&] { enc.Encode(long_tokens); }) == ErrorKind::kLength);
  CHECK(KindOf([&] { enc.Encode({"[CLS]", "[SEP]"}); }) == ErrorKind::kValidation);
  // Unknown tokens map to [UNK] rather than failing.
  CHECK(enc.Encode({"[CLS]", "never-seen", "[SEP]"}).size() == 3);
  auto odd = TinyToy();
  odd.heads = 8;  // head_dim 1
  CHECK(KindOf([&] { ToyTransformerEncoder(odd, {"a"}, 1); }) == ErrorKind::kConfig);
}

TEST_CASE("pretrained adapter reads stored vectors") {
  auto store = std::make_shared<FeatureStore>();
  BasicTokenizer tok;
  const auto text = "Alice met Bob .";
  const auto tokens = tok.Tokenize(text);
  const auto hidden = RandomMatrix(static_cast<int>(tokens.tokens.size()), 6, 31);
  store->Add(text, tokens, hidden);
  PretrainedAdapterEncoder enc(store);
  CHECK(enc.parameters().empty());
  CHECK((enc.Encode(tokens.tokens).vectors - hidden).cwiseAbs().maxCoeff() == 0.0);
  CHECK(KindOf([&] { store->Tokenize("missing sentence"); }) == ErrorKind::kLookup);

  auto labeled = pt::LabelAll({pt::MakeSentence("a", text, {{"Alice", "met", "Bob"}})});
  labeled[0].tokens = tokens.tokens;
  TrainConfig config;
  config.encoder_mode = EncoderMode::kPretrainedAdapter;
  config.epochs = 30;
  config.d2 = 4;
  config.token_dropout = 0.0;
  TrainHooks hooks;
  hooks.features = store;
  const auto result = Train(labeled, config, hooks);
  CHECK(result.final_loss < result.initial_loss);
  const auto bytes = SerializeCheckpoint(*result.model);
  CHECK(KindOf([&] { DeserializeCheckpoint(bytes); }) == ErrorKind::kConfig);
  const auto back = DeserializeCheckpoint(bytes, store);
  CHECK((back->InferTokens(tokens.tokens).scores -
         result.model->InferTokens(tokens.tokens).scores).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("inference before training is a state error") {
  const auto s = pt::GatesSentence();
  PairScoreModel model(std::make_unique<ToyTransformerEncoder>(
                           TinyToy(), ToyTransformerEncoder::BuildVocab({s.tokens}), 1),
                       DecoderParams::Init(8, 4, true, 1), 1);
  CHECK(KindOf([&] { model.InferMatrix(s); }) == ErrorKind::kState);
  CHECK(KindOf([&] {
          PairScoreModel(std::make_unique<ToyTransformerEncoder>(TinyToy(), std::vector<std::string>{}, 1),
                         DecoderParams::Init(6, 4, true, 1), 1);
        }) == ErrorKind::kShape);
}

TEST_CASE("training config validation") {
  TrainConfig c;
  c.epochs = 0;
  CHECK(KindOf([&] { c.Validate(); }) == ErrorKind::kConfig);
  c = {};
  c.learning_rate = -1;
  CHECK(KindOf([&] { c.Validate(); }) == ErrorKind::kConfig);
  c = {};
  c.d2 = 5;
  CHECK(KindOf([&] { c.Validate(); }) == ErrorKind::kConfig);
  c.rope_enabled = false;
  CHECK_NOTHROW(c.Validate());
  c = {};
  c.token_dropout = 1.0;
  CHECK(KindOf([&] { c.Validate(); }) == ErrorKind::kConfig);
  const auto round = TrainConfig::FromJson(TrainConfig{}.ToJson());
  CHECK(round.ToJson() == TrainConfig{}.ToJson());
  CHECK(KindOf([] { TrainConfig::FromJson({{"epochs", "many"}}); }) == ErrorKind::kConfig);
}

TEST_CASE("training requires labels") {
  BasicTokenizer tok;
  auto s = pt::MakeSentence("z", "nothing here .", {});
  const auto labeled = pt::LabelAll({s});
  CHECK(KindOf([&] { Train(labeled, TrainConfig{}); }) == ErrorKind::kValidation);
}

TEST_CASE("training lowers the loss and is deterministic") {
  const auto data = SmallLabeled(24, 5);
  TrainConfig config;
  config.epochs = 6;
  config.toy = TinyToy();
  config.d2 = 8;
  std::vector<double> seen;
  TrainHooks hooks;
  hooks.on_epoch = [&](const EpochReport& r) { seen.push_back(r.running_loss); };
  const auto a = Train(data, config, hooks);
  const auto b = Train(data, config);
  CHECK(a.history.size() == 6);
  CHECK(seen.size() == 6);
  CHECK(a.final_loss < a.initial_loss);
  CHECK(SerializeCheckpoint(*a.model) == SerializeCheckpoint(*b.model));
  config.seed = 99;
  CHECK(SerializeCheckpoint(*Train(data, config).model) != SerializeCheckpoint(*a.model));
}

TEST_CASE("all-zero sentences are skipped") {
  auto data = SmallLabeled(6, 6);
  data.push_back(pt::LabelAll({pt::MakeSentence("z", "nothing here .", {})})[0]);
  TrainConfig config;
  config.epochs = 1;
  config.toy = TinyToy();
  config.d2 = 8;
  CHECK(Train(data, config).skipped == 1);
}

TEST_CASE("diverging training raises") {
  const auto data = SmallLabeled(4, 7);
  TrainConfig config;
  config.epochs = 3;
  config.toy = TinyToy();
  config.d2 = 8;
  config.learning_rate = 1e300;
  CHECK(KindOf([&] { Train(data, config); }) == ErrorKind::kTraining);
}

TEST_CASE("checkpoint round trip and per-epoch files") {
  const auto data = SmallLabeled(8, 8);
  TrainConfig config;
  config.epochs = 2;
  config.toy = TinyToy();
  config.d2 = 8;
  const auto dir = std::filesystem::temp_directory_path() / "pairfilter_ckpt_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  TrainHooks hooks;
  hooks.checkpoint_dir = dir;
  const auto result = Train(data, config, hooks);
  CHECK(std::filesystem::exists(dir / "epoch-001.ckpt"));
  CHECK(std::filesystem::exists(dir / "epoch-002.ckpt"));
  const auto path = dir / "model.ckpt";
  SaveCheckpoint(*result.model, path);
  CHECK(ReadFile(path) == ReadFile(dir / "epoch-002.ckpt"));
  const auto loaded = LoadCheckpoint(path);
  for (const auto& s : data) {
    CHECK((loaded->InferTokens(s.tokens).scores - result.model->InferTokens(s.tokens).scores)
              .cwiseAbs().maxCoeff() == 0.0);
  }
  auto bytes = ReadFile(path);
  CHECK(KindOf([&] { DeserializeCheckpoint(bytes.substr(0, bytes.size() - 3)); }) ==
        ErrorKind::kParse);
  CHECK(KindOf([&] { DeserializeCheckpoint("nope"); }) == ErrorKind::kParse);
}

TEST_CASE("one encoder pass per inference") {
  const auto data = SmallLabeled(4, 9);
  TrainConfig config;
  config.epochs = 1;
  config.toy = TinyToy();
  config.d2 = 8;
  auto result = Train(data, config);
  result.model->encoder().ResetInvocationCount();
  result.model->InferTokens(data[0].tokens);
  CHECK(result.model->encoder().invocation_count() == 1);
}

TEST_CASE("adamw step") {
  ag::Param p{"p", Eigen::MatrixXd::Constant(1, 2, 1.0)};
  AdamW opt({&p}, {.learning_rate = 0.1, .weight_decay = 0.0});
  opt.Step({(Eigen::MatrixXd(1, 2) << 2.0, -3.0).finished()});
  // First bias-corrected step moves each entry by lr * sign(g).
  CHECK(p.value(0, 0) == doctest::Approx(0.9));
  CHECK(p.value(0, 1) == doctest::Approx(1.1));
  ag::Param q{"q", Eigen::MatrixXd::Constant(1, 1, 2.0)};
  AdamW decay({&q}, {.learning_rate = 0.1, .weight_decay = 0.5});
  decay.Step({Eigen::MatrixXd::Zero(1, 1)});
  CHECK(q.value(0, 0) == doctest::Approx(2.0 * 0.95));
  CHECK(KindOf([&] { decay.Step({}); }) == ErrorKind::kShape);
}

}  // TEST_SUITE
