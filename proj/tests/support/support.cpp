#include "support.h"

#include <cmath>
#include <complex>

#include "pairfilter/corpus/tokenizer.h"
#include "pairfilter/error.h"
#include "pairfilter/pipeline/triples.h"

namespace pairfilter::testing {

AnnotatedSentence MakeSentence(const std::string& id, const std::string& text,
                               std::vector<TripleAnnotation> triples) {
  AnnotatedSentence s;
  s.id = id;
  s.text = text;
  s.triples = std::move(triples);
  TokenizeInto(BasicTokenizer(), s);
  return s;
}

AnnotatedSentence GatesSentence() {
  return MakeSentence("gates",
                      "Bill Gates , one of the Microsoft founders , praised his rival Steve Jobs .",
                      {{"Bill Gates", "founders", "Microsoft"}, {"Bill Gates", "rival", "Steve Jobs"}});
}

Eigen::VectorXd ComplexRope(const Eigen::VectorXd& v, long position, double base) {
  const auto d = v.size();
  Eigen::VectorXd out(d);
  for (Eigen::Index m = 0; m < d / 2; ++m) {
    const double theta = std::pow(base, -2.0 * static_cast<double>(m) / static_cast<double>(d));
    const std::complex<double> z(v[2 * m], v[2 * m + 1]);
    const auto r = z * std::polar(1.0, static_cast<double>(position) * theta);
    out[2 * m] = r.real();
    out[2 * m + 1] = r.imag();
  }
  return out;
}

double LoopLoss(const Eigen::MatrixXd& logits, const PairLabelMatrix& labels) {
  long double total = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      const auto y = labels.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      if (y == 0) continue;
      const long double a = logits(i, j);
      const long double sigma = 1.0L / (1.0L + std::exp(-a));
      total += y > 0 ? -std::log(sigma) : -std::log(1.0L - sigma);
    }
  }
  return static_cast<double>(total);
}

double LoopMean(const Eigen::MatrixXd& m, int r0, int r1, int c0, int c1) {
  double sum = 0;
  int n = 0;
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      sum += m(r, c);
      ++n;
    }
  }
  return sum / n;
}

Eigen::MatrixXd LoopLinear(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w,
                           const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(x.rows(), w.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index o = 0; o < w.rows(); ++o) {
      double acc = b(0, o);
      for (Eigen::Index k = 0; k < x.cols(); ++k) acc += w(o, k) * x(i, k);
      out(i, o) = acc;
    }
  }
  return out;
}

OracleCounts BruteForceCounts(const std::vector<TripleAnnotation>& gold,
                              const std::vector<TripleAnnotation>& predicted) {
  auto distinct = [](const std::vector<TripleAnnotation>& v) {
    std::vector<TripleAnnotation> out;
    for (const auto& t : v) {
      bool seen = false;
      for (const auto& u : out) seen = seen || u == t;
      if (!seen) out.push_back(t);
    }
    return out;
  };
  const auto g = distinct(gold);
  const auto p = distinct(predicted);
  OracleCounts c;
  for (const auto& t : p) {
    bool hit = false;
    for (const auto& u : g) hit = hit || u == t;
    hit ? ++c.tp : ++c.fp;
  }
  c.fn = g.size() - c.tp;
  return c;
}

SynthesisConfig DenseConfig(std::uint64_t seed, int min_triples, int max_triples) {
  auto c = DefaultSynthesisConfig();
  c.seed = seed;
  c.min_triples = min_triples;
  c.max_triples = max_triples;
  return c;
}

std::vector<LabeledSentence> LabelAll(const std::vector<AnnotatedSentence>& sentences) {
  std::vector<LabeledSentence> out;
  for (const auto& s : sentences) out.push_back({s.id, s.tokens, SelfLabel(s).matrix});
  return out;
}

RelationList RelationsOf(const SynthesisConfig& config) {
  std::vector<std::string> names;
  for (const auto& t : config.templates) names.push_back(t.relation);
  return RelationList(names);
}

SimulatedLlm::SimulatedLlm(const std::vector<AnnotatedSentence>& gold, RelationList relations,
                           std::size_t stage1_budget, bool gullible)
    : relations_(std::move(relations)), budget_(stage1_budget), gullible_(gullible) {
  for (const auto& s : gold) by_id_[s.id] = &s;
}

std::size_t SimulatedLlm::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::string SimulatedLlm::Complete(const ChatRequest& request) {
  {
    std::lock_guard lock(mu_);
    ++calls_;
  }
  if (failing_.count(request.sentence_id)) Fail(ErrorKind::kTransport, "simulated outage");
  const auto it = by_id_.find(request.sentence_id);
  if (it == by_id_.end()) Fail(ErrorKind::kClient, "unknown sentence " + request.sentence_id);
  const auto& s = *it->second;
  const auto gold = DedupTriples(s.triples);

  std::vector<TripleAnnotation> out;
  if (request.stage == "stage1") {
    for (std::size_t i = 0; i < gold.size() && i < budget_; ++i) out.push_back(gold[i]);
    return SerializeTriples(out);
  }
  if (request.stage == "stage2") {
    const auto a = request.prompt.find("A = ");
    if (a != std::string::npos) {
      const auto end = request.prompt.find('\n', a);
      out = ParseTriples(request.prompt.substr(a + 4, end - a - 4), relations_).triples;
    }
  }
  const auto entities = s.LabeledEntities();
  for (const auto& x : entities) {
    for (const auto& y : entities) {
      if (x == y || request.prompt.find("(" + x + ", " + y + ")") == std::string::npos) continue;
      bool related = false;
      for (const auto& t : gold) {
        if (t.subject == x && t.object == y) {
          out.push_back(t);
          related = true;
        }
      }
      if (!related && gullible_) out.push_back({x, relations_.names().front(), y});
    }
  }
  return SerializeTriples(DedupTriples(out));
}

std::string RecordingClient::Complete(const ChatRequest& request) {
  auto response = inner_.Complete(request);
  std::lock_guard lock(mu_);
  recorded_[Sha256Hex(request.prompt)] = response;
  return response;
}

Json RecordingClient::Fixture() const {
  std::lock_guard lock(mu_);
  Json j = Json::object();
  for (const auto& [k, v] : recorded_) j[k] = v;
  return j;
}

ScoreMatrix GoldScorer::InferMatrix(const AnnotatedSentence& sentence) const {
  const auto labels = SelfLabel(sentence).matrix;
  const auto n = static_cast<Eigen::Index>(sentence.size());
  ScoreMatrix m{Eigen::MatrixXd::Constant(n, n, -2.0)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (labels.at(i, j) > 0) m.scores(i, j) = 2.0;
    }
  }
  return m;
}

}  // namespace pairfilter::testing
