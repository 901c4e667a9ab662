#pragma once

#include <Eigen/Dense>

#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "pairfilter/corpus/relations.h"
#include "pairfilter/corpus/self_label.h"
#include "pairfilter/corpus/sentence.h"
#include "pairfilter/corpus/synthetic.h"
#include "pairfilter/model/pair_score_model.h"
#include "pairfilter/model/trainer.h"
#include "pairfilter/pipeline/chat_client.h"

namespace pairfilter::testing {

// "Bill Gates , one of the Microsoft founders , praised his rival Steve Jobs ."
AnnotatedSentence GatesSentence();

AnnotatedSentence MakeSentence(const std::string& id, const std::string& text,
                               std::vector<TripleAnnotation> triples);

// ---- independent oracles ----

// Rotation through std::complex: z_m = v[2m] + i v[2m+1] times e^{i pos theta_m}.
Eigen::VectorXd ComplexRope(const Eigen::VectorXd& v, long position, double base = 10000.0);

// Per-cell loop in long double, -log(sigmoid) and -log(1 - sigmoid) spelled out.
double LoopLoss(const Eigen::MatrixXd& logits, const PairLabelMatrix& labels);

double LoopMean(const Eigen::MatrixXd& m, int r0, int r1, int c0, int c1);

// Plain loops computing x W^T + b.
Eigen::MatrixXd LoopLinear(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w,
                           const Eigen::MatrixXd& b);

// tp/fp/fn by scanning vectors, no sets.
struct OracleCounts {
  std::size_t tp = 0, fp = 0, fn = 0;
};
OracleCounts BruteForceCounts(const std::vector<TripleAnnotation>& gold,
                              const std::vector<TripleAnnotation>& predicted);

// Scores +2 on every cell the self-labeling marks positive and -2 elsewhere.
class GoldScorer : public PairScorer {
 public:
  ScoreMatrix InferMatrix(const AnnotatedSentence& sentence) const override;
  std::string identity() const override { return "gold"; }
};

// ---- synthetic experiment helpers ----

SynthesisConfig DenseConfig(std::uint64_t seed, int min_triples, int max_triples);
std::vector<LabeledSentence> LabelAll(const std::vector<AnnotatedSentence>& sentences);
RelationList RelationsOf(const SynthesisConfig& config);

// Stand-in for an LLM that answers from gold annotations.
//   stage1: the first `stage1_budget` gold triples only.
//   stage2: the triples listed under "A = " plus every gold triple whose
//           entity pair is quoted among the candidates.
//   restricted: gold triples of quoted candidate pairs.
// With `gullible`, a quoted pair that is not related gets a made-up triple
// with the first relation.
class SimulatedLlm : public ChatClient {
 public:
  SimulatedLlm(const std::vector<AnnotatedSentence>& gold, RelationList relations,
               std::size_t stage1_budget, bool gullible);

  std::string Complete(const ChatRequest& request) override;
  std::string model_name() const override { return "simulated"; }

  std::size_t calls() const;
  // Failing ids answer with a transport error every time.
  void FailOn(std::string id) { failing_.insert(std::move(id)); }

 private:
  std::map<std::string, const AnnotatedSentence*> by_id_;
  RelationList relations_;
  std::size_t budget_;
  bool gullible_;
  std::set<std::string> failing_;
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
};

// Wraps a client and remembers prompt-digest -> response for fixture files.
class RecordingClient : public ChatClient {
 public:
  explicit RecordingClient(ChatClient& inner) : inner_(inner) {}
  std::string Complete(const ChatRequest& request) override;
  std::string model_name() const override { return inner_.model_name(); }
  Json Fixture() const;

 private:
  ChatClient& inner_;
  mutable std::mutex mu_;
  std::map<std::string, std::string> recorded_;
};

}  // namespace pairfilter::testing
