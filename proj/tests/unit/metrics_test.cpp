#include <doctest.h>

#include <filesystem>

#include "pairfilter/error.h"
#include "pairfilter/metrics/metrics.h"
#include "pairfilter/random.h"
#include "support.h"

using namespace pairfilter;
namespace pt = pairfilter::testing;

namespace {

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kIo;
}

std::vector<TripleAnnotation> RandomTriples(PortableRng& rng, int max_count) {
  std::vector<TripleAnnotation> out;
  const int n = rng.Between(0, max_count);
  for (int i = 0; i < n; ++i) {
    out.push_back({"e" + std::to_string(rng.Between(0, 3)), "r" + std::to_string(rng.Between(0, 1)),
                   "e" + std::to_string(rng.Between(0, 3))});
  }
  return out;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("exact match basics") {
  const TripleAnnotation a{"Bill Gates", "founders", "Microsoft"};
  const TripleAnnotation b{"Bill Gates", "rival", "Steve Jobs"};
  const auto r = ExactMatch({a, b}, {a, {"Bill Gates", "rival", "Jobs"}});
  CHECK(r.tp == 1);
  CHECK(r.fp == 1);
  CHECK(r.fn == 1);
  CHECK(r.precision == 0.5);
  CHECK(r.recall == 0.5);
  CHECK(r.f1 == 0.5);
  // Duplicates and padding do not change the result.
  const auto d = ExactMatch({a, b}, {a, a, {" Bill Gates ", "rival", "Steve Jobs "}});
  CHECK(d.tp == 2);
  CHECK(d.fp == 0);
  // Direction matters.
  CHECK(ExactMatch({a}, {{"Microsoft", "founders", "Bill Gates"}}).tp == 0);
}

TEST_CASE("zero denominators") {
  const auto none = ExactMatch({}, {});
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
  CHECK(ExactMatch({{"a", "r", "b"}}, {}).precision == 0.0);
  CHECK(ExactMatch({}, {{"a", "r", "b"}}).recall == 0.0);
}

TEST_CASE("width folding is opt-in") {
  const TripleAnnotation gold{"ＩＢＭ", "r", "纽约"};
  const TripleAnnotation pred{"IBM", "r", "纽约"};
  CHECK(ExactMatch({gold}, {pred}).tp == 0);
  CHECK(ExactMatch({gold}, {pred}, {.fold_width = true}).tp == 1);
}

TEST_CASE("counts agree with the brute-force oracle") {
  PortableRng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const auto gold = RandomTriples(rng, 6);
    const auto pred = RandomTriples(rng, 6);
    const auto r = ExactMatch(gold, pred);
    const auto o = pt::BruteForceCounts(gold, pred);
    CHECK(r.tp == o.tp);
    CHECK(r.fp == o.fp);
    CHECK(r.fn == o.fn);
  }
}

TEST_CASE("micro averaging") {
  std::vector<SentenceOutcome> o{
      {"1", {{"a", "r", "b"}}, {{"a", "r", "b"}}, 5},
      {"2", {{"a", "r", "b"}, {"c", "r", "d"}, {"e", "r", "f"}}, {{"x", "r", "y"}}, 9}};
  const auto r = Evaluate(o);
  CHECK(r.tp == 1);
  CHECK(r.fp == 1);
  CHECK(r.fn == 3);
  CHECK(r.precision == 0.5);
  CHECK(r.recall == 0.25);
  CHECK(r.sentences == 2);
}

TEST_CASE("strata") {
  std::vector<SentenceOutcome> o{
      {"1", {{"a", "r", "b"}}, {}, 5},
      {"2", {{"a", "r", "b"}, {"c", "r", "d"}, {"c", "r", "d"}}, {{"a", "r", "b"}}, 60}};
  CHECK(StratifyByTriples(o, 2).sentences == 1);
  // Duplicated gold triples count once.
  CHECK(StratifyByTriples(o, 3).empty_stratum);
  CHECK(StratifyByTriples(o, 3).stratum == "triples>=3");
  CHECK(StratifyByLength(o, 50).sentences == 1);
  CHECK(StratifyByLength(o, 50).recall == 0.5);
  CHECK(KindOf([&] { StratifyByTriples(o, 0); }) == ErrorKind::kConfig);
}

TEST_CASE("complexity curve") {
  std::vector<SentenceOutcome> o;
  for (int k = 1; k <= 8; ++k) {
    SentenceOutcome s{std::to_string(k), {}, {}, 10};
    for (int i = 0; i < k; ++i) s.gold.push_back({"e" + std::to_string(i), "r", "x"});
    s.predicted.push_back(s.gold.front());
    o.push_back(s);
  }
  const auto curve = ComplexityCurve(o, {1, 2, 3, 4, 5, 6, 7, 8});
  REQUIRE(curve.size() == 8);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    CHECK(curve[i].sentences == 8 - i);
    if (i > 0) CHECK(curve[i].recall <= curve[i - 1].recall);
  }
  CHECK(CurveToCsv(curve).rfind("t,recall,f1\n", 0) == 0);
  CHECK(KindOf([&] { ComplexityCurve(o, {3, 2}); }) == ErrorKind::kConfig);
}

TEST_CASE("report rendering") {
  auto r = ExactMatch({{"a", "r", "b"}, {"c", "r", "d"}}, {{"a", "r", "b"}});
  r.stratum = "triples>=5";
  const auto table = RenderLowRecallTable({{"full", r}});
  CHECK(table.find("100.00") != std::string::npos);
  CHECK(table.find("50.00") != std::string::npos);
  MatchReport empty;
  empty.empty_stratum = true;
  CHECK(RenderReports({empty}).find("(empty stratum)") != std::string::npos);
  CHECK(ReportToJson(r)["tp"] == 1);
}

TEST_CASE("joining predictions") {
  const auto dir = std::filesystem::temp_directory_path() / "pairfilter_metrics_test";
  std::filesystem::create_directories(dir);
  WriteFile(dir / "p.jsonl",
            R"({"id":"gates","triples":[{"s":"Bill Gates","p":"rival","o":"Steve Jobs"}]})" "\n");
  const auto preds = LoadPredictions(dir / "p.jsonl");
  const auto gold = std::vector<AnnotatedSentence>{
      pt::GatesSentence(), pt::MakeSentence("other", "A met B .", {{"A", "met", "B"}})};
  const auto outcomes = JoinOutcomes(gold, preds);
  REQUIRE(outcomes.size() == 2);
  CHECK(outcomes[0].predicted.size() == 1);
  CHECK(outcomes[0].token_count == 15);
  CHECK(outcomes[1].predicted.empty());
  const auto r = Evaluate(outcomes);
  CHECK(r.tp == 1);
  CHECK(r.fn == 2);
}

}  // TEST_SUITE
