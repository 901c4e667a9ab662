#include <doctest.h>

#include <filesystem>

#include "pairfilter/corpus/dataset.h"
#include "pairfilter/corpus/relations.h"
#include "pairfilter/corpus/self_label.h"
#include "pairfilter/corpus/stats.h"
#include "pairfilter/corpus/synthetic.h"
#include "pairfilter/corpus/tokenizer.h"
#include "pairfilter/error.h"
#include "pairfilter/random.h"
#include "support.h"

using namespace pairfilter;
using pairfilter::testing::GatesSentence;
using pairfilter::testing::MakeSentence;

namespace {

std::filesystem::path TempFile(const std::string& name, const std::string& contents) {
  const auto dir = std::filesystem::temp_directory_path() / "pairfilter_corpus_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  WriteFile(path, contents);
  return path;
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

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("tokenizer adds boundary tokens and byte offsets") {
  BasicTokenizer tok;
  const auto t = tok.Tokenize("Bill Gates founded Microsoft.");
  REQUIRE(t.tokens.size() == 7);
  CHECK(t.tokens.front() == "[CLS]");
  CHECK(t.tokens.back() == "[SEP]");
  CHECK(t.tokens[4] == "Microsoft");
  CHECK(t.tokens[5] == ".");
  CHECK(t.offsets[4] == CharSpan{19, 28});
}

TEST_CASE("tokenizer splits CJK characters") {
  BasicTokenizer tok;
  const auto t = tok.Tokenize("马云创立阿里巴巴");
  CHECK(t.tokens.size() == 10);
  CHECK(t.tokens[1] == "马");
}

TEST_CASE("relation normalization") {
  const auto n = RelationNormalizer::Default();
  CHECK(n.Normalize("/location/location/contains") == "location contains");
  CHECK(n.Normalize("location contains") == "location contains");
  CHECK(n.Normalize("/people/person/place_of_birth") == "place of birth");
  CHECK(KindOf([&] { n.Normalize(""); }) == ErrorKind::kValidation);
  CHECK(KindOf([&] { n.Normalize("/not/in/table"); }) == ErrorKind::kValidation);
}

TEST_CASE("normalization table file") {
  const auto path = TempFile("norm.tsv", "# comment\n/a/b/c\tc thing\n\n");
  const auto n = RelationNormalizer::Load(path);
  CHECK(n.Normalize("/a/b/c") == "c thing");
}

TEST_CASE("load_dataset") {
  BasicTokenizer tok;
  RelationList relations({"founders", "rival"});
  DatasetOptions options{&tok, nullptr, &relations};

  SUBCASE("one line") {
    const auto path = TempFile(
        "one.jsonl",
        R"({"text":"Bill Gates founded Microsoft.","triples":[{"s":"Bill Gates","p":"founders","o":"Microsoft"}]})"
        "\n");
    const auto data = LoadDataset(path, options);
    REQUIRE(data.size() == 1);
    CHECK(data[0].triples.size() == 1);
    CHECK(data[0].id == "1");
    CHECK(data[0].triples[0] == TripleAnnotation{"Bill Gates", "founders", "Microsoft"});
  }
  SUBCASE("empty file") {
    CHECK(LoadDataset(TempFile("empty.jsonl", ""), options).empty());
  }
  SUBCASE("unknown predicate") {
    const auto path = TempFile(
        "bad.jsonl",
        R"({"text":"Bill Gates founded Microsoft.","triples":[{"s":"Bill Gates","p":"ceo","o":"Microsoft"}]})"
        "\n");
    try {
      LoadDataset(path, options);
      FAIL("expected validation error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kValidation);
      CHECK(std::string(e.what()).find("ceo") != std::string::npos);
    }
  }
  SUBCASE("malformed line names the line") {
    const auto path = TempFile("broken.jsonl", "{\"text\":\"a b c\",\"triples\":[]}\n{oops\n");
    try {
      LoadDataset(path, options);
      FAIL("expected parse error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kParse);
      CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
  }
  SUBCASE("structured relations are normalized on load") {
    RelationNormalizer norm = RelationNormalizer::Default();
    RelationList nyt({"location contains"});
    DatasetOptions nyt_options{&tok, &norm, &nyt};
    const auto path = TempFile(
        "nyt.jsonl",
        R"({"id":"n1","text":"Queens is in New York .","triples":[{"s":"New York","p":"/location/location/contains","o":"Queens"}]})"
        "\n");
    const auto data = LoadDataset(path, nyt_options);
    CHECK(data[0].triples[0].predicate == "location contains");
  }
}

TEST_CASE("align_spans on the Gates sentence") {
  const auto s = GatesSentence();
  const auto ms = AlignSpans(s, "Microsoft");
  REQUIRE(ms.size() == 1);
  CHECK(ms[0].length() == 1);
  const auto sj = AlignSpans(s, "Steve Jobs");
  REQUIRE(sj.size() == 1);
  CHECK(sj[0].length() == 2);
  CHECK(AlignSpans(s, "Larry Page").empty());
  // Partial token matches do not count.
  CHECK(AlignSpans(s, "Micro").empty());
}

TEST_CASE("align_spans finds every occurrence") {
  const auto s = MakeSentence("m", "Paris is nice and Paris is big .", {});
  CHECK(AlignSpans(s, "Paris").size() == 2);
}

TEST_CASE("self_label on the Gates sentence") {
  const auto s = GatesSentence();
  const auto r = SelfLabel(s);
  CHECK(r.entity_pairs.size() == 6);
  CHECK(r.positive_pairs() == 2);
  CHECK(r.negative_pairs() == 4);

  const int microsoft = AlignSpans(s, "Microsoft")[0].start;
  const auto jobs = AlignSpans(s, "Steve Jobs")[0];
  const auto founders = AlignSpans(s, "founders")[0].start;
  CHECK(r.matrix.at(microsoft, jobs.start) == -1);
  CHECK(r.matrix.at(microsoft, jobs.end) == -1);
  CHECK(r.matrix.at(founders, microsoft) == 0);
  // Positive cross-product: Bill Gates x Microsoft is 2 x 1.
  const auto gates = AlignSpans(s, "Bill Gates")[0];
  CHECK(r.matrix.at(gates.start, microsoft) == 1);
  CHECK(r.matrix.at(gates.end, microsoft) == 1);
  CHECK(r.matrix.Count(1) == 2 + 4);
  CHECK(r.matrix.Count(-1) == 2 /*MS,Gates*/ + 2 /*MS,SJ*/ + 4 /*SJ,BG*/ + 2 /*SJ,MS*/);
}

TEST_CASE("self_label edge cases") {
  SUBCASE("no triples gives an all-zero matrix") {
    CHECK(SelfLabel(MakeSentence("z", "nothing here .", {})).matrix.AllZero());
  }
  SUBCASE("one triple over single-token entities") {
    const auto r = SelfLabel(MakeSentence("o", "Alice met Bob .", {{"Alice", "met", "Bob"}}));
    CHECK(r.matrix.Count(1) == 1);
    CHECK(r.matrix.Count(-1) == 1);
    CHECK(r.matrix.at(1, 3) == 1);
    CHECK(r.matrix.at(3, 1) == -1);
  }
  SUBCASE("unalignable entity") {
    auto s = MakeSentence("u", "Alice met Bob .", {{"Alice", "met", "Bob"}});
    s.triples.push_back({"Ali", "met", "Bob"});
    CHECK(KindOf([&] { SelfLabel(s); }) == ErrorKind::kLabeling);
  }
  SUBCASE("overlapping entities with opposite labels conflict") {
    // "New York" and "York" overlap; (New York, Ann) positive but (York, Ann)
    // negative hits the same cells.
    auto s = MakeSentence("c", "Ann lives in New York .",
                          {{"Ann", "lives in", "New York"}, {"York", "near", "New York"}});
    CHECK(KindOf([&] { SelfLabel(s); }) == ErrorKind::kConflict);
  }
}

TEST_CASE("split_to_token_pairs") {
  const auto s = GatesSentence();
  const auto pairs = SplitToTokenPairs(AlignSpans(s, "Microsoft")[0], AlignSpans(s, "Steve Jobs")[0], -1);
  REQUIRE(pairs.size() == 2);
  CHECK(s.tokens[pairs[0].row] == "Microsoft");
  CHECK(s.tokens[pairs[0].col] == "Steve");
  CHECK(s.tokens[pairs[1].col] == "Jobs");
  CHECK(pairs[0].label == -1);
  CHECK(SplitToTokenPairs({2, 2}, {5, 5}, 1).size() == 1);
  CHECK(SplitToTokenPairs({2, 3}, {5, 6}, 1).size() == 4);
  CHECK(KindOf([&] { SplitToTokenPairs({0, 1}, {5, 6}, 1); }) == ErrorKind::kBounds);
}

TEST_CASE("apply_token_pairs rejects boundary cells and conflicts") {
  PairLabelMatrix m(5);
  CHECK(KindOf([&] { ApplyTokenPairs(m, {{0, 2, 1}}); }) == ErrorKind::kBounds);
  CHECK(KindOf([&] { ApplyTokenPairs(m, {{2, 4, 1}}); }) == ErrorKind::kBounds);
  ApplyTokenPairs(m, {{1, 2, 1}});
  ApplyTokenPairs(m, {{1, 2, 1}});
  CHECK(KindOf([&] { ApplyTokenPairs(m, {{1, 2, -1}}); }) == ErrorKind::kConflict);
}

TEST_CASE("false_negative_audit") {
  const auto s = GatesSentence();
  CHECK(FalseNegativeAudit(s, {}).flagged.empty());
  CHECK(FalseNegativeAudit(s, {{"Steve Jobs", "Microsoft"}}).flagged.size() == 1);
  CHECK(FalseNegativeAudit(s, {{"Bill Gates", "Microsoft"}}).flagged.empty());
}

TEST_CASE("label invariants over synthetic sentences") {
  BasicTokenizer tok;
  const auto data = GenerateSynthetic(pairfilter::testing::DenseConfig(3, 1, 6), 60, tok);
  for (const auto& s : data) {
    const auto r = SelfLabel(s);
    const auto n = s.size();
    // Mask safety.
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t b : {std::size_t{0}, n - 1}) {
        CHECK(r.matrix.at(i, b) == 0);
        CHECK(r.matrix.at(b, i) == 0);
      }
    }
    // Label conservation (synthetic entities occur once and never overlap).
    std::size_t pos = 0, neg = 0;
    for (const auto& p : r.entity_pairs) {
      const auto cells = AlignSpans(s, p.subject)[0].length() * AlignSpans(s, p.object)[0].length();
      (p.label > 0 ? pos : neg) += static_cast<std::size_t>(cells);
    }
    CHECK(r.matrix.Count(1) == pos);
    CHECK(r.matrix.Count(-1) == neg);
    // Every ordered pair of distinct entities carries a label.
    const auto entities = s.LabeledEntities();
    CHECK(r.entity_pairs.size() == entities.size() * (entities.size() - 1));
  }
}

TEST_CASE("sparse label serialization round-trips") {
  const auto s = GatesSentence();
  const auto r = SelfLabel(s);
  const auto j = LabeledSentenceToJson(s, r.matrix);
  CHECK(j["n"] == s.size());
  const auto back = LabeledSentenceFromJson(Json::parse(j.dump()), 1);
  CHECK(back.labels == r.matrix);
  CHECK(back.tokens == s.tokens);
}

TEST_CASE("generate_synthetic") {
  BasicTokenizer tok;
  auto config = DefaultSynthesisConfig();
  SUBCASE("deterministic") {
    const auto a = DatasetToJsonl(GenerateSynthetic(config, 10, tok));
    const auto b = DatasetToJsonl(GenerateSynthetic(config, 10, tok));
    CHECK(a == b);
    CHECK(GenerateSynthetic(config, 10, tok).size() == 10);
  }
  SUBCASE("zero sentences") { CHECK(GenerateSynthetic(config, 0, tok).empty()); }
  SUBCASE("fixed triple count") {
    config.min_triples = config.max_triples = 5;
    const auto data = GenerateSynthetic(config, 20, tok);
    const auto stats = ComputeStats(data, {0});
    REQUIRE(stats[0].avg_triples.has_value());
    CHECK(*stats[0].avg_triples == doctest::Approx(5.0));
  }
  SUBCASE("gold recoverable from text") {
    for (const auto& s : GenerateSynthetic(config, 30, tok)) {
      for (const auto& t : s.triples) {
        CHECK(AlignSpans(s, t.subject).size() == 1);
        CHECK(AlignSpans(s, t.object).size() == 1);
      }
    }
  }
  SUBCASE("insufficient vocabulary") {
    config.entities["country"] = {"France"};
    config.entities["city"] = {"Paris"};
    config.templates = {{"capital", "country", "city", {"{o} is the capital of {s}"}}};
    config.min_triples = config.max_triples = 3;
    CHECK(KindOf([&] { GenerateSynthetic(config, 1, tok); }) == ErrorKind::kGeneration);
  }
}

TEST_CASE("compute_stats") {
  SUBCASE("empty dataset") {
    const auto rows = ComputeStats({}, {0});
    CHECK(rows[0].sentence_count == 0);
    CHECK_FALSE(rows[0].avg_triples.has_value());
    CHECK(RenderStatsTable(rows).find('-') != std::string::npos);
  }
  SUBCASE("hand mean") {
    std::vector<AnnotatedSentence> data{
        MakeSentence("a", "A met B .", {{"A", "met", "B"}}),
        MakeSentence("b", "A met B and C .", {{"A", "met", "B"}, {"A", "met", "C"}}),
        MakeSentence("c", "A met B and C and D .",
                     {{"A", "met", "B"}, {"A", "met", "C"}, {"A", "met", "D"}})};
    const auto rows = ComputeStats(data, {0, 6});
    CHECK(*rows[0].avg_triples == doctest::Approx(2.0));
    CHECK(*rows[0].avg_entities == doctest::Approx(3.0));
    CHECK(rows[0].sentence_count == 3);
    CHECK(rows[1].sentence_count == 2);
  }
}

}  // TEST_SUITE
