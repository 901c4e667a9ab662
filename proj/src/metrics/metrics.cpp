#include "pairfilter/metrics/metrics.h"

#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "pairfilter/error.h"

namespace pairfilter {
namespace {

using TripleSet = std::set<TripleAnnotation>;

TripleSet Normalize(const std::vector<TripleAnnotation>& triples, const MatchOptions& options) {
  TripleSet out;
  for (const auto& t : triples) {
    TripleAnnotation n{Trim(t.subject), Trim(t.predicate), Trim(t.object)};
    if (options.fold_width) {
      n = {FoldWidth(n.subject), FoldWidth(n.predicate), FoldWidth(n.object)};
    }
    out.insert(std::move(n));
  }
  return out;
}

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

Counts Count(const TripleSet& gold, const TripleSet& predicted) {
  Counts c;
  for (const auto& t : predicted) {
    if (gold.count(t)) {
      ++c.tp;
    } else {
      ++c.fp;
    }
  }
  c.fn = gold.size() - c.tp;
  return c;
}

template <typename Keep>
MatchReport Aggregate(const std::vector<SentenceOutcome>& outcomes, const MatchOptions& options,
                      Keep keep, std::string stratum) {
  Counts total;
  std::size_t sentences = 0;
  for (const auto& o : outcomes) {
    const auto gold = Normalize(o.gold, options);
    if (!keep(o, gold)) continue;
    const auto c = Count(gold, Normalize(o.predicted, options));
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
    ++sentences;
  }
  auto report = FromCounts(total.tp, total.fp, total.fn);
  report.sentences = sentences;
  report.stratum = std::move(stratum);
  report.empty_stratum = sentences == 0;
  return report;
}

std::string Fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string Pad(const std::string& s, std::size_t width, bool right = false) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return right ? fill + s : s + fill;
}

}  // namespace

MatchReport FromCounts(std::size_t tp, std::size_t fp, std::size_t fn) {
  MatchReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  r.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  r.f1 = r.precision + r.recall == 0.0
             ? 0.0
             : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

MatchReport ExactMatch(const std::vector<TripleAnnotation>& gold,
                       const std::vector<TripleAnnotation>& predicted,
                       const MatchOptions& options) {
  const auto c = Count(Normalize(gold, options), Normalize(predicted, options));
  auto r = FromCounts(c.tp, c.fp, c.fn);
  r.sentences = 1;
  return r;
}

MatchReport Evaluate(const std::vector<SentenceOutcome>& outcomes, const MatchOptions& options) {
  return Aggregate(outcomes, options, [](const auto&, const auto&) { return true; }, "all");
}

MatchReport StratifyByTriples(const std::vector<SentenceOutcome>& outcomes,
                              std::size_t min_triples, const MatchOptions& options) {
  if (min_triples < 1) Fail(ErrorKind::kConfig, "triple-count threshold must be at least 1");
  return Aggregate(
      outcomes, options,
      [&](const SentenceOutcome&, const TripleSet& gold) { return gold.size() >= min_triples; },
      "triples>=" + std::to_string(min_triples));
}

MatchReport StratifyByLength(const std::vector<SentenceOutcome>& outcomes,
                             std::size_t min_tokens, const MatchOptions& options) {
  return Aggregate(
      outcomes, options,
      [&](const SentenceOutcome& o, const TripleSet&) { return o.token_count >= min_tokens; },
      "tokens>=" + std::to_string(min_tokens));
}

std::vector<CurvePoint> ComplexityCurve(const std::vector<SentenceOutcome>& outcomes,
                                        const std::vector<std::size_t>& thresholds,
                                        const MatchOptions& options) {
  std::vector<CurvePoint> curve;
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (i > 0 && thresholds[i] <= thresholds[i - 1]) {
      Fail(ErrorKind::kConfig, "curve thresholds must be strictly ascending");
    }
    const auto r = StratifyByTriples(outcomes, thresholds[i], options);
    curve.push_back({thresholds[i], r.recall, r.f1, r.sentences});
  }
  return curve;
}

std::string CurveToCsv(const std::vector<CurvePoint>& curve) {
  std::string out = "t,recall,f1\n";
  for (const auto& p : curve) {
    out += std::to_string(p.min_triples) + "," + Fixed(p.recall, 6) + "," + Fixed(p.f1, 6) + "\n";
  }
  return out;
}

std::string RenderLowRecallTable(const std::vector<SystemReport>& rows) {
  std::size_t sys_w = 6, str_w = 7;
  for (const auto& r : rows) {
    sys_w = std::max(sys_w, r.system.size());
    str_w = std::max(str_w, r.report.stratum.size());
  }
  std::string out = Pad("System", sys_w) + "  " + Pad("Stratum", str_w) + "  " +
                    Pad("Prec.", 6, true) + "  " + Pad("Reca.", 6, true) + "\n";
  for (const auto& r : rows) {
    out += Pad(r.system, sys_w) + "  " + Pad(r.report.stratum, str_w) + "  " +
           Pad(Fixed(100.0 * r.report.precision, 2), 6, true) + "  " +
           Pad(Fixed(100.0 * r.report.recall, 2), 6, true) + "\n";
  }
  return out;
}

OrderedJson ReportToJson(const MatchReport& r) {
  OrderedJson j;
  j["stratum"] = r.stratum;
  j["sentences"] = r.sentences;
  j["empty_stratum"] = r.empty_stratum;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["tp"] = r.tp;
  j["fp"] = r.fp;
  j["fn"] = r.fn;
  return j;
}

std::string RenderReports(const std::vector<MatchReport>& reports) {
  std::size_t w = 7;
  for (const auto& r : reports) w = std::max(w, r.stratum.size());
  std::string out = Pad("Stratum", w) + "  " + Pad("Sents", 6, true) + "  " +
                    Pad("Prec.", 6, true) + "  " + Pad("Reca.", 6, true) + "  " +
                    Pad("F1", 6, true) + "\n";
  for (const auto& r : reports) {
    if (r.empty_stratum) {
      out += Pad(r.stratum, w) + "  " + Pad("0", 6, true) + "  " + Pad("-", 6, true) + "  " +
             Pad("-", 6, true) + "  " + Pad("-", 6, true) + "  (empty stratum)\n";
      continue;
    }
    out += Pad(r.stratum, w) + "  " + Pad(std::to_string(r.sentences), 6, true) + "  " +
           Pad(Fixed(100.0 * r.precision, 2), 6, true) + "  " +
           Pad(Fixed(100.0 * r.recall, 2), 6, true) + "  " +
           Pad(Fixed(100.0 * r.f1, 2), 6, true) + "\n";
  }
  return out;
}

std::map<std::string, std::vector<TripleAnnotation>> LoadPredictions(
    const std::filesystem::path& path) {
  std::map<std::string, std::vector<TripleAnnotation>> out;
  ForEachJsonLine(path, [&](std::size_t line, const Json& rec) {
    try {
      auto& slot = out[rec.at("id").get<std::string>()];
      for (const auto& t : rec.at("triples")) {
        slot.push_back({t.at("s").get<std::string>(), t.at("p").get<std::string>(),
                        t.at("o").get<std::string>()});
      }
    } catch (const Json::exception& e) {
      Fail(ErrorKind::kParse, path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

std::vector<SentenceOutcome> JoinOutcomes(
    const std::vector<AnnotatedSentence>& gold,
    const std::map<std::string, std::vector<TripleAnnotation>>& predictions) {
  std::vector<SentenceOutcome> out;
  out.reserve(gold.size());
  for (const auto& s : gold) {
    SentenceOutcome o{s.id, s.triples, {}, s.content_length()};
    if (const auto it = predictions.find(s.id); it != predictions.end()) o.predicted = it->second;
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace pairfilter
