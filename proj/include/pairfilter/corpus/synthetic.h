#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pairfilter/corpus/sentence.h"
#include "pairfilter/corpus/tokenizer.h"
#include "pairfilter/util.h"

namespace pairfilter {

// A relation with its surface patterns. Each pattern holds one "{s}" and one
// "{o}" slot, e.g. "{s} was born in {o}".
struct RelationTemplate {
  std::string relation;
  std::string subject_type;
  std::string object_type;
  std::vector<std::string> patterns;
};

struct SynthesisConfig {
  std::vector<RelationTemplate> templates;
  std::map<std::string, std::vector<std::string>> entities;  // type -> names
  int min_triples = 1;
  int max_triples = 4;
  // Probability that a clause gets a coordinated subject ("A and B ..."),
  // which yields two triples sharing the object.
  double coordination_rate = 0.25;
  std::vector<std::string> connectors = {", and", ";", ", while"};
  std::uint64_t seed = 7;
  std::string id_prefix = "syn";

  static SynthesisConfig FromJson(const Json& j);
  Json ToJson() const;
};

// A small built-in world: people, companies, cities and countries linked by a
// handful of relations.
SynthesisConfig DefaultSynthesisConfig();

// Deterministic given `config.seed`. Every entity occurs once per sentence so
// the gold triples are recoverable from the surface form. Throws kGeneration
// when the vocabulary of some entity type cannot cover a sentence.
std::vector<AnnotatedSentence> GenerateSynthetic(const SynthesisConfig& config,
                                                 std::size_t count,
                                                 const Tokenizer& tokenizer);

}  // namespace pairfilter
