#include "pairfilter/corpus/synthetic.h"

#include <set>

#include "pairfilter/error.h"
#include "pairfilter/random.h"

namespace pairfilter {
namespace {

void ReplaceAll(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = s.find(from);
  while (pos != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos = s.find(from, pos + to.size());
  }
}

void Validate(const SynthesisConfig& config) {
  if (config.templates.empty()) {
    Fail(ErrorKind::kGeneration, "synthesis needs at least one relation template");
  }
  std::size_t total = 0;
  std::vector<std::string> all;
  for (const auto& [type, names] : config.entities) {
    total += names.size();
    all.insert(all.end(), names.begin(), names.end());
  }
  if (total < 2) Fail(ErrorKind::kGeneration, "synthesis needs at least two entities");
  if (config.min_triples < 0 || config.max_triples < config.min_triples) {
    Fail(ErrorKind::kGeneration, "invalid triples-per-sentence range");
  }
  for (const auto& t : config.templates) {
    if (t.patterns.empty()) {
      Fail(ErrorKind::kGeneration, "relation \"" + t.relation + "\" has no patterns");
    }
    for (const auto* type : {&t.subject_type, &t.object_type}) {
      if (!config.entities.contains(*type)) {
        Fail(ErrorKind::kGeneration, "unknown entity type \"" + *type + "\"");
      }
    }
    for (const auto& p : t.patterns) {
      if (p.find("{s}") == std::string::npos || p.find("{o}") == std::string::npos) {
        Fail(ErrorKind::kGeneration, "pattern \"" + p + "\" needs {s} and {o}");
      }
    }
  }
  // Gold triples are only recoverable when no name hides inside another
  // name or inside the fixed template text.
  for (std::size_t a = 0; a < all.size(); ++a) {
    if (all[a].empty()) Fail(ErrorKind::kGeneration, "empty entity name");
    for (std::size_t b = 0; b < all.size(); ++b) {
      if (a != b && all[b].find(all[a]) != std::string::npos) {
        Fail(ErrorKind::kGeneration,
             "entity \"" + all[a] + "\" occurs inside \"" + all[b] + "\"");
      }
    }
    for (const auto& t : config.templates) {
      for (const auto& p : t.patterns) {
        if (p.find(all[a]) != std::string::npos) {
          Fail(ErrorKind::kGeneration,
               "entity \"" + all[a] + "\" occurs in pattern \"" + p + "\"");
        }
      }
    }
    for (const auto& c : config.connectors) {
      if (c.find(all[a]) != std::string::npos) {
        Fail(ErrorKind::kGeneration, "entity \"" + all[a] + "\" occurs in a connector");
      }
    }
  }
}

}  // namespace

SynthesisConfig SynthesisConfig::FromJson(const Json& j) {
  SynthesisConfig c;
  try {
    for (const auto& t : j.at("templates")) {
      c.templates.push_back({t.at("relation").get<std::string>(),
                             t.at("subject_type").get<std::string>(),
                             t.at("object_type").get<std::string>(),
                             t.at("patterns").get<std::vector<std::string>>()});
    }
    c.entities = j.at("entities").get<std::map<std::string, std::vector<std::string>>>();
    c.min_triples = j.value("min_triples", c.min_triples);
    c.max_triples = j.value("max_triples", c.max_triples);
    c.coordination_rate = j.value("coordination_rate", c.coordination_rate);
    c.connectors = j.value("connectors", c.connectors);
    c.seed = j.value("seed", c.seed);
    c.id_prefix = j.value("id_prefix", c.id_prefix);
  } catch (const Json::exception& e) {
    Fail(ErrorKind::kConfig, std::string("synthesis config: ") + e.what());
  }
  return c;
}

Json SynthesisConfig::ToJson() const {
  Json j;
  j["templates"] = Json::array();
  for (const auto& t : templates) {
    j["templates"].push_back({{"relation", t.relation},
                              {"subject_type", t.subject_type},
                              {"object_type", t.object_type},
                              {"patterns", t.patterns}});
  }
  j["entities"] = entities;
  j["min_triples"] = min_triples;
  j["max_triples"] = max_triples;
  j["coordination_rate"] = coordination_rate;
  j["connectors"] = connectors;
  j["seed"] = seed;
  j["id_prefix"] = id_prefix;
  return j;
}

SynthesisConfig DefaultSynthesisConfig() {
  SynthesisConfig c;
  c.templates = {
      {"founded", "person", "company",
       {"{s} founded {o}", "{s} started {o}", "{o} was founded by {s}"}},
      {"works for", "person", "company", {"{s} works for {o}", "{s} joined {o}"}},
      {"place of birth", "person", "city",
       {"{s} was born in {o}", "{s} is a native of {o}"}},
      {"headquarters", "company", "city",
       {"{s} is headquartered in {o}", "{s} has its main office in {o}"}},
      {"located in", "city", "country", {"{s} is a city in {o}", "{s} lies in {o}"}},
      {"capital", "country", "city",
       {"the capital of {s} is {o}", "{o} is the capital of {s}"}},
      {"spouse", "person", "person", {"{s} is married to {o}"}},
  };
  c.entities = {
      {"person",
       {"Alice Moreau", "Bruno Tanaka", "Carla Jensen", "Dmitri Okafor",
        "Elena Rossi", "Farid Haddad", "Grace Lindqvist", "Hiro Nakamura",
        "Ines Castillo", "Jonas Becker", "Keiko Sato", "Liam Gallagher",
        "Maya Kapoor", "Nikolai Petrov", "Olga Ivanova", "Pedro Alvarez",
        "Quinn Harper", "Rosa Delgado", "Samir Nasser", "Tara Whitfield",
        "Umar Siddiqui", "Vera Kowalski", "Wendell Brooks", "Ximena Ortiz",
        "Yusuf Demir", "Zara Okonkwo", "Arthur Pemberton", "Beatrix Holm",
        "Cyrus Farrokh", "Daria Volkova"}},
      {"company",
       {"Nexacore", "Bluefin Systems", "Orchard Labs", "Veridian Motors",
        "Quantiva", "Helix Dynamics", "Stonebridge Capital", "Lumora",
        "Pinewood Analytics", "Cobalt Freight", "Arcadia Foods",
        "Tidewater Energy", "Granite Works", "Solstice Media",
        "Ironclad Robotics", "Meridian Health", "Northwind Textiles",
        "Brightpath", "Zephyr Aerospace", "Kestrel Software"}},
      {"city",
       {"Lisbon", "Osaka", "Toronto", "Nairobi", "Valparaiso", "Krakow",
        "Brisbane", "Marseille", "Tbilisi", "Cordoba", "Hamburg", "Seville",
        "Adelaide", "Bergen", "Quito", "Dakar", "Hanoi", "Tallinn",
        "Medellin", "Gdansk"}},
      {"country",
       {"Portugal", "Japan", "Canada", "Kenya", "Chile", "Poland",
        "Australia", "France", "Georgia", "Argentina", "Germany", "Spain",
        "Norway", "Ecuador", "Senegal", "Vietnam", "Estonia", "Colombia"}},
  };
  return c;
}

std::vector<AnnotatedSentence> GenerateSynthetic(const SynthesisConfig& config,
                                                 std::size_t count,
                                                 const Tokenizer& tokenizer) {
  std::vector<AnnotatedSentence> out;
  if (count == 0) return out;
  Validate(config);

  PortableRng draw(config.seed);
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    std::set<std::string> used;
    auto pick = [&](const std::string& type) -> std::string {
      const auto& pool = config.entities.at(type);
      std::vector<const std::string*> free;
      for (const auto& name : pool) {
        if (!used.contains(name)) free.push_back(&name);
      }
      if (free.empty()) {
        Fail(ErrorKind::kGeneration, "entity vocabulary of type \"" + type +
                                         "\" exhausted; add names or request "
                                         "fewer triples per sentence");
      }
      const std::string& chosen = *free[draw.Index(free.size())];
      used.insert(chosen);
      return chosen;
    };

    AnnotatedSentence sentence;
    sentence.id = config.id_prefix + "-" + std::to_string(n);
    const int target = draw.Between(config.min_triples, config.max_triples);
    std::vector<std::string> clauses;
    int made = 0;
    while (made < target) {
      const auto& tmpl = config.templates[draw.Index(config.templates.size())];
      const auto& pattern = tmpl.patterns[draw.Index(tmpl.patterns.size())];
      const bool coordinate =
          target - made >= 2 && draw.Unit() < config.coordination_rate;
      std::vector<std::string> subjects{pick(tmpl.subject_type)};
      if (coordinate) subjects.push_back(pick(tmpl.subject_type));
      const std::string object = pick(tmpl.object_type);

      std::string subject_text = subjects.front();
      if (subjects.size() == 2) subject_text += " and " + subjects.back();
      std::string clause = pattern;
      ReplaceAll(clause, "{s}", subject_text);
      ReplaceAll(clause, "{o}", object);
      clauses.push_back(std::move(clause));
      for (const auto& s : subjects) {
        sentence.triples.push_back({s, tmpl.relation, object});
      }
      made += static_cast<int>(subjects.size());
    }

    for (std::size_t c = 0; c < clauses.size(); ++c) {
      if (c > 0) {
        sentence.text += config.connectors.empty()
                             ? std::string(",")
                             : config.connectors[draw.Index(config.connectors.size())];
        sentence.text += ' ';
      }
      sentence.text += clauses[c];
    }
    sentence.text += sentence.text.empty() ? "." : " .";
    TokenizeInto(tokenizer, sentence);
    out.push_back(std::move(sentence));
  }
  return out;
}

}  // namespace pairfilter
