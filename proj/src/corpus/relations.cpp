#include "pairfilter/corpus/relations.h"

#include <fstream>

#include "pairfilter/error.h"
#include "pairfilter/util.h"

namespace pairfilter {

RelationNormalizer RelationNormalizer::Default() {
  return RelationNormalizer({
      {"/location/location/contains", "location contains"},
      {"/location/country/capital", "country capital"},
      {"/location/country/administrative_divisions",
       "country administrative divisions"},
      {"/location/administrative_division/country",
       "administrative division country"},
      {"/location/neighborhood/neighborhood_of", "neighborhood of"},
      {"/people/person/place_of_birth", "place of birth"},
      {"/people/person/place_lived", "place lived"},
      {"/people/person/nationality", "nationality"},
      {"/people/person/children", "children"},
      {"/people/person/ethnicity", "ethnicity"},
      {"/people/person/religion", "religion"},
      {"/people/person/profession", "profession"},
      {"/people/deceased_person/place_of_death", "place of death"},
      {"/people/deceased_person/place_of_burial", "place of burial"},
      {"/people/ethnicity/geographic_distribution", "geographic distribution"},
      {"/people/ethnicity/people", "ethnicity people"},
      {"/people/place_of_interment/interred_here", "interred here"},
      {"/business/person/company", "company"},
      {"/business/company/founders", "founders"},
      {"/business/company/place_founded", "place founded"},
      {"/business/company/major_shareholders", "major shareholders"},
      {"/business/company/advisors", "advisors"},
      {"/business/company/industry", "industry"},
      {"/business/company_shareholder/major_shareholder_of",
       "major shareholder of"},
      {"/sports/sports_team/location", "sports team location"},
      {"/sports/sports_team_location/teams", "teams"},
      {"/film/film/featured_film_locations", "featured film locations"},
      {"/film/film_location/featured_in_films", "featured in films"},
  });
}

RelationNormalizer RelationNormalizer::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    Fail(ErrorKind::kConfig, "cannot open relation map " + path.string());
  }
  RelationNormalizer out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = Trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto tab = trimmed.find('\t');
    if (tab == std::string::npos) {
      Fail(ErrorKind::kParse, path.string() + ":" + std::to_string(line_no) +
                                  ": expected two tab-separated columns");
    }
    out.Add(Trim(trimmed.substr(0, tab)), Trim(trimmed.substr(tab + 1)));
  }
  return out;
}

std::string RelationNormalizer::Normalize(std::string_view raw) const {
  std::string name = Trim(raw);
  if (name.empty()) {
    Fail(ErrorKind::kValidation, "empty relation name");
  }
  if (name.front() != '/') return name;
  const auto it = table_.find(name);
  if (it == table_.end()) {
    Fail(ErrorKind::kValidation, "no natural-language mapping for " + name);
  }
  return it->second;
}

RelationList::RelationList(std::vector<std::string> names) {
  for (auto& n : names) {
    if (index_.insert(n).second) names_.push_back(std::move(n));
  }
}

RelationList RelationList::Load(const std::filesystem::path& path,
                                const RelationNormalizer* normalizer) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kConfig, "cannot open relation list " + path.string());
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    std::string name = Trim(line);
    if (name.empty()) continue;
    names.push_back(normalizer ? normalizer->Normalize(name) : name);
  }
  return RelationList(std::move(names));
}

}  // namespace pairfilter
