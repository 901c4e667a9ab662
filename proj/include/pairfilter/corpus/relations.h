#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace pairfilter {

// Maps structured relation names ("/location/location/contains") onto the
// natural-language names used in prompts ("location contains").
class RelationNormalizer {
 public:
  RelationNormalizer() = default;
  explicit RelationNormalizer(std::map<std::string, std::string> table)
      : table_(std::move(table)) {}

  // Built-in table covering the NYT relation inventory.
  static RelationNormalizer Default();

  // Two tab-separated columns per line: structured name, natural name.
  // Blank lines and lines starting with '#' are ignored.
  static RelationNormalizer Load(const std::filesystem::path& path);

  // Slash-delimited names go through the table and must be present there;
  // anything else passes through trimmed.
  std::string Normalize(std::string_view raw) const;

  void Add(std::string structured, std::string natural) {
    table_[std::move(structured)] = std::move(natural);
  }
  std::size_t size() const { return table_.size(); }

 private:
  std::map<std::string, std::string> table_;
};

// Closed relation vocabulary (post-normalisation), in file order.
class RelationList {
 public:
  RelationList() = default;
  explicit RelationList(std::vector<std::string> names);

  // One relation per line; blank lines ignored. Entries are normalised with
  // `normalizer` when given.
  static RelationList Load(const std::filesystem::path& path,
                           const RelationNormalizer* normalizer = nullptr);

  bool Contains(std::string_view name) const {
    return index_.contains(std::string(name));
  }
  const std::vector<std::string>& names() const { return names_; }
  bool empty() const { return names_.empty(); }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::set<std::string> index_;
};

}  // namespace pairfilter
