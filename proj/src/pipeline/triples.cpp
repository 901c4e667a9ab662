#include "pairfilter/pipeline/triples.h"

#include <optional>
#include <set>

#include "pairfilter/util.h"

namespace pairfilter {
namespace {

// Index one past the bracket that closes the one at `open`, skipping string
// literals; npos when unbalanced.
std::size_t MatchBracket(std::string_view text, std::size_t open) {
  const char opener = text[open];
  const char closer = opener == '[' ? ']' : '}';
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == opener) {
      ++depth;
    } else if (c == closer && --depth == 0) {
      return i + 1;
    }
  }
  return std::string_view::npos;
}

std::optional<Json> TryParse(std::string_view text) {
  auto j = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) return std::nullopt;
  return j;
}

bool IsTripleList(const Json& j) {
  if (!j.is_array()) return false;
  for (const auto& item : j) {
    if (!item.is_object()) return false;
  }
  return true;
}

void Collect(const Json& item, const RelationList& relations, ParseResult& out,
             std::set<TripleAnnotation>& seen) {
  auto field = [&](const char* key) -> std::optional<std::string> {
    const auto it = item.find(key);
    if (it == item.end() || !it->is_string()) return std::nullopt;
    return Trim(it->get<std::string>());
  };
  const auto s = field("s");
  const auto p = field("p");
  const auto o = field("o");
  if (!s || !p || !o || s->empty() || p->empty() || o->empty()) {
    ++out.malformed_items;
    out.diagnostics.push_back("item without string s, p and o: " + item.dump());
    return;
  }
  if (!relations.Contains(*p)) {
    ++out.unknown_predicates;
    out.diagnostics.push_back("predicate not in relation list: " + *p);
    return;
  }
  TripleAnnotation t{*s, *p, *o};
  if (!seen.insert(t).second) {
    ++out.duplicates;
    return;
  }
  out.triples.push_back(std::move(t));
}

}  // namespace

ParseResult ParseTriples(std::string_view response, const RelationList& relations) {
  ParseResult out;
  std::set<TripleAnnotation> seen;
  const std::string trimmed = Trim(response);

  std::optional<Json> list;
  if (auto j = TryParse(trimmed); j && IsTripleList(*j)) {
    list = std::move(j);
    out.status = ParseStatus::kStrict;
  } else {
    for (std::size_t pos = trimmed.find('['); pos != std::string::npos;
         pos = trimmed.find('[', pos + 1)) {
      const auto end = MatchBracket(trimmed, pos);
      if (end == std::string_view::npos) continue;
      if (auto candidate = TryParse(std::string_view(trimmed).substr(pos, end - pos));
          candidate && IsTripleList(*candidate)) {
        list = std::move(candidate);
        out.status = ParseStatus::kRecovered;
        out.diagnostics.push_back("list recovered from surrounding text");
        break;
      }
    }
  }

  if (list) {
    for (const auto& item : *list) Collect(item, relations, out, seen);
    return out;
  }

  bool any = false;
  for (std::size_t pos = trimmed.find('{'); pos != std::string::npos;) {
    const auto end = MatchBracket(trimmed, pos);
    if (end == std::string_view::npos) break;
    if (auto obj = TryParse(std::string_view(trimmed).substr(pos, end - pos));
        obj && obj->is_object()) {
      any = true;
      Collect(*obj, relations, out, seen);
      pos = trimmed.find('{', end);
    } else {
      pos = trimmed.find('{', pos + 1);
    }
  }
  if (any) {
    out.status = ParseStatus::kRecovered;
    out.diagnostics.push_back("individual objects recovered from text");
  } else {
    out.status = ParseStatus::kFailed;
    out.diagnostics.push_back("no triple list found in response");
  }
  return out;
}

std::string SerializeTriples(const std::vector<TripleAnnotation>& triples) {
  auto list = OrderedJson::array();
  for (const auto& t : triples) {
    OrderedJson item;
    item["s"] = t.subject;
    item["o"] = t.object;
    item["p"] = t.predicate;
    list.push_back(std::move(item));
  }
  return list.dump(-1, ' ', false, OrderedJson::error_handler_t::replace);
}

std::vector<TripleAnnotation> DedupTriples(const std::vector<TripleAnnotation>& triples) {
  std::vector<TripleAnnotation> out;
  std::set<TripleAnnotation> seen;
  for (const auto& t : triples) {
    if (seen.insert(t).second) out.push_back(t);
  }
  return out;
}

}  // namespace pairfilter
