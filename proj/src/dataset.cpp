#include "mallows/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace mallows {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

long long parse_ll(const std::string& tok, const std::string& what, const std::string& where) {
  long long v = 0;
  auto t = trim(tok);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size())
    throw ParseError(where + ": invalid " + what + " '" + tok + "'");
  return v;
}

std::vector<int> parse_item_list(const std::string& text, const std::string& where) {
  std::vector<int> items;
  std::set<int> seen;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, '|')) {
    int item = static_cast<int>(parse_ll(tok, "item id", where));
    if (item < 1) throw ParseError(where + ": item ids must be positive, got " + tok);
    if (!seen.insert(item).second)
      throw ParseError(where + ": duplicate item " + std::to_string(item));
    items.push_back(item);
  }
  if (items.empty()) throw ParseError(where + ": empty ranking");
  return items;
}

}  // namespace

std::int64_t RankingDataset::total_count() const {
  std::int64_t n = 0;
  for (const auto& o : observations) n += o.multiplicity;
  return n;
}

int RankingDataset::max_length() const {
  int m = 0;
  for (const auto& o : observations) m = std::max(m, o.length());
  return m;
}

std::vector<int> RankingDataset::universe_items() const {
  std::set<int> items;
  if (universe_size > 0)
    for (int i = 1; i <= universe_size; ++i) items.insert(i);
  for (const auto& o : observations) items.insert(o.items.begin(), o.items.end());
  return std::vector<int>(items.begin(), items.end());
}

bool RankingDataset::all_complete() const {
  if (observations.empty()) return false;
  const int n = universe_size > 0 ? universe_size
                                  : static_cast<int>(universe_items().size());
  for (const auto& o : observations)
    if (o.length() != n) return false;
  return true;
}

RankingDataset RankingDataset::truncated(int t) const {
  RankingDataset out = *this;
  for (auto& o : out.observations)
    if (o.length() > t) o.items.resize(t);
  return out;
}

RankingDataset parse_rankings(const std::string& path, RankingFormat format) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open ranking file '" + path + "'");
  return parse_rankings_stream(in, format, path);
}

RankingDataset parse_rankings_stream(std::istream& in, RankingFormat format,
                                     const std::string& name) {
  RankingDataset data;
  data.source = name;
  std::string line;
  int lineno = 0;
  bool format_decided = format != RankingFormat::autodetect;
  RankingFormat fmt = format;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = name + ":" + std::to_string(lineno);
    std::string body = line;
    if (auto hash = body.find('#'); hash != std::string::npos) {
      // "# universe: n" header; other comments ignored
      std::string comment = trim(body.substr(hash + 1));
      body = body.substr(0, hash);
      if (comment.rfind("universe:", 0) == 0)
        data.universe_size = static_cast<int>(
            parse_ll(comment.substr(9), "universe size", where));
    }
    body = trim(body);
    if (body.empty()) continue;
    if (body.rfind("universe:", 0) == 0) {
      data.universe_size =
          static_cast<int>(parse_ll(body.substr(9), "universe size", where));
      continue;
    }
    if (!format_decided) {
      fmt = body.find(';') != std::string::npos ? RankingFormat::counted
                                                : RankingFormat::lists;
      format_decided = true;
    }
    Observation obs;
    if (fmt == RankingFormat::counted) {
      auto semi = body.find(';');
      if (semi == std::string::npos)
        throw ParseError(where + ": expected 'count;i1|i2|...'");
      obs.multiplicity = parse_ll(body.substr(0, semi), "count", where);
      if (obs.multiplicity < 1)
        throw ParseError(where + ": count must be >= 1, got " +
                         body.substr(0, semi));
      obs.items = parse_item_list(body.substr(semi + 1), where);
    } else {
      obs.multiplicity = 1;
      obs.items = parse_item_list(body, where);
    }
    data.observations.push_back(std::move(obs));
  }
  if (data.observations.empty())
    throw ParseError(name + ": no observations found");
  data.format = fmt == RankingFormat::counted ? "counted" : "lists";
  if (data.universe_size > 0) {
    for (std::size_t i = 0; i < data.observations.size(); ++i)
      for (int item : data.observations[i].items)
        if (item > data.universe_size)
          throw ParseError(name + ": item " + std::to_string(item) +
                           " exceeds declared universe " +
                           std::to_string(data.universe_size));
  }
  return data;
}

void write_rankings(std::ostream& out, const RankingDataset& data, RankingFormat format) {
  if (format == RankingFormat::autodetect)
    format = data.format == "counted" ? RankingFormat::counted : RankingFormat::lists;
  if (data.universe_size > 0) out << "# universe: " << data.universe_size << "\n";
  for (const auto& o : data.observations) {
    if (format == RankingFormat::counted) out << o.multiplicity << ";";
    for (std::size_t i = 0; i < o.items.size(); ++i) {
      if (i) out << "|";
      out << o.items[i];
    }
    out << "\n";
  }
}

RankingDataset dataset_from_rankings(std::vector<std::vector<int>> ranked_lists,
                                     int universe_size) {
  RankingDataset data;
  data.universe_size = universe_size;
  data.observations.reserve(ranked_lists.size());
  for (auto& r : ranked_lists) data.observations.push_back({std::move(r), 1});
  data.format = "lists";
  return data;
}

}  // namespace mallows
