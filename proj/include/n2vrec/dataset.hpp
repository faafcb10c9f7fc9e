#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "n2vrec/error.hpp"
#include "n2vrec/graph.hpp"
#include "n2vrec/ids.hpp"

namespace n2vrec {

/// Interactions and item categories after id mapping.
struct Dataset {
  IdMap users;
  IdMap items;
  IdMap categories;
  std::vector<Rating> ratings;
  /// (item, category) pairs, sorted and unique.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> memberships;
  /// Raw data rows read, including ones that were dropped.
  std::size_t rows_read = 0;
};

struct DatasetCounts {
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t interactions = 0;
  std::size_t categories = 0;

  bool operator==(const DatasetCounts&) const = default;
};

inline DatasetCounts counts(const Dataset& d) {
  return {d.users.size(), d.items.size(), d.ratings.size(), d.categories.size()};
}

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline double parse_double(std::string_view s, const std::string& source, std::size_t line) {
  s = trim(s);
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(s), &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError(source, line, "bad number '" + std::string(s) + "'");
  }
}

inline std::int64_t parse_int(std::string_view s, const std::string& source, std::size_t line) {
  s = trim(s);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(source, line, "bad integer '" + std::string(s) + "'");
  return v;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
  return in;
}

inline void finish_memberships(Dataset& d) {
  std::sort(d.memberships.begin(), d.memberships.end());
  d.memberships.erase(std::unique(d.memberships.begin(), d.memberships.end()), d.memberships.end());
}

}  // namespace detail

inline const std::vector<std::string>& movielens_genres() {
  static const std::vector<std::string> names = {
      "unknown", "Action",    "Adventure", "Animation", "Children's", "Comedy",  "Crime",
      "Documentary", "Drama", "Fantasy",   "Film-Noir", "Horror",     "Musical", "Mystery",
      "Romance", "Sci-Fi",    "Thriller",  "War",       "Western"};
  return names;
}

/// MovieLens-100K: `u.data` (user, item, rating, timestamp; tab separated) and `u.item` (pipe
/// separated, the last 19 fields are genre flags). Each set flag makes the genre a category of the
/// item. Ids are interned in order of first appearance in `u.data`; u.item rows for items without
/// interactions are ignored.
inline Dataset load_movielens(const std::string& data_path, const std::string& item_path) {
  Dataset d;
  {
    auto in = detail::open_input(data_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::trim(line).empty()) continue;
      std::vector<std::string_view> f = detail::split_fields(line, '\t');
      if (f.size() < 3) throw ParseError(data_path, lineno, "expected user<TAB>item<TAB>rating[<TAB>timestamp]");
      ++d.rows_read;
      Rating r;
      r.user = d.users.intern(detail::trim(f[0]));
      r.item = d.items.intern(detail::trim(f[1]));
      r.rating = detail::parse_double(f[2], data_path, lineno);
      if (f.size() > 3) r.timestamp = detail::parse_int(f[3], data_path, lineno);
      d.ratings.push_back(r);
    }
  }
  if (d.ratings.empty()) throw Error(ErrorKind::DatasetEmpty, data_path + " has no interactions");

  const auto& genres = movielens_genres();
  auto in = detail::open_input(item_path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    auto f = detail::split_fields(line, '|');
    if (f.size() < genres.size() + 1) throw ParseError(item_path, lineno, "expected 19 genre flags");
    const auto item = d.items.find(detail::trim(f[0]));
    if (!item) continue;
    const std::size_t offset = f.size() - genres.size();
    for (std::size_t g = 0; g < genres.size(); ++g) {
      const auto flag = detail::trim(f[offset + g]);
      if (flag == "1") d.memberships.emplace_back(*item, d.categories.intern(genres[g]));
      else if (flag != "0") throw ParseError(item_path, lineno, "genre flag must be 0 or 1");
    }
  }
  detail::finish_memberships(d);
  return d;
}

/// Column layout of a delimited interaction file. Columns are given by header name when the file
/// has a header, otherwise by 0-based position.
struct TableFormat {
  char delimiter = ',';
  bool header = true;
  std::string user_column = "user";
  std::string item_column = "item";
  /// Empty: every interaction has rating 1.
  std::string rating_column = "rating";
  std::string timestamp_column;
};

struct CategoryFormat {
  char delimiter = ',';
  bool header = true;
  std::string item_column = "item";
  std::string category_column = "category";
  /// Splits one category field into several categories when set.
  std::optional<char> multi_separator;
};

namespace detail {

inline std::optional<std::size_t> resolve_column(const std::string& name, const std::vector<std::string_view>& header,
                                                 bool has_header, const std::string& source) {
  if (name.empty()) return std::nullopt;
  if (has_header) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (trim(header[i]) == name) return i;
    throw ParseError(source, 1, "no column named '" + name + "'");
  }
  return static_cast<std::size_t>(parse_int(name, source, 0));
}

template <class Row>
void read_table(const std::string& path, char delim, bool header,
                const std::vector<std::string>& columns, Row&& on_row) {
  auto in = open_input(path);
  std::string line, header_line;
  std::size_t lineno = 0;
  std::vector<std::string_view> head;
  if (header) {
    if (!std::getline(in, header_line)) throw ParseError(path, 1, "missing header");
    ++lineno;
    head = split_fields(header_line, delim);
  }
  std::vector<std::optional<std::size_t>> idx;
  for (const auto& c : columns) idx.push_back(resolve_column(c, head, header, path));
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split_fields(line, delim);
    std::vector<std::optional<std::string_view>> picked;
    for (const auto& i : idx) {
      if (!i) {
        picked.emplace_back();
        continue;
      }
      if (*i >= f.size()) throw ParseError(path, lineno, "missing column " + std::to_string(*i));
      picked.emplace_back(trim(f[*i]));
    }
    on_row(picked, lineno);
  }
}

}  // namespace detail

/// Generic delimited interactions plus an optional item-category table.
inline Dataset load_table(const std::string& interactions_path, const TableFormat& format,
                          const std::string& categories_path = {}, const CategoryFormat& cat_format = {}) {
  Dataset d;
  detail::read_table(interactions_path, format.delimiter, format.header,
                     {format.user_column, format.item_column, format.rating_column, format.timestamp_column},
                     [&](const auto& f, std::size_t lineno) {
                       ++d.rows_read;
                       if (f[0]->empty() || f[1]->empty()) throw ParseError(interactions_path, lineno, "empty id");
                       Rating r;
                       r.user = d.users.intern(*f[0]);
                       r.item = d.items.intern(*f[1]);
                       if (f[2]) r.rating = detail::parse_double(*f[2], interactions_path, lineno);
                       if (f[3]) r.timestamp = detail::parse_int(*f[3], interactions_path, lineno);
                       d.ratings.push_back(r);
                     });
  if (d.ratings.empty()) throw Error(ErrorKind::DatasetEmpty, interactions_path + " has no interactions");
  if (!categories_path.empty()) {
    detail::read_table(categories_path, cat_format.delimiter, cat_format.header,
                       {cat_format.item_column, cat_format.category_column}, [&](const auto& f, std::size_t) {
                         const auto item = d.items.find(*f[0]);
                         if (!item) return;
                         std::vector<std::string_view> cats{*f[1]};
                         if (cat_format.multi_separator) cats = detail::split_fields(*f[1], *cat_format.multi_separator);
                         for (auto c : cats) {
                           c = detail::trim(c);
                           if (!c.empty()) d.memberships.emplace_back(*item, d.categories.intern(c));
                         }
                       });
  }
  detail::finish_memberships(d);
  return d;
}

/// Canonical on-disk form: `interactions.tsv` (user, item, rating, timestamp with external ids),
/// `item_categories.tsv` (item, category) and the three id maps.
inline void write_dataset(const Dataset& d, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir + "/interactions.tsv");
    if (!out) throw Error(ErrorKind::Io, "cannot write " + dir + "/interactions.tsv");
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& r : d.ratings)
      out << d.users.external(r.user) << '\t' << d.items.external(r.item) << '\t' << r.rating << '\t' << r.timestamp
          << '\n';
  }
  {
    std::ofstream out(dir + "/item_categories.tsv");
    if (!out) throw Error(ErrorKind::Io, "cannot write " + dir + "/item_categories.tsv");
    for (auto [item, cat] : d.memberships) out << d.items.external(item) << '\t' << d.categories.external(cat) << '\n';
  }
  write_id_map(d.users, dir + "/users.map");
  write_id_map(d.items, dir + "/items.map");
  write_id_map(d.categories, dir + "/categories.map");
}

inline Dataset read_dataset(const std::string& dir) {
  Dataset d;
  d.users = read_id_map(dir + "/users.map");
  d.items = read_id_map(dir + "/items.map");
  d.categories = read_id_map(dir + "/categories.map");
  const std::string ipath = dir + "/interactions.tsv";
  auto in = detail::open_input(ipath);
  std::string line;
  std::size_t lineno = 0;
  auto lookup = [&](const IdMap& map, std::string_view id, const std::string& source) {
    auto idx = map.find(id);
    if (!idx) throw ParseError(source, lineno, "unknown id '" + std::string(id) + "'");
    return *idx;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = detail::split_fields(line, '\t');
    if (f.size() != 4) throw ParseError(ipath, lineno, "expected 4 fields");
    ++d.rows_read;
    d.ratings.push_back({lookup(d.users, f[0], ipath), lookup(d.items, f[1], ipath),
                         detail::parse_double(f[2], ipath, lineno), detail::parse_int(f[3], ipath, lineno)});
  }
  const std::string cpath = dir + "/item_categories.tsv";
  auto cin = detail::open_input(cpath);
  lineno = 0;
  while (std::getline(cin, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = detail::split_fields(line, '\t');
    if (f.size() != 2) throw ParseError(cpath, lineno, "expected item<TAB>category");
    d.memberships.emplace_back(lookup(d.items, f[0], cpath), lookup(d.categories, f[1], cpath));
  }
  if (d.ratings.empty()) throw Error(ErrorKind::DatasetEmpty, ipath + " has no interactions");
  detail::finish_memberships(d);
  return d;
}

/// `key=value` lines with keys users, items, interactions, categories; absent keys are not checked.
inline void check_manifest(const Dataset& d, const std::string& manifest_path) {
  auto in = detail::open_input(manifest_path);
  const DatasetCounts have = counts(d);
  const std::map<std::string, std::size_t> actual = {
      {"users", have.users}, {"items", have.items}, {"interactions", have.interactions}, {"categories", have.categories}};
  std::string line, problems;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError(manifest_path, lineno, "expected key=value");
    const std::string key(detail::trim(t.substr(0, eq)));
    const auto it = actual.find(key);
    if (it == actual.end()) throw ParseError(manifest_path, lineno, "unknown key '" + key + "'");
    const auto want = static_cast<std::size_t>(detail::parse_int(t.substr(eq + 1), manifest_path, lineno));
    if (want != it->second)
      problems += " " + key + ": expected " + std::to_string(want) + ", got " + std::to_string(it->second) + ";";
  }
  if (!problems.empty()) throw Error(ErrorKind::IngestMismatch, manifest_path + ":" + problems);
}

}  // namespace n2vrec
