#pragma once

#include <compare>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "n2vrec/error.hpp"

namespace n2vrec {

enum class Namespace : std::uint8_t { User, Item, Category };

inline const char* to_string(Namespace ns) {
  switch (ns) {
    case Namespace::User: return "user";
    case Namespace::Item: return "item";
    case Namespace::Category: return "category";
  }
  return "?";
}

struct NodeId {
  Namespace ns = Namespace::User;
  std::uint32_t index = 0;

  auto operator<=>(const NodeId&) const = default;
};

/// Bijection between external string ids and dense 0-based indices, in first-seen order.
class IdMap {
 public:
  std::uint32_t intern(std::string_view external) {
    auto it = index_.find(std::string(external));
    if (it != index_.end()) return it->second;
    auto idx = static_cast<std::uint32_t>(external_.size());
    external_.emplace_back(external);
    index_.emplace(external_.back(), idx);
    return idx;
  }

  std::optional<std::uint32_t> find(std::string_view external) const {
    auto it = index_.find(std::string(external));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& external(std::uint32_t idx) const { return external_.at(idx); }
  std::size_t size() const noexcept { return external_.size(); }
  bool empty() const noexcept { return external_.empty(); }

 private:
  std::vector<std::string> external_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// Writes `internal_index<TAB>external_id` lines.
inline void write_id_map(const IdMap& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  for (std::uint32_t i = 0; i < map.size(); ++i) out << i << '\t' << map.external(i) << '\n';
}

inline IdMap read_id_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
  IdMap map;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(path, lineno, "expected index<TAB>id");
    std::uint32_t idx = 0;
    try {
      idx = static_cast<std::uint32_t>(std::stoul(line.substr(0, tab)));
    } catch (const std::exception&) {
      throw ParseError(path, lineno, "bad index");
    }
    if (idx != map.size()) throw ParseError(path, lineno, "indices must be dense and ordered");
    map.intern(line.substr(tab + 1));
  }
  return map;
}

}  // namespace n2vrec
