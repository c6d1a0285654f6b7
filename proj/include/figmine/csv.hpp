#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace figmine::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, -1 if absent.
  int column(std::string_view name) const;
  bool has_column(std::string_view name) const { return column(name) >= 0; }
};

// RFC 4180 quoting: fields containing comma, quote, CR or LF get quoted.
std::string escape_field(std::string_view field);
std::string join_row(const std::vector<std::string>& fields);

std::string serialize(const Table& table);
Table parse(std::string_view text);

Table read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const Table& table);

}  // namespace figmine::csv
