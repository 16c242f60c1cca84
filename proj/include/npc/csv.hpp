#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace npc::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // 1-based source line of each row
};

/// RFC-4180 reader: comma separated, optional double quotes, "" escapes, CRLF tolerated.
Table read(const std::filesystem::path& path);
Table parse(std::string_view text);

/// Shortest round-trip decimal representation of a finite double.
std::string format(double v);
/// Quote a field if it contains a comma, quote or newline.
std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

/// Strict parse of a whole cell as a double; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view cell);

}  // namespace npc::csv
