#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace verdict::io {

// Reads a whole file; throws ParseError on a missing/unreadable path.
std::string read_file(const std::filesystem::path& path);

// Writes via a sibling temp file + rename so readers never observe a
// partially written file and interrupted runs leave no torn output.
void atomic_write_file(const std::filesystem::path& path,
                       const std::string& content);

// Shortest round-trippable decimal form, "%.12g", C locale. All report
// numbers funnel through this so reruns are byte-identical.
std::string fmt_double(double x);

// Splits one CSV line on commas. Fields in this project never contain
// commas or quotes; a quote character raises ParseError to fail loudly.
std::vector<std::string> split_csv_line(const std::string& line);

// Strips one trailing '\r' (CRLF tolerance) and surrounding spaces/tabs.
std::string trim(const std::string& s);

}  // namespace verdict::io
