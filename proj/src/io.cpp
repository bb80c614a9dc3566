#include "verdict/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "verdict/errors.hpp"

namespace verdict::io {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void atomic_write_file(const std::filesystem::path& path,
                       const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot write file: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw ParseError("short write: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  if (line.find('"') != std::string::npos)
    throw ParseError("quoted CSV fields are not supported: " + line);
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  for (;;) {
    auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::string trim(const std::string& s) {
  std::string::size_type b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r'))
    --e;
  return s.substr(b, e - b);
}

}  // namespace verdict::io
