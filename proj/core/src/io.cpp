#include "sphstab/io.hpp"

#include <cstdio>
#include <fstream>

#include "sphstab/errors.hpp"

namespace sphstab {

std::string format_sci(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", x);
  return buf;
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string line;
  for (size_t i = 0; i < cells.size(); ++i) {
    const std::string& c = cells[i];
    const bool quote = c.find_first_of(",\"\n") != std::string::npos;
    if (quote) {
      line += '"';
      for (char ch : c) {
        line += ch;
        if (ch == '"') line += '"';
      }
      line += '"';
    } else {
      line += c;
    }
    if (i + 1 < cells.size()) line += ',';
  }
  line += "\r\n";
  return line;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace sphstab
