#pragma once

#include <string>
#include <vector>

namespace sphstab {

/// Full-precision scientific formatting (17 significant digits), so CSV
/// output round-trips exactly and regression diffs are byte-stable.
std::string format_sci(double x);

/// RFC-4180 CSV line from already-formatted cells.
std::string csv_line(const std::vector<std::string>& cells);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace sphstab
