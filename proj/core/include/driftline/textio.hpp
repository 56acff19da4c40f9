#pragma once

// Escaping and number formatting shared by the event log, snapshots and
// corpus files. Values are tab-separated on disk, so tabs, newlines and
// backslashes are escaped; doubles print with %.17g and round-trip exactly.

#include <string>
#include <vector>

namespace driftline {

std::string escape_field(const std::string& s);
std::string unescape_field(const std::string& s);

std::vector<std::string> split_tabs(const std::string& line);

std::string format_double(double v);
double parse_double_exact(const std::string& s);  // throws ParseError on junk

}  // namespace driftline
