#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dzc::detail {

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);
std::string format_double(double v);
/// Full-string parse; "inf"/"+inf"/"-inf" accepted. Throws Config on garbage.
double parse_double(const std::string& s);
std::int64_t parse_int(const std::string& s);
bool parse_bool(const std::string& s);

}  // namespace dzc::detail
