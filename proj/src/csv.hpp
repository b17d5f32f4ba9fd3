#pragma once

// Internal CSV helpers shared by corpus ingestion and artifact files.

#include <filesystem>
#include <string>
#include <vector>

namespace empaudit::csvio {

// RFC-4180 rows; quoted fields may contain commas, doubled quotes and
// newlines. Blank lines are dropped.
std::vector<std::vector<std::string>> read_file(const std::filesystem::path& path);
std::vector<std::vector<std::string>> parse(const std::string& data,
                                            const std::string& where);

// Same, but drops comment rows (first field starting with '#').
std::vector<std::vector<std::string>> read_data_rows(const std::filesystem::path& path);

std::string escape(const std::string& field);
std::string join(const std::vector<std::string>& fields);

// Full-precision float formatting for machine-readable mirrors.
std::string format_double(double value);
// Fixed 3-decimal formatting for human-readable tables.
std::string format_fixed3(double value);

}  // namespace empaudit::csvio
