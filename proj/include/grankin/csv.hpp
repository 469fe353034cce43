#pragma once
#include <string>
#include <vector>

namespace grankin {

using CsvRow = std::vector<std::string>;

// 17 significant digits, locale independent; nan/inf spelled out
std::string csv_number(double v);
std::string csv_number(long long v);

// RFC 4180 text with LF line endings
std::string format_csv(const CsvRow& header, const std::vector<CsvRow>& rows);
std::vector<CsvRow> parse_csv(const std::string& text);

// throws IoError
void emit_csv(const std::string& path, const CsvRow& header, const std::vector<CsvRow>& rows);
void write_text(const std::string& path, const std::string& text);

}  // namespace grankin
