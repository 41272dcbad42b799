#include "dflab/csv.hpp"

#include "dflab/numerics.hpp"

namespace dflab {

void CsvWriter::header(const std::vector<std::string>& names) {
  for (const auto& name : names) raw(name);
  end_row();
}

CsvWriter& CsvWriter::field(const std::string& text) {
  bool needs_quotes = text.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs_quotes) {
    raw(text);
    return *this;
  }
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  raw(quoted);
  return *this;
}

CsvWriter& CsvWriter::field(double value) {
  raw(format_double(value));
  return *this;
}

CsvWriter& CsvWriter::field(long long value) {
  raw(std::to_string(value));
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  row_open_ = false;
}

void CsvWriter::raw(const std::string& cell) {
  if (row_open_) out_ << ',';
  out_ << cell;
  row_open_ = true;
}

}  // namespace dflab
