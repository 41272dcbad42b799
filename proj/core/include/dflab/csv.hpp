#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dflab {

/// Minimal CSV writer: header row + RFC-style quoting, doubles rendered with
/// the shortest round-trip form so golden files diff cleanly.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(const std::vector<std::string>& names);
  CsvWriter& field(const std::string& text);
  CsvWriter& field(double value);
  CsvWriter& field(long long value);
  CsvWriter& field(int value) { return field(static_cast<long long>(value)); }
  void end_row();

 private:
  void raw(const std::string& cell);
  std::ostream& out_;
  bool row_open_ = false;
};

}  // namespace dflab
