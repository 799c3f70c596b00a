#include "svm/csv.hpp"

#include <cstdio>

namespace svm {

CsvWriter::CsvWriter(std::ostream& out) : out_(out) {}

void CsvWriter::header(std::initializer_list<std::string_view> names) {
  bool first = true;
  for (auto n : names) {
    if (!first) out_ << ',';
    first = false;
    out_ << n;
  }
  out_ << '\n';
}

void CsvWriter::put_double(double v) { out_ << format_double(v); }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace svm
