#pragma once

#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

namespace svm {

// Comma-separated rows; doubles carry 17 significant digits so they
// round-trip exactly.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out);

  void header(std::initializer_list<std::string_view> names);

  template <typename... Ts>
  void row(const Ts&... values) {
    bool first = true;
    ((put(values, first)), ...);
    out_ << '\n';
  }

 private:
  template <typename T>
  void put(const T& v, bool& first) {
    if (!first) out_ << ',';
    first = false;
    if constexpr (std::is_floating_point_v<T>) {
      put_double(static_cast<double>(v));
    } else {
      out_ << v;
    }
  }
  void put_double(double v);

  std::ostream& out_;
};

std::string format_double(double v);

}  // namespace svm
