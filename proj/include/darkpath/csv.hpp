#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "darkpath/errors.hpp"

namespace darkpath {

/// Scientific notation with 13 significant digits, '.' decimal separator.
inline std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

/// RFC-4180-style CSV with a mandatory header row; provenance lines are
/// written as '#' comments ahead of the header. Rows are flushed as they are
/// written so interrupted sweeps keep their completed rows.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw Error("cannot open output file: " + path);
  }

  void comment(const std::string& line) { out_ << "# " << line << "\n"; }

  void header(const std::vector<std::string>& cols) {
    write_strings(cols);
    out_.flush();
  }

  void row(const std::vector<double>& values) {
    for (size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ",";
      out_ << format_sci(values[i]);
    }
    out_ << "\n";
    out_.flush();
  }

  void row_strings(const std::vector<std::string>& values) {
    write_strings(values);
    out_.flush();
  }

 private:
  void write_strings(const std::vector<std::string>& values) {
    for (size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ",";
      out_ << values[i];
    }
    out_ << "\n";
  }

  std::ofstream out_;
};

}  // namespace darkpath
