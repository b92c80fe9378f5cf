#ifndef PTMPS_CSV_HPP
#define PTMPS_CSV_HPP

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "ptmps/errors.hpp"

namespace ptmps {

inline constexpr const char* kCsvStamp = "# ptmps-csv 1";

/// Deterministic CSV: a version-stamp comment line, a column header, then
/// numeric rows printed with %.17g (round-trip exact for doubles).
class CsvWriter {
  public:
    CsvWriter(std::ostream& os, const std::vector<std::string>& columns) : os_(os), n_(columns.size()) {
        os_ << kCsvStamp << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i)
            os_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
    }

    void row(const std::vector<double>& values) {
        if (values.size() != n_) throw dimension_error("CsvWriter: wrong number of columns");
        char buf[32];
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
            os_ << buf << (i + 1 < values.size() ? "," : "\n");
        }
    }

  private:
    std::ostream& os_;
    std::size_t n_;
};

} // namespace ptmps

#endif
