#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bqpg/errors.hpp"

namespace bqpg::harness {

/// Byte-stable CSV emission: one schema comment line, a header, then rows.
/// Numbers print as %.17g so values round-trip exactly.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& schema,
              const std::vector<std::string>& columns);

    /// In-memory variant (tests, stdout capture).
    CsvWriter(std::ostream& sink, const std::string& schema,
              const std::vector<std::string>& columns);

    CsvWriter& field(double v);
    CsvWriter& field(long v);
    CsvWriter& field(int v) { return field(static_cast<long>(v)); }
    CsvWriter& field(const std::string& v);
    void end_row();

    static std::string format_double(double v);

private:
    void write_header(const std::string& schema, const std::vector<std::string>& columns);

    std::ofstream file_;
    std::ostream* out_ = nullptr;
    std::size_t columns_ = 0;
    std::size_t in_row_ = 0;
};

}  // namespace bqpg::harness
