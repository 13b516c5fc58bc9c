#include "bqpg/harness/csv.hpp"

#include <cstdio>

namespace bqpg::harness {

CsvWriter::CsvWriter(const std::string& path, const std::string& schema,
                     const std::vector<std::string>& columns)
    : file_(path) {
    if (!file_) throw ConfigError("csv: cannot open '" + path + "' for writing");
    out_ = &file_;
    write_header(schema, columns);
}

CsvWriter::CsvWriter(std::ostream& sink, const std::string& schema,
                     const std::vector<std::string>& columns)
    : out_(&sink) {
    write_header(schema, columns);
}

void CsvWriter::write_header(const std::string& schema, const std::vector<std::string>& columns) {
    columns_ = columns.size();
    *out_ << "# schema: " << schema << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
        *out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
}

std::string CsvWriter::format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter& CsvWriter::field(double v) { return field(format_double(v)); }

CsvWriter& CsvWriter::field(long v) { return field(std::to_string(v)); }

CsvWriter& CsvWriter::field(const std::string& v) {
    if (in_row_ >= columns_) throw ConfigError("csv: too many fields in row");
    if (in_row_ > 0) *out_ << ",";
    *out_ << v;
    ++in_row_;
    return *this;
}

void CsvWriter::end_row() {
    if (in_row_ != columns_) throw ConfigError("csv: row has wrong field count");
    *out_ << "\n";
    in_row_ = 0;
}

}  // namespace bqpg::harness
