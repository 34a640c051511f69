#pragma once

#include <cstdio>
#include <filesystem>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace qhhg {

/// Minimal CSV emitter: one header row, then numeric rows printed with 17
/// significant digits so identical runs produce byte-identical files.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path,
              const std::vector<std::string>& columns)
        : file_(std::fopen(path.string().c_str(), "wb")), width_(columns.size()) {
        if (!file_)
            throw std::runtime_error("cannot open " + path.string() + " for writing");
        for (std::size_t i = 0; i < columns.size(); ++i)
            std::fprintf(file_, "%s%s", i ? "," : "", columns[i].c_str());
        std::fprintf(file_, "\n");
    }

    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    ~CsvWriter() {
        if (file_) std::fclose(file_);
    }

    void row(const std::vector<double>& values) {
        if (values.size() != width_)
            throw std::logic_error("csv row width mismatch");
        for (std::size_t i = 0; i < values.size(); ++i)
            std::fprintf(file_, "%s%.17g", i ? "," : "", values[i]);
        std::fprintf(file_, "\n");
    }

    void row(std::initializer_list<double> values) {
        row(std::vector<double>(values));
    }

private:
    std::FILE* file_;
    std::size_t width_;
};

} // namespace qhhg
