#pragma once

// Deterministic CSV output: 17 significant digits, '.' decimal separator,
// '\n' line endings, header row first.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "rda/errors.hpp"

namespace rda {

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns)
        : out_(path, std::ios::binary) {
        if (!out_) throw config_error("cannot open output file: " + path);
        write_cells(columns);
    }

    void row(const std::vector<std::string>& cells) { write_cells(cells); }

    class RowBuilder {
    public:
        explicit RowBuilder(CsvWriter& w) : w_(w) {}
        RowBuilder& num(double v) {
            cells_.push_back(format_g17(v));
            return *this;
        }
        RowBuilder& integer(long v) {
            cells_.push_back(std::to_string(v));
            return *this;
        }
        RowBuilder& text(std::string s) {
            cells_.push_back(std::move(s));
            return *this;
        }
        ~RowBuilder() { w_.write_cells(cells_); }

    private:
        CsvWriter& w_;
        std::vector<std::string> cells_;
    };

    RowBuilder row() { return RowBuilder(*this); }

private:
    friend class RowBuilder;
    void write_cells(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    std::ofstream out_;
};

}  // namespace rda
