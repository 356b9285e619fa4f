#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>

#include "mlevy/errors.hpp"

namespace mlevy {

// Shortest-independent float text: 17 significant digits, "nan"/"inf" spelled out.
inline std::string format_real(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[40];
    auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

class CsvWriter {
  public:
    CsvWriter(const std::string& file, std::string_view header) : out_(file, std::ios::binary) {
        if (!out_) {
            throw std::runtime_error("cannot open '" + file + "' for writing");
        }
        out_ << header << '\n';
    }

    CsvWriter& operator<<(double x) { return field(format_real(x)); }
    CsvWriter& operator<<(int x) { return field(std::to_string(x)); }
    CsvWriter& operator<<(std::int64_t x) { return field(std::to_string(x)); }
    CsvWriter& operator<<(std::uint64_t x) { return field(std::to_string(x)); }
    CsvWriter& operator<<(std::string_view s) { return field(std::string(s)); }
    CsvWriter& operator<<(const char* s) { return field(s); }

    void end_row() {
        out_ << '\n';
        first_ = true;
    }

  private:
    CsvWriter& field(const std::string& s) {
        if (!first_) {
            out_ << ',';
        }
        out_ << s;
        first_ = false;
        return *this;
    }

    std::ofstream out_;
    bool first_ = true;
};

}  // namespace mlevy
