#pragma once

// Minimal RFC 4180 reader/writer: quoted fields, doubled quotes, CRLF tolerance.
// Used for event logs and incidence matrices.

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mured/error.hpp"

namespace mured::csv {

struct record {
    std::vector<std::string> fields;
    std::size_t line = 0;  ///< 1-based line where the record starts
};

class reader {
public:
    reader(std::istream& in, char delimiter) : in_(in), delimiter_(delimiter) {}

    /// Next record, or nullopt at end of input. Blank lines are skipped.
    std::optional<record> next() {
        record rec;
        std::string field;
        bool quoted = false;
        bool any = false;
        bool field_was_quoted = false;
        int c = 0;
        while (true) {
            c = in_.get();
            if (c == std::char_traits<char>::eof()) break;
            if (!any) rec.line = line_;
            any = true;
            const char ch = static_cast<char>(c);
            if (quoted) {
                if (ch == '"') {
                    if (in_.peek() == '"') {
                        in_.get();
                        field.push_back('"');
                    } else {
                        quoted = false;
                    }
                } else {
                    if (ch == '\n') ++line_;
                    field.push_back(ch);
                }
                continue;
            }
            if (ch == '"') {
                if (!field.empty() || field_was_quoted) throw parse_error("stray quote inside field", line_);
                quoted = true;
                field_was_quoted = true;
            } else if (ch == delimiter_) {
                rec.fields.push_back(std::move(field));
                field.clear();
                field_was_quoted = false;
            } else if (ch == '\r') {
                if (in_.peek() != '\n') field.push_back(ch);
            } else if (ch == '\n') {
                ++line_;
                if (rec.fields.empty() && field.empty() && !field_was_quoted) {
                    any = false;  // blank line
                    continue;
                }
                rec.fields.push_back(std::move(field));
                return rec;
            } else {
                field.push_back(ch);
            }
        }
        if (quoted) throw parse_error("unterminated quoted field", rec.line);
        if (!any) return std::nullopt;
        if (rec.fields.empty() && field.empty() && !field_was_quoted) return std::nullopt;
        rec.fields.push_back(std::move(field));
        ++line_;
        return rec;
    }

private:
    std::istream& in_;
    char delimiter_;
    std::size_t line_ = 1;
};

inline std::string quote(std::string_view field, char delimiter = ',') {
    const bool needs = field.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string_view::npos;
    if (!needs) return std::string(field);
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

}  // namespace mured::csv
