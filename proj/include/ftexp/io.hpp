#pragma once

// CSV series/node files and the JSON model file.
//
// CSV: UTF-8, header row required, first two columns `t,value` (or
// `year,value`, converted to year numbers), further columns ignored, blank
// lines skipped, '.' as the decimal separator. Output uses LF line endings
// and shortest round-trip decimal formatting.
//
// Model file:
//   {"format_version": 1,
//    "nodes": [{"t": .., "value": ..}, ...],
//    "terms": [{"coefficient": {"re": .., "im": ..},
//               "exponent": {"re": .., "im": ..}}, ...],
//    "fit_residual": ..,
//    "warnings": ["..", ...]}

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "ftexp/errors.hpp"
#include "ftexp/expfit.hpp"
#include "ftexp/geometry.hpp"
#include "ftexp/series.hpp"

namespace ftexp {

inline constexpr int kModelFormatVersion = 1;

// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("error while reading " + path.string());
    return buf.str();
}

// Writes to a sibling temporary file and renames it over the destination.
inline void write_text_file_atomic(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError("error while writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into place at " + path.string());
    }
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline double parse_real(std::string_view field, std::size_t line) {
    double v = 0.0;
    const char* begin = field.data();
    const char* end = field.data() + field.size();
    if (!field.empty() && *begin == '+') ++begin;
    const auto res = std::from_chars(begin, end, v);
    if (field.empty() || res.ec != std::errc{} || res.ptr != end) {
        throw ParseError(line, "cannot parse number '" + std::string(field) + "'");
    }
    return v;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> row_lines;
};

// Parses the first `columns` fields of each non-blank row as reals.
inline CsvTable parse_csv(std::string_view text, std::size_t columns) {
    CsvTable table;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    if (text.starts_with("\xEF\xBB\xBF")) pos = 3;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string_view raw =
            text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++line_no;
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        if (trim(raw).empty()) continue;

        const auto fields = split_fields(raw);
        if (!have_header) {
            for (auto f : fields) table.header.emplace_back(f);
            if (table.header.size() < columns) throw ParseError(line_no, "header has too few columns");
            have_header = true;
            continue;
        }
        if (fields.size() < columns) {
            throw ParseError(line_no, "expected at least " + std::to_string(columns) + " fields");
        }
        std::vector<double> row;
        for (std::size_t c = 0; c < columns; ++c) row.push_back(parse_real(fields[c], line_no));
        table.rows.push_back(std::move(row));
        table.row_lines.push_back(line_no);
    }
    if (!have_header) throw ParseError(line_no == 0 ? 1 : line_no, "missing header row");
    return table;
}

// Reads `t,value` or `year,value` columns; returns samples in file order.
inline std::vector<Sample> read_samples(const std::filesystem::path& path, double year_offset) {
    const CsvTable table = parse_csv(read_text_file(path), 2);
    bool years = false;
    if (table.header[0] == "year") {
        years = true;
    } else if (table.header[0] != "t") {
        throw ParseError(1, "first column must be 't' or 'year', got '" + table.header[0] + "'");
    }
    if (table.header[1] != "value") throw ParseError(1, "second column must be 'value', got '" + table.header[1] + "'");

    std::vector<Sample> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        out.push_back({years ? year_to_t(row[0], year_offset) : row[0], row[1]});
    }
    return out;
}

}  // namespace detail

inline TimeSeries read_series_csv(const std::filesystem::path& path, double year_offset = kYearOffset) {
    return validate(detail::read_samples(path, year_offset));
}

// Node sets need finite entries but not increasing abscissae.
inline std::vector<Point2> read_nodes_csv(const std::filesystem::path& path, double year_offset = kYearOffset) {
    const std::vector<Sample> samples = detail::read_samples(path, year_offset);
    if (samples.empty()) throw ValidationError(0, "node set is empty");
    std::vector<Point2> out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i].t) || !std::isfinite(samples[i].value)) {
            throw ValidationError(i, "non-finite entry");
        }
        out.push_back({samples[i].t, samples[i].value});
    }
    return out;
}

// Exponent list with header `re,im`.
inline std::vector<Complex> read_exponents_csv(const std::filesystem::path& path) {
    const detail::CsvTable table = detail::parse_csv(read_text_file(path), 2);
    if (table.header[0] != "re" || table.header[1] != "im") throw ParseError(1, "exponent header must be 're,im'");
    std::vector<Complex> out;
    for (const auto& row : table.rows) out.emplace_back(row[0], row[1]);
    return out;
}

inline std::string smoothed_csv(const SmoothedSeries& s) {
    std::string out = "t,value,source_first_index\n";
    for (std::size_t k = 0; k < s.nodes.size(); ++k) {
        out += format_double(s.nodes[k].x) + ',' + format_double(s.nodes[k].y) + ',' +
               std::to_string(s.source_window[k].first) + '\n';
    }
    return out;
}

inline std::string grid_csv(const std::vector<GridPoint>& grid) {
    std::string out = "t,value,imag_residual\n";
    for (const GridPoint& g : grid) {
        out += format_double(g.t) + ',' + format_double(g.value) + ',' + format_double(g.imag_residual) + '\n';
    }
    return out;
}

struct ModelFile {
    int format_version = kModelFormatVersion;
    std::vector<Point2> nodes;
    std::vector<ExpTerm> terms;
    double fit_residual = 0.0;
    std::vector<std::string> warnings;

    static ModelFile from_model(const ExpModel& m) {
        return {kModelFormatVersion, m.nodes, m.terms, m.fit_residual, m.warnings};
    }

    ExpModel to_model() const {
        ExpModel m;
        m.nodes = nodes;
        m.terms = terms;
        m.fit_residual = fit_residual;
        m.warnings = warnings;
        return m;
    }
};

namespace detail {

inline nlohmann::json complex_to_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key) {
    if (!obj.is_object() || !obj.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
    return obj.at(key);
}

inline double require_number(const nlohmann::json& obj, const char* key) {
    const nlohmann::json& v = require(obj, key);
    if (!v.is_number()) throw SchemaError(std::string("field '") + key + "' must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw SchemaError(std::string("field '") + key + "' must be finite");
    return d;
}

inline Complex complex_from_json(const nlohmann::json& obj) {
    return {require_number(obj, "re"), require_number(obj, "im")};
}

}  // namespace detail

inline std::string model_to_json_text(const ModelFile& mf) {
    nlohmann::json doc;
    doc["format_version"] = mf.format_version;
    doc["nodes"] = nlohmann::json::array();
    for (const Point2& p : mf.nodes) doc["nodes"].push_back({{"t", p.x}, {"value", p.y}});
    doc["terms"] = nlohmann::json::array();
    for (const ExpTerm& term : mf.terms) {
        doc["terms"].push_back({{"coefficient", detail::complex_to_json(term.coefficient)},
                                {"exponent", detail::complex_to_json(term.exponent)}});
    }
    doc["fit_residual"] = mf.fit_residual;
    doc["warnings"] = mf.warnings;
    return doc.dump(2) + '\n';
}

inline ModelFile model_from_json_text(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("model file is not valid JSON: ") + e.what());
    }
    ModelFile mf;
    const nlohmann::json& version = detail::require(doc, "format_version");
    if (!version.is_number_integer() || version.get<int>() != kModelFormatVersion) {
        throw SchemaError("unsupported model format_version " + version.dump());
    }
    const nlohmann::json& nodes = detail::require(doc, "nodes");
    const nlohmann::json& terms = detail::require(doc, "terms");
    if (!nodes.is_array() || !terms.is_array()) throw SchemaError("'nodes' and 'terms' must be arrays");
    for (const auto& n : nodes) mf.nodes.push_back({detail::require_number(n, "t"), detail::require_number(n, "value")});
    for (const auto& t : terms) {
        mf.terms.push_back({detail::complex_from_json(detail::require(t, "coefficient")),
                            detail::complex_from_json(detail::require(t, "exponent"))});
    }
    mf.fit_residual = detail::require_number(doc, "fit_residual");
    const nlohmann::json& warnings = detail::require(doc, "warnings");
    if (!warnings.is_array()) throw SchemaError("'warnings' must be an array");
    for (const auto& w : warnings) {
        if (!w.is_string()) throw SchemaError("warnings must be strings");
        mf.warnings.push_back(w.get<std::string>());
    }
    return mf;
}

inline void write_model(const std::filesystem::path& path, const ModelFile& mf) {
    write_text_file_atomic(path, model_to_json_text(mf));
}

inline ModelFile read_model(const std::filesystem::path& path) { return model_from_json_text(read_text_file(path)); }

}  // namespace ftexp
