#include "fenvm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace fenvm {

namespace {

std::string strip(std::string_view s)
{
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
        s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    return std::string(s);
}

void expect_header(const std::vector<std::vector<std::string>>& rows, std::string_view header,
                   const std::filesystem::path& path)
{
    std::string got;
    if (!rows.empty())
        for (std::size_t i = 0; i < rows.front().size(); ++i)
            got += (i ? "," : "") + rows.front()[i];
    if (got != header)
        throw IoError(path.string() + ": expected header '" + std::string(header) + "'");
}

int parse_int(std::string_view f)
{
    const double d = parse_double(f);
    if (d != std::floor(d))
        throw IoError("expected an integer, got '" + std::string(f) + "'");
    return static_cast<int>(d);
}

}  // namespace

std::string format_number(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::string_view header)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_)
        throw IoError("cannot write '" + path.string() + "'");
    out_ << header << '\n';
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (strip(line).empty())
            continue;
        std::vector<std::string> fields;
        std::string_view rest(line);
        for (;;) {
            const auto comma = rest.find(',');
            fields.push_back(strip(rest.substr(0, comma)));
            if (comma == std::string_view::npos)
                break;
            rest.remove_prefix(comma + 1);
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

double parse_double(std::string_view field)
{
    double v = 0.0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (ec != std::errc() || ptr != end)
        throw IoError("not a number: '" + std::string(field) + "'");
    return v;
}

void write_sweep_csv(const std::filesystem::path& path, const SweepRecord& rec)
{
    CsvWriter w(path, kSweepHeader);
    for (const auto& s : rec.samples)
        w.row(s.voltage, s.current_density, s.temperature);
}

SweepRecord read_sweep_csv(const std::filesystem::path& path)
{
    const auto rows = read_csv(path);
    expect_header(rows, kSweepHeader, path);
    SweepRecord rec;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 3)
            throw IoError(path.string() + ": row " + std::to_string(i) + " needs 3 fields");
        rec.samples.push_back(
            {parse_double(rows[i][0]), parse_double(rows[i][1]), parse_double(rows[i][2])});
    }
    return rec;
}

void write_trace_csv(const std::filesystem::path& path, const Trace& trace)
{
    CsvWriter w(path, kTraceHeader);
    for (const auto& p : trace.points)
        w.row(p.count, to_string(p.direction), p.conductance, p.resistance);
}

std::vector<TracePoint> read_trace_csv(const std::filesystem::path& path)
{
    const auto rows = read_csv(path);
    expect_header(rows, kTraceHeader, path);
    std::vector<TracePoint> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 4)
            throw IoError(path.string() + ": row " + std::to_string(i) + " needs 4 fields");
        Direction d;
        if (r[1] == "pot")
            d = Direction::Potentiate;
        else if (r[1] == "dep")
            d = Direction::Depress;
        else
            throw IoError(path.string() + ": unknown direction '" + r[1] + "'");
        out.push_back({parse_int(r[0]), d, parse_double(r[2]), parse_double(r[3])});
    }
    return out;
}

void write_snapshot_csv(const std::filesystem::path& path, const Crossbar& xb)
{
    CsvWriter w(path, kSnapshotHeader);
    for (int r = 0; r < xb.rows(); ++r)
        for (int c = 0; c < xb.cols(); ++c)
            w.row(r, c, xb.cell(r, c).w, xb.cell(r, c).conductance());
}

void read_snapshot_csv(const std::filesystem::path& path, Crossbar& xb)
{
    const auto rows = read_csv(path);
    expect_header(rows, kSnapshotHeader, path);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& f = rows[i];
        if (f.size() != 4)
            throw IoError(path.string() + ": row " + std::to_string(i) + " needs 4 fields");
        const double w = parse_double(f[2]);
        if (!(w >= 0.0 && w <= 1.0))
            throw IoError(path.string() + ": w outside [0, 1]");
        xb.cell(parse_int(f[0]), parse_int(f[1])).w = w;
    }
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& d)
{
    std::string header;
    for (int f = 0; f < d.n_features; ++f)
        header += "feature_" + std::to_string(f) + ",";
    header += "label";
    CsvWriter w(path, header);
    for (std::size_t s = 0; s < d.size(); ++s) {
        std::string line;
        for (double x : d.x[s])
            line += format_number(x) + ",";
        line += std::to_string(d.y[s]);
        w.row(line);
    }
}

Dataset read_dataset_csv(const std::filesystem::path& path)
{
    const auto rows = read_csv(path);
    if (rows.empty() || rows.front().size() < 2 || rows.front().back() != "label")
        throw IoError(path.string() + ": expected header feature_0..feature_{n-1},label");
    Dataset d;
    d.n_features = static_cast<int>(rows.front().size()) - 1;
    for (int f = 0; f < d.n_features; ++f)
        if (rows.front()[static_cast<std::size_t>(f)] != "feature_" + std::to_string(f))
            throw IoError(path.string() + ": expected column feature_" + std::to_string(f));
    int max_label = -1;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (static_cast<int>(r.size()) != d.n_features + 1)
            throw IoError(path.string() + ": row " + std::to_string(i) + " has the wrong width");
        std::vector<double> x;
        for (int f = 0; f < d.n_features; ++f)
            x.push_back(parse_double(r[static_cast<std::size_t>(f)]));
        const int label = parse_int(r.back());
        if (label < 0)
            throw IoError(path.string() + ": labels must be >= 0");
        max_label = std::max(max_label, label);
        d.x.push_back(std::move(x));
        d.y.push_back(label);
    }
    d.n_classes = max_label + 1;
    return d;
}

}  // namespace fenvm
