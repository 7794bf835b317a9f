#ifndef FENVM_IO_HPP
#define FENVM_IO_HPP

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fenvm/conduction.hpp"
#include "fenvm/crossbar.hpp"
#include "fenvm/device.hpp"
#include "fenvm/inference.hpp"

namespace fenvm {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kSweepHeader = "voltage_V,current_density_A_per_um2,temperature_K";
inline constexpr std::string_view kTraceHeader = "count,direction,conductance_S,resistance_ohm";
inline constexpr std::string_view kSnapshotHeader = "row,col,w,g_S";

/// Fixed 12-significant-digit rendering so identical runs give identical bytes.
std::string format_number(double x);

/// Line-oriented CSV output with a mandatory header.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::string_view header);

    template <typename... Cells>
    void row(const Cells&... cells)
    {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
        out_ << '\n';
    }

private:
    static std::string cell(double x) { return format_number(x); }
    static std::string cell(int x) { return std::to_string(x); }
    static std::string cell(std::size_t x) { return std::to_string(x); }
    static std::string cell(std::string_view s) { return std::string(s); }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }

    std::ofstream out_;
};

/// Splits CSV text into rows of fields; the first row is the header.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);
double parse_double(std::string_view field);

void write_sweep_csv(const std::filesystem::path& path, const SweepRecord& rec);
SweepRecord read_sweep_csv(const std::filesystem::path& path);

void write_trace_csv(const std::filesystem::path& path, const Trace& trace);
std::vector<TracePoint> read_trace_csv(const std::filesystem::path& path);

void write_snapshot_csv(const std::filesystem::path& path, const Crossbar& xb);
/// Restores w for every listed cell; conductance column is informational.
void read_snapshot_csv(const std::filesystem::path& path, Crossbar& xb);

/// Header feature_0..feature_{n-1},label.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& d);
Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace fenvm

#endif  // FENVM_IO_HPP
