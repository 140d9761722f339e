#include "teslasim/trace_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include "teslasim/errors.hpp"

namespace teslasim {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 32> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw ConfigError("not a number: '" + std::string(text) + "'");
    return v;
}

namespace {

constexpr std::string_view kTraceHeader =
    "t,turbine_angle,turbine_speed_rpm,output_angle,position_mm,encoder_count,u,direction,"
    "tau_drive,tau_load,force_n,error_mm,speed_limit_exceeded,aliasing";

long long parse_int(std::string_view text) {
    long long v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw ConfigError("not an integer: '" + std::string(text) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

}  // namespace

std::string trace_to_csv(const std::vector<TraceSample>& trace) {
    std::string out{kTraceHeader};
    out += '\n';
    for (const TraceSample& r : trace) {
        out += format_double(r.t);
        out += ',';
        out += format_double(r.turbine_angle);
        out += ',';
        out += format_double(r.turbine_speed_rpm);
        out += ',';
        out += format_double(r.output_angle);
        out += ',';
        out += format_double(r.position_mm);
        out += ',';
        out += std::to_string(r.encoder_count);
        out += ',';
        out += format_double(r.u);
        out += ',';
        out += std::to_string(r.direction);
        out += ',';
        out += format_double(r.tau_drive);
        out += ',';
        out += format_double(r.tau_load);
        out += ',';
        out += format_double(r.force_n);
        out += ',';
        out += format_double(r.error_mm);
        out += ',';
        out += r.flags.speed_limit_exceeded ? '1' : '0';
        out += ',';
        out += r.flags.aliasing ? '1' : '0';
        out += '\n';
    }
    return out;
}

std::vector<TraceSample> trace_from_csv(std::string_view csv) {
    std::vector<TraceSample> trace;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < csv.size()) {
        std::size_t end = csv.find('\n', start);
        if (end == std::string_view::npos) end = csv.size();
        const std::string_view line = csv.substr(start, end - start);
        start = end + 1;
        if (line.empty()) continue;
        ++line_no;
        if (line_no == 1) {
            if (line != kTraceHeader)
                throw ConfigError("trace csv: unrecognized header '" + std::string(line) + "'");
            continue;
        }
        const auto cells = split(line, ',');
        if (cells.size() != 14) {
            std::ostringstream msg;
            msg << "trace csv: line " << line_no << " has " << cells.size()
                << " columns, expected 14";
            throw ConfigError(msg.str());
        }
        TraceSample r;
        r.t = parse_double(cells[0]);
        r.turbine_angle = parse_double(cells[1]);
        r.turbine_speed_rpm = parse_double(cells[2]);
        r.output_angle = parse_double(cells[3]);
        r.position_mm = parse_double(cells[4]);
        r.encoder_count = parse_int(cells[5]);
        r.u = parse_double(cells[6]);
        r.direction = static_cast<int>(parse_int(cells[7]));
        r.tau_drive = parse_double(cells[8]);
        r.tau_load = parse_double(cells[9]);
        r.force_n = parse_double(cells[10]);
        r.error_mm = parse_double(cells[11]);
        r.flags.speed_limit_exceeded = parse_int(cells[12]) != 0;
        r.flags.aliasing = parse_int(cells[13]) != 0;
        trace.push_back(r);
    }
    return trace;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::string out = "pressure_bar,speed_rpm\n";
    for (const SweepRow& r : rows) {
        out += format_double(r.pressure_bar);
        out += ',';
        out += format_double(r.speed_rpm);
        out += '\n';
    }
    return out;
}

std::string force_table_to_csv(const std::vector<ForceRow>& rows) {
    std::string out = "pressure_bar,force_n\n";
    for (const ForceRow& r : rows) {
        out += format_double(r.pressure_bar);
        out += ',';
        out += format_double(r.force_n);
        out += '\n';
    }
    return out;
}

std::string positioning_to_csv(const std::vector<PositioningRow>& rows) {
    std::string out = "target_mm,final_error_mm,peak_overshoot_mm,settle_time_s\n";
    for (const PositioningRow& r : rows) {
        out += format_double(r.target_mm);
        out += ',';
        out += format_double(r.final_error_mm);
        out += ',';
        out += format_double(r.peak_overshoot_mm);
        out += ',';
        out += format_double(r.settle_time_s);
        out += '\n';
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
    std::error_code ec;
    fs::create_directories(dir, ec);  // best effort; the open below reports failures

    const fs::path tmp = dir / (path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw ConfigError("short write to '" + tmp.string() + "'");
    }
    fs::rename(tmp, path, ec);
    if (ec) throw ConfigError("cannot move '" + tmp.string() + "' to '" + path.string() + "': " +
                              ec.message());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace teslasim
