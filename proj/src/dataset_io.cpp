#include "pulsehr/dataset_io.hpp"

#include "pulsehr/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

namespace pulsehr::io {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

constexpr double kSpacingTolS = 1e-6;

struct Table {
  std::vector<double> t;
  std::vector<std::vector<double>> cols;
  std::vector<std::size_t> lines;
};

double parse_cell(std::string_view cell, std::size_t line, std::size_t col) {
  if (cell.empty())
    throw Error(ErrorCode::ParseError, "empty cell", line, col);
  // from_chars rejects a leading '+'; everything else must be consumed.
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(v))
    throw Error(ErrorCode::ParseError, "not a finite number: '" + std::string(cell) + "'", line,
                col);
  return v;
}

Table read_table(std::istream& in, std::span<const std::string_view> headers) {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad())
    throw Error(ErrorCode::IoError, "read failed");
  std::string_view rest(text);
  std::size_t line_no = 0;
  std::size_t ncols = 0;
  Table tab;
  while (!rest.empty()) {
    ++line_no;
    const auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    if (line.find('\r') != std::string_view::npos)
      throw Error(ErrorCode::ParseError, "carriage return in line (LF endings required)", line_no,
                  line.find('\r') + 1);
    if (line_no == 1) {
      for (const auto h : headers)
        if (line == h)
          ncols = static_cast<std::size_t>(std::count(h.begin(), h.end(), ','));
      if (ncols == 0)
        throw Error(ErrorCode::BadHeader, "unexpected header '" + std::string(line) + "'", 1);
      tab.cols.resize(ncols);
      continue;
    }
    std::size_t col = 0;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      const auto cell = line.substr(start, comma == std::string_view::npos ? comma : comma - start);
      ++col;
      if (col > ncols + 1)
        throw Error(ErrorCode::ParseError, "too many fields", line_no, col);
      const double v = parse_cell(cell, line_no, col);
      if (col == 1)
        tab.t.push_back(v);
      else
        tab.cols[col - 2].push_back(v);
      if (comma == std::string_view::npos)
        break;
      start = comma + 1;
    }
    if (col != ncols + 1)
      throw Error(ErrorCode::ParseError, "expected " + std::to_string(ncols + 1) + " fields",
                  line_no, col + 1);
    tab.lines.push_back(line_no);
  }
  if (line_no == 0)
    throw Error(ErrorCode::BadHeader, "empty file", 1);
  if (tab.t.empty())
    throw Error(ErrorCode::ParseError, "no data rows", 2, 1);
  return tab;
}

// Infers the sampling rate and checks every timestamp against the grid.
double infer_rate(const Table& tab, double single_row_rate) {
  const std::size_t n = tab.t.size();
  if (n == 1)
    return single_row_rate;
  const double span = tab.t.back() - tab.t.front();
  if (!(span > 0.0))
    throw Error(ErrorCode::NonUniformSpacing, "timestamps must be strictly increasing",
                tab.lines.back());
  double fs = static_cast<double>(n - 1) / span;
  if (std::abs(fs - std::round(fs)) < 1e-6)
    fs = std::round(fs);
  for (std::size_t i = 0; i < n; ++i) {
    const double expect = tab.t.front() + static_cast<double>(i) / fs;
    if (std::abs(tab.t[i] - expect) > kSpacingTolS)
      throw Error(ErrorCode::NonUniformSpacing,
                  "timestamp " + format_double(tab.t[i]) + " deviates from uniform grid",
                  tab.lines[i]);
  }
  return fs;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
  return in;
}

} // namespace

PpgRecording read_ppg_csv(std::istream& in) {
  constexpr std::string_view headers[] = {"t_s,ch1", "t_s,ch1,ch2"};
  Table tab = read_table(in, headers);
  PpgRecording rec;
  rec.fs_hz = infer_rate(tab, kDefaultPpgRateHz);
  rec.t0_s = tab.t.front();
  rec.channels = std::move(tab.cols);
  return rec;
}

PpgRecording read_ppg_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_ppg_csv(in);
}

HrSeries read_hr_csv(std::istream& in) {
  constexpr std::string_view headers[] = {"t_s,hr_bpm"};
  Table tab = read_table(in, headers);
  HrSeries hr;
  hr.rate_hz = infer_rate(tab, 1.0);
  hr.t0_s = tab.t.front();
  hr.values = std::move(tab.cols.front());
  for (std::size_t i = 0; i < hr.values.size(); ++i)
    if (hr.values[i] < kMinHrBpm || hr.values[i] > kMaxHrBpm)
      throw Error(ErrorCode::HrOutOfRange,
                  "hr_bpm " + format_double(hr.values[i]) + " outside [20, 230]", tab.lines[i]);
  return hr;
}

HrSeries read_hr_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_hr_csv(in);
}

std::string write_ppg_csv(const PpgRecording& rec) {
  const PpgRecording& r = validate_recording(rec);
  std::string out = r.channels.size() == 2 ? "t_s,ch1,ch2\n" : "t_s,ch1\n";
  for (std::size_t i = 0; i < r.size(); ++i) {
    out += format_double(r.t0_s + static_cast<double>(i) / r.fs_hz);
    for (const auto& ch : r.channels) {
      out += ',';
      out += format_double(ch[i]);
    }
    out += '\n';
  }
  return out;
}

std::string write_hr_csv(const HrSeries& hr) {
  validate_hr_series(hr);
  std::string out = "t_s,hr_bpm\n";
  for (std::size_t i = 0; i < hr.size(); ++i) {
    out += format_double(hr.time_at(i));
    out += ',';
    out += format_double(hr.values[i]);
    out += '\n';
  }
  return out;
}

void write_ppg_csv(const PpgRecording& rec, const std::filesystem::path& path) {
  write_file(path, write_ppg_csv(rec));
}

void write_hr_csv(const HrSeries& hr, const std::filesystem::path& path) {
  write_file(path, write_hr_csv(hr));
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  const std::string s = read_file(path);
  return {s.begin(), s.end()};
}

void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out)
    throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  write_file(path, std::string_view(reinterpret_cast<const char*>(data.data()), data.size()));
}

} // namespace pulsehr::io
