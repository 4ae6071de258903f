#include <fstream>
#include <sstream>

#include "pcup/error.hpp"
#include "pcup/io.hpp"
#include "pcup/persistence.hpp"

namespace pcup {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

int parse_int(const std::string& s) {
  const double v = parse_double(s);
  if (v != static_cast<double>(static_cast<int>(v))) {
    throw Error(ErrorCode::Parse, "expected an integer, got '" + s + "'");
  }
  return static_cast<int>(v);
}

}  // namespace

std::string format_report_csv(const std::vector<ReportRow>& rows) {
  if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "report needs at least one row");
  std::string out = kReportHeader;
  out += '\n';
  for (const auto& r : rows) {
    if (r.condition.find_first_of(",\n\r") != std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "condition label may not contain ',' or newlines");
    }
    out += r.condition + ',' + std::to_string(r.af) + ',' + r.sampling + ',' +
           (r.normals ? "1" : "0") + ',' + format_double(r.alpha) + ',' +
           format_scientific(r.chamfer_loss) + ',' + format_double(r.accuracy) + ',' +
           format_double(r.coverage) + '\n';
  }
  return out;
}

std::vector<ReportRow> parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kReportHeader) {
    throw Error(ErrorCode::Parse, "report CSV header mismatch");
  }
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 8) throw Error(ErrorCode::Parse, "report row needs 8 fields: " + line);
    ReportRow r;
    r.condition = f[0];
    r.af = parse_int(f[1]);
    r.sampling = f[2];
    r.normals = parse_int(f[3]) != 0;
    r.alpha = parse_double(f[4]);
    r.chamfer_loss = parse_double(f[5]);
    r.accuracy = parse_double(f[6]);
    r.coverage = parse_double(f[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_report_csv(const std::filesystem::path& path, const std::vector<ReportRow>& rows) {
  write_text_file(path, format_report_csv(rows));
}

std::vector<ReportRow> read_report_csv(const std::filesystem::path& path) {
  return parse_report_csv(read_text_file(path));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

}  // namespace pcup
