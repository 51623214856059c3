#include "coarselab/report.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <stdexcept>

namespace coarselab {

std::string version_string() { return COARSELAB_VERSION_STRING; }

std::string schema_header() {
  return "# coarse-lab v" + version_string() + " schema=" + std::to_string(kSchemaVersion);
}

std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0) return "0";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : path_(path), width_(columns.size()) {
  auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  out_.open(path, std::ios::binary);
  if (!out_) throw std::runtime_error("cannot write " + path);
  out_ << schema_header() << '\n';
  row(columns);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw std::logic_error("csv row width mismatch in " + path_);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    const auto& c = cells[i];
    if (c.find_first_of(",\"\n") != std::string::npos) {
      out_ << '"';
      for (char ch : c) {
        if (ch == '"') out_ << '"';
        out_ << ch;
      }
      out_ << '"';
    } else {
      out_ << c;
    }
  }
  out_ << '\n';
}

void write_json(const std::string& path, const nlohmann::json& j) {
  auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

nlohmann::json verdict_json(const Verdict& v, const GraphSpace* sp, std::size_t max_points) {
  nlohmann::json j;
  j["pass"] = v.pass;
  j["margin"] = std::isfinite(v.margin) ? nlohmann::json(v.margin) : nlohmann::json(fmt_num(v.margin));
  j["note"] = v.note;
  j["checked"] = v.checked;
  if (!v.witness_path.empty()) {
    nlohmann::json w = nlohmann::json::array();
    for (std::size_t i = 0; i < v.witness_path.size() && i < max_points; ++i)
      w.push_back(sp ? sp->format(v.witness_path[i]) : std::to_string(i));
    j["witness"] = w;
    j["witness_length"] = v.witness_path.size();
    j["witness_index"] = v.witness_index;
    if (sp && v.witness_index < v.witness_path.size()) j["witness_point"] = sp->format(v.witness_path[v.witness_index]);
  }
  return j;
}

}  // namespace coarselab
