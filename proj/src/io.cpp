#include "kinopt/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kinopt {

std::string format_g17(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

std::map<std::string, std::string> parse_flat_config(const std::string& text) {
  std::map<std::string, std::string> config;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  " is not of the form key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("empty key on config line " + std::to_string(line_no));
    config[key] = value;
  }
  return config;
}

std::map<std::string, std::string> load_flat_config(const std::string& path) {
  return parse_flat_config(read_text_file(path));
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

CsvWriter::CsvWriter(std::string path, const std::map<std::string, std::string>& config,
                     const std::vector<std::string>& columns)
    : path_(std::move(path)), column_count_(columns.size()) {
  for (const auto& [key, value] : config) body_ += "# " + key + " = " + value + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    body_ += columns[i];
    body_ += (i + 1 < columns.size()) ? ',' : '\n';
  }
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != column_count_) throw std::invalid_argument("csv row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    body_ += format_g17(values[i]);
    body_ += (i + 1 < values.size()) ? ',' : '\n';
  }
}

void CsvWriter::raw_row(const std::string& line) {
  body_ += line;
  body_ += '\n';
}

void CsvWriter::close() {
  if (closed_) return;
  write_text_file(path_, body_);
  closed_ = true;
}

}  // namespace kinopt
