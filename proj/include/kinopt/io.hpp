#ifndef KINOPT_IO_HPP
#define KINOPT_IO_HPP

#include <map>
#include <string>
#include <vector>

namespace kinopt {

/// Round-trip-safe decimal rendering (17 significant digits, '.' decimal
/// point regardless of locale).
std::string format_g17(double value);

/// Flat key-value text: one `key = value` per line, '#' comments.
std::map<std::string, std::string> parse_flat_config(const std::string& text);
std::map<std::string, std::string> load_flat_config(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// CSV with the resolved configuration embedded as '#' header comments.
class CsvWriter {
 public:
  CsvWriter(std::string path, const std::map<std::string, std::string>& config,
            const std::vector<std::string>& columns);

  void row(const std::vector<double>& values);
  void raw_row(const std::string& line);

  /// Writes the accumulated document to disk.
  void close();

 private:
  std::string path_;
  std::string body_;
  std::size_t column_count_;
  bool closed_ = false;
};

}  // namespace kinopt

#endif
