#include "rexp/dataset.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rexp {

void write_dataset_csv(const Dataset& data, const std::string& path) {
  data.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (std::size_t j = 0; j < data.p(); ++j) out << 'x' << (j + 1) << ',';
  out << "y\n";
  out.precision(17);
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (std::size_t j = 0; j < data.p(); ++j) out << data.X(i, j) << ',';
    out << data.y[i] << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty file");

  std::size_t cols = 1;
  for (char c : line)
    if (c == ',') ++cols;
  if (cols < 2) throw std::runtime_error(path + ":1: expected x1..xp,y header");
  const std::size_t p = cols - 1;

  std::vector<double> values;
  std::vector<double> y;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::size_t count = 0;
    const char* s = line.c_str();
    char* end = nullptr;
    std::vector<double> row(cols);
    for (std::size_t c = 0; c < cols; ++c) {
      errno = 0;
      row[c] = std::strtod(s, &end);
      if (end == s || errno != 0)
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": malformed number");
      ++count;
      s = end;
      if (c + 1 < cols) {
        if (*s != ',')
          throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                   ": expected " + std::to_string(cols) +
                                   " fields");
        ++s;
      }
    }
    (void)count;
    for (std::size_t c = 0; c < p; ++c) values.push_back(row[c]);
    y.push_back(row[p]);
  }
  if (y.empty()) throw std::runtime_error(path + ": no data rows");

  Dataset data;
  data.X = Matrix(y.size(), p);
  std::copy(values.begin(), values.end(), data.X.data());
  data.y = std::move(y);
  data.validate();
  return data;
}

}  // namespace rexp
