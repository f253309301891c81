#include "scarot/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "scarot/group_fiber.hpp"

namespace scarot {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

double parse_double(const std::string& s, const std::string& context) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) {
      ++pos;
    }
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad number '" + s + "' in " + context);
  }
}

long parse_int(const std::string& s, const std::string& context) {
  try {
    size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad integer '" + s + "' in " + context);
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty dataset file: " + path);
  auto header = split_csv(line);
  if (header.size() < 2 || header.size() > 3) {
    throw ParseError("dataset header must be 'p,n': " + path);
  }
  Dataset data;
  data.p = static_cast<int>(parse_int(header[0], "header"));
  const long n = parse_int(header[1], "header");
  if (data.p < 2 || n < 0) throw ParseError("dataset header out of range");
  const int record_len = data.p * (data.p + 1) / 2;

  for (long row = 0; row < n; ++row) {
    if (!std::getline(in, line)) {
      throw ParseError("dataset ends early at record " + std::to_string(row));
    }
    auto fields = split_csv(line);
    if (static_cast<int>(fields.size()) != record_len) {
      throw ParseError("record " + std::to_string(row) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(record_len));
    }
    Matrix x(data.p, data.p);
    int idx = 0;
    for (int i = 0; i < data.p; ++i) {
      for (int j = i; j < data.p; ++j) {
        double v = parse_double(fields[idx++], "record " + std::to_string(row));
        x(i, j) = v;
        x(j, i) = v;
      }
    }
    try {
      canonical_decomposition(x);  // validates positive-definiteness
    } catch (const NotPositiveDefinite& e) {
      throw ParseError("record " + std::to_string(row) +
                       " is not positive-definite: " + e.what());
    }
    data.items.push_back(std::move(x));
  }
  return data;
}

void write_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset file: " + path);
  out << data.p << "," << data.n() << "\n";
  for (const auto& x : data.items) {
    bool first = true;
    for (int i = 0; i < data.p; ++i) {
      for (int j = i; j < data.p; ++j) {
        if (!first) out << ",";
        out << format_double(x(i, j));
        first = false;
      }
    }
    out << "\n";
  }
}

void RunConfig::validate() const {
  if (k <= 0.0) throw BadParameter("k must be positive");
  if (eps <= 0.0) throw BadParameter("eps must be positive");
  if (tol_opt <= 0.0) throw BadParameter("tol_opt must be positive");
  if (eps_strat <= 0.0) throw BadParameter("eps_strat must be positive");
  if (max_iter < 1) throw BadParameter("max_iter must be at least 1");
  if (bootstrap < 1) throw BadParameter("bootstrap count must be at least 1");
  if (level <= 0.0 || level >= 1.0) throw BadParameter("level must be in (0,1)");
}

}  // namespace scarot
