#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scarot/manifold.hpp"

namespace scarot {

/// On-disk dataset: header line "p,n", then n rows of p(p+1)/2
/// comma-separated reals (upper triangle, row-major, diagonal included).
/// Values are written with 17 significant digits so round trips are
/// bit-exact.
struct Dataset {
  int p = 0;
  std::vector<Matrix> items;

  int n() const { return static_cast<int>(items.size()); }
};

Dataset read_dataset(const std::string& path);
void write_dataset(const Dataset& data, const std::string& path);

std::string format_double(double v);

struct RunConfig {
  double k = 1.0;
  double eps = 1e-12;
  double tol_opt = 1e-10;
  double eps_strat = 1e-8;
  int max_iter = 100;
  uint64_t seed = 0;
  int bootstrap = 200;
  double level = 0.95;

  void validate() const;
};

}  // namespace scarot
