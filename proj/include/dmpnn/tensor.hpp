#pragma once

#include <initializer_list>
#include <vector>

namespace dmpnn {

// Dense row-major tensor of doubles. Vectors are column vectors (n x 1).
struct Tensor {
  int rows = 0;
  int cols = 1;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int r, int c);

  static Tensor zeros(int r, int c = 1);
  static Tensor vec(std::initializer_list<double> v);
  static Tensor matrix(int r, int c, std::initializer_list<double> v);

  int size() const { return rows * cols; }
  double& operator()(int r, int c = 0) { return data[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c = 0) const { return data[static_cast<size_t>(r) * cols + c]; }
  bool finite() const;
};

}  // namespace dmpnn
