#include "dmpnn/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace dmpnn {

Tensor::Tensor(int r, int c) : rows(r), cols(c) {
  if (r < 0 || c < 0) throw std::invalid_argument("Tensor: negative dimension");
  data.assign(static_cast<size_t>(r) * c, 0.0);
}

Tensor Tensor::zeros(int r, int c) {
  return Tensor(r, c);
}

Tensor Tensor::vec(std::initializer_list<double> v) {
  Tensor t(static_cast<int>(v.size()), 1);
  t.data.assign(v.begin(), v.end());
  return t;
}

Tensor Tensor::matrix(int r, int c, std::initializer_list<double> v) {
  if (static_cast<size_t>(r) * c != v.size())
    throw std::invalid_argument("Tensor::matrix: value count does not match shape");
  Tensor t(r, c);
  t.data.assign(v.begin(), v.end());
  return t;
}

bool Tensor::finite() const {
  for (double x : data)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace dmpnn
