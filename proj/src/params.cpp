#include "dmpnn/params.hpp"

#include <stdexcept>

namespace dmpnn {

int ParamStore::add(std::string name, int rows, int cols) {
  if (rows <= 0 || cols <= 0)
    throw std::invalid_argument("ParamStore::add: dimensions must be positive (" + name + ")");
  if (find(name) >= 0)
    throw std::invalid_argument("ParamStore::add: duplicate name " + name);
  Entry e;
  e.name = std::move(name);
  e.offset = static_cast<int>(values_.size());
  e.rows = rows;
  e.cols = cols;
  values_.resize(values_.size() + static_cast<size_t>(rows) * cols, 0.0);
  entries_.push_back(std::move(e));
  return static_cast<int>(entries_.size()) - 1;
}

int ParamStore::find(std::string_view name) const {
  for (size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].name == name) return static_cast<int>(i);
  return -1;
}

std::span<double> ParamStore::values(int id) {
  const Entry& e = entries_.at(id);
  return std::span<double>(values_.data() + e.offset, static_cast<size_t>(e.size()));
}

std::span<const double> ParamStore::values(int id) const {
  const Entry& e = entries_.at(id);
  return std::span<const double>(values_.data() + e.offset, static_cast<size_t>(e.size()));
}

}  // namespace dmpnn
