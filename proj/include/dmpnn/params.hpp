#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dmpnn {

// Flat storage for named trainable tensors. Values live in one contiguous
// buffer so the optimizer, gradient reductions, and checkpoint IO can treat
// the whole parameter set as a single vector.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    int offset = 0;
    int rows = 0;
    int cols = 1;
    int size() const { return rows * cols; }
  };

  // Adds a zero-initialized tensor and returns its entry id.
  int add(std::string name, int rows, int cols = 1);
  int find(std::string_view name) const;  // -1 if absent

  const Entry& entry(int id) const { return entries_[id]; }
  int entry_count() const { return static_cast<int>(entries_.size()); }

  std::span<double> values(int id);
  std::span<const double> values(int id) const;
  std::span<double> flat() { return values_; }
  std::span<const double> flat() const { return values_; }
  size_t size() const { return values_.size(); }

 private:
  std::vector<Entry> entries_;
  std::vector<double> values_;
};

}  // namespace dmpnn
