#pragma once

#include <cstddef>
#include <cstring>
#include <vector>

#include "orbfe/errors.hpp"

namespace orbfe {

/// Ring of the last K rows of a row stream. Software analogue of the
/// shifting line buffers that feed a sliding KxK window in the hardware
/// dataflow: memory stays O(K rows) no matter how tall the image is.
template <typename T>
class LineBuffer {
 public:
  LineBuffer(int width, int rows) : width_(width), rows_(rows), store_(0) {
    if (width < 1 || rows < 1) throw PreconditionError("LineBuffer: bad geometry");
    store_.resize(static_cast<std::size_t>(width) * rows);
  }

  void push(const T* row) {
    T* dst = store_.data() + static_cast<std::size_t>(head_) * width_;
    std::memcpy(dst, row, sizeof(T) * static_cast<std::size_t>(width_));
    head_ = (head_ + 1) % rows_;
    if (count_ < rows_) ++count_;
    ++pushed_;
  }

  /// Row i of the window, i = 0 oldest .. rows()-1 newest. Valid once full().
  const T* row(int i) const {
    const int slot = (head_ + rows_ - count_ + i) % rows_;
    return store_.data() + static_cast<std::size_t>(slot) * width_;
  }

  bool full() const { return count_ == rows_; }
  int width() const { return width_; }
  int rows() const { return rows_; }
  long pushed() const { return pushed_; }

 private:
  int width_;
  int rows_;
  std::vector<T> store_;
  int head_ = 0;
  int count_ = 0;
  long pushed_ = 0;
};

}  // namespace orbfe
