// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mtm {

// Per-thread accounting of live working buffers. Used to check the memory
// footprint of the fast estimator structurally rather than by RSS sampling.
struct BufferAudit {
  std::size_t live_buffers = 0;
  std::size_t live_elements = 0;
  std::size_t peak_buffers = 0;
  std::size_t peak_elements = 0;
};

BufferAudit buffer_audit();
void reset_buffer_peak();

namespace detail {
void audit_acquire(std::size_t elements);
void audit_release(std::size_t elements);
}  // namespace detail

template <class T>
class Workspace {
 public:
  explicit Workspace(std::size_t n, T init = T{}) : data_(n, init) { detail::audit_acquire(n); }
  ~Workspace() { detail::audit_release(data_.size()); }

  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;

  std::size_t size() const { return data_.size(); }
  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  std::span<T> span() { return data_; }
  std::span<const T> span() const { return data_; }
  std::vector<T>& vec() { return data_; }

 private:
  std::vector<T> data_;
};

}  // namespace mtm
