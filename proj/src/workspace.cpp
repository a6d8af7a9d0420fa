// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#include "mtm/workspace.hpp"

#include <algorithm>

namespace mtm {
namespace {
thread_local BufferAudit tls_audit;
}

BufferAudit buffer_audit() { return tls_audit; }

void reset_buffer_peak() {
  tls_audit.peak_buffers = tls_audit.live_buffers;
  tls_audit.peak_elements = tls_audit.live_elements;
}

namespace detail {

void audit_acquire(std::size_t elements) {
  tls_audit.live_buffers += 1;
  tls_audit.live_elements += elements;
  tls_audit.peak_buffers = std::max(tls_audit.peak_buffers, tls_audit.live_buffers);
  tls_audit.peak_elements = std::max(tls_audit.peak_elements, tls_audit.live_elements);
}

void audit_release(std::size_t elements) {
  tls_audit.live_buffers -= 1;
  tls_audit.live_elements -= elements;
}

}  // namespace detail
}  // namespace mtm
