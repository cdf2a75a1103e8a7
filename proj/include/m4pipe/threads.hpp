#pragma once

namespace m4 {

/// Number of threads OpenMP regions in this library use. Controlled by the
/// M4PIPE_THREADS environment variable; unset or 0 means the OpenMP default.
/// Read once and cached for the process lifetime.
int thread_count();

}  // namespace m4
