#pragma once

namespace freerep {

// Kernels come in two flavours: the OpenMP one used by default and a plain
// serial loop kept as the reference for tests and benchmarks.
enum class Exec { serial, parallel };

// FREEREP_THREADS if set and positive, else the OpenMP default.
int worker_count();
// Pushes worker_count() into the OpenMP runtime.
void configure_threads_from_env();

}  // namespace freerep
