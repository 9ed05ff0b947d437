#pragma once

namespace otdiff {

// Thread count for the OpenMP kernel loops. 0 = runtime default.
// All kernels parallelize over output rows with static scheduling and keep
// per-row accumulation serial, so results are bit-identical for any thread
// count; reductions that cross rows are kept serial for the same reason.
void set_threads(int n);
int thread_count();

} // namespace otdiff
