#pragma once

#include <cstddef>
#include <functional>

namespace wfldp {

/// Worker threads used by parallel loops; 0 means the OpenMP default.
void set_num_threads(int threads);
int num_threads();

/// Runs body(i) for i in [0, count). Iterations must only write to slots they
/// own; any reduction is done by the caller in index order afterwards.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace wfldp
