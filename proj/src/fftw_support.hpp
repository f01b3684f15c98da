#pragma once

#include <mutex>

namespace clab::detail {

/// FFTW planning is not thread-safe; every planner call holds this lock.
std::mutex& fftw_planner_mutex();

/// Sets the planner thread count from COULOMB_LAB_THREADS. Call with the
/// planner lock held.
void configure_fftw_threads();

}  // namespace clab::detail
