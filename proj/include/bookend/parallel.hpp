#pragma once

namespace bookend {

/// Selects between the OpenMP kernels and their serial reference loops.
/// Both paths produce bit-identical results for the same inputs.
enum class Execution { Serial, Parallel };

int max_threads() noexcept;
void set_threads(int n) noexcept;

}  // namespace bookend
