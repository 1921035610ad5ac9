#pragma once

namespace ontomatch {

// Selects between the serial reference path and the OpenMP path for the
// batch kernels (candidate-set building, pair scoring, report building).
// Both paths must produce bit-identical results; tests enforce this.
enum class ExecMode { Serial, Parallel };

}  // namespace ontomatch
