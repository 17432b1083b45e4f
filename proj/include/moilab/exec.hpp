#pragma once

namespace moilab {

// Kernels that loop over independent work items accept this switch. Both
// variants reduce in the same fixed order, so results are bit-identical.
enum class Exec { serial, parallel };

}  // namespace moilab
