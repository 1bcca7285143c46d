#pragma once

namespace martsia {

/// Selects the per-row kernel used by the ABE encrypt/decrypt paths.
/// Serial is the reference; both produce byte-identical results.
enum class Exec { Serial, Parallel };

}  // namespace martsia
