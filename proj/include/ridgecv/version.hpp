#pragma once

namespace ridgecv {

inline constexpr const char* kVersion = "0.1.0";
// bumped when any output file schema (curve CSV, verdict JSON, experiment
// CSV, manifest) changes shape
inline constexpr int kOutputSchemaVersion = 1;

}  // namespace ridgecv
