#pragma once

#include <filesystem>

#include "sensi/recurrent.hpp"

namespace sensi {

/// Writes model configuration, scaler statistics, and every parameter tensor
/// as JSON. Doubles survive the round trip bit for bit. The model must have a
/// scaler attached.
void save_snapshot(const RecurrentForecaster& model, const std::filesystem::path& path);

/// Rebuilds a forecaster from save_snapshot output. Throws MissingInputError
/// if the file is absent, Error on version or parse problems, ValidationError
/// on layout mismatches.
RecurrentForecaster load_snapshot(const std::filesystem::path& path);

}  // namespace sensi
