#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mixgp/gpcore.hpp"

namespace mixgp {

/// Self-describing JSON document holding bounds, family, kernel parameters,
/// mu_hat, sigma2_hat and the training data. Doubles are written with
/// round-trip precision, so a reloaded model predicts bit-for-bit the same.
std::string serialize_model(const GPFit& fit);
GPFit deserialize_model(std::string_view text);

void save_model(const GPFit& fit, const std::filesystem::path& path);
GPFit load_model(const std::filesystem::path& path);

}  // namespace mixgp
