#pragma once

#include <string>

#include "json.hpp"

namespace curvscan {

using ojson = nlohmann::ordered_json;

/// Deterministic serialization: insertion key order, two-space indent,
/// floating-point numbers printed with up to 17 significant digits.
std::string dump_stable(const ojson& j);

}  // namespace curvscan
