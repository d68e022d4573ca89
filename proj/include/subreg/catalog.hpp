#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace subreg {

struct CheckOutcome {
  std::string name;
  bool ok = false;
  std::string detail;
};

/// A reproducible example: an embedded problem document plus the qualitative
/// outcome its report must show.
struct CatalogEntry {
  std::string id;
  std::string title;
  std::string document;
  std::function<std::vector<CheckOutcome>(const nlohmann::json& report)> check;
};

const std::vector<CatalogEntry>& catalog();
const CatalogEntry* find_example(std::string_view id);

}  // namespace subreg
