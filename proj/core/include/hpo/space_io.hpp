#pragma once

#include "hpo/hyperspace.hpp"

#include <filesystem>
#include <string>

namespace hpo {

/// Space definition documents (JSON):
///
///   {"dimensions": [
///     {"name": "C", "kind": "continuous", "bounds": [0.001, 2.15]},
///     {"name": "n_estimators", "kind": "continuous", "log": true, "bounds": [4.60517, 6.907755]},
///     {"name": "width", "kind": "continuous", "bounds": [2, 21], "int_round": true},
///     {"name": "max_depth", "kind": "discrete", "values": [3, 4, 5]},
///     {"name": "booster", "kind": "categorical", "values": ["gbtree", "dart"]}
///   ]}
///
/// With "log": true the bounds are natural-log units. Errors are reported as
/// DataError with the offending record index or the parser's line/column.
HyperSpace parse_space(const std::string& text);
HyperSpace load_space(const std::filesystem::path& path);
std::string dump_space(const HyperSpace& space);

/// A preset name ("rbf", "xgb", "mlp") or a path to a space document.
HyperSpace resolve_space(const std::string& preset_or_path);

}  // namespace hpo
