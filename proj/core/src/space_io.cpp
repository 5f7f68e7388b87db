#include "hpo/space_io.hpp"

#include "hpo/error.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace hpo {

using nlohmann::json;

HyperSpace parse_space(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("space document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("dimensions") || !doc["dimensions"].is_array())
    throw DataError("space document: expected an object with a \"dimensions\" array");

  std::vector<Dimension> dims;
  std::set<std::string> int_round;
  std::size_t record = 0;
  for (const auto& entry : doc["dimensions"]) {
    const std::string where = "space document: dimension record " + std::to_string(record++);
    try {
      const auto name = entry.at("name").get<std::string>();
      const auto kind = entry.at("kind").get<std::string>();
      const bool log = entry.value("log", false);
      if (kind == "continuous") {
        const auto bounds = entry.at("bounds").get<std::vector<double>>();
        if (bounds.size() != 2) throw DataError(where + ": \"bounds\" needs two numbers");
        dims.push_back(log ? Dimension::log_continuous(name, bounds[0], bounds[1])
                           : Dimension::continuous(name, bounds[0], bounds[1]));
        if (entry.value("int_round", false)) int_round.insert(name);
      } else if (kind == "discrete") {
        dims.push_back(Dimension::discrete(name, entry.at("values").get<std::vector<double>>()));
      } else if (kind == "categorical") {
        dims.push_back(Dimension::categorical(name, entry.at("values").get<std::vector<std::string>>()));
      } else {
        throw DataError(where + ": unknown kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw DataError(where + ": " + e.what());
    } catch (const InvalidArgument& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  try {
    return HyperSpace(std::move(dims), std::move(int_round));
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("space document: ") + e.what());
  }
}

HyperSpace load_space(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open space document '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_space(buffer.str());
}

std::string dump_space(const HyperSpace& space) {
  json dims = json::array();
  for (const auto& d : space.dims()) {
    json record{{"name", d.name()}};
    if (const auto* c = std::get_if<Continuous>(&d.kind())) {
      record["kind"] = "continuous";
      record["bounds"] = {c->lo, c->hi};
    } else if (const auto* lc = std::get_if<LogContinuous>(&d.kind())) {
      record["kind"] = "continuous";
      record["log"] = true;
      record["bounds"] = {lc->log_lo, lc->log_hi};
    } else if (const auto* dv = std::get_if<DiscreteOrdinal>(&d.kind())) {
      record["kind"] = "discrete";
      record["values"] = dv->values;
    } else {
      record["kind"] = "categorical";
      record["values"] = std::get<Categorical>(d.kind()).labels;
    }
    if (space.rounds_to_int(d.name())) record["int_round"] = true;
    dims.push_back(std::move(record));
  }
  return json{{"dimensions", dims}}.dump(2) + "\n";
}

HyperSpace resolve_space(const std::string& preset_or_path) {
  for (const auto& name : presets::names()) {
    if (name == preset_or_path) return presets::by_name(name);
  }
  return load_space(preset_or_path);
}

}  // namespace hpo
