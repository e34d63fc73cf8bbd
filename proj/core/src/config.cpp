#include "tailsim/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>
#include <string>

#include <json.hpp>

namespace tailsim {

namespace {

using nlohmann::json;

constexpr const char* kContext = "morphology config";

[[noreturn]] void fail_type(const std::string& key, const std::string& expected) {
  throw ConfigError(std::string(kContext) + ": \"" + key + "\" must be " + expected);
}

void reject_unknown_keys(const json& object, const std::string& scope,
                         std::initializer_list<const char*> allowed) {
  for (auto it = object.begin(); it != object.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError(std::string(kContext) + ": unknown key \"" + scope + it.key() +
                        "\"");
    }
  }
}

double read_number(const json& object, const std::string& scope, const std::string& key,
                   double fallback) {
  if (!object.contains(key)) return fallback;
  const json& value = object.at(key);
  if (!value.is_number()) fail_type(scope + key, "a number");
  return value.get<double>();
}

}  // namespace

MorphologySpec parse_morphology_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(kContext) + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) {
    throw ConfigError(std::string(kContext) + " must be a JSON object");
  }
  reject_unknown_keys(doc, "",
                      {"name", "bones", "endcap_mm", "joint", "tract_radius_mm",
                       "tract_azimuth_deg", "base_offset_mm"});

  MorphologySpec spec;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) fail_type("name", "a string");
    spec.name = doc["name"].get<std::string>();
  }

  if (!doc.contains("bones")) {
    throw ConfigError(std::string(kContext) + ": missing required key \"bones\"");
  }
  if (!doc["bones"].is_array() || doc["bones"].empty()) {
    fail_type("bones", "a non-empty array of lengths in mm");
  }
  for (const json& bone : doc["bones"]) {
    if (!bone.is_number()) fail_type("bones", "a non-empty array of lengths in mm");
    spec.bone_lengths.push_back(bone.get<double>());
  }

  spec.endcap_length = read_number(doc, "", "endcap_mm", spec.endcap_length);
  spec.tract_radius = read_number(doc, "", "tract_radius_mm", spec.tract_radius);
  spec.base_offset = read_number(doc, "", "base_offset_mm", spec.base_offset);

  if (doc.contains("joint")) {
    const json& joint = doc["joint"];
    if (!joint.is_object()) fail_type("joint", "an object");
    reject_unknown_keys(joint, "joint.",
                        {"h_mm", "r1_mm", "r2_mm", "E_mpa", "k_theta_nmm_per_rad"});
    spec.joint.h = read_number(joint, "joint.", "h_mm", spec.joint.h);
    spec.joint.r1 = read_number(joint, "joint.", "r1_mm", spec.joint.r1);
    spec.joint.r2 = read_number(joint, "joint.", "r2_mm", spec.joint.r2);
    spec.joint.E = read_number(joint, "joint.", "E_mpa", spec.joint.E);
    spec.joint.k_theta =
        read_number(joint, "joint.", "k_theta_nmm_per_rad", spec.joint.k_theta);
  }

  if (doc.contains("tract_azimuth_deg")) {
    const json& azimuths = doc["tract_azimuth_deg"];
    if (!azimuths.is_array() || azimuths.size() != spec.tract_azimuths.size()) {
      fail_type("tract_azimuth_deg", "an array of four angles in degrees");
    }
    for (std::size_t i = 0; i < spec.tract_azimuths.size(); ++i) {
      if (!azimuths[i].is_number()) {
        fail_type("tract_azimuth_deg", "an array of four angles in degrees");
      }
      spec.tract_azimuths[i] = azimuths[i].get<double>() * std::numbers::pi / 180.0;
    }
  }

  try {
    spec.validate();
  } catch (const ConstructionError& e) {
    throw ConfigError(std::string(kContext) + ": " + e.what());
  }
  return spec;
}

MorphologySpec load_morphology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("could not open morphology file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_morphology_json(text.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string morphology_to_json(const MorphologySpec& spec) {
  json doc;
  doc["name"] = spec.name;
  doc["bones"] = spec.bone_lengths;
  doc["endcap_mm"] = spec.endcap_length;
  doc["joint"] = {{"h_mm", spec.joint.h},
                  {"r1_mm", spec.joint.r1},
                  {"r2_mm", spec.joint.r2},
                  {"E_mpa", spec.joint.E},
                  {"k_theta_nmm_per_rad", spec.joint.k_theta}};
  doc["tract_radius_mm"] = spec.tract_radius;
  json azimuths = json::array();
  for (double a : spec.tract_azimuths) azimuths.push_back(a * 180.0 / std::numbers::pi);
  doc["tract_azimuth_deg"] = azimuths;
  doc["base_offset_mm"] = spec.base_offset;
  return doc.dump(2) + "\n";
}

}  // namespace tailsim
