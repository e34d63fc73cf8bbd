#pragma once

#include <string>

#include "tailsim/error.hpp"
#include "tailsim/geometry.hpp"

namespace tailsim {

// Parse a morphology description from JSON text. Lengths are in mm, azimuths
// in degrees; unknown keys are rejected so typos cannot silently fall back to
// defaults.
MorphologySpec parse_morphology_json(const std::string& text);

// Read and parse a morphology file.
MorphologySpec load_morphology(const std::string& path);

// Serialize a morphology back to JSON in the same schema parse accepts.
std::string morphology_to_json(const MorphologySpec& spec);

}  // namespace tailsim
