#pragma once

#include <string>

#include <json.hpp>

#include "gt/correspond.hpp"
#include "gt/scene.hpp"
#include "gt/tensor.hpp"

namespace gt {

// File formats. Field names are part of the interface:
//   config          {"n": int, "m": [int], "cameras": [[[f64]]]}   (row-major)
//   tensor          {"profile": {"n": int, "m": [int], "alpha": [int]}, "entries": [f64]}
//   correspondences {"profile": ..., "tuples": [{"forms": [[[f64]]]}]}
// Serialized objects carry exactly these keys; reports built on top may add
// their own. Malformed input surfaces as validation_error, never a crash.

nlohmann::json config_json(const CameraConfig& cfg);
CameraConfig config_from_json(const nlohmann::json& j);

nlohmann::json profile_json(const Profile& p);
Profile profile_from_json(const nlohmann::json& j);

nlohmann::json tensor_json(const GrassmannTensor& t);
GrassmannTensor tensor_from_json(const nlohmann::json& j);

nlohmann::json correspondences_json(const CorrespondenceSet& cs);
CorrespondenceSet correspondences_from_json(const nlohmann::json& j);

nlohmann::json matrix_json(const Mat& m);
Mat matrix_from_json(const nlohmann::json& j);

// Parse/shape failures throw validation_error with the offending path in the
// message; write failures mention the file name.
nlohmann::json load_json(const std::string& path);
void save_json(const std::string& path, const nlohmann::json& j);

} // namespace gt
