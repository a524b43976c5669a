#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "threshold/critical_channel.hpp"
#include "threshold/model_setup.hpp"
#include "threshold/radial_grid.hpp"
#include "threshold/threshold_classifier.hpp"

namespace thr::config {

using Json = nlohmann::json;

// Reads and parses a JSON scenario; syntax errors become ValidationError.
Json load(const std::filesystem::path& path);

// Typed accessors; failures name the offending path, e.g. "operator.grid.n".
const Json& require(const Json& j, const std::string& key, const std::string& path);
double number(const Json& j, const std::string& key, const std::string& path);
double number_or(const Json& j, const std::string& key, double fallback, const std::string& path);
int integer(const Json& j, const std::string& key, const std::string& path);
int integer_or(const Json& j, const std::string& key, int fallback, const std::string& path);
std::string text_or(const Json& j, const std::string& key, const std::string& fallback, const std::string& path);
std::vector<double> numbers(const Json& j, const std::string& key, const std::string& path);
MatR matrix(const Json& j, const std::string& path);

RadialGrid parse_grid(const Json& j, const std::string& path);
// Radial profile r -> value from {"profile": ..., parameters}.
std::function<double(double)> parse_profile(const Json& j, const std::string& path);
EffectiveOperator parse_operator(const Json& j, const std::string& path);
ParticleSystem parse_system(const Json& j, const std::string& path);
BoundState parse_bound_state(const Json& j, const std::string& path, const std::filesystem::path& base);
std::vector<ChannelSpec> parse_channels(const Json& j, const std::string& path, const std::filesystem::path& base);
AngularOperator parse_angular(const Json& j, const std::string& path);

}  // namespace thr::config
