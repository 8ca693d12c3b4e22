#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mather/configurations.hpp"
#include "mather/critical.hpp"
#include "mather/hull.hpp"
#include "mather/percival.hpp"
#include "mather/solvers.hpp"

namespace mather {

/// 17 significant digits; round-trips every finite double.
std::string format_real(double x);

/// Parses a whole field as a double. Throws Errc::parse_error.
double parse_real(std::string_view text);

/// JSON text with floats printed by format_real and non-finite floats as
/// null. Object keys keep nlohmann's (sorted) order, so output is stable.
std::string dump_json(const nlohmann::json& j, int indent = 2);

/// Reads and parses a JSON file. Throws Errc::parse_error.
nlohmann::json read_json_file(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

std::string hull_to_csv(const HullFunction& h);   // theta,h
nlohmann::json hull_to_json(const HullFunction& h);  // {"N", "values"}
HullFunction hull_from_csv(std::string_view text);
HullFunction hull_from_json(const nlohmann::json& j);
/// Dispatches on the extension (.json or CSV otherwise).
HullFunction read_hull_file(const std::filesystem::path& path);

std::string residual_to_csv(const ResidualField& x);  // theta,X
std::string history_to_csv(const std::vector<HistoryEntry>& history);
std::string profile_to_csv(const std::vector<ProfilePoint>& profile);  // s,limiting_energy

/// Rows i_1,..,i_d,u covering the whole box.
std::string configuration_to_csv(const ConfigurationWindow& u);
ConfigurationWindow configuration_from_csv(std::string_view text);

nlohmann::json certificate_to_json(const CertificateReport& r);

}  // namespace mather
