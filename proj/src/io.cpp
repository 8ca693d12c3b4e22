#include "mather/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "mather/errors.hpp"

namespace mather {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Non-empty lines of a CSV document.
std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  for (auto line : split(text, '\n')) {
    line = trim(line);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::int64_t parse_integer(std::string_view text) {
  text = trim(text);
  std::int64_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw Error(Errc::parse_error, "not an integer: '" + std::string(text) + "'");
  }
  return v;
}

void dump(const nlohmann::json& j, int indent, int depth, std::string& out) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case nlohmann::json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? format_real(x) : "null";
      return;
    }
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad + nlohmann::json(it.key()).dump() + (indent > 0 ? ": " : ":");
        dump(it.value(), indent, depth + 1, out);
      }
      out += nl + close + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      out += nl;
      for (std::size_t n = 0; n < j.size(); ++n) {
        if (n > 0) {
          out += ",";
          out += nl;
        }
        out += pad;
        dump(j[n], indent, depth + 1, out);
      }
      out += nl + close + "]";
      return;
    }
    default:
      out += j.dump();
  }
}

nlohmann::json site_json(const Site& i) { return nlohmann::json(i); }

}  // namespace

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_real(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw Error(Errc::parse_error, "empty numeric field");
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw Error(Errc::parse_error, "not a number: '" + s + "'");
  if (!std::isfinite(v)) throw Error(Errc::parse_error, "non-finite number: '" + s + "'");
  return v;
}

std::string dump_json(const nlohmann::json& j, int indent) {
  std::string out;
  dump(j, indent, 0, out);
  out += "\n";
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::parse_error, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::invalid_argument, "cannot write " + path.string());
  out << text;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::parse_error, path.string() + ": " + e.what());
  }
}

std::string hull_to_csv(const HullFunction& h) {
  std::string out = "theta,h\n";
  const double n = static_cast<double>(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) {
    out += format_real(static_cast<double>(k) / n) + "," + format_real(h[k]) + "\n";
  }
  return out;
}

nlohmann::json hull_to_json(const HullFunction& h) {
  return {{"N", h.size()}, {"values", h.values()}};
}

HullFunction hull_from_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.size() < 2 || lines[0] != "theta,h") {
    throw Error(Errc::parse_error, "hull CSV needs a 'theta,h' header and rows");
  }
  const std::size_t n = lines.size() - 1;
  std::vector<double> v;
  for (std::size_t k = 0; k < n; ++k) {
    const auto cols = split(lines[k + 1], ',');
    if (cols.size() != 2) throw Error(Errc::parse_error, "hull CSV rows need two columns");
    const double theta = parse_real(cols[0]);
    if (std::abs(theta - static_cast<double>(k) / static_cast<double>(n)) > 1e-12) {
      throw Error(Errc::parse_error, "hull CSV theta column is not the uniform grid k/N");
    }
    v.push_back(parse_real(cols[1]));
  }
  return HullFunction::from_values(v);
}

HullFunction hull_from_json(const nlohmann::json& j) {
  try {
    const auto n = j.at("N").get<std::size_t>();
    const auto v = j.at("values").get<std::vector<double>>();
    if (v.size() != n) throw Error(Errc::parse_error, "hull JSON: N differs from values length");
    if (n == 0) throw Error(Errc::parse_error, "hull JSON: no values");
    for (double x : v) {
      if (!std::isfinite(x)) throw Error(Errc::parse_error, "hull JSON: non-finite value");
    }
    return HullFunction::from_values(v);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("hull JSON: ") + e.what());
  }
}

HullFunction read_hull_file(const std::filesystem::path& path) {
  if (path.extension() == ".json") return hull_from_json(read_json_file(path));
  return hull_from_csv(read_text_file(path));
}

std::string residual_to_csv(const ResidualField& x) {
  std::string out = "theta,X\n";
  const double n = static_cast<double>(x.values.size());
  for (std::size_t k = 0; k < x.values.size(); ++k) {
    out += format_real(static_cast<double>(k) / n) + "," + format_real(x.values[k]) + "\n";
  }
  return out;
}

std::string history_to_csv(const std::vector<HistoryEntry>& history) {
  std::string out = "step,time,energy,residual_sup\n";
  for (const auto& e : history) {
    out += std::to_string(e.step) + "," + format_real(e.time) + "," + format_real(e.energy) + "," +
           format_real(e.residual_sup) + "\n";
  }
  return out;
}

std::string profile_to_csv(const std::vector<ProfilePoint>& profile) {
  std::string out = "s,limiting_energy\n";
  for (const auto& p : profile) out += format_real(p.s) + "," + format_real(p.limiting_energy) + "\n";
  return out;
}

std::string configuration_to_csv(const ConfigurationWindow& u) {
  std::string out;
  for (std::size_t j = 0; j < u.dim(); ++j) out += "i_" + std::to_string(j + 1) + ",";
  out += "u\n";
  for (std::size_t n = 0; n < u.size(); ++n) {
    for (auto x : u.site(n)) out += std::to_string(x) + ",";
    out += format_real(u.values()[n].value()) + "\n";
  }
  return out;
}

ConfigurationWindow configuration_from_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.size() < 2) throw Error(Errc::parse_error, "configuration CSV needs a header and rows");
  const auto header = split(lines[0], ',');
  if (header.size() < 2 || trim(header.back()) != "u") {
    throw Error(Errc::parse_error, "configuration CSV header must be i_1,..,i_d,u");
  }
  const std::size_t d = header.size() - 1;
  for (std::size_t j = 0; j < d; ++j) {
    if (trim(header[j]) != "i_" + std::to_string(j + 1)) {
      throw Error(Errc::parse_error, "configuration CSV header must be i_1,..,i_d,u");
    }
  }
  std::map<Site, double> rows;
  std::int64_t radius = 0;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cols = split(lines[r], ',');
    if (cols.size() != d + 1) throw Error(Errc::parse_error, "configuration CSV row has wrong width");
    Site i(d);
    for (std::size_t j = 0; j < d; ++j) {
      i[j] = parse_integer(cols[j]);
      radius = std::max(radius, i[j] < 0 ? -i[j] : i[j]);
    }
    if (!rows.emplace(i, parse_real(cols[d])).second) {
      throw Error(Errc::parse_error, "configuration CSV repeats a site");
    }
  }
  const std::size_t count = ConfigurationWindow::box_size(d, radius);
  if (rows.size() != count) {
    throw Error(Errc::parse_error, "configuration CSV does not cover the box of radius " +
                                       std::to_string(radius));
  }
  std::vector<Lifted> v(count);
  for (std::size_t n = 0; n < count; ++n) {
    v[n] = Lifted::from_double(rows.at(ConfigurationWindow::site_of(d, radius, n)));
  }
  return ConfigurationWindow(d, radius, std::move(v));
}

nlohmann::json certificate_to_json(const CertificateReport& r) {
  nlohmann::json w = nlohmann::json::array();
  for (const auto& x : r.witnesses) {
    nlohmann::json e{{"kind", x.kind}, {"value", x.value}};
    if (!x.k.empty()) {
      e["k"] = site_json(x.k);
      e["l"] = x.l;
    }
    if (!x.site.empty()) e["site"] = site_json(x.site);
    if (x.trial >= 0) e["trial"] = x.trial;
    w.push_back(std::move(e));
  }
  return {{"kind", to_string(r.kind)}, {"passed", r.passed}, {"margin", r.margin},
          {"scope", r.scope}, {"witnesses", std::move(w)}};
}

}  // namespace mather
