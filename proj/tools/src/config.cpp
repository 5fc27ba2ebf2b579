#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <type_traits>

#include "kolmo/csv.hpp"

namespace kolmo::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || text.empty())
    throw ConfigError("invalid value '" + text + "' for key '" + key + "'");
  return v;
}

void parse_into(const std::string& key, const std::string& text, double& v) { v = parse_number<double>(key, text); }
void parse_into(const std::string& key, const std::string& text, int& v) { v = parse_number<int>(key, text); }
void parse_into(const std::string& key, const std::string& text, std::uint64_t& v) {
  v = parse_number<std::uint64_t>(key, text);
}
void parse_into(const std::string&, const std::string& text, std::string& v) { v = text; }
void parse_into(const std::string& key, const std::string& text, bool& v) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") {
    v = true;
  } else if (text == "false" || text == "0" || text == "no" || text == "off") {
    v = false;
  } else {
    throw ConfigError("invalid boolean '" + text + "' for key '" + key + "'");
  }
}
void parse_into(const std::string& key, const std::string& text, std::vector<int>& v) {
  v.clear();
  for (const auto& item : split_list(text)) v.push_back(parse_number<int>(key, item));
}

std::string print(double v) { return format_double(v); }
std::string print(int v) { return std::to_string(v); }
std::string print(std::uint64_t v) { return std::to_string(v); }
std::string print(const std::string& v) { return v; }
std::string print(bool v) { return v ? "true" : "false"; }
std::string print(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

template <class Record>
void set_in_record(Record& rec, const std::string& section, const std::string& key, const std::string& value) {
  bool found = false;
  rec.visit([&](const char* name, auto& field) {
    if (key == name) {
      parse_into(key, value, field);
      found = true;
    }
  });
  if (!found) throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
}

template <class Record>
std::string record_text(Record& rec) {
  std::string out;
  rec.visit([&](const char* name, auto& field) { out += std::string(name) + " = " + print(field) + "\n"; });
  return out;
}

}  // namespace

std::vector<std::string> section_names() {
  std::vector<std::string> names;
  RunConfig cfg;
  cfg.sections([&](const char* name, auto&) { names.emplace_back(name); });
  return names;
}

void set_value(RunConfig& cfg, const std::string& section, const std::string& key, const std::string& value) {
  if (section == "run") {
    if (key == "seed") {
      parse_into(key, value, cfg.seed);
    } else if (key == "stages") {
      const auto known = section_names();
      cfg.stages = split_list(value);
      for (const auto& s : cfg.stages) {
        if (std::find(known.begin(), known.end(), s) == known.end())
          throw ConfigError("unknown stage '" + s + "' in [run] stages");
      }
    } else {
      throw ConfigError("unknown key '" + key + "' in section [run]");
    }
    return;
  }
  bool found = false;
  cfg.sections([&](const char* name, auto& rec) {
    if (section == name) {
      set_in_record(rec, section, key, value);
      found = true;
    }
  });
  if (!found) throw ConfigError("unknown section [" + section + "]");
}

std::map<std::string, std::string> section_values(RunConfig& cfg, const std::string& section) {
  std::map<std::string, std::string> out;
  bool found = false;
  cfg.sections([&](const char* name, auto& rec) {
    if (section != name) return;
    found = true;
    rec.visit([&](const char* key, auto& field) { out[key] = print(field); });
  });
  if (!found) throw ConfigError("unknown section [" + section + "]");
  return out;
}

RunConfig parse_config(std::string_view text, const std::string& source) {
  RunConfig cfg;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    try {
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError("unterminated section header");
        section = trim(std::string_view(line).substr(1, line.size() - 2));
        const auto names = section_names();
        if (section != "run" && std::find(names.begin(), names.end(), section) == names.end())
          throw ConfigError("unknown section [" + section + "]");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("expected 'key = value'");
      if (section.empty()) throw ConfigError("key outside of any section");
      set_value(cfg, section, trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string section_text(RunConfig& cfg, const std::string& section) {
  std::string out;
  bool found = false;
  cfg.sections([&](const char* name, auto& rec) {
    if (section != name) return;
    found = true;
    out = "[" + section + "]\n" + record_text(rec);
  });
  if (!found) throw ConfigError("unknown section [" + section + "]");
  return out;
}

std::string to_text(RunConfig& cfg) {
  std::string out = "[run]\nseed = " + print(cfg.seed) + "\nstages = ";
  for (std::size_t i = 0; i < cfg.stages.size(); ++i) out += (i ? "," : "") + cfg.stages[i];
  out += "\n";
  cfg.sections([&](const char* name, auto& rec) { out += "\n[" + std::string(name) + "]\n" + record_text(rec); });
  return out;
}

}  // namespace kolmo::cli
