#ifndef CRITLIM_CONFIG_HPP
#define CRITLIM_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <locale>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "critlim/functional.hpp"
#include "critlim/kernels.hpp"
#include "critlim/limitlaw.hpp"
#include "critlim/montecarlo.hpp"

namespace critlim {

constexpr const char* kToolkitVersion = "0.1.0";
constexpr int kSchemaVersion = 1;

/// Config validation failure with a line/field diagnostic.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline std::string format_double(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << v;
  return os.str();
}

/// Flat `key = value` config text: one pair per line, `#` comments.  Keys
/// are unordered in the file; serialization and hashing are canonical
/// (sorted), so the hash is stable under key reordering.
class KvConfig {
 public:
  KvConfig() = default;

  static KvConfig parse_string(const std::string& text) {
    KvConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash_pos = line.find('#');
      if (hash_pos != std::string::npos) line.resize(hash_pos);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(lineno) +
                          ": expected `key = value`");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty())
        throw ConfigError("line " + std::to_string(lineno) + ": empty key");
      if (cfg.values_.count(key))
        throw ConfigError("line " + std::to_string(lineno) +
                          ": duplicate key `" + key + "`");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  static KvConfig parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end())
      throw ConfigError("missing config key `" + key + "`");
    return it->second;
  }

  std::string get_string(const std::string& key, const std::string& dflt) const {
    return has(key) ? get_string(key) : dflt;
  }

  double get_double(const std::string& key) const {
    return to_double(key, get_string(key));
  }
  double get_double(const std::string& key, double dflt) const {
    return has(key) ? get_double(key) : dflt;
  }

  long get_long(const std::string& key) const {
    const std::string v = get_string(key);
    try {
      std::size_t pos = 0;
      const long out = std::stol(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw ConfigError("field `" + key + "`: not an integer: " + v);
    }
  }
  long get_long(const std::string& key, long dflt) const {
    return has(key) ? get_long(key) : dflt;
  }

  bool get_bool(const std::string& key, bool dflt) const {
    if (!has(key)) return dflt;
    const std::string v = get_string(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("field `" + key + "`: expected true/false: " + v);
  }

  std::vector<double> get_double_list(const std::string& key) const {
    const std::string v = get_string(key);
    std::vector<double> out;
    std::istringstream in(v);
    std::string item;
    while (std::getline(in, item, ',')) {
      const std::string t = trim(item);
      if (t.empty()) continue;
      out.push_back(to_double(key, t));
    }
    if (out.empty()) throw ConfigError("field `" + key + "`: empty list");
    return out;
  }

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  // canonical form: sorted keys, one `key = value` per line
  std::string serialize() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
  }

  // FNV-1a over the canonical serialization
  std::string hash() const {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : serialize()) {
      h ^= c;
      h *= 0x100000001B3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setfill('0') << std::setw(16) << h;
    return os.str();
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static double to_double(const std::string& key, const std::string& v) {
    std::istringstream in(v);
    in.imbue(std::locale::classic());
    double out;
    in >> out;
    if (in.fail() || !in.eof())
      throw ConfigError("field `" + key + "`: not a number: " + v);
    return out;
  }

  std::map<std::string, std::string> values_;
};

inline void check_schema_version(const KvConfig& cfg) {
  const long v = cfg.get_long("schema_version", kSchemaVersion);
  if (v != kSchemaVersion)
    throw ConfigError("unsupported schema_version " + std::to_string(v));
}

inline KernelSpec kernel_from_config(const KvConfig& cfg) {
  const std::string family = cfg.get_string("family");
  Family fam;
  try {
    fam = family_from_name(family);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("field `family`: ") + e.what());
  }
  const double h = cfg.get_double("H");
  const double k = cfg.get_double("K", 1.0);
  const long d = cfg.get_long("d");
  const bool critical = cfg.get_bool("critical", false);
  try {
    return KernelSpec(fam, h, k, static_cast<int>(d), critical);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("kernel fields: ") + e.what());
  }
}

inline TestFunction function_from_config(const KvConfig& cfg, int d) {
  const std::string kind = cfg.get_string("f", "gauss");
  const double s1 = cfg.get_double("sigma1", 1.0);
  const double s2 = cfg.get_double("sigma2", 2.0);
  const double amplitude = cfg.get_double("amplitude", 1.0);
  try {
    TestFunction f = kind == "gauss" ? TestFunction::gauss(s1, d)
                     : kind == "diff_gauss"
                         ? TestFunction::diff_gauss(s1, s2, d)
                         : throw std::invalid_argument("unknown kind " + kind);
    return f.scaled(amplitude);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("field `f`: ") + e.what());
  }
}

inline ExperimentConfig experiment_from_config(const KvConfig& cfg,
                                               std::uint64_t seed) {
  ExperimentConfig out;
  out.spec = kernel_from_config(cfg);
  out.f = function_from_config(cfg, out.spec.d);
  const std::string order = cfg.get_string("order", "first");
  if (order == "first") {
    out.order = LawOrder::first;
  } else if (order == "second") {
    out.order = LawOrder::second;
  } else {
    throw ConfigError("field `order`: expected first or second");
  }
  if (cfg.has("n_list")) out.n_list = cfg.get_double_list("n_list");
  out.t1 = cfg.get_double("t1", 1.0);
  out.t2 = cfg.get_double("t2", 1.0);
  out.replicates = static_cast<std::size_t>(cfg.get_long("replicates", 500));
  out.m_lin = static_cast<std::size_t>(cfg.get_long("m_lin", 8));
  out.m_log = static_cast<std::size_t>(cfg.get_long("m_log", 128));
  out.m_max = static_cast<int>(cfg.get_long("m_max", 4));
  out.root_seed = seed;
  try {
    out.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("experiment fields: ") + e.what());
  }
  return out;
}

}  // namespace critlim

#endif  // CRITLIM_CONFIG_HPP
