#include "drn/io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace drn {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view s, const std::string& what) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("cannot parse '" + std::string(s) + "' as a number for " + what);
  }
  return v;
}

void write_header(std::ostream& out, const CsvHeader& header) {
  for (const auto& [k, v] : header) out << "# " << k << ": " << v << '\n';
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex_hash(std::uint64_t hash) {
  char buf[17];
  const auto [ptr, ec] = std::to_chars(buf, buf + 16, hash, 16);
  std::string s(buf, ptr);
  return std::string(16 - s.size(), '0') + s;
}

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
  KeyValueConfig cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw std::runtime_error("config line " + std::to_string(line_no) + ": empty key");
    if (cfg.has(key)) throw std::runtime_error("config key '" + key + "' given twice");
    cfg.entries_.emplace_back(key, value);
  }
  return cfg;
}

bool KeyValueConfig::has(const std::string& key) const {
  for (const auto& e : entries_) {
    if (e.first == key) return true;
  }
  return false;
}

const std::string& KeyValueConfig::get(const std::string& key) const {
  for (const auto& e : entries_) {
    if (e.first == key) return e.second;
  }
  throw std::runtime_error("missing config key '" + key + "'");
}

double KeyValueConfig::get_double(const std::string& key) const {
  return parse_double(get(key), key);
}

std::uint64_t KeyValueConfig::get_uint(const std::string& key) const {
  const std::string_view s = trim(get(key));
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("config key '" + key + "' must be a non-negative integer");
  }
  return v;
}

void KeyValueConfig::set(const std::string& key, std::string value) {
  for (auto& e : entries_) {
    if (e.first == key) {
      e.second = std::move(value);
      return;
    }
  }
  entries_.emplace_back(key, std::move(value));
}

void KeyValueConfig::erase(const std::string& key) {
  std::erase_if(entries_, [&](const auto& e) { return e.first == key; });
}

void KeyValueConfig::merge(const KeyValueConfig& other) {
  for (const auto& [k, v] : other.entries_) set(k, v);
}

std::string KeyValueConfig::canonical() const {
  std::map<std::string, std::string> sorted(entries_.begin(), entries_.end());
  std::string out;
  for (const auto& [k, v] : sorted) out += k + " = " + v + "\n";
  return out;
}

void write_lineshape_csv(std::ostream& out, const Lineshape& shape, const CsvHeader& header) {
  write_header(out, header);
  out << "# background: " << format_double(shape.background) << '\n';
  out << "detuning_hz,transmission\n";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    out << format_double(shape.detunings[i] / (2.0 * std::numbers::pi)) << ','
        << format_double(shape.values[i]) << '\n';
  }
}

void write_lineshape_table(std::ostream& out, std::span<const double> detunings,
                           const std::vector<std::pair<std::string, std::vector<double>>>& columns,
                           const CsvHeader& header) {
  write_header(out, header);
  out << "detuning_hz";
  for (const auto& c : columns) {
    if (c.second.size() != detunings.size()) throw std::invalid_argument("column length mismatch");
    out << ',' << c.first;
  }
  out << '\n';
  for (std::size_t i = 0; i < detunings.size(); ++i) {
    out << format_double(detunings[i] / (2.0 * std::numbers::pi));
    for (const auto& c : columns) out << ',' << format_double(c.second[i]);
    out << '\n';
  }
}

void write_distribution_csv(std::ostream& out, const TimeDistribution& dist, double tau,
                            const CsvHeader& header) {
  write_header(out, header);
  out << "# escape_mass: " << format_double(dist.escape_mass) << '\n';
  out << "# horizon_s: " << format_double(dist.horizon) << '\n';
  out << "# tau_d_s: " << format_double(tau) << '\n';
  out << "t_lower,t_upper,t_lower_tau,t_upper_tau,mass\n";
  for (std::size_t i = 0; i < dist.bins(); ++i) {
    const double lo = dist.bin_edges[i];
    const double hi = dist.bin_edges[i + 1];
    out << format_double(lo) << ',' << format_double(hi) << ',' << format_double(lo / tau) << ','
        << format_double(hi / tau) << ',' << format_double(dist.mass[i]) << '\n';
  }
}

LineshapeFile read_lineshape_csv(std::istream& in) {
  LineshapeFile f;
  std::string line;
  bool have_columns = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = trim(line);
    if (v.empty()) continue;
    if (v.front() == '#') {
      v = trim(v.substr(1));
      const auto colon = v.find(':');
      if (colon != std::string_view::npos) {
        f.header[std::string(trim(v.substr(0, colon)))] = std::string(trim(v.substr(colon + 1)));
      }
      continue;
    }
    if (!have_columns) {
      if (v.substr(0, 12) != "detuning_hz,") {
        throw std::runtime_error("line " + std::to_string(line_no) + ": expected a detuning_hz column header");
      }
      have_columns = true;
      continue;
    }
    const auto comma = v.find(',');
    if (comma == std::string_view::npos) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected two columns");
    }
    auto second = v.substr(comma + 1);
    if (const auto extra = second.find(','); extra != std::string_view::npos) second = second.substr(0, extra);
    f.shape.detunings.push_back(parse_double(v.substr(0, comma), "detuning") * 2.0 * std::numbers::pi);
    f.shape.values.push_back(parse_double(second, "transmission"));
  }
  if (f.shape.size() < 3) throw std::runtime_error("lineshape file holds fewer than 3 points");
  if (auto it = f.header.find("background"); it != f.header.end()) {
    f.shape.background = parse_double(it->second, "background");
  } else {
    f.shape.background = 0.5 * (f.shape.values.front() + f.shape.values.back());
  }
  return f;
}

}  // namespace drn
