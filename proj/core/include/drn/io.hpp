#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "drn/diffusion.hpp"
#include "drn/model.hpp"

namespace drn {

// Shortest round-trip decimal form of a double.
std::string format_double(double value);

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

// Hex form of a hash, 16 digits.
std::string hex_hash(std::uint64_t hash);

// Flat key = value text. '#' starts a comment; blank lines are ignored.
// Keys keep their first-seen order; a repeated key is an error.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text);

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key) const;
  void set(const std::string& key, std::string value);
  void erase(const std::string& key);
  // Values of `other` replace or extend this config.
  void merge(const KeyValueConfig& other);

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  // Canonical "key = value" lines in key order; hashing input.
  std::string canonical() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// Metadata lines written as "# key: value" before a CSV table.
using CsvHeader = std::vector<std::pair<std::string, std::string>>;

// detuning_hz,transmission with the background level in the header.
void write_lineshape_csv(std::ostream& out, const Lineshape& shape, const CsvHeader& header);

// Several lineshapes on one grid: detuning_hz followed by one named column each.
void write_lineshape_table(std::ostream& out, std::span<const double> detunings,
                           const std::vector<std::pair<std::string, std::vector<double>>>& columns,
                           const CsvHeader& header);

// t_lower,t_upper,t_lower_tau,t_upper_tau,mass; escape mass and horizon go in
// the header.
void write_distribution_csv(std::ostream& out, const TimeDistribution& dist, double tau,
                            const CsvHeader& header);

struct LineshapeFile {
  Lineshape shape;
  std::map<std::string, std::string> header;
};

// Reads a file written by write_lineshape_csv. The background comes from the
// "background" header entry, or the mean of the two end points if absent.
// Throws std::runtime_error on malformed input.
LineshapeFile read_lineshape_csv(std::istream& in);

}  // namespace drn
