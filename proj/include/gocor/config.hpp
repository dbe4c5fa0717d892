#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gocor/io.hpp"
#include "gocor/objective.hpp"
#include "gocor/solver.hpp"
#include "gocor/synthbench.hpp"

namespace gocor {

struct ConfigKey {
  const char* name;
  const char* default_value;
  const char* help;
};

/// Every recognized key with its default.
const std::vector<ConfigKey>& config_keys();

/// Flat key = value configuration. Values are checked when set, so a
/// RunConfig always holds parseable entries. Apply a file first and flags
/// after it to get flags > file > defaults.
class RunConfig {
 public:
  RunConfig();

  /// Throws ValidationError for an unknown key or an unparseable value.
  void set(std::string_view key, std::string_view value);
  /// "key=value" as given on the command line.
  void set_assignment(std::string_view assignment);

  /// Lines of `key = value`; '#' starts a comment, blank lines are skipped.
  void load_text(std::string_view text);
  void load_file(const std::filesystem::path& path);

  const std::string& raw(std::string_view key) const;
  bool is_default(std::string_view key) const;

  double real(std::string_view key) const;
  long long integer(std::string_view key) const;
  bool flag(std::string_view key) const;
  std::vector<double> reals(std::string_view key) const;

  CorrelationMode mode() const;
  Precision precision() const;
  std::vector<std::uint64_t> seeds() const;

  ObjectiveParams objective() const;
  /// `experiment` selects the disambiguation defaults: use_query = auto
  /// resolves to off. Otherwise auto means on for global, off for local.
  SolverConfig solver(bool experiment = false) const;
  InitializerConfig initializer() const;
  SceneOptions scene(std::uint64_t seed) const;

  /// All keys in table order, one `key = value` line each.
  std::string dump() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace gocor
