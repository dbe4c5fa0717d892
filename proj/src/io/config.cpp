#include "gocor/config.hpp"

#include <charconv>
#include <cmath>

namespace gocor {

namespace {

const std::vector<ConfigKey> kKeys = {
    {"mode", "global", "global | local"},
    {"radius", "4", "search radius R of local correlation"},
    {"num_iter", "auto", "steepest-descent iterations; auto = 3 global, 7 local"},
    {"use_query", "auto", "include the query term; auto = on for global solves, off otherwise"},
    {"eta", "0", "smoothing of the robust penalty kink"},
    {"lambda", "0.1", "weight-decay strength"},
    {"curvature_scale", "2", "step = ||g||^2 / (scale * curvature); 1 is the undamped literal step"},
    {"initializer", "simple", "simple | flexible_simple | context_aware | flexible_context_aware"},
    {"beta", "1", "initializer target for w.f; comma list of D values for flexible variants"},
    {"gamma", "0", "initializer target for w.f_bar; comma list for flexible variants"},
    {"basis_n", "10", "number of triangular basis functions"},
    {"basis_delta", "0.5", "knot spacing of the basis"},
    {"kernel_size", "3", "query operator kernel size K (odd)"},
    {"query_mid_channels", "16", "channels Q' after the first query convolution"},
    {"query_out_channels", "16", "channels Q of the query residual"},
    {"query_seed", "0", "seed of the query operator kernels"},
    {"query_scale", "1", "multiplier on the default kernel range"},
    {"seeds", "0-19", "scene seeds for bench and gradcheck: a-b range or comma list"},
    {"precision", "f64", "storage precision of written FMAP/CVOL files: f32 | f64"},
    {"serial", "false", "run every kernel single-threaded"},
    {"scene_height", "32", "synthetic scene H"},
    {"scene_width", "32", "synthetic scene W"},
    {"scene_depth", "16", "synthetic scene D"},
    {"n_repeats", "2", "copies of the repeated patch"},
    {"patch_size", "5", "side of the repeated patch"},
    {"shift_dy", "2", "vertical query shift"},
    {"shift_dx", "1", "horizontal query shift"},
    {"noise_std", "0", "query noise standard deviation"},
    {"background_amplitude", "0.1", "mean background feature norm"},
    {"copy_perturbation", "0.5", "norm of the orthogonal component added to later copies"},
    {"smoothing", "1", "spatial smoothing of scene features, in cells"},
    {"exclusion_radius", "2", "radius around the true match ignored by the margin"},
    {"gradcheck_step", "1e-6", "finite-difference step h"},
    {"gradcheck_tolerance", "1e-5", "maximum relative gradient error"},
    {"kink_avoidance", "false", "perturb gradcheck points away from corr = 0 without warning"},
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

const ConfigKey* find_key(std::string_view name) {
  for (const ConfigKey& k : kKeys) {
    if (name == k.name) return &k;
  }
  return nullptr;
}

bool parse_real(std::string_view s, double& out) {
  s = trim(s);
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_int(std::string_view s, long long& out) {
  s = trim(s);
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

bool parse_bool(std::string_view s, bool& out) {
  if (s == "true" || s == "1" || s == "on" || s == "yes") {
    out = true;
    return true;
  }
  if (s == "false" || s == "0" || s == "off" || s == "no") {
    out = false;
    return true;
  }
  return false;
}

bool parse_reals(std::string_view s, std::vector<double>& out) {
  out.clear();
  while (true) {
    const auto comma = s.find(',');
    double v = 0.0;
    if (!parse_real(s.substr(0, comma), v)) return false;
    out.push_back(v);
    if (comma == std::string_view::npos) return true;
    s.remove_prefix(comma + 1);
  }
}

bool parse_seeds(std::string_view s, std::vector<std::uint64_t>& out) {
  out.clear();
  s = trim(s);
  const auto dash = s.find('-');
  if (dash != std::string_view::npos && s.find(',') == std::string_view::npos) {
    long long a = 0;
    long long b = 0;
    if (!parse_int(s.substr(0, dash), a) || !parse_int(s.substr(dash + 1), b) || a < 0 || b < a) return false;
    for (long long v = a; v <= b; ++v) out.push_back(static_cast<std::uint64_t>(v));
    return true;
  }
  while (true) {
    const auto comma = s.find(',');
    long long v = 0;
    if (!parse_int(s.substr(0, comma), v) || v < 0) return false;
    out.push_back(static_cast<std::uint64_t>(v));
    if (comma == std::string_view::npos) return true;
    s.remove_prefix(comma + 1);
  }
}

enum class Kind { Real, Int, Bool, Reals, Seeds, Choice, IntOrAuto, BoolOrAuto };

Kind kind_of(std::string_view key) {
  static const std::map<std::string_view, Kind> kinds = {
      {"mode", Kind::Choice},          {"radius", Kind::Int},
      {"num_iter", Kind::IntOrAuto},   {"use_query", Kind::BoolOrAuto},
      {"initializer", Kind::Choice},   {"beta", Kind::Reals},
      {"gamma", Kind::Reals},          {"basis_n", Kind::Int},
      {"kernel_size", Kind::Int},      {"query_mid_channels", Kind::Int},
      {"query_out_channels", Kind::Int}, {"query_seed", Kind::Int},
      {"seeds", Kind::Seeds},          {"precision", Kind::Choice},
      {"serial", Kind::Bool},          {"scene_height", Kind::Int},
      {"scene_width", Kind::Int},      {"scene_depth", Kind::Int},
      {"n_repeats", Kind::Int},        {"patch_size", Kind::Int},
      {"shift_dy", Kind::Int},         {"shift_dx", Kind::Int},
      {"kink_avoidance", Kind::Bool},
  };
  const auto it = kinds.find(key);
  return it == kinds.end() ? Kind::Real : it->second;
}

bool valid_choice(std::string_view key, std::string_view v) {
  if (key == "mode") return v == "global" || v == "local";
  if (key == "precision") return v == "f32" || v == "f64";
  return v == "simple" || v == "flexible_simple" || v == "context_aware" || v == "flexible_context_aware";
}

bool valid_value(std::string_view key, std::string_view v) {
  double r = 0.0;
  long long i = 0;
  bool b = false;
  std::vector<double> rs;
  std::vector<std::uint64_t> seeds;
  switch (kind_of(key)) {
    case Kind::Real: return parse_real(v, r);
    case Kind::Int: return parse_int(v, i);
    case Kind::Bool: return parse_bool(v, b);
    case Kind::Reals: return parse_reals(v, rs);
    case Kind::Seeds: return parse_seeds(v, seeds);
    case Kind::Choice: return valid_choice(key, v);
    case Kind::IntOrAuto: return v == "auto" || parse_int(v, i);
    case Kind::BoolOrAuto: return v == "auto" || parse_bool(v, b);
  }
  return false;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() { return kKeys; }

RunConfig::RunConfig() {
  for (const ConfigKey& k : kKeys) values_.emplace(k.name, k.default_value);
}

void RunConfig::set(std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (find_key(key) == nullptr) throw ValidationError("unknown config key '" + std::string(key) + "'");
  if (!valid_value(key, value)) {
    throw ValidationError("invalid value '" + std::string(value) + "' for config key '" + std::string(key) + "'");
  }
  values_.find(key)->second = std::string(value);
}

void RunConfig::set_assignment(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ValidationError("expected key=value, got '" + std::string(assignment) + "'");
  }
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

void RunConfig::load_text(std::string_view text) {
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    try {
      set_assignment(line);
    } catch (const ValidationError& e) {
      throw ValidationError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  load_text({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

const std::string& RunConfig::raw(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("unknown config key '" + std::string(key) + "'");
  return it->second;
}

bool RunConfig::is_default(std::string_view key) const { return raw(key) == find_key(key)->default_value; }

double RunConfig::real(std::string_view key) const {
  double v = 0.0;
  if (!parse_real(raw(key), v)) throw ValidationError("config key '" + std::string(key) + "' is not a number");
  return v;
}

long long RunConfig::integer(std::string_view key) const {
  long long v = 0;
  if (!parse_int(raw(key), v)) throw ValidationError("config key '" + std::string(key) + "' is not an integer");
  return v;
}

bool RunConfig::flag(std::string_view key) const {
  bool v = false;
  if (!parse_bool(raw(key), v)) throw ValidationError("config key '" + std::string(key) + "' is not a boolean");
  return v;
}

std::vector<double> RunConfig::reals(std::string_view key) const {
  std::vector<double> v;
  if (!parse_reals(raw(key), v)) throw ValidationError("config key '" + std::string(key) + "' is not a number list");
  return v;
}

CorrelationMode RunConfig::mode() const {
  if (raw("mode") == "global") return CorrelationMode::global();
  return CorrelationMode::local(static_cast<int>(integer("radius")));
}

Precision RunConfig::precision() const { return raw("precision") == "f32" ? Precision::F32 : Precision::F64; }

std::vector<std::uint64_t> RunConfig::seeds() const {
  std::vector<std::uint64_t> out;
  parse_seeds(raw("seeds"), out);
  return out;
}

ObjectiveParams RunConfig::objective() const {
  ObjectiveParams p;
  const int n = static_cast<int>(integer("basis_n"));
  p.reference = ReferenceObjectiveParams::initial(n, real("basis_delta"));
  p.reference.eta = real("eta");
  p.query = QueryObjectiveParams::seeded(static_cast<int>(integer("kernel_size")),
                                         static_cast<int>(integer("query_mid_channels")),
                                         static_cast<int>(integer("query_out_channels")),
                                         static_cast<std::uint64_t>(integer("query_seed")), real("query_scale"));
  p.lambda = real("lambda");
  p.validate();
  return p;
}

SolverConfig RunConfig::solver(bool experiment) const {
  const CorrelationMode m = mode();
  const bool global = m.kind == VolumeKind::Global;
  SolverConfig cfg = global ? SolverConfig::global_default() : SolverConfig::local_default(m.radius);
  if (raw("num_iter") != "auto") cfg.num_iter = static_cast<int>(integer("num_iter"));
  if (raw("use_query") == "auto") {
    cfg.use_query = global && !experiment;
  } else {
    cfg.use_query = flag("use_query");
  }
  cfg.curvature_scale = real("curvature_scale");
  cfg.exec = flag("serial") ? Exec::Serial : Exec::Parallel;
  cfg.validate();
  return cfg;
}

InitializerConfig RunConfig::initializer() const {
  InitializerConfig cfg;
  const std::string& v = raw("initializer");
  if (v == "simple") cfg.variant = InitializerVariant::Simple;
  if (v == "flexible_simple") cfg.variant = InitializerVariant::FlexibleSimple;
  if (v == "context_aware") cfg.variant = InitializerVariant::ContextAware;
  if (v == "flexible_context_aware") cfg.variant = InitializerVariant::FlexibleContextAware;
  cfg.beta = reals("beta");
  cfg.gamma = reals("gamma");
  return cfg;
}

SceneOptions RunConfig::scene(std::uint64_t seed) const {
  SceneOptions s;
  s.height = static_cast<int>(integer("scene_height"));
  s.width = static_cast<int>(integer("scene_width"));
  s.depth = static_cast<int>(integer("scene_depth"));
  s.n_repeats = static_cast<int>(integer("n_repeats"));
  s.patch_size = static_cast<int>(integer("patch_size"));
  s.shift = {static_cast<int>(integer("shift_dy")), static_cast<int>(integer("shift_dx"))};
  s.noise_std = real("noise_std");
  s.background_amplitude = real("background_amplitude");
  s.copy_perturbation = real("copy_perturbation");
  s.smoothing = real("smoothing");
  s.exclusion_radius = real("exclusion_radius");
  s.seed = seed;
  s.validate();
  return s;
}

std::string RunConfig::dump() const {
  std::string out;
  for (const ConfigKey& k : kKeys) out += std::string(k.name) + " = " + raw(k.name) + "\n";
  return out;
}

}  // namespace gocor
