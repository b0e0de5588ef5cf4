#include "fetilab/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <utility>

namespace fetilab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class E>
E parse_enum(const std::string& key, const std::string& value,
             std::initializer_list<std::pair<const char*, E>> options) {
  for (const auto& [name, v] : options)
    if (value == name) return v;
  std::string allowed;
  for (const auto& [name, v] : options) allowed += std::string(allowed.empty() ? "" : "|") + name;
  throw ConfigError("invalid value '" + value + "' for " + key + " (expected " + allowed + ")");
}

template <class E>
std::string enum_name(E v, std::initializer_list<std::pair<const char*, E>> options) {
  for (const auto& [name, o] : options)
    if (o == v) return name;
  return "?";
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) throw ConfigError("invalid number '" + value + "' for " + key);
  return x;
}

long parse_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long x = 0;
  try {
    x = std::stol(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) throw ConfigError("invalid integer '" + value + "' for " + key);
  return x;
}

GridIndex parse_triple(const std::string& key, const std::string& value) {
  GridIndex out{1, 1, 1};
  std::stringstream ss(value);
  std::string part;
  int axis = 0;
  while (std::getline(ss, part, 'x')) {
    if (axis == 3) throw ConfigError("too many axes in '" + value + "' for " + key);
    const long v = parse_int(key, trim(part));
    if (v < 1) throw ConfigError(key + " entries must be positive");
    out[static_cast<std::size_t>(axis++)] = static_cast<int>(v);
  }
  if (axis == 0) throw ConfigError("empty value for " + key);
  return out;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_triple(const GridIndex& g, int dimension) {
  std::string out = std::to_string(g[0]);
  for (int a = 1; a < std::max(dimension, 2); ++a) out += "x" + std::to_string(g[static_cast<std::size_t>(a)]);
  return out;
}

constexpr std::initializer_list<std::pair<const char*, ProblemKind>> kProblems{{"grid", ProblemKind::grid},
                                                                             {"spring2", ProblemKind::spring2}};
constexpr std::initializer_list<std::pair<const char*, Physics>> kPhysics{{"scalar", Physics::scalar},
                                                                         {"elasticity", Physics::elasticity}};
constexpr std::initializer_list<std::pair<const char*, MaterialPattern>> kPatterns{
    {"uniform", MaterialPattern::uniform},
    {"checkerboard", MaterialPattern::checkerboard},
    {"layers", MaterialPattern::layers}};
constexpr std::initializer_list<std::pair<const char*, LoadKind>> kLoads{
    {"face", LoadKind::face}, {"body", LoadKind::body}, {"none", LoadKind::none}};
constexpr std::initializer_list<std::pair<const char*, SolverKind>> kSolvers{{"feti", SolverKind::feti},
                                                                            {"bdd", SolverKind::bdd}};
constexpr std::initializer_list<std::pair<const char*, ProjectorKind>> kProjectors{
    {"identity", ProjectorKind::identity},
    {"superlumped", ProjectorKind::superlumped},
    {"dirichlet", ProjectorKind::dirichlet}};
constexpr std::initializer_list<std::pair<const char*, PreconditionerKind>> kPreconditioners{
    {"dirichlet", PreconditionerKind::dirichlet}, {"lumped", PreconditionerKind::lumped}};
constexpr std::initializer_list<std::pair<const char*, ScalingKind>> kScalings{
    {"stiffness", ScalingKind::stiffness}, {"multiplicity", ScalingKind::multiplicity}};
constexpr std::initializer_list<std::pair<const char*, SplitKind>> kSplits{
    {"none", SplitKind::raw}, {"classical", SplitKind::classical}, {"condensed", SplitKind::condensed}};
constexpr std::initializer_list<std::pair<const char*, RawAssignment>> kAssignments{
    {"owner", RawAssignment::owner}, {"multiplicity", RawAssignment::multiplicity}};
constexpr std::initializer_list<std::pair<const char*, InitKind>> kInits{{"standard", InitKind::standard},
                                                                        {"new", InitKind::new_estimate}};
constexpr std::initializer_list<std::pair<const char*, StoppingKind>> kStoppings{
    {"global", StoppingKind::global_residual}, {"interface", StoppingKind::interface_residual}};
constexpr std::initializer_list<std::pair<const char*, RedundancyMode>> kRedundancy{
    {"non_redundant", RedundancyMode::non_redundant}, {"fully_redundant", RedundancyMode::fully_redundant}};
constexpr std::initializer_list<std::pair<const char*, Execution>> kExecution{{"parallel", Execution::parallel},
                                                                             {"serial", Execution::serial}};

struct Key {
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
  bool runtime = false;  // output paths and threading; excluded from canonical()
};

template <class T>
using Field = T& (*)(ExperimentConfig&);

template <class T>
T read_field(Field<T> field, const ExperimentConfig& c) {
  return field(const_cast<ExperimentConfig&>(c));
}

template <class E>
std::pair<const std::string, Key> enum_key(const char* name, Field<E> field,
                                           std::initializer_list<std::pair<const char*, E>> table) {
  return {name, Key{[=](ExperimentConfig& c, const std::string& v) { field(c) = parse_enum(name, v, table); },
                    [=](const ExperimentConfig& c) { return enum_name(read_field(field, c), table); }}};
}

std::pair<const std::string, Key> double_key(const char* name, Field<double> field) {
  return {name, Key{[=](ExperimentConfig& c, const std::string& v) { field(c) = parse_double(name, v); },
                    [=](const ExperimentConfig& c) { return format_double(read_field(field, c)); }}};
}

std::pair<const std::string, Key> int_key(const char* name, Field<int> field, bool runtime = false) {
  return {name, Key{[=](ExperimentConfig& c, const std::string& v) { field(c) = static_cast<int>(parse_int(name, v)); },
                    [=](const ExperimentConfig& c) { return std::to_string(read_field(field, c)); }, runtime}};
}

std::pair<const std::string, Key> string_key(const char* name, Field<std::string> field, bool runtime = false) {
  return {name, Key{[=](ExperimentConfig& c, const std::string& v) { field(c) = v; },
                    [=](const ExperimentConfig& c) { return read_field(field, c); }, runtime}};
}

const std::map<std::string, Key>& key_table() {
  static const std::map<std::string, Key> table{
      string_key("name", +[](ExperimentConfig& c) -> std::string& { return c.name; }),
      enum_key("problem", +[](ExperimentConfig& c) -> auto& { return c.problem; }, kProblems),
      {"dimension", {[](ExperimentConfig& c, const std::string& v) {
                       const long d = parse_int("dimension", v);
                       if (d != 2 && d != 3) throw ConfigError("dimension must be 2 or 3");
                       c.spec.grid.dimension = static_cast<int>(d);
                     },
                     [](const ExperimentConfig& c) { return std::to_string(c.spec.grid.dimension); }}},
      {"subdomains", {[](ExperimentConfig& c, const std::string& v) { c.spec.grid.subdomains = parse_triple("subdomains", v); },
                      [](const ExperimentConfig& c) { return format_triple(c.spec.grid.subdomains, c.spec.grid.dimension); }}},
      {"elements_per_subdomain",
       {[](ExperimentConfig& c, const std::string& v) { c.subdomain_elements = parse_triple("elements_per_subdomain", v); },
        [](const ExperimentConfig& c) { return format_triple(c.subdomain_elements, c.spec.grid.dimension); }}},
      {"element_size", {[](ExperimentConfig& c, const std::string& v) {
                          const double h = parse_double("element_size", v);
                          c.spec.grid.element_size = {h, h, h};
                        },
                        [](const ExperimentConfig& c) { return format_double(c.spec.grid.element_size[0]); }}},
      double_key("slant", +[](ExperimentConfig& c) -> double& { return c.spec.grid.slant_degrees; }),
      enum_key("physics", +[](ExperimentConfig& c) -> auto& { return c.spec.physics; }, kPhysics),
      enum_key("pattern", +[](ExperimentConfig& c) -> auto& { return c.spec.material.pattern; }, kPatterns),
      double_key("e1", +[](ExperimentConfig& c) -> double& { return c.spec.material.e1; }),
      double_key("e2", +[](ExperimentConfig& c) -> double& { return c.spec.material.e2; }),
      double_key("nu", +[](ExperimentConfig& c) -> double& { return c.spec.material.nu; }),
      int_key("layer_axis", +[](ExperimentConfig& c) -> int& { return c.spec.material.layer_axis; }),
      enum_key("load", +[](ExperimentConfig& c) -> auto& { return c.spec.load.kind; }, kLoads),
      double_key("load_magnitude", +[](ExperimentConfig& c) -> double& { return c.spec.load.magnitude; }),
      int_key("load_axis", +[](ExperimentConfig& c) -> int& { return c.spec.load.axis; }),
      int_key("clamp_axis", +[](ExperimentConfig& c) -> int& { return c.spec.clamp_axis; }),
      enum_key("redundancy", +[](ExperimentConfig& c) -> auto& { return c.spec.redundancy; }, kRedundancy),
      enum_key("raw_assignment", +[](ExperimentConfig& c) -> auto& { return c.spec.raw_assignment; }, kAssignments),
      double_key("k1", +[](ExperimentConfig& c) -> double& { return c.k1; }),
      double_key("k2", +[](ExperimentConfig& c) -> double& { return c.k2; }),
      double_key("end_load", +[](ExperimentConfig& c) -> double& { return c.end_load; }),
      double_key("interface_load", +[](ExperimentConfig& c) -> double& { return c.interface_load; }),
      enum_key("solver", +[](ExperimentConfig& c) -> auto& { return c.solver; }, kSolvers),
      enum_key("projector", +[](ExperimentConfig& c) -> auto& { return c.feti.projector; }, kProjectors),
      enum_key("preconditioner", +[](ExperimentConfig& c) -> auto& { return c.feti.preconditioner; }, kPreconditioners),
      enum_key("scaling", +[](ExperimentConfig& c) -> auto& { return c.feti.scaling; }, kScalings),
      enum_key("splitting", +[](ExperimentConfig& c) -> auto& { return c.feti.splitting; }, kSplits),
      enum_key("init", +[](ExperimentConfig& c) -> auto& { return c.feti.init; }, kInits),
      enum_key("stopping", +[](ExperimentConfig& c) -> auto& { return c.feti.stopping; }, kStoppings),
      double_key("epsilon", +[](ExperimentConfig& c) -> double& { return c.feti.epsilon; }),
      int_key("max_iterations", +[](ExperimentConfig& c) -> int& { return c.feti.max_iterations; }),
      double_key("validation_tolerance", +[](ExperimentConfig& c) -> double& { return c.validation_tolerance; }),
      {"seed", {[](ExperimentConfig& c, const std::string& v) { c.seed = static_cast<std::uint64_t>(parse_int("seed", v)); },
                [](const ExperimentConfig& c) { return std::to_string(c.seed); }}},
      int_key("threads", +[](ExperimentConfig& c) -> int& { return c.threads; }, true),
      {"execution", {[](ExperimentConfig& c, const std::string& v) {
                       c.feti.execution = parse_enum("execution", v, kExecution);
                       c.spec.execution = c.feti.execution;
                     },
                     [](const ExperimentConfig& c) { return enum_name(c.feti.execution, kExecution); }, true}},
      string_key("csv", +[](ExperimentConfig& c) -> std::string& { return c.csv_path; }, true),
      string_key("svg", +[](ExperimentConfig& c) -> std::string& { return c.svg_path; }, true),
      string_key("report", +[](ExperimentConfig& c) -> std::string& { return c.report_path; }, true),
  };
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, key] : key_table()) k.push_back(name);
    return k;
  }();
  return keys;
}

void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value) {
  const auto& table = key_table();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second.set(config, value);
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  apply_setting(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  std::set<std::string> seen;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    try {
      apply_setting(config, key, trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void ExperimentConfig::validate() const {
  if (!(feti.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (feti.max_iterations < 0) throw ConfigError("max_iterations must be non-negative");
  if (!(validation_tolerance > 0.0)) throw ConfigError("validation_tolerance must be positive");
  if (threads < 0) throw ConfigError("threads must be non-negative");
  if (problem == ProblemKind::spring2) {
    if (!(k1 > 0.0) || !(k2 > 0.0)) throw ConfigError("spring stiffnesses must be positive");
    return;
  }
  GridSpec grid = spec.grid;
  for (std::size_t a = 0; a < 3; ++a) grid.elements[a] = subdomain_elements[a] * grid.subdomains[a];
  grid.validate();
  spec.material.validate();
  if (spec.clamp_axis < 0 || spec.clamp_axis >= grid.dimension) throw ConfigError("clamp_axis out of range");
  if (spec.load.axis < 0 || spec.load.axis >= grid.dimension) throw ConfigError("load_axis out of range");
  if (spec.material.layer_axis < 0 || spec.material.layer_axis >= grid.dimension)
    throw ConfigError("layer_axis out of range");
}

std::string ExperimentConfig::canonical() const {
  std::string out;
  for (const auto& [name, key] : key_table()) {
    if (key.runtime) continue;
    out += name + "=" + key.get(*this) + "\n";
  }
  return out;
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

BddOptions ExperimentConfig::bdd_options() const {
  BddOptions o;
  o.epsilon = feti.epsilon;
  o.max_iterations = feti.max_iterations;
  o.stop_on_global_residual = feti.stopping == StoppingKind::global_residual;
  o.execution = feti.execution;
  o.keep_directions = feti.keep_directions;
  return o;
}

DecomposedProblem build_problem(const ExperimentConfig& config) {
  config.validate();
  if (config.problem == ProblemKind::spring2)
    return make_spring2(config.k1, config.k2, config.end_load, config.interface_load, config.spec.redundancy);
  ProblemSpec spec = config.spec;
  for (std::size_t a = 0; a < 3; ++a) spec.grid.elements[a] = config.subdomain_elements[a] * spec.grid.subdomains[a];
  return build_problem(spec);
}

}  // namespace fetilab
