#include "sacflow/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace sacflow {

namespace pt = boost::property_tree;

std::string to_string(Study s) {
  switch (s) {
    case Study::Stokes: return "stokes";
    case Study::Sac: return "sac";
    case Study::Convergence: return "convergence";
  }
  return "unknown";
}

StabParams RunConfig::stab_params(StabKind kind, double nu) const {
  StabParams s = default_stab(kind, nu, iso_mode);
  if (kind == StabKind::IpAniso) {
    if (alpha_ip > 0.0) s.alpha = alpha_ip;
  } else if (alpha_lps > 0.0) {
    s.alpha = alpha_lps;
  }
  return s;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"study", {"name"}},
      {"geometry",
       {"duct_length", "duct_cell_length", "level", "n_alveoli", "n_blood_channels",
        "trunk_length", "trunk_height", "alveolus_width", "alveolus_depth", "channel_width",
        "channel_length", "wall_bulge"}},
      {"ale", {"kind", "amplitude", "omega", "fixed_domain"}},
      {"physics", {"rho", "nu", "D", "c_bl", "c_ext", "gamma0"}},
      {"stab", {"kinds", "mode", "alpha_lps", "alpha_ip"}},
      {"bc", {"mode"}},
      {"time", {"t_end", "dt"}},
      {"stokes", {"stretch", "levels"}},
      {"convergence", {"levels", "time"}},
      {"newton", {"rel_tol", "abs_tol", "max_iter", "min_damping", "reuse_jacobian"}},
      {"output", {"directory", "snapshot_stride"}},
  };
  return keys;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  double num(const std::string& key, double fallback) const {
    const auto v = tree_.get_optional<std::string>(key);
    if (!v) return fallback;
    try {
      std::size_t pos = 0;
      const double d = std::stod(*v, &pos);
      if (pos != v->size()) throw std::invalid_argument("trailing");
      return d;
    } catch (const std::exception&) {
      throw ConfigError(key + ": expected a number, got '" + *v + "'");
    }
  }

  int integer(const std::string& key, int fallback) const {
    const double d = num(key, fallback);
    if (d != static_cast<int>(d)) throw ConfigError(key + ": expected an integer");
    return static_cast<int>(d);
  }

  bool flag(const std::string& key, bool fallback) const {
    const auto v = tree_.get_optional<std::string>(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + *v + "'");
  }

  std::string str(const std::string& key, const std::string& fallback) const {
    return tree_.get<std::string>(key, fallback);
  }

  std::vector<int> int_list(const std::string& key, std::vector<int> fallback) const {
    const auto v = tree_.get_optional<std::string>(key);
    if (!v) return fallback;
    std::vector<int> out;
    for (const auto& item : split_list(*v)) {
      try {
        out.push_back(std::stoi(item));
      } catch (const std::exception&) {
        throw ConfigError(key + ": expected a list of integers");
      }
    }
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
  }

 private:
  const pt::ptree& tree_;
};

}  // namespace

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end() || body.data().size() > 0)
      throw ConfigError("unknown config section or top-level key '" + section + "'");
    for (const auto& [key, value] : body) {
      (void)value;
      if (!it->second.count(key)) throw ConfigError("unknown config key '" + section + "." + key + "'");
    }
  }

  Reader r(tree);
  RunConfig c;
  c.source = text;

  const std::string study = r.str("study.name", "sac");
  if (study == "stokes") c.study = Study::Stokes;
  else if (study == "sac") c.study = Study::Sac;
  else if (study == "convergence") c.study = Study::Convergence;
  else throw ConfigError("study.name: unknown study '" + study + "'");

  auto& g = c.sac;
  g.duct_length = r.num("geometry.duct_length", g.duct_length);
  g.duct_cell_length = r.num("geometry.duct_cell_length", g.duct_cell_length);
  g.n_alveoli = r.integer("geometry.n_alveoli", g.n_alveoli);
  g.n_blood_channels = r.integer("geometry.n_blood_channels", g.n_blood_channels);
  g.trunk_length = r.num("geometry.trunk_length", g.trunk_length);
  g.trunk_height = r.num("geometry.trunk_height", g.trunk_height);
  g.alveolus_width = r.num("geometry.alveolus_width", g.alveolus_width);
  g.alveolus_depth = r.num("geometry.alveolus_depth", g.alveolus_depth);
  g.channel_width = r.num("geometry.channel_width", g.channel_width);
  g.channel_length = r.num("geometry.channel_length", g.channel_length);
  g.wall_bulge = r.num("geometry.wall_bulge", g.wall_bulge);
  c.sac_level = r.integer("geometry.level", c.sac_level);
  if (c.sac_level < 0) throw ConfigError("geometry.level must be >= 0");
  if (!(g.duct_length > 0.0)) throw ConfigError("geometry.duct_length must be positive");

  const std::string ale = r.str("ale.kind", "alveolar_sin");
  if (ale == "alveolar_sin") c.ale_kind = AleMap::Kind::AlveolarSin;
  else if (ale == "identity") c.ale_kind = AleMap::Kind::Identity;
  else throw ConfigError("ale.kind: expected alveolar_sin or identity, got '" + ale + "'");
  c.amplitude = r.num("ale.amplitude", c.amplitude);
  c.omega = r.num("ale.omega", c.omega);
  c.fixed_domain = r.flag("ale.fixed_domain", c.fixed_domain);
  if (!(c.amplitude >= 0.0 && c.amplitude < 1.0)) throw ConfigError("ale.amplitude must lie in [0, 1)");

  auto& p = c.phys;
  p.rho = r.num("physics.rho", p.rho);
  p.nu = r.num("physics.nu", p.nu);
  p.D = r.num("physics.D", p.D);
  p.c_bl = r.num("physics.c_bl", p.c_bl);
  p.c_ext = r.num("physics.c_ext", p.c_ext);
  p.gamma0 = r.num("physics.gamma0", p.gamma0);
  p.dt = r.num("time.dt", p.dt);
  p.validate();

  if (const auto kinds = tree.get_optional<std::string>("stab.kinds")) {
    c.stab_kinds.clear();
    for (const auto& k : split_list(*kinds)) c.stab_kinds.push_back(parse_stab_kind(k));
    if (c.stab_kinds.empty()) throw ConfigError("stab.kinds: empty list");
  }
  c.iso_mode = parse_iso_mode(r.str("stab.mode", to_string(c.iso_mode)));
  c.alpha_lps = r.num("stab.alpha_lps", c.alpha_lps);
  c.alpha_ip = r.num("stab.alpha_ip", c.alpha_ip);

  c.bc = parse_bc_mode(r.str("bc.mode", to_string(c.bc)));

  c.t_end = r.num("time.t_end", c.t_end);
  if (!(c.t_end > 0.0)) throw ConfigError("time.t_end must be positive");

  c.stokes_stretch = r.num("stokes.stretch", c.stokes_stretch);
  if (!(c.stokes_stretch > 0.0)) throw ConfigError("stokes.stretch must be positive");
  c.stokes_levels = r.int_list("stokes.levels", c.stokes_levels);
  for (int l : c.stokes_levels)
    if (l < 1) throw ConfigError("stokes.levels: levels must be >= 1");

  c.convergence_levels = r.int_list("convergence.levels", c.convergence_levels);
  c.convergence_time = r.num("convergence.time", c.convergence_time);

  c.newton.rel_tol = r.num("newton.rel_tol", c.newton.rel_tol);
  c.newton.abs_tol = r.num("newton.abs_tol", c.newton.abs_tol);
  c.newton.max_iter = r.integer("newton.max_iter", c.newton.max_iter);
  c.newton.min_damping = r.num("newton.min_damping", c.newton.min_damping);
  c.newton.reuse_jacobian = r.flag("newton.reuse_jacobian", c.newton.reuse_jacobian);

  c.output_dir = r.str("output.directory", c.output_dir);
  c.snapshot_stride = r.integer("output.snapshot_stride", c.snapshot_stride);
  if (c.snapshot_stride < 0) throw ConfigError("output.snapshot_stride must be >= 0");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string default_config_text() {
  return R"([study]
name = sac

[geometry]
duct_length = 0.6
duct_cell_length = 0.15
level = 0
n_alveoli = 5
n_blood_channels = 6
trunk_length = 0.5
trunk_height = 0.2
alveolus_width = 0.15
alveolus_depth = 0.12
channel_width = 0.02
channel_length = 0.03
wall_bulge = 0.015

[ale]
kind = alveolar_sin
amplitude = 0.09
omega = 1.2566370614359172
fixed_domain = false

[physics]
rho = 1.21
nu = 14.711
D = 17
c_bl = 0.06
c_ext = 0.04302
gamma0 = 10

[stab]
kinds = lps_aniso
mode = scaled_fluctuation
alpha_lps = 0
alpha_ip = 0

[bc]
mode = artificial

[time]
t_end = 10
dt = 0.05

[stokes]
stretch = 0.01
levels = 3, 4, 5, 6

[convergence]
levels = 0, 1, 2, 3
time = 8.75

[newton]
rel_tol = 1e-8
abs_tol = 1e-12
max_iter = 25
min_damping = 0.0009765625
reuse_jacobian = false

[output]
directory = output
snapshot_stride = 0
)";
}

}  // namespace sacflow
