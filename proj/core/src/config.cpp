#include "graphgame/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "graphgame/scenario.hpp"

namespace graphgame {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key");
    if (cfg.kv_.count(key))
      throw ConfigError("duplicate config key: " + key);
    cfg.kv_[key] = value;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

bool KeyValueConfig::has(const std::string& key) const {
  return kv_.count(key) > 0;
}

std::string KeyValueConfig::get_string(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("missing config key: " + key);
  read_.insert(key);
  return it->second;
}

double KeyValueConfig::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not a number: " + v);
  }
}

long KeyValueConfig::get_long(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    size_t pos = 0;
    const long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not an integer: " + v);
  }
}

bool KeyValueConfig::get_bool(const std::string& key) const {
  const std::string v = get_string(key);
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw ConfigError("config key " + key + ": not a boolean: " + v);
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key) const {
  const std::string v = get_string(key);
  std::istringstream in(v);
  std::vector<double> out;
  double d;
  while (in >> d) out.push_back(d);
  if (!in.eof())
    throw ConfigError("config key " + key + ": not a number list: " + v);
  return out;
}

std::vector<std::string> KeyValueConfig::unread_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : kv_)
    if (!read_.count(k)) out.push_back(k);
  return out;
}

namespace {

std::string agent_key(int i, const std::string& field) {
  return "agent." + std::to_string(i + 1) + "." + field;
}

void apply_agent_overrides(const KeyValueConfig& kv, SimConfig& cfg) {
  for (int i = 0; i < cfg.n_agents(); ++i) {
    AgentConfig& a = cfg.agents[i];
    const auto d = [&](const std::string& f, double& slot) {
      if (kv.has(agent_key(i, f))) slot = kv.get_double(agent_key(i, f));
    };
    d("q", a.q);
    if (kv.has(agent_key(i, "R")))
      a.r = Matrix::Constant(1, 1, kv.get_double(agent_key(i, "R")));
    d("eta_c1", a.eta_c1);
    d("eta_c2", a.eta_c2);
    d("eta_a1", a.eta_a1);
    d("eta_a2", a.eta_a2);
    d("nu", a.nu);
    d("beta", a.beta);
    d("gamma_bar", a.gamma_bar);
    d("k", a.observer_gain);
    d("k_theta", a.cl_gain);
    d("gamma_theta", a.drift_gain);
    d("gamma0", a.gamma0);
    d("theta_bound", a.theta_bound);
    d("eps_bound", a.eps_bound);
    if (kv.has(agent_key(i, "M_theta")))
      a.stack_capacity = static_cast<int>(kv.get_long(agent_key(i, "M_theta")));
    if (kv.has(agent_key(i, "x0")))
      a.x_init = Vector::Constant(1, kv.get_double(agent_key(i, "x0")));
    if (kv.has(agent_key(i, "xhat0")))
      a.xhat_init = Vector::Constant(1, kv.get_double(agent_key(i, "xhat0")));
    if (kv.has(agent_key(i, "wc0"))) {
      const auto v = kv.get_doubles(agent_key(i, "wc0"));
      a.w_c0 = v.size() == 1
                   ? Vector(Vector::Constant(a.w_c0.size(), v[0]))
                   : Vector(Eigen::Map<const Vector>(v.data(), v.size()));
    }
    if (kv.has(agent_key(i, "wa0"))) {
      const auto v = kv.get_doubles(agent_key(i, "wa0"));
      a.w_a0 = v.size() == 1
                   ? Vector(Vector::Constant(a.w_a0.size(), v[0]))
                   : Vector(Eigen::Map<const Vector>(v.data(), v.size()));
    }
  }
}

SimConfig scratch_config(const KeyValueConfig& kv) {
  // Explicit topology over the built-in scalar plant family.
  const int N = static_cast<int>(kv.get_long("topology.n"));
  if (N < 1) throw ConfigError("topology.n must be positive");
  SimConfig cfg;
  cfg.scenario = "custom";
  cfg.adjacency = Matrix::Zero(N, N);
  cfg.pinning = Vector::Zero(N);
  for (int e = 1;; ++e) {
    const std::string key = "topology.edge." + std::to_string(e);
    if (!kv.has(key)) break;
    const auto v = kv.get_doubles(key);
    if (v.size() != 2 && v.size() != 3)
      throw ConfigError(key + ": expected `from to [weight]`");
    const int from = static_cast<int>(v[0]);
    const int to = static_cast<int>(v[1]);
    const double w = v.size() == 3 ? v[2] : 1.0;
    if (to < 1 || to > N || from < 0 || from > N)
      throw ConfigError(key + ": node out of range");
    if (from == 0)
      cfg.pinning(to - 1) = w;
    else
      cfg.adjacency(to - 1, from - 1) = w;
  }
  cfg.models.leader.state_dim = 1;
  const double decay = kv.has("leader.decay") ? kv.get_double("leader.decay")
                                              : 0.1;
  const double x0_init =
      kv.has("leader.x0") ? kv.get_double("leader.x0") : 1.0;
  cfg.models.leader.drift = [decay](const Vector& x) {
    return Vector(-decay * x);
  };
  cfg.models.leader.trajectory = [decay, x0_init](double t) {
    return Vector(Vector::Constant(1, x0_init * std::exp(-decay * t)));
  };
  cfg.models.leader.initial_state = Vector::Constant(1, x0_init);
  cfg.models.leader.bound = 100.0;
  {
    std::ostringstream f;
    f << x0_init << "*exp(-" << decay << "*t)";
    cfg.leader_formula = f.str();
  }

  for (int i = 0; i < N; ++i) {
    const auto theta = kv.get_doubles(agent_key(i, "theta"));
    if (theta.size() != 2)
      throw ConfigError(agent_key(i, "theta") + ": expected two parameters");
    cfg.models.agents.push_back(one_dim_agent(theta[0], theta[1]));
    Matrix th(2, 1);
    th << theta[0], theta[1];
    cfg.theta_true.push_back(th);
    cfg.drift_bases.push_back(polynomial_drift_basis(2));
    cfg.offsets.push_back(
        Vector::Constant(1, kv.get_double("formation.offset." +
                                          std::to_string(i + 1))));
  }

  DirectedNetwork net(cfg.adjacency, cfg.pinning);
  for (int i = 0; i < N; ++i) {
    const int s = subgraph_index(net, i).size();
    std::string preset = "quad_error";
    if (kv.has(agent_key(i, "basis")))
      preset = kv.get_string(agent_key(i, "basis"));
    PolyBasis basis = value_basis_preset(preset);
    if (basis.input_dim() != s + 1)
      throw ConfigError(agent_key(i, "basis") + ": preset " + preset +
                        " does not match the subgraph size");
    cfg.value_bases.push_back(std::move(basis));
    AgentConfig a;
    a.r = Matrix::Constant(1, 1, 0.1);
    const int L = cfg.value_bases[i].size();
    a.w_c0 = Vector::Ones(L);
    a.w_a0 = Vector::Ones(L);
    a.theta0 = Matrix::Zero(2, 1);
    a.x_init = Vector::Constant(1, 2.0);
    a.xhat_init = Vector::Zero(1);
    cfg.agents.push_back(std::move(a));
  }
  return cfg;
}

}  // namespace

SimConfig config_from_kv(const KeyValueConfig& kv) {
  SimConfig cfg;
  if (kv.has("scenario"))
    cfg = scenario_by_name(kv.get_string("scenario"));
  else if (kv.has("topology.n"))
    cfg = scratch_config(kv);
  else
    cfg = example_1d_config();

  if (kv.has("sim.dt")) cfg.dt = kv.get_double("sim.dt");
  if (kv.has("sim.t_final")) cfg.t_final = kv.get_double("sim.t_final");
  if (kv.has("sim.decimate"))
    cfg.decimate = static_cast<int>(kv.get_long("sim.decimate"));
  if (kv.has("sim.seed"))
    cfg.seed = static_cast<unsigned long>(kv.get_long("sim.seed"));
  if (kv.has("sim.sg_window"))
    cfg.sg_window = static_cast<int>(kv.get_long("sim.sg_window"));
  if (kv.has("sim.rank_gate")) cfg.rank_gate = kv.get_double("sim.rank_gate");
  if (kv.has("sim.exact_model"))
    cfg.exact_model = kv.get_bool("sim.exact_model");
  if (kv.has("sim.cl_integration")) {
    const std::string mode = kv.get_string("sim.cl_integration");
    if (mode == "exact")
      cfg.cl_integration = ClIntegration::Exact;
    else if (mode == "rk4")
      cfg.cl_integration = ClIntegration::Rk4;
    else
      throw ConfigError("sim.cl_integration must be `exact` or `rk4`");
  }
  if (kv.has("grid.e_values"))
    cfg.grid.own_error_values = kv.get_doubles("grid.e_values");
  if (kv.has("grid.x_values"))
    cfg.grid.own_state_values = kv.get_doubles("grid.x_values");
  if (kv.has("grid.neighbor_e_values"))
    cfg.grid.neighbor_error_values = kv.get_doubles("grid.neighbor_e_values");
  if (kv.has("grid.randomized"))
    cfg.grid.randomized = kv.get_bool("grid.randomized");

  apply_agent_overrides(kv, cfg);

  const auto unread = kv.unread_keys();
  if (!unread.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& k : unread) msg += " " + k;
    throw ConfigError(msg);
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& err) {
    throw ConfigError(std::string("invalid configuration: ") + err.what());
  }
  return cfg;
}

SimConfig config_from_file(const std::string& path) {
  return config_from_kv(KeyValueConfig::parse_file(path));
}

}  // namespace graphgame
