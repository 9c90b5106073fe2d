#include "pipeflow/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pipeflow/msh_io.hpp"

namespace pipeflow {

namespace {

struct Issues {
  std::vector<std::string> list;
  std::string name;
  void add(int line, const std::string& msg) {
    list.push_back(name + ":" + std::to_string(line) + ": " + msg);
  }
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

bool parse_double(const std::string& v, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(v, &used);
    return used == v.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool parse_int(const std::string& v, int& out) {
  try {
    std::size_t used = 0;
    out = std::stoi(v, &used);
    return used == v.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool parse_u64(const std::string& v, std::uint64_t& out) {
  if (v.empty() || !std::isdigit(static_cast<unsigned char>(v.front())))
    return false;  // stoull would wrap a leading minus silently
  try {
    std::size_t used = 0;
    out = std::stoull(v, &used);
    return used == v.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool parse_bool(const std::string& v, bool& out) {
  if (v == "true" || v == "yes" || v == "1") {
    out = true;
    return true;
  }
  if (v == "false" || v == "no" || v == "0") {
    out = false;
    return true;
  }
  return false;
}

bool parse_doubles(const std::string& v, std::vector<double>& out) {
  out.clear();
  std::istringstream is(v);
  double d;
  while (is >> d) out.push_back(d);
  return is.eof() && !out.empty();
}

class Parser {
 public:
  Parser(const std::string& text, const std::string& name) : text_(text) { issues_.name = name; }

  RunConfig run() {
    std::istringstream stream(text_);
    std::string raw;
    int line = 0;
    std::string section;
    bool branch1_seen = false, branch2_seen = false;
    while (std::getline(stream, raw)) {
      ++line;
      std::string s = raw;
      const std::size_t hash = s.find_first_of("#;");
      if (hash != std::string::npos) s = s.substr(0, hash);
      s = trim(s);
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') {
          issues_.add(line, "malformed section header '" + s + "'");
          continue;
        }
        section = s.substr(1, s.size() - 2);
        if (section != "mesh" && section != "material" && section != "scenario" &&
            section != "solver" && section != "output")
          issues_.add(line, "unknown section [" + section + "]");
        continue;
      }
      const std::size_t eq = s.find('=');
      if (eq == std::string::npos) {
        issues_.add(line, "expected key = value, got '" + s + "'");
        continue;
      }
      const std::string key = trim(s.substr(0, eq));
      const std::string value = trim(s.substr(eq + 1));
      if (section.empty()) {
        issues_.add(line, "key '" + key + "' outside any section");
        continue;
      }
      if (section == "mesh")
        mesh_key(line, key, value, branch1_seen, branch2_seen);
      else if (section == "material")
        material_key(line, key, value);
      else if (section == "scenario")
        scenario_key(line, key, value);
      else if (section == "solver")
        solver_key(line, key, value);
      else if (section == "output")
        output_key(line, key, value);
    }

    if (branch2_seen && !branch1_seen) issues_.add(0, "[mesh] branch2 given without branch1");
    validate();
    if (!issues_.list.empty()) throw ConfigError(std::move(issues_.list));
    return cfg_;
  }

 private:
  void number(int line, const std::string& key, const std::string& value, double& out,
              bool positive = false) {
    double d;
    if (!parse_double(value, d))
      issues_.add(line, "key '" + key + "': expected a number, got '" + value + "'");
    else if (positive && !(d > 0.0))
      issues_.add(line, "key '" + key + "' must be positive");
    else
      out = d;
  }

  void integer(int line, const std::string& key, const std::string& value, int& out,
               int min_value) {
    int i;
    if (!parse_int(value, i))
      issues_.add(line, "key '" + key + "': expected an integer, got '" + value + "'");
    else if (i < min_value)
      issues_.add(line, "key '" + key + "' must be >= " + std::to_string(min_value));
    else
      out = i;
  }

  void expression(int line, const std::string& key, const std::string& value, Expression& out) {
    try {
      out = Expression::parse(value);
    } catch (const ExpressionError& e) {
      issues_.add(line, "key '" + key + "': " + e.what());
    }
  }

  void branch(int line, const std::string& key, const std::string& value, int index) {
    std::vector<double> v;
    if (!parse_doubles(value, v) || v.size() != 7) {
      issues_.add(line, "key '" + key + "': expected 'ax ay az bx by bz half_width'");
      return;
    }
    if (static_cast<int>(cfg_.pipe.branches.size()) <= index)
      cfg_.pipe.branches.resize(static_cast<std::size_t>(index) + 1);
    cfg_.pipe.branches[static_cast<std::size_t>(index)] = {{v[0], v[1], v[2]}, {v[3], v[4], v[5]}, v[6]};
  }

  void mesh_key(int line, const std::string& key, const std::string& value, bool& b1, bool& b2) {
    if (key == "source") {
      if (value != "generate" && value != "import")
        issues_.add(line, "mesh source must be 'generate' or 'import'");
      else
        cfg_.mesh_source = value;
    } else if (key == "file") {
      cfg_.mesh_file = value;
    } else if (key == "dim") {
      int d;
      if (!parse_int(value, d) || (d != 2 && d != 3))
        issues_.add(line, "mesh dim must be 2 or 3");
      else
        cfg_.pipe.dim = d;
    } else if (key == "h") {
      number(line, key, value, cfg_.pipe.h, true);
    } else if (key == "cylindrical") {
      bool b;
      if (!parse_bool(value, b))
        issues_.add(line, "key 'cylindrical': expected a boolean");
      else
        cfg_.pipe.cylindrical = b;
    } else if (key == "branch1") {
      b1 = true;
      branch(line, key, value, 0);
    } else if (key == "branch2") {
      b2 = true;
      branch(line, key, value, 1);
    } else {
      issues_.add(line, "unknown key '" + key + "' in [mesh]");
    }
  }

  void material_key(int line, const std::string& key, const std::string& value) {
    if (key == "theta_breakpoints") {
      if (!parse_doubles(value, cfg_.material.theta))
        issues_.add(line, "key '" + key + "': expected a list of numbers");
    } else if (key == "rho_values") {
      if (!parse_doubles(value, cfg_.material.rho))
        issues_.add(line, "key '" + key + "': expected a list of numbers");
    } else if (key == "c_v") {
      number(line, key, value, cfg_.material.c_v, true);
    } else if (key == "lambda") {
      number(line, key, value, cfg_.material.lambda, true);
    } else if (key == "nu") {
      number(line, key, value, cfg_.material.nu, true);
    } else if (key == "alpha") {
      number(line, key, value, cfg_.material.alpha);
    } else {
      issues_.add(line, "unknown key '" + key + "' in [material]");
    }
  }

  void scenario_key(int line, const std::string& key, const std::string& value) {
    if (key == "T")
      number(line, key, value, cfg_.horizon, true);
    else if (key == "dt")
      number(line, key, value, cfg_.dt, true);
    else if (key == "f_x")
      expression(line, key, value, cfg_.f[0]);
    else if (key == "f_y")
      expression(line, key, value, cfg_.f[1]);
    else if (key == "f_z")
      expression(line, key, value, cfg_.f[2]);
    else if (key == "h")
      expression(line, key, value, cfg_.heat_source);
    else if (key == "theta_inf")
      expression(line, key, value, cfg_.theta_inf);
    else if (key == "q_e")
      expression(line, key, value, cfg_.q_e);
    else if (key == "u0_x")
      expression(line, key, value, cfg_.u0[0]);
    else if (key == "u0_y")
      expression(line, key, value, cfg_.u0[1]);
    else if (key == "u0_z")
      expression(line, key, value, cfg_.u0[2]);
    else if (key == "e0")
      expression(line, key, value, cfg_.e0);
    else
      issues_.add(line, "unknown key '" + key + "' in [scenario]");
  }

  void solver_key(int line, const std::string& key, const std::string& value) {
    if (key == "picard_tol")
      number(line, key, value, cfg_.picard_tol, true);
    else if (key == "picard_max")
      integer(line, key, value, cfg_.picard_max, 1);
    else if (key == "relax") {
      number(line, key, value, cfg_.relax, true);
      if (cfg_.relax > 1.0) issues_.add(line, "key 'relax' must be in (0,1]");
    } else if (key == "saddle_tol")
      number(line, key, value, cfg_.saddle_tol, true);
    else if (key == "saddle_max")
      integer(line, key, value, cfg_.saddle_max, 1);
    else if (key == "newton_tol")
      number(line, key, value, cfg_.newton_tol, true);
    else if (key == "newton_max")
      integer(line, key, value, cfg_.newton_max, 1);
    else if (key == "gronwall_c1")
      number(line, key, value, cfg_.gronwall_c1);
    else if (key == "gronwall_c2")
      number(line, key, value, cfg_.gronwall_c2);
    else if (key == "gronwall_c3")
      number(line, key, value, cfg_.gronwall_c3);
    else if (key == "cs_samples")
      integer(line, key, value, cfg_.cs_samples, 1);
    else if (key == "cs_amplitude")
      number(line, key, value, cfg_.cs_amplitude);
    else
      issues_.add(line, "unknown key '" + key + "' in [solver]");
  }

  void output_key(int line, const std::string& key, const std::string& value) {
    if (key == "dir")
      cfg_.output_dir = value;
    else if (key == "vtk_every")
      integer(line, key, value, cfg_.vtk_every, 0);
    else if (key == "seed") {
      std::uint64_t s;
      if (!parse_u64(value, s))
        issues_.add(line, "key 'seed': expected an unsigned integer");
      else
        cfg_.seed = s;
    } else {
      issues_.add(line, "unknown key '" + key + "' in [output]");
    }
  }

  void validate() {
    if (cfg_.mesh_source == "import" && cfg_.mesh_file.empty())
      issues_.add(0, "[mesh] source=import requires file=");
    if (cfg_.mesh_source == "generate" && cfg_.pipe.branches.empty())
      cfg_.pipe.branches.push_back({{0.0, 0.0, 0.0}, {4.0, 0.0, 0.0}, 1.0});
    if (cfg_.material.theta.size() != cfg_.material.rho.size())
      issues_.add(0, "[material] theta_breakpoints and rho_values must have equal length");
    const double steps = cfg_.horizon / cfg_.dt;
    if (steps > 0.0 && std::abs(steps - std::lround(steps)) > 1e-9 * steps)
      issues_.add(0, "[scenario] T must be an integer multiple of dt");
  }

  const std::string& text_;
  Issues issues_;
  RunConfig cfg_;
};

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& name) {
  RunConfig cfg = Parser(text, name).run();
  if (cfg.material.theta.empty()) {
    cfg.material.theta = {0.0, 1.0};
    cfg.material.rho = {1.0, 1.0};
  }
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path + ": cannot open config file"});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

PipeMesh build_mesh(const RunConfig& cfg) {
  if (cfg.mesh_source == "import") return import_msh(cfg.mesh_file);
  return generate_pipe(cfg.pipe);
}

Scenario make_scenario(const RunConfig& cfg, const PipeMesh& mesh, const MaterialLaw& law) {
  Scenario s;
  s.mesh = &mesh;
  s.law = &law;
  s.horizon = cfg.horizon;
  s.dt = cfg.dt;
  const Expression fx = cfg.f[0], fy = cfg.f[1], fz = cfg.f[2];
  s.f = [fx, fy, fz](const Vec3& x, double t) {
    return Vec3{fx.eval(x, t), fy.eval(x, t), fz.eval(x, t)};
  };
  const Expression he = cfg.heat_source;
  s.h = [he](const Vec3& x, double t) { return he.eval(x, t); };
  const Expression ti = cfg.theta_inf;
  s.theta_inf = [ti](const Vec3& x, double t) { return ti.eval(x, t); };
  const Expression qe = cfg.q_e;
  s.q_e = [qe](const Vec3& x, double t) { return qe.eval(x, t); };
  const Expression ux = cfg.u0[0], uy = cfg.u0[1], uz = cfg.u0[2];
  s.u0 = [ux, uy, uz](const Vec3& x, double t) {
    return Vec3{ux.eval(x, t), uy.eval(x, t), uz.eval(x, t)};
  };
  const Expression ez = cfg.e0;
  s.e0 = [ez](const Vec3& x, double t) { return ez.eval(x, t); };
  return s;
}

}  // namespace pipeflow
