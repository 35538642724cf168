#include "chemolimit/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace chemo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Hands out values by key, remembers which keys were read so leftovers can be
// reported as unknown.
class Reader {
 public:
  explicit Reader(const IniMap& ini) : ini_(ini) {}

  bool has(const std::string& key) const { return ini_.count(key) != 0; }

  std::optional<std::string> text(const std::string& key) {
    auto it = ini_.find(key);
    if (it == ini_.end()) return std::nullopt;
    used_.insert(key);
    return it->second;
  }

  std::string text_or(const std::string& key, const std::string& fallback) { return text(key).value_or(fallback); }

  double number(const std::string& key, double fallback) {
    auto v = text(key);
    return v ? to_number(key, *v) : fallback;
  }

  double positive(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key, "must be a positive number");
    return v;
  }

  long integer(const std::string& key, long fallback, long min) {
    auto v = text(key);
    if (!v) return fallback;
    long out = 0;
    const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
    if (res.ec != std::errc() || res.ptr != v->data() + v->size()) throw ConfigError(key, "not an integer: '" + *v + "'");
    if (out < min) throw ConfigError(key, "must be at least " + std::to_string(min));
    return out;
  }

  std::vector<double> list(const std::string& key) {
    std::vector<double> out;
    auto v = text(key);
    if (!v) return out;
    std::istringstream is(*v);
    std::string item;
    while (std::getline(is, item, ',')) out.push_back(to_number(key, trim(item)));
    return out;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : ini_) {
      if (!used_.count(key)) throw ConfigError(key, "unknown key");
    }
  }

  static double to_number(const std::string& key, const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
      throw ConfigError(key, "not a number: '" + s + "'");
    }
    return v;
  }

 private:
  const IniMap& ini_;
  std::set<std::string> used_;
};

// Reads `<prefix>` (preset name) and `<prefix>_*` parameters. Returns nullopt
// for "manifold" when allowed.
std::optional<Profile> read_profile(Reader& r, const std::string& prefix, const std::string& fallback,
                                    bool allow_manifold) {
  const std::string kind = r.text_or(prefix, fallback);
  Profile p;
  if (kind == "manifold") {
    if (!allow_manifold) throw ConfigError(prefix, "'manifold' is not allowed here");
    return std::nullopt;
  }
  if (kind == "zero") {
    p.kind = Profile::Kind::Zero;
  } else if (kind == "constant") {
    p.kind = Profile::Kind::Constant;
    p.value = r.number(prefix + "_value", 1.0);
    if (p.value < 0.0) throw ConfigError(prefix + "_value", "must be nonnegative");
  } else if (kind == "gaussian" || kind == "two-bump") {
    p.kind = kind == "gaussian" ? Profile::Kind::Gaussian : Profile::Kind::TwoBump;
    p.mass = r.number(prefix + "_mass", 0.5);
    if (!(p.mass >= 0.0)) throw ConfigError(prefix + "_mass", "must be nonnegative");
    p.center_x = r.number(prefix + "_center", 0.5);
    p.center_y = r.number(prefix + "_center_y", p.center_x);
    p.center2_x = r.number(prefix + "_center2", 0.25);
    p.center2_y = r.number(prefix + "_center2_y", p.center2_x);
    p.width = r.positive(prefix + "_width", 0.1);
  } else {
    throw ConfigError(prefix, "unknown preset '" + kind + "'");
  }
  return p;
}

}  // namespace

IniMap parse_ini(const std::string& text, const std::string& origin) {
  IniMap out;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(where, "unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) throw ConfigError(where, "empty section name");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where, "expected key = value");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError(where, "empty key");
    if (section.empty()) throw ConfigError(key, "key outside of any [section]");
    const std::string full = section + "." + key;
    if (out.count(full)) throw ConfigError(full, "duplicate key");
    out[full] = trim(t.substr(eq + 1));
  }
  return out;
}

IniMap read_ini_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "cannot read config file");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_ini(os.str(), path);
}

RunConfig build_run_config(const IniMap& ini) {
  Reader r(ini);
  RunConfig cfg;
  SweepConfig& sw = cfg.sweep;

  // [grid]
  const std::string kind = r.text_or("grid.kind", "interval");
  if (kind == "interval") {
    sw.grid.kind = GridKind::Interval;
    sw.grid.length_x = r.positive("grid.length", 1.0);
    sw.grid.nodes_x = static_cast<int>(r.integer("grid.nodes", 256, 3));
  } else if (kind == "rectangle") {
    sw.grid.kind = GridKind::Rectangle;
    sw.grid.length_x = r.positive("grid.length_x", 1.0);
    sw.grid.length_y = r.positive("grid.length_y", 1.0);
    sw.grid.nodes_x = static_cast<int>(r.integer("grid.nodes_x", 64, 3));
    sw.grid.nodes_y = static_cast<int>(r.integer("grid.nodes_y", sw.grid.nodes_x, 3));
    sw.grid.dimension = 2;
  } else if (kind == "ball") {
    sw.grid.kind = GridKind::RadialBall;
    sw.grid.length_x = r.positive("grid.radius", 1.0);
    sw.grid.nodes_x = static_cast<int>(r.integer("grid.nodes", 256, 3));
    sw.grid.dimension = static_cast<int>(r.integer("grid.dimension", 4, 2));
    if (sw.grid.dimension > 4) throw ConfigError("grid.dimension", "must be 2, 3 or 4");
  } else {
    throw ConfigError("grid.kind", "unknown grid kind '" + kind + "'");
  }

  // [model]
  sw.dt = r.positive("model.dt", 1e-3);
  sw.t_end = r.positive("model.t_end", 0.5);
  if (sw.t_end / sw.dt > kMaxStepsPerRun) throw ConfigError("model.dt", "t_end/dt exceeds the 1e7 step guard");
  const std::string regime = r.text_or("model.regime", "full");
  const double tau = r.positive("model.tau", 1.0);
  if (regime == "full") {
    cfg.regime = Full{r.positive("model.eps", 0.1), tau};
  } else if (regime == "pes") {
    cfg.regime = PesLimit{tau};
  } else if (regime == "ids") {
    cfg.regime = IdsLimit{};
  } else {
    throw ConfigError("model.regime", "unknown regime '" + regime + "'");
  }

  // [initial]
  sw.n0 = *read_profile(r, "initial.n0", "gaussian", false);
  if (sw.grid.kind == GridKind::RadialBall && !r.has("initial.n0_center")) sw.n0.center_x = 0.0;
  cfg.noise = r.number("initial.n0_noise", 0.0);
  if (cfg.noise < 0.0 || cfg.noise >= 1.0) throw ConfigError("initial.n0_noise", "must lie in [0, 1)");
  if (auto c0 = read_profile(r, "initial.c0", "manifold", true)) {
    cfg.c0_single = *c0;
    cfg.c0_on_manifold = false;
  }
  if (auto w0 = read_profile(r, "initial.w0", "manifold", true)) {
    cfg.w0_single = *w0;
    cfg.w0_on_manifold = false;
  }

  // [sweep]
  const bool any_sweep_key = std::any_of(ini.begin(), ini.end(), [](const auto& kv) { return kv.first.rfind("sweep.", 0) == 0; });
  if (any_sweep_key) {
    cfg.has_sweep = true;
    const std::string sk = r.text_or("sweep.kind", "pes");
    if (sk == "pes") {
      PesSweep p;
      p.tau = r.positive("sweep.tau", tau);
      p.eps_list = r.list("sweep.eps");
      if (p.eps_list.empty()) throw ConfigError("sweep.eps", "missing eps list");
      sw.sweep = p;
    } else if (sk == "ids") {
      IdsSweep s;
      auto text = r.text("sweep.kappa");
      if (!text) throw ConfigError("sweep.kappa", "missing kappa list");
      std::istringstream is(*text);
      std::string item;
      while (std::getline(is, item, ',')) {
        item = trim(item);
        const auto colon = item.find(':');
        const double e = Reader::to_number("sweep.kappa", trim(item.substr(0, colon)));
        const double t = colon == std::string::npos ? e : Reader::to_number("sweep.kappa", trim(item.substr(colon + 1)));
        s.kappa_list.emplace_back(e, t);
      }
      sw.sweep = s;
    } else {
      throw ConfigError("sweep.kind", "unknown sweep kind '" + sk + "'");
    }
    try {
      sw.family = data_family_from_string(r.text_or("sweep.family", "well-prepared"));
    } catch (const InvalidArgument& e) {
      throw ConfigError("sweep.family", e.what());
    }
    try {
      sw.guard = mesh_guard_from_string(r.text_or("sweep.guard", "sensitivity"));
    } catch (const InvalidArgument& e) {
      throw ConfigError("sweep.guard", e.what());
    }
    sw.guard_factor = r.positive("sweep.guard_factor", 3.0);
    if (sw.family != DataFamily::WellPrepared) {
      sw.c0 = cfg.c0_on_manifold ? Profile::zero() : cfg.c0_single;
      sw.w0 = cfg.w0_on_manifold ? Profile::zero() : cfg.w0_single;
    }
  }

  // [output] / [run]
  cfg.out_dir = r.text_or("output.dir", ".");
  cfg.stride = static_cast<std::size_t>(r.integer("output.stride", 10, 1));
  sw.threads = static_cast<unsigned>(r.integer("run.threads", 1, 1));
  cfg.seed = static_cast<std::uint64_t>(r.integer("run.seed", 0, 0));

  r.reject_unknown();

  // Cross-checks that would otherwise surface only mid-run.
  const double q = sw.t_end / sw.dt;
  if (cfg.has_sweep && std::abs(q - std::round(q)) > 1e-9 * std::max(1.0, q)) {
    throw ConfigError("model.t_end", "t_end/dt must be an integer for sweeps");
  }
  try {
    sw.grid.build();
    if (cfg.has_sweep) sw.validate();
  } catch (const FitRejected&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(cfg.has_sweep ? "sweep" : "grid", e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) { return build_run_config(read_ini_file(path)); }

State single_run_initial_state(const RunConfig& cfg, const GridPtr& grid) {
  State s;
  s.n = cfg.sweep.n0.sample(grid);
  if (cfg.noise > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double before = integrate(s.n);
    for (std::size_t k = 0; k < s.n.size(); ++k) s.n[k] *= 1.0 + cfg.noise * u(rng);
    const double after = integrate(s.n);
    if (after > 0.0) s.n *= before / after;
  }
  std::optional<ManifoldKind> kind;
  if (const auto* f = std::get_if<Full>(&cfg.regime)) kind = ManifoldKind::pes(f->tau);
  if (const auto* p = std::get_if<PesLimit>(&cfg.regime)) kind = ManifoldKind::pes(p->tau);
  if (std::holds_alternative<IdsLimit>(cfg.regime)) kind = ManifoldKind::ids();
  const InitialLayer layer = initial_layer(s.n, s.n, s.n, *kind);
  s.w = cfg.w0_on_manifold ? layer.w_limit0 : cfg.w0_single.sample(grid);
  s.c = cfg.c0_on_manifold ? (cfg.w0_on_manifold ? layer.c_limit0 : elliptic_solve(1.0, s.w))
                           : cfg.c0_single.sample(grid);
  return s;
}

}  // namespace chemo
