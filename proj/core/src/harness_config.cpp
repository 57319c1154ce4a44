#include "wfldp/harness_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace wfldp {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"experiment", {"kind"}},
      {"model", {"n", "theta", "p", "gamma"}},
      {"fitness", {"matrix", "file"}},
      {"sim", {"dt", "t_end", "trajectories", "record_stride", "seed", "boundary_floor", "start"}},
      {"event", {"lower", "upper", "center", "delta", "method", "end", "compare"}},
      {"scan", {"mode", "samples", "resolution"}},
      {"minimize", {"start", "end", "horizon", "knots", "max_iters", "grad_tol", "horizons"}},
      {"path", {"file"}},
      {"partition", {"mu_atoms", "mu_density", "nu_atoms", "nu_density", "max_level", "structural"}},
      {"output", {"dir", "formats"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
    throw ConfigError(field, "expected a finite number, got '" + text + "'");
  return v;
}

std::uint64_t to_u64(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ConfigError(field, "expected a non-negative integer, got '" + text + "'");
  return v;
}

bool to_bool(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(field, "expected true or false, got '" + text + "'");
}

std::vector<double> to_list(const std::string& field, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(field, item));
  if (out.empty()) throw ConfigError(field, "expected a comma-separated list of numbers");
  return out;
}

// "[(a, b), (c, d)]" -> {{a, b}, {c, d}}, each tuple of the given arity.
std::vector<std::vector<double>> to_tuples(const std::string& field, const std::string& text, std::size_t arity) {
  std::string t = trim(text);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']')
    throw ConfigError(field, "expected a bracketed list of tuples");
  t = t.substr(1, t.size() - 2);
  static const std::regex tuple_re(R"(\(([^()]*)\))");
  std::vector<std::vector<double>> out;
  std::string rest;
  auto begin = std::sregex_iterator(t.begin(), t.end(), tuple_re);
  std::size_t last = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    rest += t.substr(last, static_cast<std::size_t>(it->position()) - last);
    last = static_cast<std::size_t>(it->position() + it->length());
    auto vals = to_list(field, (*it)[1].str());
    if (vals.size() != arity)
      throw ConfigError(field, "each tuple needs " + std::to_string(arity) + " numbers");
    out.push_back(std::move(vals));
  }
  rest += t.substr(last);
  for (char c : rest) {
    if (c != ',' && !std::isspace(static_cast<unsigned char>(c)))
      throw ConfigError(field, "unexpected text between tuples");
  }
  return out;
}

FitnessMatrix matrix_from_text(const std::string& field, const std::string& text, char row_sep) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, row_sep)) {
    if (trim(row).empty()) continue;
    rows.push_back(to_list(field, row));
  }
  try {
    return FitnessMatrix::from_rows(rows);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field, e.what());
  }
}

std::filesystem::path existing_file(const std::string& field, const std::string& text,
                                    const std::filesystem::path& base) {
  std::filesystem::path f = trim(text);
  if (f.is_relative()) f = base / f;
  if (!std::filesystem::is_regular_file(f)) throw ConfigError(field, "file not found: " + f.string());
  return f;
}

void check_simplex(const std::string& field, const std::vector<double>& w) {
  try {
    (void)SimplexPoint(w);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::EquilibriumScan: return "equilibrium-scan";
    case ExperimentKind::PathTube: return "path-tube";
    case ExperimentKind::Minimize: return "minimize";
    case ExperimentKind::PartitionEntropy: return "partition-entropy";
    case ExperimentKind::GirsanovCheck: return "girsanov-check";
    case ExperimentKind::Simulate: return "simulate";
    case ExperimentKind::Action: return "action";
    case ExperimentKind::QuasiPotential: return "quasipotential";
  }
  return "?";
}

std::optional<ExperimentKind> parse_kind(const std::string& name) {
  for (auto k : {ExperimentKind::EquilibriumScan, ExperimentKind::PathTube, ExperimentKind::Minimize,
                 ExperimentKind::PartitionEntropy, ExperimentKind::GirsanovCheck, ExperimentKind::Simulate,
                 ExperimentKind::Action, ExperimentKind::QuasiPotential}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

ModelParams ExperimentConfig::params() const {
  return ModelParams(model.theta, SimplexPoint(model.p), model.gammas.front());
}

ExperimentConfig parse_config(std::istream& is, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config", std::string("syntax error: ") + e.message() + " at line " +
                                    std::to_string(e.line()));
  }

  ExperimentConfig cfg;
  std::optional<std::size_t> declared_n;
  bool have_p = false;
  for (const auto& [block, section] : tree) {
    auto s = schema().find(block);
    if (s == schema().end()) throw ConfigError(block, "unknown block");
    if (section.empty() && !section.data().empty()) throw ConfigError(block, "key outside of any block");
    for (const auto& [key, node] : section) {
      const std::string field = block + "." + key;
      if (!s->second.count(key)) throw ConfigError(field, "unknown key");
      const std::string v = trim(node.data());
      cfg.echo[field] = v;

      if (block == "experiment") {
        cfg.kind = parse_kind(v);
        if (!cfg.kind) throw ConfigError(field, "unknown experiment kind '" + v + "'");
      } else if (block == "model") {
        if (key == "n") declared_n = to_u64(field, v);
        if (key == "theta") cfg.model.theta = to_double(field, v);
        if (key == "p") {
          cfg.model.p = to_list(field, v);
          have_p = true;
        }
        if (key == "gamma") cfg.model.gammas = to_list(field, v);
      } else if (block == "fitness") {
        if (cfg.fitness) throw ConfigError(field, "give either fitness.matrix or fitness.file, not both");
        if (key == "matrix") {
          cfg.fitness = matrix_from_text(field, v, ';');
        } else {
          std::ifstream f(existing_file(field, v, base_dir));
          std::stringstream text;
          text << f.rdbuf();
          cfg.fitness = matrix_from_text(field, text.str(), '\n');
        }
      } else if (block == "sim") {
        if (key == "dt") cfg.sim.dt = to_double(field, v);
        if (key == "t_end") cfg.sim.t_end = to_double(field, v);
        if (key == "trajectories") cfg.sim.trajectories = to_u64(field, v);
        if (key == "record_stride") cfg.sim.record_stride = to_u64(field, v);
        if (key == "seed") cfg.sim.seed = to_u64(field, v);
        if (key == "boundary_floor") cfg.sim.boundary_floor = to_double(field, v);
        if (key == "start") {
          cfg.sim.start = to_list(field, v);
          check_simplex(field, *cfg.sim.start);
        }
      } else if (block == "event") {
        if (key == "lower") cfg.event.lower = to_list(field, v);
        if (key == "upper") cfg.event.upper = to_list(field, v);
        if (key == "center") {
          if (v == "flow") {
            cfg.event.center = TubeCenter::Flow;
          } else if (v == "minimizer") {
            cfg.event.center = TubeCenter::Minimizer;
          } else {
            cfg.event.center = TubeCenter::File;
            cfg.event.center_file = existing_file(field, v, base_dir);
          }
        }
        if (key == "delta") cfg.event.delta = to_double(field, v);
        if (key == "method") {
          if (v == "plain") {
            cfg.event.method = TubeMethod::Plain;
          } else if (v == "tilted") {
            cfg.event.method = TubeMethod::Tilted;
          } else {
            throw ConfigError(field, "expected plain or tilted");
          }
        }
        if (key == "end") {
          cfg.event.end = to_list(field, v);
          check_simplex(field, *cfg.event.end);
        }
        if (key == "compare") cfg.event.compare = to_bool(field, v);
      } else if (block == "scan") {
        if (key == "mode") {
          if (v != "exact" && v != "mc") throw ConfigError(field, "expected exact or mc");
          cfg.scan.monte_carlo = v == "mc";
        }
        if (key == "samples") cfg.scan.samples = to_u64(field, v);
        if (key == "resolution") cfg.scan.resolution = to_double(field, v);
      } else if (block == "minimize") {
        if (key == "start") {
          cfg.minimize.start = to_list(field, v);
          check_simplex(field, *cfg.minimize.start);
        }
        if (key == "end") {
          cfg.minimize.end = to_list(field, v);
          check_simplex(field, *cfg.minimize.end);
        }
        if (key == "horizon") cfg.minimize.horizon = to_double(field, v);
        if (key == "knots") cfg.minimize.knots = to_u64(field, v);
        if (key == "max_iters") cfg.minimize.max_iters = to_u64(field, v);
        if (key == "grad_tol") cfg.minimize.grad_tol = to_double(field, v);
        if (key == "horizons") cfg.minimize.horizons = to_list(field, v);
      } else if (block == "path") {
        cfg.path_file = existing_file(field, v, base_dir);
      } else if (block == "partition") {
        if (key == "mu_atoms" || key == "nu_atoms") {
          std::vector<Atom> atoms;
          for (const auto& t : to_tuples(field, v, 2)) atoms.push_back({t[0], t[1]});
          (key == "mu_atoms" ? cfg.partition.mu_atoms : cfg.partition.nu_atoms) = std::move(atoms);
        }
        if (key == "mu_density" || key == "nu_density") {
          std::vector<DensityPiece> d;
          for (const auto& t : to_tuples(field, v, 3)) d.push_back({t[0], t[1], t[2]});
          (key == "mu_density" ? cfg.partition.mu_density : cfg.partition.nu_density) = std::move(d);
        }
        if (key == "max_level") {
          const auto k = to_u64(field, v);
          if (k > 24) throw ConfigError(field, "at most 24 levels");
          cfg.partition.max_level = static_cast<unsigned>(k);
        }
        if (key == "structural") cfg.partition.structural = to_bool(field, v);
      } else if (block == "output") {
        if (key == "dir") cfg.output_dir = v;
        if (key == "formats" && v != "csv,json" && v != "csv, json")
          throw ConfigError(field, "only 'csv,json' is supported");
      }
    }
  }

  // Cross-field checks.
  if (!have_p) throw ConfigError("model.p", "missing");
  check_simplex("model.p", cfg.model.p);
  if (declared_n && *declared_n != cfg.model.p.size())
    throw ConfigError("model.n", "does not match the length of model.p");
  if (!(cfg.model.theta > 0.0)) throw ConfigError("model.theta", "must be positive");
  if (cfg.model.gammas.empty()) cfg.model.gammas = {0.01};
  for (double g : cfg.model.gammas) {
    if (!(g > 0.0)) throw ConfigError("model.gamma", "must be positive");
  }
  const std::size_t n = cfg.model.p.size();
  if (cfg.fitness && cfg.fitness->size() != n) throw ConfigError("fitness.matrix", "dimension differs from model.p");
  auto check_dim = [&](const std::optional<std::vector<double>>& v, const char* field) {
    if (v && v->size() != n) throw ConfigError(field, "dimension differs from model.p");
  };
  check_dim(cfg.sim.start, "sim.start");
  check_dim(cfg.event.lower, "event.lower");
  check_dim(cfg.event.upper, "event.upper");
  check_dim(cfg.event.end, "event.end");
  check_dim(cfg.minimize.start, "minimize.start");
  check_dim(cfg.minimize.end, "minimize.end");
  if (!(cfg.sim.dt > 0.0)) throw ConfigError("sim.dt", "must be positive");
  if (!(cfg.sim.t_end > 0.0)) throw ConfigError("sim.t_end", "must be positive");
  if (cfg.sim.trajectories == 0) throw ConfigError("sim.trajectories", "must be >= 1");
  if (cfg.sim.record_stride == 0) throw ConfigError("sim.record_stride", "must be >= 1");
  if (!(cfg.sim.boundary_floor >= 0.0 && cfg.sim.boundary_floor < 0.5))
    throw ConfigError("sim.boundary_floor", "must lie in [0, 0.5)");
  if (!(cfg.event.delta > 0.0)) throw ConfigError("event.delta", "must be positive");
  if (cfg.scan.samples == 0) throw ConfigError("scan.samples", "must be >= 1");
  if (!(cfg.scan.resolution > 0.0 && cfg.scan.resolution <= 0.1))
    throw ConfigError("scan.resolution", "must lie in (0, 0.1]");
  if (!(cfg.minimize.horizon > 0.0)) throw ConfigError("minimize.horizon", "must be positive");
  if (cfg.minimize.knots < 4) throw ConfigError("minimize.knots", "must be >= 4");
  if (!(cfg.minimize.grad_tol > 0.0)) throw ConfigError("minimize.grad_tol", "must be positive");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw ConfigError("config", "cannot open " + file.string());
  return parse_config(is, file.parent_path().empty() ? std::filesystem::path(".") : file.parent_path());
}

}  // namespace wfldp
