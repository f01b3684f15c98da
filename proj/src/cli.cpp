#include "coulomb_lab/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "coulomb_lab/counterexamples.hpp"
#include "coulomb_lab/csv.hpp"
#include "coulomb_lab/diagnostics.hpp"
#include "coulomb_lab/ground_state.hpp"
#include "coulomb_lab/radial.hpp"
#include "coulomb_lab/shapes.hpp"
#include "coulomb_lab/snapshot.hpp"
#include "coulomb_lab/surgery.hpp"

namespace clab::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

const std::vector<std::string> kKeys = {
    "grid.n",         "grid.R",           "coupling.q",         "coupling.mass",
    "penalty.M",      "penalty.eta",      "penalty.tau_supp",   "solver.tol",
    "solver.max_iters", "solver.seed",    "solver.mode",        "solver.ground_tol",
    "solver.kernel",  "init.shape",       "init.random",        "output.dir",
    "sweep.list",     "sweep.jobs",       "sweep.continuation", "surgery.axis",
    "surgery.c4_ref", "surgery.t_max",    "counterexample.n",   "counterexample.separation",
    "counterexample.cells", "radial.q_list", "plot.inputs",
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& s) {
  double x = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(x))
    throw UsageError(key + ": not a number: '" + s + "'");
  return x;
}

long long to_int(const std::string& key, const std::string& s) {
  long long x = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw UsageError(key + ": not an integer: '" + s + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw UsageError(key + ": expected true or false, got '" + s + "'");
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw UsageError(key + ": " + what);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

ordered_json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path.string());
  try {
    return ordered_json::parse(f);
  } catch (const ordered_json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const ordered_json& j) {
  auto f = open_out(path);
  f << j.dump(2) << '\n';
}

std::string opt_number(const std::optional<double>& x) {
  return x ? csv::number(*x) : csv::number(std::nan(""));
}

shapes::Preset preset_of(const RunConfig& cfg) {
  try {
    return shapes::parse(cfg.shape);
  } catch (const UsageError& e) {
    throw UsageError(std::string("init.shape: ") + e.what());
  }
}

DomainMask initial_mask(const RunConfig& cfg) {
  const Grid g(cfg.grid_n, cfg.grid_R);
  return shapes::mask(g, shapes::make(preset_of(cfg)));
}

GroundStateOptions ground_options(const RunConfig& cfg) {
  GroundStateOptions o;
  o.tol = cfg.ground_tol;
  o.random_start = cfg.random_start;
  o.seed = cfg.seed;
  o.kernel = cfg.kernel;
  return o;
}

void write_report(const fs::path& dir, const DomainMask& mask, const ScalarField& u,
                  ShapeReport* out = nullptr) {
  const ShapeReport rep = shape_report(mask, u);
  auto f = open_out(dir / "report.json");
  f << to_json(rep) << '\n';
  if (out) *out = rep;
}

ordered_json parts_json(const EnergyParts& p) {
  return {{"dirichlet", p.dirichlet},
          {"coulomb", p.coulomb},
          {"l2penalty", p.l2penalty},
          {"volpenalty", p.volpenalty}};
}

struct SweepRow {
  double q;
  double energy, lambda;
  ShapeReport report;
  int iterations;
  bool converged;
};

// One shape descent written into `dir`; returns the final mask for continuation.
DomainMask optimize_into(const RunConfig& cfg, double q, const DomainMask& start,
                         const fs::path& dir, SweepRow* row) {
  make_dir(dir);
  const PenaltySpec spec = cfg.penalty();
  MinimizeOptions opts;
  opts.tol = cfg.tol;
  opts.max_iters = cfg.max_iters;
  opts.ground_tol = cfg.ground_tol;
  opts.kernel = cfg.kernel;
  const MinimizerResult res = minimize_shape(start, q, spec, opts);

  auto trace = open_out(dir / "trace.csv");
  csv::write_row(trace, {"iteration", "energy", "dirichlet", "coulomb", "l2penalty", "volpenalty",
                         "support_volume", "multiplier", "step"});
  for (const auto& t : res.history)
    csv::write_row(trace, {std::to_string(t.iteration), csv::number(t.energy),
                           csv::number(t.parts.dirichlet), csv::number(t.parts.coulomb),
                           csv::number(t.parts.l2penalty), csv::number(t.parts.volpenalty),
                           csv::number(t.support_volume), csv::number(t.multiplier),
                           csv::number(t.step)});

  const DomainMask& mask = *res.mask;
  write_snapshot(res.u, dir / "u.scf", "u");
  write_snapshot(mask.level_field(), dir / "level.scf", "level");
  ShapeReport rep;
  write_report(dir, mask, res.u, &rep);

  // truncating the minimizer should never lower the plain energy
  const double plain = evaluate(res.u, q, spec, cfg.kernel).energy;
  ordered_json trunc = ordered_json::array();
  bool minimal = true;
  for (double eps : {1e-3, 1e-2}) {
    const double e = evaluate(truncate(res.u, eps), q, spec, cfg.kernel).energy;
    minimal = minimal && e >= plain;
    trunc.push_back({{"eps", eps}, {"energy", e}});
  }

  ordered_json j;
  j["command"] = "optimize";
  j["q"] = q;
  j["energy"] = res.energy;
  j["lambda"] = res.lambda;
  j["parts"] = parts_json(res.parts);
  j["support_volume"] = res.support_volume;
  j["iterations"] = res.iterations;
  j["converged"] = res.converged;
  j["plain_energy"] = plain;
  j["truncations"] = trunc;
  j["truncation_minimal"] = minimal;
  write_json(dir / "result.json", j);

  if (row) *row = SweepRow{q, res.energy, res.lambda, rep, res.iterations, res.converged};
  return mask;
}

std::string run_label(double q) { return "q_" + csv::number(q); }

}  // namespace

PenaltySpec RunConfig::penalty() const {
  PenaltySpec s{M ? *M : PenaltySpec::auto_M(), eta, tau_supp, mode};
  s.validate();
  return s;
}

KeyValues parse_config_text(const std::string& text) {
  KeyValues kv;
  std::stringstream ss(text);
  std::string line;
  int no = 0;
  while (std::getline(ss, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(no) + ": expected section.key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.find('.') == std::string::npos)
      throw UsageError("config line " + std::to_string(no) + ": key '" + key +
                       "' has no section");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues read_config_file(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

RunConfig resolve(const std::string& command, const KeyValues& kv) {
  for (const auto& [key, value] : kv)
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end())
      throw UsageError("unknown key " + key);
  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  RunConfig c;
  c.command = command;
  if (auto v = get("grid.n")) c.grid_n = static_cast<int>(to_int("grid.n", *v));
  require(c.grid_n >= 8 && c.grid_n <= 1024, "grid.n", "must lie in [8, 1024]");
  if (auto v = get("grid.R")) c.grid_R = to_double("grid.R", *v);
  require(c.grid_R > 0.0, "grid.R", "must be positive");

  const auto* q = get("coupling.q");
  const auto* mass = get("coupling.mass");
  if (q && mass) throw UsageError("coupling: give exactly one of coupling.q and coupling.mass");
  if (q) c.q = to_double("coupling.q", *q);
  if (mass) {
    c.mass = to_double("coupling.mass", *mass);
    require(*c.mass >= 0.0, "coupling.mass", "must be nonnegative");
    c.q = mass_to_q(*c.mass);
  }
  require(c.q >= 0.0, "coupling.q", "must be nonnegative");
  const bool needs_coupling =
      command == "ground-state" || command == "optimize" || command == "surgery-check";
  if (needs_coupling && !q && !mass)
    throw UsageError("coupling: missing coupling.q or coupling.mass");

  if (auto v = get("penalty.M"); v && *v != "auto") c.M = to_double("penalty.M", *v);
  if (auto v = get("penalty.eta")) c.eta = to_double("penalty.eta", *v);
  if (auto v = get("penalty.tau_supp")) c.tau_supp = to_double("penalty.tau_supp", *v);
  require(!c.M || *c.M > 0.0, "penalty.M", "must be positive or auto");
  require(c.eta > 0.0 && c.eta < 1.0, "penalty.eta", "must lie in (0, 1)");
  require(c.tau_supp >= 0.0, "penalty.tau_supp", "must be nonnegative");

  if (auto v = get("solver.tol")) c.tol = to_double("solver.tol", *v);
  require(c.tol > 0.0, "solver.tol", "must be positive");
  if (auto v = get("solver.max_iters")) c.max_iters = static_cast<int>(to_int("solver.max_iters", *v));
  require(c.max_iters >= 1, "solver.max_iters", "must be at least 1");
  if (auto v = get("solver.seed")) {
    const long long s = to_int("solver.seed", *v);
    require(s >= 0, "solver.seed", "must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (auto v = get("solver.mode")) {
    if (*v == "project") c.mode = PenaltyMode::project;
    else if (*v == "penalize") c.mode = PenaltyMode::penalize;
    else throw UsageError("solver.mode: expected project or penalize");
  }
  if (auto v = get("solver.ground_tol")) c.ground_tol = to_double("solver.ground_tol", *v);
  require(c.ground_tol > 0.0, "solver.ground_tol", "must be positive");
  if (auto v = get("solver.kernel")) {
    if (*v == "tabulated") c.kernel = KernelMode::tabulated;
    else if (*v == "spectral") c.kernel = KernelMode::spectral;
    else throw UsageError("solver.kernel: expected tabulated or spectral");
  }

  if (command == "surgery-check") {
    const auto t = surgery::tail_preset();
    c.shape = "dumbbell(" + csv::number(t.bulb) + "," + csv::number(t.neck) + "," +
              csv::number(t.length) + "," + csv::number(t.ratio) + ")";
  }
  if (auto v = get("init.shape")) c.shape = *v;
  preset_of(c);
  if (auto v = get("init.random")) c.random_start = to_bool("init.random", *v);
  if (auto v = get("output.dir")) c.out = *v;
  require(!c.out.empty(), "output.dir", "must not be empty");

  if (auto v = get("sweep.list")) {
    c.sweep_list.clear();
    for (const auto& s : split_list(*v)) c.sweep_list.push_back(to_double("sweep.list", s));
  }
  require(!c.sweep_list.empty(), "sweep.list", "must not be empty");
  for (double x : c.sweep_list) require(x >= 0.0, "sweep.list", "values must be nonnegative");
  if (auto v = get("sweep.jobs")) c.jobs = static_cast<int>(to_int("sweep.jobs", *v));
  require(c.jobs >= 1, "sweep.jobs", "must be at least 1");
  if (auto v = get("sweep.continuation")) c.continuation = to_bool("sweep.continuation", *v);

  if (auto v = get("surgery.axis")) c.axis = static_cast<int>(to_int("surgery.axis", *v));
  require(c.axis >= 1 && c.axis <= 3, "surgery.axis", "must be 1, 2 or 3");
  if (auto v = get("surgery.c4_ref")) c.c4_ref = to_double("surgery.c4_ref", *v);
  require(c.c4_ref > 0.0, "surgery.c4_ref", "must be positive");
  if (auto v = get("surgery.t_max")) c.t_max = to_double("surgery.t_max", *v);

  if (auto v = get("counterexample.n")) {
    c.n_list.clear();
    for (const auto& s : split_list(*v))
      c.n_list.push_back(static_cast<int>(to_int("counterexample.n", s)));
  }
  require(!c.n_list.empty(), "counterexample.n", "must not be empty");
  for (int n : c.n_list) require(n >= 1, "counterexample.n", "values must be at least 1");
  if (auto v = get("counterexample.separation")) {
    c.separations.clear();
    for (const auto& s : split_list(*v))
      c.separations.push_back(to_double("counterexample.separation", s));
  }
  require(!c.separations.empty(), "counterexample.separation", "must not be empty");
  for (double s : c.separations)
    require(s > 0.0, "counterexample.separation", "values must be positive");
  if (auto v = get("counterexample.cells")) c.cells = static_cast<int>(to_int("counterexample.cells", *v));
  require(c.cells >= 4, "counterexample.cells", "must be at least 4");

  if (auto v = get("radial.q_list")) {
    c.q_list.clear();
    for (const auto& s : split_list(*v)) c.q_list.push_back(to_double("radial.q_list", s));
  }
  require(!c.q_list.empty(), "radial.q_list", "must not be empty");
  for (double x : c.q_list) require(x >= 0.0, "radial.q_list", "values must be nonnegative");

  if (auto v = get("plot.inputs"))
    for (const auto& s : split_list(*v)) c.inputs.emplace_back(s);
  if (command == "plot") require(!c.inputs.empty(), "plot.inputs", "no input directories");
  return c;
}

std::string config_json(const RunConfig& c) {
  ordered_json j;
  j["command"] = c.command;
  j["grid"] = {{"n", c.grid_n}, {"R", c.grid_R}, {"h", 2.0 * c.grid_R / c.grid_n}};
  j["coupling"] = {{"q", c.q}, {"mass", c.mass ? ordered_json(*c.mass) : ordered_json()}};
  j["penalty"] = {{"M", c.M ? *c.M : PenaltySpec::auto_M()},
                  {"M_auto", !c.M},
                  {"eta", c.eta},
                  {"tau_supp", c.tau_supp}};
  j["solver"] = {{"tol", c.tol},
                 {"max_iters", c.max_iters},
                 {"seed", c.seed},
                 {"mode", c.mode == PenaltyMode::project ? "project" : "penalize"},
                 {"ground_tol", c.ground_tol},
                 {"kernel", c.kernel == KernelMode::tabulated ? "tabulated" : "spectral"}};
  j["init"] = {{"shape", c.shape}, {"random", c.random_start}};
  j["output"] = {{"dir", c.out.string()}};
  if (c.command == "sweep-q")
    j["sweep"] = {{"list", c.sweep_list}, {"jobs", c.jobs}, {"continuation", c.continuation}};
  if (c.command == "surgery-check")
    j["surgery"] = {{"axis", c.axis}, {"c4_ref", c.c4_ref}, {"t_max", c.t_max}};
  if (c.command == "counterexample")
    j["counterexample"] = {{"n", c.n_list}, {"separation", c.separations}, {"cells", c.cells}};
  if (c.command == "radial") j["radial"] = {{"q_list", c.q_list}};
  if (c.command == "plot") {
    std::vector<std::string> in;
    for (const auto& p : c.inputs) in.push_back(p.string());
    j["plot"] = {{"inputs", in}};
  }
  return j.dump(2);
}

void ground_state(const RunConfig& cfg) {
  make_dir(cfg.out);
  const DomainMask mask = initial_mask(cfg);
  const GroundState gs = solve_ground_state(mask, cfg.q, ground_options(cfg));

  auto trace = open_out(cfg.out / "trace.csv");
  csv::write_row(trace, {"iteration", "rayleigh"});
  for (std::size_t i = 0; i < gs.history.size(); ++i)
    csv::write_row(trace, {std::to_string(i + 1), csv::number(gs.history[i])});

  write_snapshot(gs.u, cfg.out / "u.scf", "u");
  write_snapshot(mask.level_field(), cfg.out / "level.scf", "level");
  write_report(cfg.out, mask, gs.u);

  ordered_json j;
  j["command"] = "ground-state";
  j["q"] = cfg.q;
  j["energy"] = gs.lambda;
  j["lambda"] = gs.lambda;
  j["dirichlet"] = gs.dirichlet;
  j["coulomb"] = gs.coulomb;
  j["iterations"] = gs.iterations;
  j["residual"] = gs.residual;
  j["volume"] = mask.volume();
  write_json(cfg.out / "result.json", j);
}

void optimize(const RunConfig& cfg) {
  optimize_into(cfg, cfg.q, initial_mask(cfg), cfg.out, nullptr);
}

void sweep_q(const RunConfig& cfg) {
  make_dir(cfg.out);
  const std::size_t count = cfg.sweep_list.size();
  std::vector<std::optional<SweepRow>> rows(count);

  if (cfg.continuation) {
    // each coupling starts from the previous minimizer
    DomainMask mask = initial_mask(cfg);
    for (std::size_t i = 0; i < count; ++i) {
      const double q = cfg.sweep_list[i];
      SweepRow row{};
      mask = optimize_into(cfg, q, mask, cfg.out / run_label(q), &row);
      rows[i] = row;
    }
  } else {
    const DomainMask start = initial_mask(cfg);
    std::mutex lock;
    std::exception_ptr failure;
    std::size_t next = 0;
    auto worker = [&] {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard<std::mutex> g(lock);
          if (next >= count || failure) return;
          i = next++;
        }
        try {
          SweepRow row{};
          optimize_into(cfg, cfg.sweep_list[i], start, cfg.out / run_label(cfg.sweep_list[i]),
                        &row);
          std::lock_guard<std::mutex> g(lock);
          rows[i] = row;
        } catch (...) {
          std::lock_guard<std::mutex> g(lock);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    const int jobs = static_cast<int>(std::min<std::size_t>(cfg.jobs, count));
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  auto f = open_out(cfg.out / "sweep.csv");
  csv::write_row(f, {"q", "energy", "lambda", "asymmetry", "phi_sup", "hausdorff",
                     "neg_mass_fraction", "boundary_grad_relstd", "volume", "iterations",
                     "converged"});
  for (const auto& r : rows)
    csv::write_row(f, {csv::number(r->q), csv::number(r->energy), csv::number(r->lambda),
                       csv::number(r->report.asymmetry), opt_number(r->report.phi_sup),
                       csv::number(r->report.hausdorff_to_ball),
                       csv::number(r->report.neg_mass_fraction),
                       csv::number(r->report.boundary_grad_relstd),
                       csv::number(r->report.volume), std::to_string(r->iterations),
                       r->converged ? "1" : "0"});
}

void surgery_check(const RunConfig& cfg) {
  make_dir(cfg.out);
  const DomainMask mask = initial_mask(cfg);
  const GroundState gs = solve_ground_state(mask, cfg.q, ground_options(cfg));
  surgery::ScanOptions so;
  so.axis = cfg.axis;
  so.c4_ref = cfg.c4_ref;
  so.t_max = cfg.t_max;
  so.ground_tol = cfg.ground_tol;
  so.kernel = cfg.kernel;
  const auto outcomes = surgery::trichotomy_scan(mask, gs.u, cfg.q, so);

  auto f = open_out(cfg.out / "surgery.csv");
  csv::write_row(f, {"t", "eps", "delta", "mu", "m", "condition", "E_before", "E_after"});
  int counts[3] = {0, 0, 0};
  double best_drop = 0.0;
  for (const auto& o : outcomes) {
    ++counts[static_cast<int>(o.condition)];
    const double after = o.competitor ? o.competitor->energy_after : std::nan("");
    if (o.competitor) best_drop = std::max(best_drop, (o.energy_before - after) / o.energy_before);
    csv::write_row(f, {csv::number(o.t), csv::number(o.eps), csv::number(o.delta),
                       csv::number(o.mu), csv::number(o.m), surgery::to_string(o.condition),
                       csv::number(o.energy_before), csv::number(after)});
  }
  write_snapshot(gs.u, cfg.out / "u.scf", "u");

  ordered_json j;
  j["command"] = "surgery-check";
  j["q"] = cfg.q;
  j["energy"] = gs.lambda;
  j["cuts"] = outcomes.size();
  j["cond1"] = counts[0];
  j["cond2"] = counts[1];
  j["cond3"] = counts[2];
  j["best_relative_drop"] = best_drop;
  write_json(cfg.out / "result.json", j);
}

void counterexample(const RunConfig& cfg) {
  make_dir(cfg.out);
  const auto rows = decay_report(cfg.n_list, cfg.separations, cfg.cells, cfg.kernel);
  auto f = open_out(cfg.out / "counterexample.csv");
  write_decay_csv(f, rows);
}

void radial(const RunConfig& cfg) {
  make_dir(cfg.out);
  auto f = open_out(cfg.out / "radial.csv");
  csv::write_row(f, {"q", "E", "lambda", "D"});
  for (double q : cfg.q_list) {
    const auto b = radial::ball_ground_state(q);
    csv::write_row(f, {csv::number(q), csv::number(b.energy), csv::number(b.lambda),
                       csv::number(b.coulomb)});
  }
}

std::string midplane_svg(const ScalarField& u) {
  const Grid& g = u.grid();
  const int n = g.n();
  const int k = n / 2;
  double top = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) top = std::max(top, std::abs(u.at(i, j, k)));
  constexpr int px = 4;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << n * px << "\" height=\"" << n * px
    << "\" viewBox=\"0 0 " << n * px << ' ' << n * px << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"rgb(255,255,255)\"/>\n";
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double v = top > 0.0 ? std::abs(u.at(i, j, k)) / top : 0.0;
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - v)));
      if (shade == 255) continue;
      // y grows upwards in the picture
      s << "<rect x=\"" << i * px << "\" y=\"" << (n - 1 - j) * px << "\" width=\"" << px
        << "\" height=\"" << px << "\" fill=\"rgb(" << shade << ',' << shade << ',' << shade
        << ")\"/>\n";
    }
  s << "</svg>\n";
  return s.str();
}

void plot(const RunConfig& cfg) {
  if (cfg.inputs.empty()) throw UsageError("plot.inputs: no input directories");
  std::vector<fs::path> runs;
  for (const auto& in : cfg.inputs) {
    if (!fs::is_directory(in)) throw IoError("not a directory: " + in.string());
    if (fs::exists(in / "result.json")) runs.push_back(in);
    std::vector<fs::path> sub;
    for (const auto& e : fs::directory_iterator(in))
      if (e.is_directory() && fs::exists(e.path() / "result.json")) sub.push_back(e.path());
    std::sort(sub.begin(), sub.end());
    runs.insert(runs.end(), sub.begin(), sub.end());
  }
  if (runs.empty()) throw IoError("no completed runs under the given inputs");
  make_dir(cfg.out);

  struct Point {
    double q, energy, asymmetry, phi_sup, neg_mass;
  };
  std::vector<Point> points;
  for (const auto& run : runs) {
    const auto res = read_json(run / "result.json");
    Point p{res.at("q").get<double>(), res.at("energy").get<double>(), std::nan(""),
            std::nan(""), std::nan("")};
    if (fs::exists(run / "report.json")) {
      std::ifstream rf(run / "report.json");
      std::stringstream ss;
      ss << rf.rdbuf();
      const ShapeReport rep = report_from_json(ss.str());
      p.asymmetry = rep.asymmetry;
      p.phi_sup = rep.phi_sup ? *rep.phi_sup : std::nan("");
      p.neg_mass = rep.neg_mass_fraction;
    }
    points.push_back(p);
    if (fs::exists(run / "u.scf")) {
      auto f = open_out(cfg.out / (run.filename().string() + "_mid.svg"));
      f << midplane_svg(read_snapshot(run / "u.scf"));
    }
  }
  std::stable_sort(points.begin(), points.end(),
                   [](const Point& a, const Point& b) { return a.q < b.q; });
  auto curves = open_out(cfg.out / "curves.csv");
  csv::write_row(curves, {"q", "energy", "asymmetry", "phi_sup"});
  auto neg = open_out(cfg.out / "neg_mass.csv");
  csv::write_row(neg, {"q", "neg_mass_fraction"});
  for (const auto& p : points) {
    csv::write_row(curves, {csv::number(p.q), csv::number(p.energy), csv::number(p.asymmetry),
                            csv::number(p.phi_sup)});
    csv::write_row(neg, {csv::number(p.q), csv::number(p.neg_mass)});
  }
}

namespace {

void dispatch_command(const RunConfig& cfg) {
  if (cfg.command == "ground-state") ground_state(cfg);
  else if (cfg.command == "optimize") optimize(cfg);
  else if (cfg.command == "sweep-q") sweep_q(cfg);
  else if (cfg.command == "surgery-check") surgery_check(cfg);
  else if (cfg.command == "counterexample") counterexample(cfg);
  else if (cfg.command == "radial") radial(cfg);
  else if (cfg.command == "plot") plot(cfg);
  else throw UsageError("unknown command " + cfg.command);
}

void write_manifest(const RunConfig& cfg, double seconds, const std::vector<std::string>& argv) {
  ordered_json m;
  m["config"] = ordered_json::parse(config_json(cfg));
  m["versions"] = {{"coulomb_lab", kVersion}, {"compiler", __VERSION__}, {"cxx", __cplusplus}};
  m["argv"] = argv;
  m["timings"] = {{"wall_seconds", seconds}};
  write_json(cfg.out / "manifest.json", m);
}

}  // namespace

int exit_code(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ResolutionError*>(&e))
    return kUsage;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e))
    return kIo;
  return kSolver;
}

void execute(const RunConfig& cfg, const std::vector<std::string>& argv) {
  const auto t0 = std::chrono::steady_clock::now();
  dispatch_command(cfg);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(cfg, seconds, argv);
}

namespace {

struct Flag {
  const char* name;
  const char* key;
  const char* help;
};

const Flag kFlags[] = {
    {"--grid-n", "grid.n", "cells per side"},
    {"--grid-R", "grid.R", "half width of the box"},
    {"--q", "coupling.q", "Coulomb coupling"},
    {"--mass", "coupling.mass", "mass, converted to q"},
    {"--M", "penalty.M", "L2 penalty weight or auto"},
    {"--eta", "penalty.eta", "volume penalty slope"},
    {"--tau-supp", "penalty.tau_supp", "support threshold"},
    {"--tol", "solver.tol", "shape descent tolerance"},
    {"--max-iters", "solver.max_iters", "shape descent iteration cap"},
    {"--seed", "solver.seed", "seed for random starts"},
    {"--mode", "solver.mode", "project or penalize"},
    {"--ground-tol", "solver.ground_tol", "eigen solver tolerance"},
    {"--kernel", "solver.kernel", "tabulated or spectral"},
    {"--shape", "init.shape", "ball, ellipsoid(a,b,c), dumbbell(bulb,neck,len[,ratio]), two_balls(gap[,ratio])"},
    {"--out", "output.dir", "output directory"},
    {"--list", "sweep.list", "comma-separated couplings"},
    {"--jobs", "sweep.jobs", "parallel runs without continuation"},
    {"--axis", "surgery.axis", "cut axis 1, 2 or 3"},
    {"--c4-ref", "surgery.c4_ref", "reference constant of the second case"},
    {"--t-max", "surgery.t_max", "largest cut coordinate"},
    {"--n-list", "counterexample.n", "comma-separated bump pair counts"},
    {"--separations", "counterexample.separation", "comma-separated lattice spacings"},
    {"--cells", "counterexample.cells", "cells per bump radius"},
    {"--q-list", "radial.q_list", "comma-separated couplings"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral-Coulomb shape optimization experiments", "coulomb-lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"ground-state", "ground state on a fixed shape"},
      {"optimize", "penalized shape descent"},
      {"sweep-q", "shape descent over a list of couplings"},
      {"surgery-check", "tail truncation scan"},
      {"counterexample", "bump sequences with vanishing Coulomb energy"},
      {"radial", "radial ball ground states"},
      {"plot", "SVG cross-sections and curve tables"},
  };
  KeyValues overrides;
  std::string config_path;
  std::vector<std::string> inputs;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "section.key = value file");
    for (const Flag& fl : kFlags) {
      const std::string key = fl.key;
      sub->add_option_function<std::string>(
          fl.name, [&overrides, key](const std::string& v) { overrides[key] = v; }, fl.help);
    }
    sub->add_flag_callback("--random-start", [&overrides] { overrides["init.random"] = "true"; },
                           "start the eigen solver from seeded noise");
    sub->add_flag_callback("--no-continuation",
                           [&overrides] { overrides["sweep.continuation"] = "false"; },
                           "start every coupling from the initial shape");
    sub->add_option("--input", inputs, "run or sweep directory (repeatable)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    KeyValues kv;
    if (!config_path.empty()) kv = read_config_file(config_path);
    for (const auto& [k, v] : overrides) kv[k] = v;
    if (!inputs.empty()) {
      std::string joined;
      for (const auto& s : inputs) joined += (joined.empty() ? "" : ",") + s;
      kv["plot.inputs"] = joined;
    }
    const RunConfig cfg = resolve(command, kv);
    execute(cfg, std::vector<std::string>(argv, argv + argc));
    std::cout << cfg.out.string() << '\n';
    return kOk;
  } catch (const std::exception& e) {
    const int code = exit_code(e);
    std::cerr << (code == kUsage ? "usage error: " : code == kIo ? "i/o error: " : "solver failure: ")
              << e.what() << '\n';
    return code;
  }
}

}  // namespace clab::cli
