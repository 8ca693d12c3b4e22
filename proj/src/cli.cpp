#include "mather/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "mather/configurations.hpp"
#include "mather/critical.hpp"
#include "mather/io.hpp"
#include "mather/parallel.hpp"
#include "mather/percival.hpp"

namespace mather {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(',', start);
    out.push_back(parse_real(text.substr(start, pos == std::string::npos ? pos : pos - start)));
    if (pos == std::string::npos) return out;
    start = pos + 1;
  }
}

template <class T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::parse_error, "config key '" + key + "' has the wrong type");
  }
}

double get_real(const json& j, const std::string& key) {
  if (!j.is_number()) throw Error(Errc::parse_error, "config key '" + key + "' must be a number");
  return j.get<double>();
}

std::int64_t get_int(const json& j, const std::string& key) {
  if (!j.is_number_integer()) {
    throw Error(Errc::parse_error, "config key '" + key + "' must be an integer");
  }
  return j.get<std::int64_t>();
}

std::vector<double> get_reals(const json& j, const std::string& key) {
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array()) throw Error(Errc::parse_error, "config key '" + key + "' must be a list");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(get_real(x, key));
  return out;
}

Model build_model(const RunConfig& cfg, std::size_t dim) {
  if (cfg.builtin != "standard_fk") {
    throw Error(Errc::invalid_argument, "unknown builtin model '" + cfg.builtin + "'");
  }
  if (cfg.K.size() != 1) throw Error(Errc::invalid_argument, "this command takes a single K");
  return standard_fk(cfg.K[0], dim);
}

struct Context {
  RunConfig cfg;
  std::string command;
  fs::path out;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void write(const std::string& name, const std::string& text) const {
    write_text_file(out / name, text);
  }

  void metadata(int code) const {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write("metadata.json", dump_json({{"command", command},
                                      {"timestamp", stamp},
                                      {"elapsed_seconds", elapsed},
                                      {"threads", worker_count()},
                                      {"exit_code", code}}));
  }
};

json run_json(const RunConfig& cfg, const ShiftSet& sh) {
  return {{"model", {{"builtin", cfg.builtin}, {"K", cfg.K.size() == 1 ? json(cfg.K[0]) : json(cfg.K)}}},
          {"omega", sh.omega},
          {"N", sh.grid_size},
          {"grid_omega", sh.grid_omega()},
          {"method", to_string(cfg.solve.method)},
          {"tol", cfg.solve.residual_tol},
          {"seed", cfg.solve.seed}};
}

int cmd_solve(Context& cx) {
  const auto omega = cx.cfg.omega_or_default();
  const Model model = build_model(cx.cfg, omega.size());
  validate_model(model);
  const ShiftSet sh = make_shiftset(omega, cx.cfg.N);
  std::optional<HullFunction> h0;
  if (!cx.cfg.input.empty()) h0 = read_hull_file(cx.cfg.input);
  const MinimizerResult r = minimize(model, sh, h0, cx.cfg.solve);

  json result = run_json(cx.cfg, sh);
  result["energy"] = r.energy;
  result["residual_sup"] = r.residual_sup;
  result["converged"] = r.converged;
  result["steps"] = r.steps_taken;
  result["largest_gap"] = detect_gaps(r.hull, 0.0).largest_gap;
  result["history_csv"] = "history.csv";
  result["hull_csv"] = "hull.csv";
  cx.write("hull.csv", hull_to_csv(r.hull));
  cx.write("hull.json", dump_json(hull_to_json(r.hull)));
  cx.write("history.csv", history_to_csv(r.history));
  cx.write("residual.csv", residual_to_csv(el_residual(model, sh, r.hull)));
  cx.write("result.json", dump_json(result));
  std::cout << "energy " << format_real(r.energy) << " residual_sup " << format_real(r.residual_sup)
            << (r.converged ? " converged\n" : " not converged\n");
  return r.converged ? kExitOk : kExitNotConverged;
}

int cmd_flow(Context& cx) {
  const auto omega = cx.cfg.omega_or_default();
  const Model model = build_model(cx.cfg, omega.size());
  validate_model(model);
  const ShiftSet sh = make_shiftset(omega, cx.cfg.N);
  const HullFunction h0 = cx.cfg.input.empty()
                              ? HullFunction::identity(static_cast<std::size_t>(cx.cfg.N))
                              : read_hull_file(cx.cfg.input);
  const MinimizerResult r = integrate_flow(model, sh, h0, cx.cfg.T, cx.cfg.solve);
  const bool finished = r.converged || r.time >= cx.cfg.T;

  json result = run_json(cx.cfg, sh);
  result["T"] = cx.cfg.T;
  result["time"] = r.time;
  result["energy"] = r.energy;
  result["initial_energy"] = r.history.front().energy;
  result["residual_sup"] = r.residual_sup;
  result["converged"] = r.converged;
  result["steps"] = r.steps_taken;
  result["reprojection_total"] = r.reprojection_total;
  result["largest_gap"] = detect_gaps(r.hull, 0.0).largest_gap;
  result["history_csv"] = "history.csv";
  result["hull_csv"] = "hull.csv";
  cx.write("hull.csv", hull_to_csv(r.hull));
  cx.write("history.csv", history_to_csv(r.history));
  cx.write("result.json", dump_json(result));
  std::cout << "t " << format_real(r.time) << " energy " << format_real(r.energy)
            << " residual_sup " << format_real(r.residual_sup) << "\n";
  return finished ? kExitOk : kExitNotConverged;
}

int cmd_critical(Context& cx) {
  const auto omega = cx.cfg.omega_or_default();
  const Model model = build_model(cx.cfg, omega.size());
  validate_model(model);
  const ShiftSet sh = make_shiftset(omega, cx.cfg.N);
  if (cx.cfg.h_plus.empty() == !cx.cfg.shift_by_one) {
    throw Error(Errc::invalid_argument, "critical needs exactly one of --h-plus or --shift-by-one");
  }
  HullFunction lo;
  if (cx.cfg.h_minus.empty()) {
    // the sandwich h- <= h0 is only as sharp as h- is critical
    SolveOptions tight = cx.cfg.solve;
    tight.residual_tol = std::min(tight.residual_tol, 1e-10);
    const MinimizerResult r = minimize(model, sh, std::nullopt, tight);
    if (!r.converged) throw Error(Errc::step_rejected, "could not converge the lower minimizer");
    lo = r.hull;
  } else {
    lo = read_hull_file(cx.cfg.h_minus);
  }
  const HullFunction hi = cx.cfg.shift_by_one ? lo.plus_integer(1) : read_hull_file(cx.cfg.h_plus);

  MountainPassOptions mp;
  mp.s_grid = cx.cfg.s_grid;
  mp.T_flow = cx.cfg.T_flow;
  mp.refine_rounds = cx.cfg.refine_rounds;
  mp.residual_tol = cx.cfg.solve.residual_tol;
  mp.flow = cx.cfg.solve;
  const CriticalPointResult c = mountain_pass(model, sh, lo, hi, mp);

  json report = run_json(cx.cfg, sh);
  report["barrier"] = c.barrier;
  report["s_star"] = c.s_star;
  report["residual_sup"] = c.residual_sup;
  report["energy"] = c.energy;
  report["energy_minus"] = energy(model, sh, lo);
  report["strict_fraction"] = c.strict_fraction;
  report["case"] = to_string(c.pass_case);
  report["pattern"] = to_string(c.pattern);
  report["converged"] = c.converged;
  report["profile_csv"] = "profile.csv";
  cx.write("barrier.json", dump_json(report));
  cx.write("profile.csv", profile_to_csv(c.profile));
  cx.write("critical_hull.csv", hull_to_csv(c.hull));
  std::cout << "barrier " << format_real(c.barrier) << " residual_sup "
            << format_real(c.residual_sup) << " case " << to_string(c.pass_case) << "\n";
  if (c.pass_case == PassCase::degenerate) return kExitDegenerate;
  return c.converged ? kExitOk : kExitNotConverged;
}

int cmd_verify(Context& cx) {
  if (cx.cfg.input.empty()) throw Error(Errc::invalid_argument, "verify needs --input <csv>");
  if (cx.cfg.omega_birkhoff && !cx.cfg.omega) {
    throw Error(Errc::invalid_argument, "--omega-birkhoff requires --omega");
  }
  const ConfigurationWindow u = configuration_from_csv(read_text_file(cx.cfg.input));
  if (cx.cfg.omega && cx.cfg.omega->size() != u.dim()) {
    throw Error(Errc::invalid_argument, "omega dimension differs from the configuration");
  }
  const Model model = build_model(cx.cfg, u.dim());
  validate_model(model);

  std::vector<CertificateReport> reports;
  reports.push_back(birkhoff_check(u, std::min(cx.cfg.k_range, 2 * u.radius()), cx.cfg.l_range));
  if (cx.cfg.omega_birkhoff) {
    reports.push_back(omega_birkhoff_check(u, *cx.cfg.omega,
                                           std::min(cx.cfg.k_range, 2 * u.radius()),
                                           cx.cfg.l_range, 0.0));
  }
  reports.push_back(discrete_el_check(model, u, cx.cfg.el_tol));
  reports.push_back(ground_state_test(model, u, cx.cfg.box, cx.cfg.trials, cx.cfg.amplitude,
                                      cx.cfg.solve.seed));

  bool passed = true;
  json list = json::array();
  for (const auto& r : reports) {
    passed = passed && r.passed;
    list.push_back(certificate_to_json(r));
    std::cout << to_string(r.kind) << (r.passed ? " passed" : " FAILED") << " margin "
              << format_real(r.margin) << "\n";
  }
  cx.write("certificates.json",
           dump_json({{"passed", passed}, {"radius", u.radius()}, {"certificates", list}}));
  return passed ? kExitOk : kExitCertificate;
}

int cmd_sweep(Context& cx) {
  if (cx.cfg.builtin != "standard_fk") {
    throw Error(Errc::invalid_argument, "unknown builtin model '" + cx.cfg.builtin + "'");
  }
  if (cx.cfg.K.empty()) throw Error(Errc::invalid_argument, "empty K grid");
  const auto omega = cx.cfg.omega_or_default();
  const ShiftSet sh = make_shiftset(omega, cx.cfg.N);
  const std::size_t dim = omega.size();
  const auto records = sweep([dim](double K) { return standard_fk(K, dim); }, cx.cfg.K, sh,
                             cx.cfg.solve);
  std::string csv = "K,energy,residual_sup,largest_gap,converged,steps\n";
  json list = json::array();
  bool all = true;
  for (const auto& r : records) {
    all = all && r.converged;
    csv += format_real(r.K) + "," + format_real(r.energy) + "," + format_real(r.residual_sup) + "," +
           format_real(r.largest_gap) + "," + (r.converged ? "1" : "0") + "," +
           std::to_string(r.steps) + "\n";
    list.push_back({{"K", r.K}, {"energy", r.energy}, {"residual_sup", r.residual_sup},
                    {"largest_gap", r.largest_gap}, {"converged", r.converged}, {"steps", r.steps}});
    std::cout << "K " << format_real(r.K) << " largest_gap " << format_real(r.largest_gap)
              << (r.converged ? "\n" : " not converged\n");
  }
  json result = run_json(cx.cfg, sh);
  result["records"] = list;
  result["converged"] = all;
  result["sweep_csv"] = "sweep.csv";
  cx.write("sweep.csv", csv);
  cx.write("result.json", dump_json(result));
  return all ? kExitOk : kExitNotConverged;
}

// Raw flag values; only the ones given on the command line are applied.
struct Flags {
  std::string config, builtin, K, omega, method, out, input, h_minus, h_plus;
  std::int64_t N = 0, k_range = 0, l_range = 0, box = 0;
  double tol = 0, T = 0, T_flow = 0, amplitude = 0, el_tol = 0, dt_init = 0;
  std::uint64_t seed = 0;
  int max_steps = 0, s_grid = 0, refine_rounds = 0, trials = 0;
  bool shift_by_one = false, omega_birkhoff = false;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file (flags override it)");
  sub->add_option("--builtin", f.builtin, "builtin model (standard_fk)");
  sub->add_option("--K", f.K, "coupling; comma-separated grid for sweep");
  sub->add_option("--omega", f.omega, "frequency vector, comma-separated");
  sub->add_option("--N", f.N, "grid size");
  sub->add_option("--method", f.method, "flow | projected_descent | lattice_descent");
  sub->add_option("--tol", f.tol, "residual tolerance");
  sub->add_option("--seed", f.seed, "random seed");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--input", f.input, "input hull (solve, flow) or configuration CSV (verify)");
  sub->add_option("--max-steps", f.max_steps, "step limit");
  sub->add_option("--dt-init", f.dt_init, "initial flow step");
  sub->add_option("--T", f.T, "flow horizon");
  sub->add_option("--h-minus", f.h_minus, "lower minimizer hull file");
  sub->add_option("--h-plus", f.h_plus, "upper minimizer hull file");
  sub->add_flag("--shift-by-one", f.shift_by_one, "use h_minus + 1 as the upper minimizer");
  sub->add_option("--s-grid", f.s_grid, "interpolation grid size");
  sub->add_option("--T-flow", f.T_flow, "flow time for limiting energies");
  sub->add_option("--refine-rounds", f.refine_rounds, "refinement rounds");
  sub->add_flag("--omega-birkhoff", f.omega_birkhoff, "also run the omega-Birkhoff check");
  sub->add_option("--k-range", f.k_range, "Birkhoff scan range for k");
  sub->add_option("--l-range", f.l_range, "Birkhoff scan range for l");
  sub->add_option("--box", f.box, "ground-state test box");
  sub->add_option("--trials", f.trials, "ground-state random trials");
  sub->add_option("--amplitude", f.amplitude, "ground-state perturbation amplitude");
  sub->add_option("--el-tol", f.el_tol, "discrete Euler-Lagrange tolerance");
}

RunConfig merge(const CLI::App* sub, const Flags& f) {
  RunConfig cfg;
  if (sub->count("--config") > 0) apply_config_json(cfg, read_json_file(f.config));
  auto given = [&](const char* name) { return sub->count(name) > 0; };
  if (given("--builtin")) cfg.builtin = f.builtin;
  if (given("--K")) cfg.K = parse_list(f.K);
  if (given("--omega")) cfg.omega = parse_list(f.omega);
  if (given("--N")) cfg.N = f.N;
  if (given("--method")) cfg.solve.method = parse_method(f.method);
  if (given("--tol")) cfg.solve.residual_tol = f.tol;
  if (given("--seed")) cfg.solve.seed = f.seed;
  if (given("--out")) cfg.out = f.out;
  if (given("--input")) cfg.input = f.input;
  if (given("--max-steps")) cfg.solve.max_steps = f.max_steps;
  if (given("--dt-init")) cfg.solve.dt_init = f.dt_init;
  if (given("--T")) cfg.T = f.T;
  if (given("--h-minus")) cfg.h_minus = f.h_minus;
  if (given("--h-plus")) cfg.h_plus = f.h_plus;
  if (given("--shift-by-one")) cfg.shift_by_one = f.shift_by_one;
  if (given("--s-grid")) cfg.s_grid = f.s_grid;
  if (given("--T-flow")) cfg.T_flow = f.T_flow;
  if (given("--refine-rounds")) cfg.refine_rounds = f.refine_rounds;
  if (given("--omega-birkhoff")) cfg.omega_birkhoff = f.omega_birkhoff;
  if (given("--k-range")) cfg.k_range = f.k_range;
  if (given("--l-range")) cfg.l_range = f.l_range;
  if (given("--box")) cfg.box = f.box;
  if (given("--trials")) cfg.trials = f.trials;
  if (given("--amplitude")) cfg.amplitude = f.amplitude;
  if (given("--el-tol")) cfg.el_tol = f.el_tol;
  if (!(cfg.solve.residual_tol > 0.0)) throw Error(Errc::invalid_argument, "tol must be > 0");
  if (!(cfg.T > 0.0)) throw Error(Errc::invalid_argument, "T must be > 0");
  return cfg;
}

}  // namespace

int exit_code_for(Errc code) noexcept {
  switch (code) {
    case Errc::twist_violation:
    case Errc::periodicity_violation:
      return kExitModelInvalid;
    case Errc::not_comparable:
      return kExitNotComparable;
    case Errc::step_rejected:
    case Errc::not_monotone:
      return kExitNotConverged;
    case Errc::invalid_argument:
    case Errc::degenerate_shift:
    case Errc::grid_mismatch:
    case Errc::degenerate_pair:
    case Errc::window_too_small:
    case Errc::not_omega_birkhoff:
    case Errc::parse_error:
      return kExitConfig;
  }
  return kExitConfig;
}

void apply_config_json(RunConfig& cfg, const json& j) {
  if (!j.is_object()) throw Error(Errc::parse_error, "config must be a JSON object");
  static const std::set<std::string> known = {
      "builtin", "K", "omega", "N", "method", "tol", "seed", "out", "input", "max_steps",
      "dt_init", "T", "h_minus", "h_plus", "shift_by_one", "s_grid", "T_flow", "refine_rounds",
      "omega_birkhoff", "k_range", "l_range", "box", "trials", "amplitude", "el_tol"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw Error(Errc::parse_error, "unknown config key '" + it.key() + "'");
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "builtin") cfg.builtin = get_as<std::string>(v, k);
    else if (k == "K") cfg.K = get_reals(v, k);
    else if (k == "omega") cfg.omega = get_reals(v, k);
    else if (k == "N") cfg.N = get_int(v, k);
    else if (k == "method") cfg.solve.method = parse_method(get_as<std::string>(v, k));
    else if (k == "tol") cfg.solve.residual_tol = get_real(v, k);
    else if (k == "seed") cfg.solve.seed = static_cast<std::uint64_t>(get_int(v, k));
    else if (k == "out") cfg.out = get_as<std::string>(v, k);
    else if (k == "input") cfg.input = get_as<std::string>(v, k);
    else if (k == "max_steps") cfg.solve.max_steps = static_cast<int>(get_int(v, k));
    else if (k == "dt_init") cfg.solve.dt_init = get_real(v, k);
    else if (k == "T") cfg.T = get_real(v, k);
    else if (k == "h_minus") cfg.h_minus = get_as<std::string>(v, k);
    else if (k == "h_plus") cfg.h_plus = get_as<std::string>(v, k);
    else if (k == "shift_by_one") cfg.shift_by_one = get_as<bool>(v, k);
    else if (k == "s_grid") cfg.s_grid = static_cast<int>(get_int(v, k));
    else if (k == "T_flow") cfg.T_flow = get_real(v, k);
    else if (k == "refine_rounds") cfg.refine_rounds = static_cast<int>(get_int(v, k));
    else if (k == "omega_birkhoff") cfg.omega_birkhoff = get_as<bool>(v, k);
    else if (k == "k_range") cfg.k_range = get_int(v, k);
    else if (k == "l_range") cfg.l_range = get_int(v, k);
    else if (k == "box") cfg.box = get_int(v, k);
    else if (k == "trials") cfg.trials = static_cast<int>(get_int(v, k));
    else if (k == "amplitude") cfg.amplitude = get_real(v, k);
    else if (k == "el_tol") cfg.el_tol = get_real(v, k);
  }
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Hull-function minimizers and critical points of lattice energies"};
  app.require_subcommand(1);
  Flags flags;
  struct Command {
    const char* name;
    const char* help;
    int (*run)(Context&);
  };
  const Command commands[] = {
      {"solve", "minimize the hull energy", cmd_solve},
      {"flow", "integrate the gradient flow for time T", cmd_flow},
      {"critical", "mountain-pass critical point between two ordered minimizers", cmd_critical},
      {"verify", "certify a configuration window", cmd_verify},
      {"sweep", "continuation over a K grid", cmd_sweep},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_flags(sub, flags);
    subs.emplace_back(sub, &c);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  for (const auto& [sub, command] : subs) {
    if (!sub->parsed()) continue;
    Context cx;
    cx.command = command->name;
    try {
      cx.cfg = merge(sub, flags);
      cx.out = cx.cfg.out;
      const int code = command->run(cx);
      cx.metadata(code);
      return code;
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return exit_code_for(e.code());
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitConfig;
    }
  }
  return kExitConfig;
}

}  // namespace mather
