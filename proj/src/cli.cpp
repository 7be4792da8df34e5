#include "rbb/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <complex>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "rbb/acceptance.hpp"
#include "rbb/exact_chain.hpp"
#include "rbb/md1.hpp"
#include "rbb/processes.hpp"
#include "rbb/random.hpp"
#include "rbb/stats.hpp"

namespace rbb {

namespace {

using nlohmann::json;

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

struct OutputSink {
  std::string path;    // empty = stdout
  std::string format;  // "csv" or "json"

  void write(const std::string& text) const {
    if (path.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot open output file: " + path);
    f << text;
  }
};

std::string csv_meta(const std::string& command, const json& params) {
  std::ostringstream os;
  os << "# " << kVersion << "\n# command=" << command << "\n";
  for (const auto& [k, v] : params.items())
    os << "# " << k << "=" << v.dump() << "\n";
  return os.str();
}

json json_meta(const std::string& command, const json& params) {
  return json{{"version", kVersion}, {"command", command}, {"config", params}};
}

// Fill an option from the JSON config file when it was not given on the
// command line; flags take precedence.
template <class T>
void config_fill(const CLI::App& app, const json& cfg, const std::string& flag,
                 const std::string& key, T& var) {
  if (app.count(flag) == 0 && cfg.contains(key)) var = cfg.at(key).get<T>();
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config file: " + path);
  json cfg;
  f >> cfg;
  return cfg;
}

std::string state_key(const BinConfiguration& config) {
  std::ostringstream os;
  for (std::size_t j = 0; j < config.bins(); ++j) {
    if (j) os << ",";
    os << config.occupancies[j];
  }
  return os.str();
}

Initializer parse_initializer(const std::string& spec) {
  Initializer init;
  if (spec == "equal") {
    init.kind = InitKind::EqualLoad;
  } else if (spec.rfind("iid:", 0) == 0) {
    init.kind = InitKind::IidRepair;
    init.iid_mean = std::stod(spec.substr(4));
  } else if (spec.rfind("explicit:", 0) == 0) {
    init.kind = InitKind::Explicit;
    std::stringstream ss(spec.substr(9));
    std::string tok;
    while (std::getline(ss, tok, ','))
      init.explicit_occ.push_back(std::stoll(tok));
  } else {
    throw std::invalid_argument(
        "--init must be equal, iid:<mean> or explicit:<v1,v2,...>");
  }
  return init;
}

}  // namespace

Pmf parse_pmf_spec(const std::string& spec) {
  if (spec.rfind("delta:", 0) == 0) {
    const std::int64_t k = std::stoll(spec.substr(6));
    if (k < 0 || k > 1000000)
      throw std::invalid_argument("delta: point must be in [0, 1e6]");
    return Pmf::delta(static_cast<std::size_t>(k));
  }
  if (spec.rfind("poisson:", 0) == 0)
    return poisson_pmf(std::stod(spec.substr(8)), 1e-15);
  if (spec.rfind("mix:", 0) == 0) {
    std::vector<double> w;
    std::stringstream ss(spec.substr(4));
    std::string tok;
    while (std::getline(ss, tok, ',')) w.push_back(std::stod(tok));
    double s = 0.0;
    for (double x : w) s += x;
    if (w.empty() || std::abs(s - 1.0) > 1e-9)
      throw std::invalid_argument("mix: weights must sum to 1");
    return Pmf(std::move(w));
  }
  throw std::invalid_argument(
      "--initial must be delta:<k>, mix:<p0,p1,...> or poisson:<mean>");
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Repeated balls-into-bins simulation and verification toolkit"};
  app.require_subcommand(1);

  std::string config_path, output_path, format = "csv";
  std::uint64_t seed = 1;
  int threads = 1;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file (flags override)");
    sub->add_option("--seed", seed, "master RNG seed");
    sub->add_option("--threads", threads, "worker threads (does not affect results)");
    sub->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--output", output_path, "output file (default stdout)");
  };

  // simulate-rbb
  auto* sim = app.add_subcommand("simulate-rbb", "RBB ensemble trajectory summaries");
  std::int64_t bins = 3, balls = 3, steps = 100, replicas = 1, stride = 1;
  std::string init_spec = "equal";
  sim->add_option("--bins,-L", bins);
  sim->add_option("--balls,-N", balls);
  sim->add_option("--steps,-T", steps);
  sim->add_option("--replicas,-R", replicas);
  sim->add_option("--stride", stride, "record every k-th step");
  sim->add_option("--init", init_spec, "equal | iid:<mean> | explicit:<v1,...>");
  add_common(sim);

  // exact-stationary
  auto* stat = app.add_subcommand("exact-stationary", "exact RBB stationary measure");
  double tol = 1e-12;
  stat->add_option("--bins,-L", bins);
  stat->add_option("--balls,-N", balls);
  stat->add_option("--tol", tol);
  add_common(stat);

  // md1-pmf
  auto* mpmf = app.add_subcommand("md1-pmf", "stationary M/D/1 pmf");
  double rho = 0.5;
  std::int64_t nmax = 1000;
  mpmf->add_option("--rho", rho);
  mpmf->add_option("--nmax", nmax);
  mpmf->add_option("--tol", tol);
  add_common(mpmf);

  // md1-charfn
  auto* mcf = app.add_subcommand("md1-charfn", "closed-form M/D/1 characteristic function");
  double xmax = 3.0;
  std::int64_t xcount = 30;
  mcf->add_option("--rho", rho);
  mcf->add_option("--xmax", xmax);
  mcf->add_option("--xcount", xcount);
  add_common(mcf);

  // nonlinear-evolve
  auto* nle = app.add_subcommand("nonlinear-evolve", "exact nonlinear law recursion");
  std::string initial_spec = "delta:0";
  nle->add_option("--initial", initial_spec, "delta:<k> | mix:<p0,...> | poisson:<mean>");
  nle->add_option("--steps,-T", steps);
  add_common(nle);

  // chaos-sweep
  auto* chaos = app.add_subcommand("chaos-sweep", "chaos gap across system sizes");
  std::vector<std::int64_t> L_list = {10, 100, 1000};
  double load = 0.5, delta = 0.1;
  chaos->add_option("--bins,-L", L_list, "system sizes (repeatable)");
  chaos->add_option("--load,-r", load);
  chaos->add_option("--steps,-T", steps);
  chaos->add_option("--replicas,-R", replicas);
  chaos->add_option("--delta", delta);
  add_common(chaos);

  // converge
  auto* conv = app.add_subcommand("converge", "TV distance to pi_{rho_r} per step");
  conv->add_option("--load,-r", load);
  conv->add_option("--initial", initial_spec);
  conv->add_option("--steps,-T", steps);
  add_common(conv);

  // drift-check
  auto* drift = app.add_subcommand("drift-check", "exponential moment vs drift bound");
  std::int64_t zeta0 = 0;
  drift->add_option("--rho", rho);
  drift->add_option("--zeta0", zeta0);
  drift->add_option("--steps,-T", steps);
  add_common(drift);

  // regime-demo
  auto* regime = app.add_subcommand("regime-demo", "transient / recurrent behavior demo");
  regime->add_option("--rho", rho);
  regime->add_option("--steps,-T", steps);
  regime->add_option("--replicas,-R", replicas);
  regime->add_option("--zeta0", zeta0);
  add_common(regime);

  // verify-all
  auto* verify = app.add_subcommand("verify-all", "run every acceptance suite");
  add_common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      app.exit(e);
      return 0;
    }
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    const json cfg = load_config(config_path);
    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();

    // Config-file values for options not set on the command line.
    config_fill(*sub, cfg, "--seed", "seed", seed);
    config_fill(*sub, cfg, "--threads", "threads", threads);
    config_fill(*sub, cfg, "--format", "format", format);
    config_fill(*sub, cfg, "--output", "output", output_path);
    if (sub->get_option_no_throw("--bins")) {
      if (command == "chaos-sweep")
        config_fill(*sub, cfg, "--bins", "bins", L_list);
      else
        config_fill(*sub, cfg, "--bins", "bins", bins);
    }
    if (sub->get_option_no_throw("--balls"))
      config_fill(*sub, cfg, "--balls", "balls", balls);
    if (sub->get_option_no_throw("--steps"))
      config_fill(*sub, cfg, "--steps", "steps", steps);
    if (sub->get_option_no_throw("--replicas"))
      config_fill(*sub, cfg, "--replicas", "replicas", replicas);
    if (sub->get_option_no_throw("--rho"))
      config_fill(*sub, cfg, "--rho", "rho", rho);
    if (sub->get_option_no_throw("--load"))
      config_fill(*sub, cfg, "--load", "load", load);
    if (sub->get_option_no_throw("--nmax"))
      config_fill(*sub, cfg, "--nmax", "nmax", nmax);
    if (sub->get_option_no_throw("--tol"))
      config_fill(*sub, cfg, "--tol", "tol", tol);
    if (sub->get_option_no_throw("--delta"))
      config_fill(*sub, cfg, "--delta", "delta", delta);
    if (sub->get_option_no_throw("--initial"))
      config_fill(*sub, cfg, "--initial", "initial", initial_spec);
    if (sub->get_option_no_throw("--init"))
      config_fill(*sub, cfg, "--init", "init", init_spec);
    if (sub->get_option_no_throw("--zeta0"))
      config_fill(*sub, cfg, "--zeta0", "zeta0", zeta0);

    const OutputSink sink{output_path, format};

    if (command == "simulate-rbb") {
      const json params = {{"bins", bins},     {"balls", balls},
                           {"steps", steps},   {"replicas", replicas},
                           {"stride", stride}, {"init", init_spec},
                           {"seed", seed},     {"threads", threads}};
      const Initializer init = parse_initializer(init_spec);
      const auto series = run_ensemble_rbb(bins, balls, init, steps, replicas,
                                           RandomStream(seed), threads, stride);
      if (format == "csv") {
        std::ostringstream os;
        os << csv_meta(command, params) << "t,metric,value,stderr\n";
        for (const auto& es : series) {
          os << es.t << ",occupied_fraction," << num(es.occupied_fraction)
             << ",0\n";
          os << es.t << ",mean_load," << num(es.mean_load) << ",0\n";
        }
        sink.write(os.str());
      } else {
        json rows = json::array();
        for (const auto& es : series)
          rows.push_back({{"t", es.t},
                          {"occupied_fraction", es.occupied_fraction},
                          {"mean_load", es.mean_load},
                          {"marginal_counts", es.marginal_counts},
                          {"pair_counts", es.pair_counts}});
        sink.write(json{{"meta", json_meta(command, params)}, {"data", rows}}
                       .dump(2) +
                   "\n");
      }
      return 0;
    }

    if (command == "exact-stationary") {
      const json params = {{"bins", bins}, {"balls", balls}, {"tol", tol}};
      const ExactChain chain(balls, bins);
      const auto pi = stationary_rbb(chain, tol);
      const double residual = chain.stationarity_residual(pi);
      if (format == "csv") {
        std::ostringstream os;
        os << csv_meta(command, params) << "# residual=" << num(residual)
           << "\nstate,probability\n";
        for (std::size_t i = 0; i < chain.size(); ++i)
          os << "\"" << state_key(chain.states()[i]) << "\"," << num(pi[i])
             << "\n";
        sink.write(os.str());
      } else {
        json data = json::object();
        for (std::size_t i = 0; i < chain.size(); ++i)
          data[state_key(chain.states()[i])] = pi[i];
        sink.write(json{{"meta", json_meta(command, params)},
                        {"residual", residual},
                        {"stationary", data}}
                       .dump(2) +
                   "\n");
      }
      return 0;
    }

    if (command == "md1-pmf") {
      const json params = {{"rho", rho}, {"nmax", nmax}, {"tol", tol}};
      const Pmf pi = md1_stationary_pmf(rho, static_cast<std::size_t>(nmax), tol);
      if (format == "csv") {
        std::ostringstream os;
        os << csv_meta(command, params)
           << "# tail_bound=" << num(pi.tail_bound) << "\nk,probability\n";
        for (std::int64_t k = 0; k <= nmax; ++k)
          os << k << "," << num(pi[static_cast<std::size_t>(k)]) << "\n";
        sink.write(os.str());
      } else {
        std::vector<double> w(static_cast<std::size_t>(nmax) + 1, 0.0);
        for (std::size_t k = 0; k < w.size(); ++k) w[k] = pi[k];
        sink.write(json{{"meta", json_meta(command, params)},
                        {"tail_bound", pi.tail_bound},
                        {"pmf", w}}
                       .dump(2) +
                   "\n");
      }
      return 0;
    }

    if (command == "md1-charfn") {
      const json params = {{"rho", rho}, {"xmax", xmax}, {"xcount", xcount}};
      std::vector<std::array<double, 3>> rows;
      for (std::int64_t i = 1; i <= xcount; ++i) {
        const double x = xmax * static_cast<double>(i) /
                         static_cast<double>(xcount);
        const std::complex<double> v = md1_char_fn(rho, x);
        rows.push_back({x, v.real(), v.imag()});
      }
      if (format == "csv") {
        std::ostringstream os;
        os << csv_meta(command, params) << "x,re,im\n";
        for (const auto& r : rows)
          os << num(r[0]) << "," << num(r[1]) << "," << num(r[2]) << "\n";
        sink.write(os.str());
      } else {
        json data = json::array();
        for (const auto& r : rows)
          data.push_back({{"x", r[0]}, {"re", r[1]}, {"im", r[2]}});
        sink.write(json{{"meta", json_meta(command, params)}, {"data", data}}
                       .dump(2) +
                   "\n");
      }
      return 0;
    }

    if (command == "nonlinear-evolve") {
      const json params = {{"initial", initial_spec}, {"steps", steps}};
      const Pmf initial = parse_pmf_spec(initial_spec);
      const auto laws = nonlinear_pmf_evolve(initial, steps);
      if (format == "csv") {
        std::ostringstream os;
        os << csv_meta(command, params) << "t,metric,value,stderr\n";
        for (std::size_t t = 0; t < laws.size(); ++t) {
          os << t << ",mean," << num(laws[t].mean()) << ",0\n";
          os << t << ",rho," << num(1.0 - laws[t][0]) << ",0\n";
        }
        sink.write(os.str());
      } else {
        json series = json::array();
        for (std::size_t t = 0; t < laws.size(); ++t)
          series.push_back({{"t", t},
                            {"mean", laws[t].mean()},
                            {"rho", 1.0 - laws[t][0]}});
        sink.write(json{{"meta", json_meta(command, params)},
                        {"series", series},
                        {"final_law", laws.back().weights},
                        {"final_tail_bound", laws.back().tail_bound}}
                       .dump(2) +
                   "\n");
      }
      return 0;
    }

    if (command == "chaos-sweep") {
      const json params = {{"bins", L_list},      {"load", load},
                           {"steps", steps},      {"replicas", replicas},
                           {"delta", delta},      {"seed", seed},
                           {"threads", threads}};
      const std::vector<std::int64_t> Rs(L_list.size(), replicas);
      const ChaosReport report = chaos_sweep(L_list, load, steps, Rs,
                                             RandomStream(seed), threads, delta);
      if (format == "csv") {
        std::ostringstream os;
        os << csv_meta(command, params)
           << "L,gap,stderr,bound,rho_hat,pair_hat\n";
        for (std::size_t i = 0; i < report.L_values.size(); ++i)
          os << report.L_values[i] << "," << num(report.gap[i]) << ","
             << num(report.stderr_[i]) << "," << num(report.bound[i]) << ","
             << num(report.rho_hat[i]) << "," << num(report.pair_hat[i])
             << "\n";
        sink.write(os.str());
      } else {
        json data = json::array();
        for (std::size_t i = 0; i < report.L_values.size(); ++i)
          data.push_back({{"L", report.L_values[i]},
                          {"gap", report.gap[i]},
                          {"stderr", report.stderr_[i]},
                          {"bound", report.bound[i]},
                          {"rho_hat", report.rho_hat[i]},
                          {"pair_hat", report.pair_hat[i]},
                          {"marginal_hist", report.marginal_hist[i]}});
        sink.write(json{{"meta", json_meta(command, params)}, {"data", data}}
                       .dump(2) +
                   "\n");
      }
      return 0;
    }

    if (command == "converge") {
      const json params = {{"load", load}, {"initial", initial_spec},
                           {"steps", steps}};
      const auto curve =
          convergence_to_equilibrium(load, parse_pmf_spec(initial_spec), steps);
      if (format == "csv") {
        std::ostringstream os;
        os << csv_meta(command, params) << "t,metric,value,stderr\n";
        for (const auto& [t, tv] : curve)
          os << t << ",tv_distance," << num(tv) << ",0\n";
        sink.write(os.str());
      } else {
        json data = json::array();
        for (const auto& [t, tv] : curve)
          data.push_back({{"t", t}, {"tv_distance", tv}});
        sink.write(json{{"meta", json_meta(command, params)}, {"data", data}}
                       .dump(2) +
                   "\n");
      }
      return 0;
    }

    if (command == "drift-check") {
      const json params = {{"rho", rho}, {"zeta0", zeta0}, {"steps", steps}};
      const auto rows = exponential_moment_check(rho, zeta0, steps);
      if (format == "csv") {
        std::ostringstream os;
        os << csv_meta(command, params) << "t,metric,value,stderr\n";
        for (const auto& row : rows) {
          os << row.t << ",moment," << num(row.moment) << ",0\n";
          os << row.t << ",bound," << num(row.bound) << ",0\n";
          os << row.t << ",envelope," << num(row.envelope) << ",0\n";
        }
        sink.write(os.str());
      } else {
        json data = json::array();
        for (const auto& row : rows)
          data.push_back({{"t", row.t},
                          {"moment", row.moment},
                          {"bound", row.bound},
                          {"envelope", row.envelope}});
        sink.write(json{{"meta", json_meta(command, params)}, {"data", data}}
                       .dump(2) +
                   "\n");
      }
      return 0;
    }

    if (command == "regime-demo") {
      const json params = {{"rho", rho},   {"steps", steps},
                           {"replicas", replicas}, {"zeta0", zeta0},
                           {"seed", seed}, {"threads", threads}};
      const RegimeSummary s =
          regime_demo(rho, steps, replicas, RandomStream(seed), zeta0, threads);
      if (format == "csv") {
        std::ostringstream os;
        os << csv_meta(command, params) << "key,value\n"
           << "mean_final," << num(s.mean_final) << "\n"
           << "stderr_final," << num(s.stderr_final) << "\n"
           << "frac_zero," << num(s.frac_zero) << "\n"
           << "stderr_frac_zero," << num(s.stderr_frac_zero) << "\n"
           << "mean_max_excursion," << num(s.mean_max_excursion) << "\n"
           << "verdict," << s.verdict << "\n";
        sink.write(os.str());
      } else {
        sink.write(json{{"meta", json_meta(command, params)},
                        {"mean_final", s.mean_final},
                        {"stderr_final", s.stderr_final},
                        {"frac_zero", s.frac_zero},
                        {"stderr_frac_zero", s.stderr_frac_zero},
                        {"mean_max_excursion", s.mean_max_excursion},
                        {"return_time_hist", s.return_time_hist},
                        {"verdict", s.verdict}}
                       .dump(2) +
                   "\n");
      }
      return 0;
    }

    if (command == "verify-all") {
      const auto results = run_acceptance(seed, threads);
      bool all = true;
      std::ostringstream os;
      for (const auto& res : results) {
        all = all && res.pass;
        os << (res.pass ? "PASS" : "FAIL") << "  [" << std::setw(2) << res.id
           << "] " << res.name << "  (" << std::fixed << std::setprecision(2)
           << res.seconds << "s)  " << res.detail << "\n";
        os.unsetf(std::ios::fixed);
      }
      os << (all ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED") << "\n";
      std::cout << os.str();
      if (!output_path.empty()) {
        json data = json::array();
        for (const auto& res : results)
          data.push_back({{"id", res.id},
                          {"name", res.name},
                          {"pass", res.pass},
                          {"detail", res.detail},
                          {"seconds", res.seconds}});
        OutputSink{output_path, "json"}.write(
            json{{"meta", json_meta(command, {{"seed", seed}})},
                 {"results", data},
                 {"all_pass", all}}
                .dump(2) +
            "\n");
      }
      return all ? 0 : 1;
    }

    std::cerr << "unknown command\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid arguments: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace rbb
