// Command-line front end. Exit codes: 0 success, 1 domain or IO error, 2 usage error.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "delib.hpp"

using namespace delib;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

json metadata(const std::string& command, const json& config, std::optional<std::uint64_t> seed) {
  return {{"version", kVersion}, {"command", command}, {"config", config},
          {"seed", seed ? json(*seed) : json(nullptr)}};
}

void emit(const std::string& command, const json& config, std::optional<std::uint64_t> seed, const json& result,
          const std::string& out = "") {
  json j = metadata(command, config, seed);
  j["result"] = result;
  write_text(out, j.dump(2) + "\n");
}

/// Model flags shared by pk, tournament, pipeline and sample-sim.
struct ModelFlags {
  std::string model_path;
  std::string variant = "averaging";
  int k = 0;
  std::string g = "linear";
  double beta = 1.0;

  void attach(CLI::App* app) {
    app->add_option("--model", model_path, "Model JSON file");
    app->add_option("--variant", variant, "averaging | random_choice")
        ->check(CLI::IsMember({"averaging", "random_choice", "random"}));
    app->add_option("--k", k, "Group size");
    app->add_option("--g", g, "Bias transform: linear | sqrt | pow:E");
    app->add_option("--beta", beta, "Opinion-change weight in [0,1]");
  }

  ModelConfig resolve() const {
    if (!model_path.empty()) {
      std::ifstream in(model_path);
      if (!in) throw IoError("cannot open model file: " + model_path);
      return ModelConfig::from_json(json::parse(in));
    }
    if (k < 1) throw CLI::ValidationError("--k", "either --model or --k >= 1 is required");
    json j = {{"variant", variant}, {"k", k}, {"g", g}, {"beta", beta}};
    return ModelConfig::from_json(j);
  }
};

struct EstimationFlags {
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;

  void attach(CLI::App* app) {
    app->add_option("--trials", trials, "Monte-Carlo trials per pair (0 = exact enumeration)");
    app->add_option("--seed", seed, "Monte-Carlo seed");
  }
  EstimationMode resolve(unsigned threads) const {
    if (trials == 0) return EstimationMode::exact_mode();
    return EstimationMode::monte_carlo(trials, seed, threads);
  }
  std::optional<std::uint64_t> recorded_seed() const {
    if (trials == 0) return std::nullopt;
    return seed;
  }
};

BiasDistribution parse_atoms(const std::string& text) {
  std::vector<Atom> atoms;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--atoms", "expected value:prob pairs");
    try {
      atoms.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
    } catch (const std::logic_error&) {
      throw CLI::ValidationError("--atoms", "cannot parse '" + item + "'");
    }
  }
  return BiasDistribution(atoms);
}

std::string table1_csv(const std::optional<ThetaResult>& t2, const std::optional<CopelandK2Result>& ck2,
                       const std::optional<ThetaResult>& t3, int k_max) {
  std::ostringstream out;
  out.precision(10);
  out << "k,theta_lower,theta_upper,upper_bound,det_lb,rand_lb,source\n";
  for (int k = 2; k <= k_max; ++k) {
    double lo = theta_lower_bound_closed_form(k);
    double hi = theta_upper_bound_closed_form(k);
    std::string source = "closed_form";
    const ThetaResult* cert = k == 2 && t2 ? &*t2 : k == 3 && t3 ? &*t3 : nullptr;
    if (cert) {
      lo = std::max(lo, cert->incumbent_value);
      hi = std::min(hi, cert->value);
      source = cert->certified ? "certified" : "budget_exhausted";
    }
    double upper = hi < 1.0 ? copeland_distortion_from_theta(hi) : std::numeric_limits<double>::infinity();
    if (k == 2 && ck2 && ck2->both_negative) {
      upper = std::min(upper, 1.0 + ck2->beta);
      source += "+copeland_k2";
    }
    const auto lb = lower_bounds_from_theta(lo);
    out << k << ',' << lo << ',' << hi << ',' << upper << ',' << lb.deterministic << ',' << lb.randomized << ','
        << source << '\n';
  }
  return out.str();
}

std::string table2_csv(const std::vector<ZetaResult>& rows) {
  std::ostringstream out;
  out.precision(10);
  out << "k,zeta,distortion_upper,det_lb,rand_lb\n";
  for (const auto& r : rows)
    out << r.k << ',' << r.zeta << ',' << r.distortion_upper << ',' << r.det_lb << ',' << r.rand_lb << '\n';
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Small-group deliberation and Copeland distortion toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  unsigned threads = default_threads();
  app.add_option("--threads", threads, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);

  auto add = [&](const char* name, const char* desc) {
    auto* sub = app.add_subcommand(name, desc);
    sub->add_option("--threads", threads, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
    return sub;
  };

  // validate
  std::string instance_path;
  auto* validate_cmd = add("validate", "Check an instance for metric and mass violations");
  validate_cmd->add_option("--instance", instance_path, "Instance JSON")->required();

  // gen-instance
  std::string family, out_path, atoms_text;
  int gen_k = 3, gen_n = 6;
  double gen_delta = 1e-3;
  std::size_t gen_m = 4, gen_locations = 6, gen_dim = 2;
  std::uint64_t gen_seed = 0;
  auto* gen_cmd = add("gen-instance", "Emit a constructed instance");
  gen_cmd->add_option("--family", family, "lb1 | theta2 | worst-case | example1 | random | line")
      ->required()
      ->check(CLI::IsMember({"lb1", "theta2", "worst-case", "example1", "random", "line"}));
  gen_cmd->add_option("--k", gen_k, "Group size (lb1, example1)");
  gen_cmd->add_option("--n", gen_n, "Voters (example1)");
  gen_cmd->add_option("--delta", gen_delta, "Perturbation (worst-case, example1)");
  gen_cmd->add_option("--m", gen_m, "Candidates (random)");
  gen_cmd->add_option("--locations", gen_locations, "Locations (random)");
  gen_cmd->add_option("--dim", gen_dim, "Dimension (random)");
  gen_cmd->add_option("--seed", gen_seed, "Seed (random)");
  gen_cmd->add_option("--atoms", atoms_text, "Bias atoms value:prob,... (line)");
  gen_cmd->add_option("--out", out_path, "Output file (stdout if omitted)");

  // pk / tournament / pipeline
  ModelFlags model_flags;
  EstimationFlags est_flags;
  std::string w_id, x_id;
  auto* pk_cmd = add("pk", "Probability that a random group picks W over X");
  pk_cmd->add_option("--instance", instance_path, "Instance JSON")->required();
  pk_cmd->add_option("--w", w_id, "First candidate id (default: first candidate)");
  pk_cmd->add_option("--x", x_id, "Second candidate id (default: second candidate)");
  model_flags.attach(pk_cmd);
  est_flags.attach(pk_cmd);
  pk_cmd->add_option("--out", out_path, "Output file");

  auto* tour_cmd = add("tournament", "Pairwise matrix and dominance tournament");
  tour_cmd->add_option("--instance", instance_path, "Instance JSON")->required();
  model_flags.attach(tour_cmd);
  est_flags.attach(tour_cmd);
  tour_cmd->add_option("--out", out_path, "Output file");

  auto* pipe_cmd = add("pipeline", "Copeland winner and its distortion");
  pipe_cmd->add_option("--instance", instance_path, "Instance JSON")->required();
  model_flags.attach(pipe_cmd);
  est_flags.attach(pipe_cmd);
  pipe_cmd->add_option("--out", out_path, "Output file");

  // solvers
  int solve_k = 2;
  double tol = -1.0;
  std::uint64_t budget = 10'000'000;
  auto* savg_cmd = add("solve-avg", "Certified theta_k for the averaging model");
  savg_cmd->add_option("--k", solve_k, "Group size")->required()->check(CLI::IsMember({2, 3}));
  savg_cmd->add_option("--tol", tol, "Optimality gap (default 1e-4)");
  savg_cmd->add_option("--budget", budget, "Box budget per case");
  savg_cmd->add_option("--out", out_path, "Output file");

  auto* bavg_cmd = add("bounds-avg", "Closed-form bounds on theta_k");
  bavg_cmd->add_option("--k", solve_k, "Group size")->required()->check(CLI::PositiveNumber);

  double ck2_beta = 2.0 + std::sqrt(2.0) + 1e-3;
  auto* ck2_cmd = add("solve-copeland-k2", "Certify the k = 2 Copeland distortion programs at 1 + beta");
  ck2_cmd->add_option("--beta", ck2_beta, "Distortion target minus one")->check(CLI::PositiveNumber);
  ck2_cmd->add_option("--tol", tol, "Optimality gap (default 1e-5)");
  ck2_cmd->add_option("--budget", budget, "Box budget per case");
  ck2_cmd->add_option("--out", out_path, "Output file");

  std::string g_name = "linear";
  double rc_beta = 1.0, alpha_step = 1e-3, omega_tol = 1e-9;
  int k_min = 2, k_max = 30;
  auto* srand_cmd = add("solve-random", "zeta_k and distortion bounds for the random choice model");
  srand_cmd->add_option("--k", solve_k, "Group size")->required()->check(CLI::PositiveNumber);
  auto attach_random = [&](CLI::App* c) {
    c->add_option("--g", g_name, "Bias transform: linear | sqrt | pow:E");
    c->add_option("--beta", rc_beta, "Opinion-change weight in [0,1]");
    c->add_option("--alpha-step", alpha_step, "Alpha grid step");
    c->add_option("--omega-tol", omega_tol, "Omega bisection tolerance");
  };
  attach_random(srand_cmd);
  srand_cmd->add_option("--out", out_path, "Output file");

  auto* sweep_cmd = add("sweep-random", "zeta_k over a range of k as CSV");
  sweep_cmd->add_option("--k-min", k_min, "Smallest k");
  sweep_cmd->add_option("--k-max", k_max, "Largest k");
  attach_random(sweep_cmd);
  sweep_cmd->add_option("--out", out_path, "CSV output file (stdout if omitted)");

  // bounds
  std::optional<double> b_theta, b_zeta;
  std::string b_samples;
  auto* bounds_cmd = add("bounds", "Distortion and sample-size bounds");
  auto* bt = bounds_cmd->add_option("--theta", b_theta, "theta_k");
  auto* bz = bounds_cmd->add_option("--zeta", b_zeta, "zeta_k");
  auto* bs = bounds_cmd->add_option("--samples", b_samples, "m,eps,delta");
  bt->excludes(bz)->excludes(bs);
  bz->excludes(bs);

  // sample-sim
  std::uint64_t groups = 0, sim_trials = 1, sim_seed = 0;
  std::string mode_name, csv_path;
  double epsilon = 0.05;
  std::optional<double> theta_hat;
  auto* sim_cmd = add("sample-sim", "Sampled-group Copeland runs");
  sim_cmd->add_option("--instance", instance_path, "Instance JSON")->required();
  model_flags.attach(sim_cmd);
  sim_cmd->add_option("--groups", groups, "Groups (per matching in matching mode)")->required();
  sim_cmd->add_option("--trials", sim_trials, "Independent trials");
  sim_cmd->add_option("--seed", sim_seed, "Seed");
  sim_cmd->add_option("--mode", mode_name, "ranking | matching (default follows the variant)")
      ->check(CLI::IsMember({"ranking", "matching"}));
  sim_cmd->add_option("--epsilon", epsilon, "Error threshold");
  sim_cmd->add_option("--theta-hat", theta_hat, "Enables the soft distortion check");
  sim_cmd->add_option("--out", out_path, "Report JSON");
  sim_cmd->add_option("--csv", csv_path, "Per-trial CSV");

  // reproduce-tables
  std::string out_dir;
  bool skip_theta3 = false;
  auto* rep_cmd = add("reproduce-tables", "Write table1.csv, table2.csv, fig1.csv, fig2.csv");
  rep_cmd->add_option("--out", out_dir, "Output directory")->required();
  rep_cmd->add_flag("--skip-theta3", skip_theta3, "Use closed forms for k = 3 instead of the certified run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*validate_cmd) {
      const auto inst = MetricInstance::load(instance_path);
      const auto problems = validate(inst);
      emit("validate", {{"instance", instance_path}}, std::nullopt,
           {{"valid", problems.empty()}, {"problems", problems}, {"m", inst.m()}, {"locations", inst.num_locations()}});
      return problems.empty() ? 0 : 1;
    }

    if (*gen_cmd) {
      MetricInstance inst;
      json config = {{"family", family}};
      std::optional<std::uint64_t> seed;
      if (family == "lb1") {
        inst = lb1_instance(gen_k);
        config["k"] = gen_k;
      } else if (family == "theta2") {
        inst = theta2_extremal_instance();
      } else if (family == "worst-case") {
        inst = copeland_k2_worst_case(gen_delta);
        config["delta"] = gen_delta;
      } else if (family == "example1") {
        inst = example1_instance(gen_n, gen_k, gen_delta);
        config.update({{"n", gen_n}, {"k", gen_k}, {"delta", gen_delta}});
      } else if (family == "random") {
        inst = random_euclidean_instance(gen_m, gen_locations, gen_dim, gen_seed);
        config.update({{"m", gen_m}, {"locations", gen_locations}, {"dim", gen_dim}});
        seed = gen_seed;
      } else {
        if (atoms_text.empty()) throw CLI::ValidationError("--atoms", "required for the line family");
        inst = line_instance_from_bias_distribution(parse_atoms(atoms_text));
        config["atoms"] = atoms_text;
      }
      json j = inst.to_json();
      j["meta"] = metadata("gen-instance", config, seed);
      write_text(out_path, j.dump(2) + "\n");
      return 0;
    }

    if (*pk_cmd || *tour_cmd || *pipe_cmd) {
      const auto inst = MetricInstance::load(instance_path);
      const auto model = model_flags.resolve();
      const auto mode = est_flags.resolve(threads);
      json config = {{"instance", instance_path}, {"model", model.to_json()}, {"estimation", mode.to_json()}};
      if (*pk_cmd) {
        if (inst.m() < 2) throw InvalidInstance("pk needs at least two candidates");
        const std::size_t w = w_id.empty() ? 0 : inst.candidate_index(w_id);
        const std::size_t x = x_id.empty() ? 1 : inst.candidate_index(x_id);
        config["w"] = inst.candidate(w);
        config["x"] = inst.candidate(x);
        const auto r = mode.exact ? exact_pk(inst, model, w, x)
                                  : monte_carlo_pk(inst, model, w, x, mode.trials, mode.seed, threads);
        emit("pk", config, est_flags.recorded_seed(), r.to_json(), out_path);
      } else if (*tour_cmd) {
        const auto pm = build_pmatrix(inst, model, mode);
        const auto t = build_tournament(pm, mode.default_tol());
        const auto scores = copeland_scores(t);
        json sc = json::object();
        for (std::size_t c = 0; c < inst.m(); ++c) sc[inst.candidate(c)] = scores[c];
        emit("tournament", config, est_flags.recorded_seed(),
             {{"pmatrix", pm.to_json()}, {"tournament", t.to_json(inst.candidates())}, {"copeland_scores", sc},
              {"winner", inst.candidate(copeland_winner(t))}},
             out_path);
      } else {
        const auto r = pipeline_distortion(inst, model, mode);
        json sc = json::object();
        for (std::size_t c = 0; c < inst.m(); ++c) sc[inst.candidate(c)] = r.scores[c];
        emit("pipeline", config, est_flags.recorded_seed(),
             {{"winner", inst.candidate(r.winner)}, {"optimum", inst.candidate(r.optimum)},
              {"distortion", r.distortion}, {"copeland_scores", sc}},
             out_path);
      }
      return 0;
    }

    if (*savg_cmd) {
      const double t = tol > 0.0 ? tol : 1e-4;
      const auto r = solve_k == 2 ? solve_theta2(t, budget) : solve_theta3(t, budget, threads);
      emit("solve-avg", {{"k", solve_k}, {"tol", t}, {"budget", budget}}, std::nullopt, r.to_json(), out_path);
      return 0;
    }

    if (*bavg_cmd) {
      const double lo = theta_lower_bound_closed_form(solve_k);
      const double hi = theta_upper_bound_closed_form(solve_k);
      json res = {{"k", solve_k}, {"theta_lower", lo}, {"theta_upper", hi}};
      if (hi < 1.0) res["copeland_upper"] = copeland_distortion_from_theta(hi);
      const auto lb = lower_bounds_from_theta(lo);
      res["det_lb"] = lb.deterministic;
      res["rand_lb"] = lb.randomized;
      emit("bounds-avg", {{"k", solve_k}}, std::nullopt, res);
      return 0;
    }

    if (*ck2_cmd) {
      const double t = tol > 0.0 ? tol : 1e-5;
      const auto r = solve_copeland_k2(ck2_beta, t, budget, std::nullopt, std::min(threads, 2u));
      emit("solve-copeland-k2", {{"beta", ck2_beta}, {"tol", t}, {"budget", budget}}, std::nullopt, r.to_json(),
           out_path);
      return 0;
    }

    if (*srand_cmd || *sweep_cmd) {
      const auto g = BiasTransform::parse(g_name);
      json config = {{"g", g.name()}, {"beta", rc_beta}, {"alpha_step", alpha_step}, {"omega_tol", omega_tol}};
      if (*srand_cmd) {
        config["k"] = solve_k;
        emit("solve-random", config, std::nullopt, zeta(solve_k, g, rc_beta, alpha_step, omega_tol, threads).to_json(),
             out_path);
      } else {
        config["k_min"] = k_min;
        config["k_max"] = k_max;
        const auto rows = sweep(k_min, k_max, g, rc_beta, alpha_step, omega_tol, threads);
        write_text(out_path, sweep_csv(rows));
        if (!out_path.empty()) emit("sweep-random", config, std::nullopt, {{"rows", rows.size()}, {"csv", out_path}});
      }
      return 0;
    }

    if (*bounds_cmd) {
      json res;
      json config;
      if (b_theta) {
        res = BoundReport::from_theta(*b_theta).to_json();
        config["theta"] = *b_theta;
      } else if (b_zeta) {
        res = BoundReport::from_theta(*b_zeta).to_json();
        res.erase("theta");
        res["zeta"] = *b_zeta;
        config["zeta"] = *b_zeta;
      } else if (!b_samples.empty()) {
        std::stringstream ss(b_samples);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ','))
          throw CLI::ValidationError("--samples", "expected m,eps,delta");
        try {
          res = BoundReport::from_samples(std::stoull(a), std::stod(b), std::stod(c)).to_json();
        } catch (const std::logic_error&) {
          throw CLI::ValidationError("--samples", "cannot parse '" + b_samples + "'");
        }
        config["samples"] = b_samples;
      } else {
        throw CLI::ValidationError("bounds", "one of --theta, --zeta, --samples is required");
      }
      emit("bounds", config, std::nullopt, res);
      return 0;
    }

    if (*sim_cmd) {
      SampleRunConfig cfg;
      cfg.instance = MetricInstance::load(instance_path);
      cfg.model = model_flags.resolve();
      cfg.groups = groups;
      cfg.trials = sim_trials;
      cfg.seed = sim_seed;
      cfg.epsilon = epsilon;
      cfg.theta_hat = theta_hat;
      cfg.threads = threads;
      if (mode_name.empty())
        cfg.mode = cfg.model.variant == Variant::Averaging ? SampleMode::RankingGroups : SampleMode::MatchingGroups;
      else
        cfg.mode = mode_name == "ranking" ? SampleMode::RankingGroups : SampleMode::MatchingGroups;
      const auto rep = empirical_distortion_trials(cfg);
      json config = cfg.to_json();
      config["instance"] = instance_path;
      json res = rep.to_json();
      res.erase("config");
      emit("sample-sim", config, sim_seed, res, out_path);
      if (!csv_path.empty()) write_text(csv_path, rep.trials_csv());
      return 0;
    }

    if (*rep_cmd) {
      fs::create_directories(out_dir);
      const auto t2 = solve_theta2(1e-4);
      const auto ck2 = solve_copeland_k2(2.0 + std::sqrt(2.0) + 1e-3, 1e-5, 10'000'000, std::nullopt,
                                         std::min(threads, 2u));
      std::optional<ThetaResult> t3;
      if (!skip_theta3) t3 = solve_theta3(1e-4, 10'000'000, threads);
      const auto dir = fs::path(out_dir);
      write_text((dir / "table1.csv").string(), table1_csv(t2, ck2, t3, 10));
      std::vector<ZetaResult> t2rows;
      for (int k = 2; k <= 4; ++k) t2rows.push_back(zeta(k, BiasTransform::linear(), 1.0, 1e-3, 1e-9, threads));
      write_text((dir / "table2.csv").string(), table2_csv(t2rows));
      write_text((dir / "fig1.csv").string(), sweep_csv(sweep(2, 30, BiasTransform::linear(), 1.0, 1e-3, 1e-9, threads)));
      write_text((dir / "fig2.csv").string(), sweep_csv(sweep(2, 30, BiasTransform::sqrt(), 1.0, 1e-3, 1e-9, threads)));
      json res = {{"files", {"table1.csv", "table2.csv", "fig1.csv", "fig2.csv"}},
                  {"theta2", t2.to_json()},
                  {"copeland_k2", ck2.to_json()}};
      if (t3) res["theta3"] = t3->to_json();
      const json config = {{"skip_theta3", skip_theta3}, {"k_max_table1", 10}, {"sweep", {2, 30}}};
      emit("reproduce-tables", config, std::nullopt, res, (dir / "manifest.json").string());
      emit("reproduce-tables", config, std::nullopt, {{"out", out_dir}, {"files", res["files"]}});
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
