// Command-line front end: fisher information, rate constants, risk sweeps,
// log-log fits, KL cross-checks, bound verification, and MAP floors.
//
// Exit codes: 0 success, 2 invalid usage or configuration, 3 numerical failure.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sslab/asymptotics.hpp"
#include "sslab/error.hpp"
#include "sslab/fisher.hpp"
#include "sslab/loss.hpp"
#include "sslab/model.hpp"
#include "sslab/posterior.hpp"
#include "sslab/rates.hpp"
#include "sslab/risk.hpp"
#include "sslab/sweep.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace sslab;

struct GlobalOpts {
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
  std::string out_dir = ".";
};

void check_dim(std::string_view model, const std::vector<double>& theta,
               std::size_t dim) {
  if (theta.size() != dim)
    throw ConfigError("--theta for the " + std::string(model) + " model needs " +
                      std::to_string(dim) + " value(s)");
}

// Flat matrix entries: scalar value for d=1, "prefix.ij" per entry for d=2.
void emit_mat(json& doc, const std::string& prefix, const SymMat& m) {
  if (m.dim() == 1) {
    doc[prefix] = m(0, 0);
    return;
  }
  doc[prefix + ".00"] = m(0, 0);
  doc[prefix + ".01"] = m(0, 1);
  doc[prefix + ".11"] = m(1, 1);
}

RunSettings settings_for(const GlobalOpts& g) {
  RunSettings s;
  s.threads = g.threads;
  return s;
}

template <class Fn>
void with_model(const std::string& name, const std::vector<double>& theta,
                Fn&& fn) {
  if (name == "mixture") {
    check_dim(name, theta, 1);
    MixtureModel model;
    fn(model, model.make_param(theta));
  } else if (name == "gaussian") {
    check_dim(name, theta, 2);
    GaussianModel model;
    fn(model, model.make_param(theta));
  } else {
    throw ConfigError("unknown model: " + name);
  }
}

void print(const json& doc) { std::cout << doc.dump(2) << "\n"; }

// --- fisher ---------------------------------------------------------------

int run_fisher(const GlobalOpts& g, const std::string& model_name,
               const std::vector<double>& theta, std::uint64_t mc_samples) {
  json doc;
  doc["model"] = model_name;
  doc["theta"] = theta;
  with_model(model_name, theta, [&](const auto& model, auto param) {
    const auto pair = fisher_analytic(model, param);
    emit_mat(doc, "i_xy", pair.i_xy);
    emit_mat(doc, "i_x", pair.i_x);
    const auto cond = check_condition1(pair);
    doc["cond1.i_xy_pd"] = cond.i_xy_pd;
    doc["cond1.i_x_pd"] = cond.i_x_pd;
    doc["cond1.strict_order"] = cond.strict_order;
    doc["cond1.min_eig_xy"] = cond.min_eig_xy;
    doc["cond1.min_eig_x"] = cond.min_eig_x;
    doc["cond1.min_eig_diff"] = cond.min_eig_diff;
    if (mc_samples > 0) {
      const auto mc = fisher_mc(model, param, mc_samples, g.seed);
      emit_mat(doc, "mc.i_xy", mc.value.i_xy);
      emit_mat(doc, "mc.i_xy_se", mc.std_error.i_xy);
      emit_mat(doc, "mc.i_x", mc.value.i_x);
      emit_mat(doc, "mc.i_x_se", mc.std_error.i_x);
      doc["mc.samples"] = mc.samples;
    }
  });
  print(doc);
  return 0;
}

// --- constants --------------------------------------------------------------

int run_constants(const std::string& model_name,
                  const std::vector<double>& theta, double alpha, double beta,
                  double gamma, int n) {
  json doc;
  doc["model"] = model_name;
  doc["theta"] = theta;
  with_model(model_name, theta, [&](const auto& model, auto param) {
    const auto pair = fisher_analytic(model, param);
    const auto constants = rate_constants(pair, alpha, beta);
    doc["alpha"] = alpha;
    doc["beta"] = beta;
    doc["k1"] = constants.k1;
    doc["k2"] = constants.k2;
    doc["k3"] = constants.k3;
    doc["n"] = n;
    doc["leading.sl"] = leading_risk(RegimeSpec::sl(), n, constants);
    doc["leading.ssl-linear"] =
        leading_risk(RegimeSpec::ssl_linear(alpha), n, constants);
    doc["gamma"] = gamma;
    doc["leading.ssl-super"] =
        leading_risk(RegimeSpec::ssl_super(gamma), n, constants);
  });
  print(doc);
  return 0;
}

// --- sweep ------------------------------------------------------------------

// Per-regime fit summary appended after the run; constants are compared only
// for self-information sweeps, where the leading term is K/(2n^{1+gamma}).
void append_fit_summary(json& doc, const SweepConfig& config,
                        const std::vector<SweepRow>& rows) {
  if (config.n_values.size() < 3) return;

  const bool log_loss = config.loss.kind == LossKind::SelfInformation;
  for (const auto& regime : config.regimes) {
    std::vector<SweepRow> mine;
    for (const auto& r : rows)
      if (r.regime == regime.id()) mine.push_back(r);
    const auto fit = fit_loglog(mine);
    const std::string p = "fit." + regime.id() + ".";
    doc[p + "slope"] = fit.slope;
    doc[p + "slope_target"] = fit.slope_target;
    doc[p + "intercept"] = fit.intercept;
    doc[p + "r_squared"] = fit.r_squared;
    doc[p + "implied_constant"] = fit.implied_constant;
    if (!log_loss) continue;
    with_model(config.model, config.theta0, [&](const auto& model, auto param) {
      const auto pair = fisher_analytic(model, param);
      const auto constants =
          rate_constants(pair, regime.alpha, config.loss.beta());
      const auto report = compare_constants(fit, constants, regime);
      doc[p + "k_target"] = report.k_target;
      doc[p + "ratio"] = report.ratio;
      doc[p + "pass"] = report.pass;
    });
  }
}

int run_sweep_cmd(const GlobalOpts& g, const std::string& config_path) {
  auto config = load_sweep_config(config_path);
  if (g.seed_given) config.seed = g.seed;
  const auto outcome = run_sweep(config, g.threads, g.out_dir);

  json doc;
  doc["config"] = config_path;
  doc["rows"] = outcome.rows.size();
  doc["seed"] = config.seed;
  doc["csv"] = outcome.csv_path.string();
  doc["dat"] = outcome.dat_path.string();
  append_fit_summary(doc, config, outcome.rows);
  print(doc);
  return 0;
}

// --- fit --------------------------------------------------------------------

int run_fit(const std::string& input, const std::string& regime_text) {
  std::ifstream in(input);
  if (!in) throw ConfigError("cannot open csv file: " + input);
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  const auto rows = parse_csv(text);
  const auto regime = RegimeSpec::parse(regime_text);
  std::vector<SweepRow> mine;
  for (const auto& r : rows)
    if (r.regime == regime.id()) mine.push_back(r);
  if (mine.empty())
    throw ConfigError("no rows for regime " + regime.id() + " in " + input);
  const auto fit = fit_loglog(mine);

  json doc;
  doc["input"] = input;
  doc["regime"] = regime.id();
  doc["rows"] = mine.size();
  doc["slope"] = fit.slope;
  doc["slope_target"] = fit.slope_target;
  doc["intercept"] = fit.intercept;
  doc["r_squared"] = fit.r_squared;
  doc["implied_constant"] = fit.implied_constant;
  print(doc);
  return 0;
}

// --- kl ---------------------------------------------------------------------

int run_kl(const GlobalOpts& g, const std::string& model_name,
           const std::vector<double>& theta, int n, int m,
           std::uint64_t reps) {
  json doc;
  doc["model"] = model_name;
  doc["theta"] = theta;
  doc["n"] = n;
  doc["m"] = m;
  doc["reps"] = reps;
  with_model(model_name, theta, [&](const auto& model, auto param) {
    const auto pair = fisher_analytic(model, param);
    const double q0 = 1.0 / model.domain().volume();
    const auto lap =
        laplace_kl(pair, n, m, model.domain().dim(), q0);
    const auto mc = mc_kl(model, param, n, m, Prior::uniform(), reps, g.seed,
                          settings_for(g));
    doc["q_at_theta0"] = q0;
    doc["laplace"] = lap.value;
    doc["mc_mean"] = mc.mean;
    doc["mc_se"] = mc.std_error;
    doc["diff"] = mc.mean - lap.value;
  });
  print(doc);
  return 0;
}

// --- verify-bound -----------------------------------------------------------

int run_verify_bound(const GlobalOpts& g, const std::string& model_name,
                     const std::vector<double>& theta,
                     const std::string& loss_name, double range_bound,
                     const std::string& regime_text, int n,
                     std::uint64_t reps) {
  const auto loss = LossSpec::from_config(loss_name, range_bound);
  const auto regime = RegimeSpec::parse(regime_text);
  json doc;
  doc["model"] = model_name;
  doc["theta"] = theta;
  doc["loss"] = loss.config_key();
  doc["regime"] = regime.id();
  doc["n"] = n;
  doc["reps"] = reps;
  with_model(model_name, theta, [&](const auto& model, auto param) {
    const auto report = verify_lemma1(model, param, regime, n, loss,
                                      Prior::uniform(), reps, g.seed,
                                      settings_for(g));
    doc["risk_mean"] = report.risk.mean;
    doc["risk_se"] = report.risk.std_error;
    doc["mi_mean"] = report.mi.mean;
    doc["mi_se"] = report.mi.std_error;
    doc["beta"] = report.beta;
    doc["slack"] = report.slack;
    doc["combined_se"] = report.combined_se;
    doc["bound_holds"] = report.bound_holds;
    doc["equality_within_se"] = report.equality_within_se;
  });
  print(doc);
  return 0;
}

// --- floor ------------------------------------------------------------------

int run_floor(const GlobalOpts& g, const std::vector<double>& theta,
              const std::vector<int>& n_values, std::uint64_t reps) {
  MixtureModel model;
  check_dim("mixture", theta, 1);
  const auto param = model.make_param(theta);
  json doc;
  doc["model"] = "mixture";
  doc["theta"] = theta;
  json points = json::array();
  for (int n : n_values) {
    const auto pt =
        map_posterior_floor(model, param, n, reps, g.seed, settings_for(g));
    json row;
    row["n"] = pt.n;
    row["replications"] = pt.replications;
    row["floor"] = pt.floor;
    row["mean"] = pt.mean;
    points.push_back(row);
  }
  doc["points"] = points;
  print(doc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Bayes-mixture prediction laboratory: Fisher information, "
      "semi-supervised rate constants, and Monte Carlo risk sweeps"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "Master seed (overrides config seeds)");
  app.add_option("--threads", g.threads, "Worker threads for replications")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", g.out_dir, "Output directory for generated files");

  std::string model_name = "mixture";
  std::vector<double> theta;
  const auto add_model_opts = [&](CLI::App* sub, bool need_theta = true) {
    sub->add_option("--model", model_name, "Model id: mixture | gaussian");
    auto* opt =
        sub->add_option("--theta", theta, "Parameter values")->delimiter(',');
    if (need_theta) opt->required();
  };

  auto* fisher_cmd =
      app.add_subcommand("fisher", "Information matrices at a parameter");
  std::uint64_t fisher_mc_samples = 0;
  add_model_opts(fisher_cmd);
  fisher_cmd->add_option("--mc", fisher_mc_samples,
                         "Monte Carlo sample count (0 = analytic only)");

  auto* constants_cmd =
      app.add_subcommand("constants", "Rate constants k1, k2, k3");
  double alpha = 1.0, beta_val = 1.0, gamma = 0.5;
  int constants_n = 100;
  add_model_opts(constants_cmd);
  constants_cmd->add_option("--alpha", alpha, "Unlabeled/labeled ratio");
  constants_cmd->add_option("--beta", beta_val, "Exp-concavity constant");
  constants_cmd->add_option("--gamma", gamma, "Super-linear exponent");
  constants_cmd->add_option("--n", constants_n, "Sample size for leading terms");

  auto* sweep_cmd =
      app.add_subcommand("sweep", "Run a risk sweep from a JSON config");
  std::string config_path;
  sweep_cmd->add_option("--config", config_path, "JSON config file")
      ->required();

  auto* fit_cmd =
      app.add_subcommand("fit", "Log-log fit of a sweep CSV for one regime");
  std::string fit_input, fit_regime;
  fit_cmd->add_option("--input", fit_input, "Sweep CSV file")->required();
  fit_cmd->add_option("--regime", fit_regime,
                      "Regime id, e.g. sl | ssl-linear:1 | ssl-super:0.5")
      ->required();

  auto* kl_cmd = app.add_subcommand(
      "kl", "Dataset-KL: Monte Carlo versus Laplace approximation");
  int kl_n = 100, kl_m = 0;
  std::uint64_t kl_reps = 10000;
  add_model_opts(kl_cmd);
  kl_cmd->add_option("--n", kl_n, "Labeled sample count");
  kl_cmd->add_option("--m", kl_m, "Unlabeled sample count");
  kl_cmd->add_option("--reps", kl_reps, "Monte Carlo replications");

  auto* verify_cmd = app.add_subcommand(
      "verify-bound", "Check the mutual-information risk bound");
  std::string loss_name = "log";
  double range_bound = 1.0;
  std::string regime_text = "sl";
  int verify_n = 100;
  std::uint64_t verify_reps = 1000;
  add_model_opts(verify_cmd);
  verify_cmd->add_option("--loss", loss_name, "Loss: log | square");
  verify_cmd->add_option("--range-bound", range_bound,
                         "Square-loss range bound a");
  verify_cmd->add_option("--regime", regime_text, "Regime id");
  verify_cmd->add_option("--n", verify_n, "Labeled sample count");
  verify_cmd->add_option("--reps", verify_reps, "Replications");

  auto* floor_cmd = app.add_subcommand(
      "floor", "MAP-posterior risk floor of the mixture model");
  std::vector<int> floor_n{100};
  std::uint64_t floor_reps = 1000;
  floor_cmd->add_option("--theta", theta, "Mixture parameter")
      ->delimiter(',')
      ->required();
  floor_cmd->add_option("--n", floor_n, "Labeled sample counts")
      ->delimiter(',');
  floor_cmd->add_option("--reps", floor_reps, "Replications");

  try {
    app.parse(argc, argv);
    g.seed_given = app.count("--seed") > 0;

    if (*fisher_cmd)
      return run_fisher(g, model_name, theta, fisher_mc_samples);
    if (*constants_cmd)
      return run_constants(model_name, theta, alpha, beta_val, gamma,
                           constants_n);
    if (*sweep_cmd) return run_sweep_cmd(g, config_path);
    if (*fit_cmd) return run_fit(fit_input, fit_regime);
    if (*kl_cmd) return run_kl(g, model_name, theta, kl_n, kl_m, kl_reps);
    if (*verify_cmd)
      return run_verify_bound(g, model_name, theta, loss_name, range_bound,
                              regime_text, verify_n, verify_reps);
    if (*floor_cmd) return run_floor(g, theta, floor_n, floor_reps);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
