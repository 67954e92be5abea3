#pragma once

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sslab/asymptotics.hpp"
#include "sslab/error.hpp"
#include "sslab/fisher.hpp"
#include "sslab/loss.hpp"
#include "sslab/model.hpp"
#include "sslab/rates.hpp"
#include "sslab/risk.hpp"
#include "sslab/rng.hpp"

namespace sslab {

struct SweepConfig {
  std::string model = "mixture";  // "mixture" or "gaussian"
  std::vector<double> theta0;
  LossSpec loss = LossSpec::self_information();
  std::string prior = "uniform";
  std::vector<RegimeSpec> regimes;
  std::vector<int> n_values;
  std::size_t reps = 2000;
  std::uint64_t seed = 0;
  GridSettings grid;
  std::string output_csv = "sweep.csv";
  std::string output_dat = "sweep.dat";
};

inline void validate(const SweepConfig& c) {
  const int dim = [&] {
    if (c.model == "mixture") return MixtureModel::kDim;
    if (c.model == "gaussian") return GaussianModel::kDim;
    throw ConfigError("unknown model id: " + c.model);
  }();
  if (static_cast<int>(c.theta0.size()) != dim)
    throw ConfigError("theta0 must have one entry per model dimension");
  if (c.prior != "uniform")
    throw ConfigError("unknown prior id: " + c.prior);
  if (c.regimes.empty()) throw ConfigError("regimes must be nonempty");
  for (std::size_t i = 0; i < c.regimes.size(); ++i)
    for (std::size_t j = i + 1; j < c.regimes.size(); ++j)
      if (c.regimes[i].id() == c.regimes[j].id())
        throw ConfigError("duplicate regime: " + c.regimes[i].id());
  if (c.n_values.size() < 2)
    throw ConfigError("n_values needs at least 2 entries");
  for (std::size_t i = 0; i < c.n_values.size(); ++i) {
    if (c.n_values[i] < 1) throw ConfigError("n_values must be >= 1");
    if (i > 0 && c.n_values[i] <= c.n_values[i - 1])
      throw ConfigError("n_values must be strictly increasing");
  }
  if (c.reps < 100) throw ConfigError("reps must be >= 100");
  if (!c.grid.resolution.empty()) {
    if (static_cast<int>(c.grid.resolution.size()) != dim)
      throw ConfigError("grid.resolution must have one entry per dimension");
    for (int r : c.grid.resolution)
      if (r < 8) throw ConfigError("grid.resolution entries must be >= 8");
  }
  if (c.grid.refine_passes < 0)
    throw ConfigError("grid.refine_passes must be >= 0");
  if (c.model == "gaussian" && c.loss.kind == LossKind::ZeroOne)
    throw ConfigError("zero-one loss needs a finite label alphabet");
  if (c.output_csv.empty() || c.output_dat.empty())
    throw ConfigError("output file names must be nonempty");
}

namespace detail {

inline void known_keys(const nlohmann::json& j,
                       std::initializer_list<std::string_view> allowed,
                       std::string_view scope) {
  if (!j.is_object()) throw ConfigError(std::string(scope) + " must be an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (std::string_view k : allowed) ok = ok || item.key() == k;
    if (!ok)
      throw ConfigError("unknown config key: " + std::string(scope) + "." +
                        item.key());
  }
}

}  // namespace detail

inline SweepConfig sweep_config_from_json(const nlohmann::json& j) {
  try {
    detail::known_keys(j,
                       {"model", "theta0", "loss", "prior", "regimes", "n_values",
                        "grid", "mc", "output"},
                       "$");
    SweepConfig c;
    if (!j.contains("model") || !j.contains("theta0") || !j.contains("regimes") ||
        !j.contains("n_values"))
      throw ConfigError("config requires model, theta0, regimes, n_values");
    c.model = j.at("model").get<std::string>();
    c.theta0 = j.at("theta0").get<std::vector<double>>();
    for (const auto& id : j.at("regimes").get<std::vector<std::string>>())
      c.regimes.push_back(RegimeSpec::parse(id));
    c.n_values = j.at("n_values").get<std::vector<int>>();
    if (j.contains("prior")) c.prior = j.at("prior").get<std::string>();
    if (j.contains("loss")) {
      const auto& l = j.at("loss");
      detail::known_keys(l, {"kind", "range_bound"}, "loss");
      const double bound =
          l.contains("range_bound") ? l.at("range_bound").get<double>() : 1.0;
      c.loss = LossSpec::from_config(l.at("kind").get<std::string>(), bound);
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      detail::known_keys(g, {"resolution", "rule", "refine_passes"}, "grid");
      if (g.contains("resolution"))
        c.grid.resolution = g.at("resolution").get<std::vector<int>>();
      if (g.contains("rule"))
        c.grid.rule = parse_quad_rule(g.at("rule").get<std::string>());
      if (g.contains("refine_passes"))
        c.grid.refine_passes = g.at("refine_passes").get<int>();
    }
    if (j.contains("mc")) {
      const auto& m = j.at("mc");
      detail::known_keys(m, {"reps", "seed"}, "mc");
      if (m.contains("reps")) c.reps = m.at("reps").get<std::size_t>();
      if (m.contains("seed")) c.seed = m.at("seed").get<std::uint64_t>();
    }
    if (j.contains("output")) {
      const auto& o = j.at("output");
      detail::known_keys(o, {"csv", "dat"}, "output");
      if (o.contains("csv")) c.output_csv = o.at("csv").get<std::string>();
      if (o.contains("dat")) c.output_dat = o.at("dat").get<std::string>();
    }
    validate(c);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline SweepConfig load_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return sweep_config_from_json(j);
}

struct SweepRow {
  std::string regime;
  int n = 0;
  int m = 0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  double risk_mean = 0.0;
  double risk_se = 0.0;
  double kl_mean = 0.0;
  double kl_se = 0.0;
  double leading_pred = 0.0;
};

inline constexpr std::string_view kCsvHeader =
    "regime,n,m,reps,seed,risk_mean,risk_se,kl_mean,kl_se,leading_pred";

namespace detail {

inline std::string format_g17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_log10(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) return "nan";
  return format_g17(std::log10(v));
}

inline double parse_double(const std::string& field) {
  const char* s = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end != s + field.size() || field.empty())
    throw ConfigError("bad numeric CSV field: " + field);
  return v;
}

inline std::uint64_t parse_u64(const std::string& field) {
  if (field.empty() || field[0] == '-' || field[0] == '+')
    throw ConfigError("bad integer CSV field: " + field);
  const char* s = field.c_str();
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (end != s + field.size() || errno == ERANGE)
    throw ConfigError("bad integer CSV field: " + field);
  return v;
}

inline int parse_int(const std::string& field) {
  const std::uint64_t v = parse_u64(field);
  if (v > static_cast<std::uint64_t>(std::numeric_limits<int>::max()))
    throw ConfigError("integer CSV field out of range: " + field);
  return static_cast<int>(v);
}

}  // namespace detail

inline std::string emit_csv(const std::vector<SweepRow>& rows) {
  std::string out{kCsvHeader};
  out += '\n';
  for (const auto& r : rows) {
    out += r.regime;
    out += ',' + std::to_string(r.n) + ',' + std::to_string(r.m) + ',' +
           std::to_string(r.reps) + ',' + std::to_string(r.seed) + ',' +
           detail::format_g17(r.risk_mean) + ',' + detail::format_g17(r.risk_se) +
           ',' + detail::format_g17(r.kl_mean) + ',' +
           detail::format_g17(r.kl_se) + ',' +
           detail::format_g17(r.leading_pred) + '\n';
  }
  return out;
}

inline std::vector<SweepRow> parse_csv(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t nl = text.find('\n', start);
    const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    if (end > start) lines.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  if (lines.empty() || lines[0] != kCsvHeader)
    throw ConfigError("unexpected CSV header");

  std::vector<SweepRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> fields;
    std::size_t pos = 0;
    const std::string& line = lines[i];
    while (true) {
      const std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(pos));
        break;
      }
      fields.push_back(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
    if (fields.size() != 10)
      throw ConfigError("CSV row must have 10 fields: " + line);
    SweepRow r;
    r.regime = RegimeSpec::parse(fields[0]).id();
    r.n = detail::parse_int(fields[1]);
    r.m = detail::parse_int(fields[2]);
    r.reps = detail::parse_u64(fields[3]);
    r.seed = detail::parse_u64(fields[4]);
    r.risk_mean = detail::parse_double(fields[5]);
    r.risk_se = detail::parse_double(fields[6]);
    r.kl_mean = detail::parse_double(fields[7]);
    r.kl_se = detail::parse_double(fields[8]);
    r.leading_pred = detail::parse_double(fields[9]);
    rows.push_back(std::move(r));
  }
  return rows;
}

// Plot companion: per-regime blocks of log10 columns, separated by blank
// lines for index-based plotting tools.
inline std::string emit_dat(const std::vector<SweepRow>& rows) {
  std::string out =
      "# columns: log10_n log10_risk_mean log10_kl_mean log10_leading_pred\n";
  std::string current;
  bool first = true;
  for (const auto& r : rows) {
    if (r.regime != current) {
      if (!first) out += '\n';
      out += "# regime: " + r.regime + '\n';
      current = r.regime;
      first = false;
    }
    out += detail::format_log10(static_cast<double>(r.n)) + ' ' +
           detail::format_log10(r.risk_mean) + ' ' +
           detail::format_log10(r.kl_mean) + ' ' +
           detail::format_log10(r.leading_pred) + '\n';
  }
  return out;
}

namespace detail {

template <class M>
std::vector<SweepRow> run_cells(const M& model, const SweepConfig& c,
                                int threads) {
  const auto theta0 = model.make_param(c.theta0);
  const FisherPair pair = fisher_analytic(model, theta0);
  const bool have_beta = c.loss.beta_known();
  const double beta = have_beta ? c.loss.beta() : 0.0;
  const RunSettings rs{threads, c.grid};
  const bool log_loss = c.loss.kind == LossKind::SelfInformation;

  std::vector<SweepRow> rows;
  for (const auto& regime : c.regimes) {
    for (const int n : c.n_values) {
      const std::uint64_t cell_seed =
          stream_key(c.seed, static_cast<std::uint64_t>(n),
                     purpose_tag(regime.id()));
      const auto name_cell = [&] {
        return "cell " + regime.id() + " n=" + std::to_string(n) + ": ";
      };
      RiskPair<M> est;
      try {
        est = excess_risk_pair(model, theta0, regime, n, c.loss,
                               Prior::uniform(), c.reps, cell_seed, rs);
      } catch (const ConfigError& e) {
        throw ConfigError(name_cell() + e.what());
      } catch (const DomainError& e) {
        throw DomainError(name_cell() + e.what());
      } catch (const NumericError& e) {
        throw NumericError(name_cell() + e.what());
      }
      SweepRow row;
      row.regime = regime.id();
      row.n = n;
      row.m = regime.m_for(n);
      row.reps = c.reps;
      row.seed = cell_seed;
      // Self-information rows report the kl-form estimator as the risk:
      // it is the same per-replication quantity with lower variance.
      const RiskEstimate& risk = log_loss ? est.kl : est.risk;
      row.risk_mean = risk.mean;
      row.risk_se = risk.std_error;
      row.kl_mean = est.kl.mean;
      row.kl_se = est.kl.std_error;
      row.leading_pred =
          have_beta
              ? leading_risk(regime, n, rate_constants(pair, regime.alpha, beta))
              : std::numeric_limits<double>::quiet_NaN();
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace detail

struct SweepOutcome {
  std::vector<SweepRow> rows;
  std::string csv_text;
  std::string dat_text;
  std::filesystem::path csv_path;  // empty when no output directory was given
  std::filesystem::path dat_path;
};

inline SweepOutcome run_sweep(const SweepConfig& config, int threads = 1,
                              const std::filesystem::path& out_dir = {}) {
  validate(config);
  SweepOutcome out;
  if (config.model == "mixture")
    out.rows = detail::run_cells(MixtureModel{}, config, threads);
  else
    out.rows = detail::run_cells(GaussianModel{}, config, threads);
  out.csv_text = emit_csv(out.rows);
  out.dat_text = emit_dat(out.rows);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    out.csv_path = out_dir / config.output_csv;
    out.dat_path = out_dir / config.output_dat;
    std::ofstream(out.csv_path) << out.csv_text;
    std::ofstream(out.dat_path) << out.dat_text;
  }
  return out;
}

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double implied_constant = 0.0;
  double slope_target = 0.0;
};

// Ordinary least squares of log(risk_mean) on log(n) over one regime's rows.
// implied_constant rescales each mean by 2 n^(rate exponent), making it
// directly comparable to the matching rate constant.
inline FitResult fit_loglog(std::span<const SweepRow> rows) {
  if (rows.size() < 3) throw ConfigError("fit needs at least 3 rows");
  for (const auto& r : rows)
    if (r.regime != rows[0].regime)
      throw ConfigError("fit rows must come from a single regime");
  const RegimeSpec regime = RegimeSpec::parse(rows[0].regime);

  const std::size_t k = rows.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, implied = 0.0;
  for (const auto& r : rows) {
    if (!(r.risk_mean > 0.0))
      throw NumericError("fit requires positive risk means");
    const double x = std::log(static_cast<double>(r.n));
    const double y = std::log(r.risk_mean);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    implied += r.risk_mean * std::pow(r.n, regime.rate_exponent()) * 2.0;
  }
  FitResult fit;
  fit.slope_target = -regime.rate_exponent();
  const double denom = k * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) throw NumericError("degenerate fit abscissae");
  fit.slope = (k * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / k;
  fit.implied_constant = implied / k;

  double ss_res = 0.0, ss_tot = 0.0;
  const double ybar = sy / k;
  for (const auto& r : rows) {
    const double x = std::log(static_cast<double>(r.n));
    const double y = std::log(r.risk_mean);
    const double e = y - (fit.intercept + fit.slope * x);
    ss_res += e * e;
    ss_tot += (y - ybar) * (y - ybar);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  fit.r_squared = std::min(1.0, std::max(0.0, fit.r_squared));
  return fit;
}

struct ConstantReport {
  double k_target = 0.0;
  double ratio = 0.0;
  double tolerance = 0.25;
  bool pass = false;
};

inline ConstantReport compare_constants(const FitResult& fit,
                                        const RateConstants& constants,
                                        const RegimeSpec& regime,
                                        double tolerance = 0.25) {
  ConstantReport rep;
  rep.tolerance = tolerance;
  switch (regime.kind) {
    case RegimeSpec::Kind::SL:
      rep.k_target = constants.k2;
      break;
    case RegimeSpec::Kind::SslLinear:
      rep.k_target = constants.k1;
      break;
    case RegimeSpec::Kind::SslSuper:
      rep.k_target = constants.k3;
      break;
  }
  if (!(rep.k_target > 0.0))
    throw NumericError("target rate constant must be positive");
  rep.ratio = fit.implied_constant / rep.k_target;
  rep.pass = std::abs(rep.ratio - 1.0) <= tolerance;
  return rep;
}

}  // namespace sslab
