#pragma once

// Command-line front end. Needs CLI11.hpp and json.hpp on the include path;
// not part of the umbrella header.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsmix/lsmix.hpp"

namespace lsmix::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { ok = 0, failure = 1, invalid_input = 2, not_converged = 3, hypothesis_violated = 4 };

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Newline-delimited reals; blank lines and '#' comments are skipped.
inline std::vector<double> parse_values(std::istream& in, const std::string& name) {
  std::vector<double> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const char* b = line.data() + first;
    const char* e = line.data() + last + 1;
    if (*b == '+') ++b;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e || !std::isfinite(v)) {
      throw InputError(name + ":" + std::to_string(lineno) + ": not a finite number: '" +
                       line.substr(first, last - first + 1) + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw InputError(name + ": no data values");
  return out;
}

inline Dataset read_data(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open data file '" + path + "'");
  return Dataset(parse_values(in, path));
}

/// Comma-separated reals for --add.
inline std::vector<double> parse_list(const std::string& text) {
  std::string lines = text;
  for (char& c : lines) {
    if (c == ',') c = '\n';
  }
  std::istringstream in(lines);
  return parse_values(in, "--add");
}

/// Rounded to 12 significant digits; non-finite values become null.
inline Json num(double x) {
  if (!std::isfinite(x)) return nullptr;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot write '" + tmp.string() + "'");
    f << content;
    f.flush();
    if (!f) throw InputError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw InputError("cannot move report into place at '" + path + "'");
  }
}

/// Parsed options of one invocation.
struct RunConfig {
  std::string command;
  std::string data;
  std::string family = "normal";
  std::string noise = "none";
  double sigma0 = 0.025;
  std::string criterion = "bic";
  std::size_t restarts = 10;
  std::uint64_t seed = 1;
  std::size_t max_iters = 2000;
  double rel_tol = 1e-10;
  std::size_t threads = 0;
  std::optional<std::size_t> s;
  std::size_t s_max = kDefaultMaxOrder;
  std::size_t g_max = 0;
  std::string certificate = "improper-noise";
  std::string mode = "outlier-threshold";
  std::string add;
  double ceiling = 1e10;
  std::size_t n = 50;
  double p = 0.95;
  double sigma_max = 5.0;
  double a = 0.0;
  double var = 1.0;
  std::string out;
  std::string format;
  std::string plot_data;

  /// Arguments that reproduce the result (destinations and threads excluded).
  std::vector<std::string> echo;

  [[nodiscard]] FitConfig fit_config() const {
    FitConfig c;
    c.scale_floor = sigma0;
    c.restarts = restarts;
    c.seed = seed;
    c.max_iters = max_iters;
    c.rel_tol = rel_tol;
    c.threads = threads;
    return c;
  }
};

inline std::size_t default_threads() {
  if (const char* env = std::getenv("LSMIX_THREADS")) {
    std::size_t v = 0;
    const std::string_view sv(env);
    const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
    if (ec == std::errc() && ptr == sv.data() + sv.size() && v > 0) return v;
  }
  return 1;
}

/// Parts of a command's output: the JSON result and one table for CSV/plot data.
struct Output {
  Json result = Json::object();
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> table;
  int exit = ExitCode::ok;
};

inline std::string to_csv(const Output& o) {
  std::string s;
  for (std::size_t k = 0; k < o.header.size(); ++k) s += (k ? "," : "") + o.header[k];
  s += '\n';
  for (const auto& row : o.table) {
    for (std::size_t k = 0; k < row.size(); ++k) s += (k ? "," : "") + row[k];
    s += '\n';
  }
  return s;
}

inline Json params_json(const MixtureParams& p) {
  Json comps = Json::array();
  for (const auto& c : p.components) {
    comps.push_back({{"weight", num(c.weight)}, {"location", num(c.location)}, {"scale", num(c.scale)}});
  }
  Json j = {{"family", p.family.str()}, {"noise", p.regime.str()}, {"components", comps}};
  if (p.regime.active()) j["noise_weight"] = num(p.noise_weight);
  return j;
}

inline Json fit_json(const FitResult& f) {
  Json j = params_json(f.params);
  j["loglik"] = num(f.loglik);
  j["iterations"] = f.iterations;
  j["converged"] = f.converged;
  j["start"] = f.start_kind;
  return j;
}

inline Json labels_json(const Partition& p) { return p.labels(); }

inline Json report_json(const BreakdownReport& r) {
  Json j = {{"kind", to_string(r.kind)},
            {"n", r.n},
            {"s", r.s},
            {"g_star", r.g_star},
            {"bound", r.bound_text()},
            {"breakdown_at_least", r.breakdown_at_least_text()},
            {"f_max", num(r.f_max)},
            {"converged", r.converged}};
  if (r.kind == ReportKind::bic_gross_outlier_cert) j["saturated"] = r.saturated;
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    Json per_r = Json::array();
    for (double v : row.per_r) per_r.push_back(num(v));
    rows.push_back({{"g", row.g}, {"value", num(row.value)}, {"per_r", per_r}, {"holds", row.holds}});
  }
  j["rows"] = rows;
  Json fits = Json::array();
  for (const auto& f : r.fits) fits.push_back(fit_json(f));
  j["fits"] = fits;
  if (r.search) {
    Json trace = Json::array();
    for (const auto& t : r.search->trace) trace.push_back({{"y", num(t.y)}, {"broken", t.broken}});
    j["search"] = {{"found", r.search->threshold.has_value()},
                   {"threshold", r.search->threshold ? num(*r.search->threshold) : Json(nullptr)},
                   {"bracket_verified", r.search->bracket_verified},
                   {"ceiling", num(r.search->ceiling)},
                   {"trace", trace}};
  }
  if (r.probe) {
    const ProbeOutcome& p = *r.probe;
    Json clusters = Json::array();
    for (const auto& c : p.classification.clusters) {
      clusters.push_back({{"size", c.members.size()},
                          {"gamma_star", c.gamma_star.str()},
                          {"broken", c.broke},
                          {"absorbed_by_noise", c.absorbed_by_noise}});
    }
    Json added = Json::array();
    for (double v : p.added) added.push_back(num(v));
    j["probe"] = {{"added", added},
                  {"original_order", p.original_order},
                  {"contaminated_order", p.contaminated_order},
                  {"order_dropped", p.order_dropped},
                  {"matching_found", p.matching_found},
                  {"parameter_breakdown", p.parameter_breakdown},
                  {"clusters_broken", p.classification.broken},
                  {"clusters", clusters},
                  {"original_fit", fit_json(p.original_fit)},
                  {"contaminated_fit", fit_json(p.contaminated_fit)},
                  {"original_labels", labels_json(p.original_partition)},
                  {"restricted_labels", labels_json(p.restricted_partition)}};
  }
  return j;
}

namespace detail {

inline Output cmd_fit(const RunConfig& rc) {
  if (!rc.s) throw InputError("fit: --s is required");
  const Dataset data = read_data(rc.data);
  const FitResult f = fit(data, *rc.s, Family::parse(rc.family), NoiseRegime::parse(rc.noise), rc.fit_config());
  Output o;
  o.result = fit_json(f);
  o.header = {"x", "density"};
  const double pad = 3.0 * std::max(data.ml_sd(), rc.sigma0);
  const double lo = data.min() - pad;
  const double hi = data.max() + pad;
  constexpr int kGrid = 200;
  for (int k = 0; k <= kGrid; ++k) {
    const double x = lo + (hi - lo) * k / kGrid;
    o.table.push_back({fmt(x), fmt(mixture_density(f.params, x))});
  }
  return o;
}

inline Output cmd_select(const RunConfig& rc) {
  const Dataset data = read_data(rc.data);
  const SelectionResult sel = select_order(data, Family::parse(rc.family), NoiseRegime::parse(rc.noise),
                                           rc.fit_config(), parse_criterion(rc.criterion), rc.s_max);
  Output o;
  Json table = Json::array();
  o.header = {"s", "loglik", "k", "criterion"};
  for (const auto& row : sel.per_order) {
    table.push_back({{"s", row.s},
                     {"loglik", num(row.loglik)},
                     {"k", row.k},
                     {"criterion", num(row.value)},
                     {"converged", row.fit.converged}});
    o.table.push_back({std::to_string(row.s), fmt(row.loglik), std::to_string(row.k), fmt(row.value)});
  }
  o.result = {{"criterion", to_string(sel.criterion)},
              {"chosen", sel.chosen},
              {"capped", sel.capped},
              {"all_converged", sel.all_converged},
              {"table", table},
              {"fit", fit_json(sel.best())}};
  return o;
}

inline Output cmd_classify(const RunConfig& rc) {
  const Dataset data = read_data(rc.data);
  const Family fam = Family::parse(rc.family);
  const NoiseRegime regime = NoiseRegime::parse(rc.noise);
  const FitResult f = rc.s ? fit(data, *rc.s, fam, regime, rc.fit_config())
                           : select_order(data, fam, regime, rc.fit_config(), parse_criterion(rc.criterion), rc.s_max)
                                 .best();
  const Partition part = classify(f.params, data);
  Output o;
  Json sizes = Json::array();
  for (const auto& c : part.clusters()) sizes.push_back(c.size());
  o.result = {{"fit", fit_json(f)},
              {"labels", labels_json(part)},
              {"cluster_sizes", sizes},
              {"noise_count", part.noise().size()}};
  o.header = {"x", "label"};
  for (std::size_t i = 0; i < data.size(); ++i) o.table.push_back({fmt(data[i]), std::to_string(part.label(i))});
  return o;
}

inline std::string canonical_certificate(const std::string& c) {
  if (c == "improper-noise" || c == "4.11") return "improper-noise";
  if (c == "bic" || c == "4.13" || c == "4.16") return "bic";
  if (c == "bic-gross") return "bic-gross";
  throw InputError("unknown certificate '" + c + "' (improper-noise, bic, bic-gross)");
}

inline Output cmd_bound(const RunConfig& rc) {
  const Dataset data = read_data(rc.data);
  const Family fam = Family::parse(rc.family);
  const NoiseRegime regime = NoiseRegime::parse(rc.noise);
  const std::string cert = canonical_certificate(rc.certificate);
  BreakdownReport r;
  if (cert == "improper-noise") {
    if (regime.kind != NoiseRegime::Kind::improper) throw InputError("bound: improper-noise needs --noise improper:b");
    if (!rc.s) throw InputError("bound: improper-noise needs --s");
    r = improper_noise_certificate(data, *rc.s, fam, regime.level, rc.sigma0, rc.fit_config(), rc.g_max);
  } else {
    if (rc.criterion != "bic") throw InputError("bound: BIC certificates need --criterion bic");
    r = cert == "bic" ? bic_no_breakdown_certificate(data, fam, regime, rc.sigma0, rc.fit_config(), rc.g_max, rc.s)
                      : bic_gross_outlier_breakdown(data, fam, regime, rc.sigma0, rc.fit_config(), rc.s);
  }
  Output o;
  o.result = report_json(r);
  o.result["certificate"] = cert;
  o.header = {"g", "value", "holds"};
  for (const auto& row : r.rows) o.table.push_back({std::to_string(row.g), fmt(row.value), row.holds ? "1" : "0"});
  if (!r.converged) o.exit = ExitCode::not_converged;
  return o;
}

inline Output cmd_search(const RunConfig& rc) {
  const Dataset data = read_data(rc.data);
  const Family fam = Family::parse(rc.family);
  const NoiseRegime regime = NoiseRegime::parse(rc.noise);
  Output o;
  if (rc.mode == "outlier-threshold") {
    if (!rc.s) throw InputError("search: outlier-threshold needs --s");
    ThresholdOptions opt;
    opt.ceiling = rc.ceiling;
    const BreakdownReport r = empirical_outlier_threshold(data, *rc.s, fam, regime, rc.sigma0, rc.fit_config(), opt);
    o.result = report_json(r);
    o.header = {"y", "broken"};
    for (const auto& t : r.search->trace) o.table.push_back({fmt(t.y), t.broken ? "1" : "0"});
  } else if (rc.mode == "probe") {
    if (rc.add.empty()) throw InputError("search: probe needs --add");
    const auto added = parse_list(rc.add);
    ProbeMode mode = rc.s ? ProbeMode(FixedOrder{*rc.s})
                          : ProbeMode(EstimatedOrder{parse_criterion(rc.criterion), rc.s_max});
    const BreakdownReport r = empirical_contamination_probe(data, added, fam, regime, rc.sigma0, rc.fit_config(), mode);
    o.result = report_json(r);
    o.header = {"x", "original_label", "contaminated_label"};
    for (std::size_t i = 0; i < data.size(); ++i) {
      o.table.push_back({fmt(data[i]), std::to_string(r.probe->original_partition.label(i)),
                         std::to_string(r.probe->restricted_partition.label(i))});
    }
  } else {
    throw InputError("unknown search mode '" + rc.mode + "' (outlier-threshold, probe)");
  }
  return o;
}

inline Output cmd_calibrate(const RunConfig& rc) {
  const CalibrationResult c = calibrate(rc.n, rc.p, rc.sigma_max, Family::parse(rc.family), rc.fit_config());
  Output o;
  Json trace = Json::array();
  o.header = {"c0", "criterion_gap"};
  for (const auto& t : c.trace) {
    trace.push_back({{"c0", num(t.c0)}, {"criterion_gap", num(t.criterion_gap)}});
    o.table.push_back({fmt(t.c0), fmt(t.criterion_gap)});
  }
  o.result = {{"c0", num(c.c0)},
              {"sigma0", num(c.scale_floor)},
              {"b", num(c.noise_level)},
              {"alpha_n", num(c.alpha_n)},
              {"p", num(c.p)},
              {"sigma_max", num(c.sigma_max)},
              {"n", c.n},
              {"outlier_alpha", num(c.outlier_alpha)},
              {"outlier_position", num(c.outlier_position)},
              {"residual", num(c.residual)},
              {"trace", trace}};
  return o;
}

inline Output cmd_nsd(const RunConfig& rc) {
  const auto values = nsd_values(rc.a, rc.var, rc.n);
  Output o;
  Json arr = Json::array();
  o.header = {"i", "value"};
  for (std::size_t i = 0; i < values.size(); ++i) {
    arr.push_back(num(values[i]));
    o.table.push_back({std::to_string(i + 1), fmt(values[i])});
  }
  o.result = {{"values", arr}};
  return o;
}

inline Json config_json(const RunConfig& rc) {
  Json c = {{"data", rc.data},         {"family", rc.family},       {"noise", rc.noise},
            {"sigma0", num(rc.sigma0)}, {"criterion", rc.criterion}, {"restarts", rc.restarts},
            {"seed", rc.seed},          {"max_iters", rc.max_iters}, {"rel_tol", num(rc.rel_tol)}};
  c["s"] = rc.s ? Json(*rc.s) : Json(nullptr);
  c["s_max"] = rc.s_max;
  if (rc.command == "bound") {
    c["certificate"] = canonical_certificate(rc.certificate);
    c["g_max"] = rc.g_max;
  }
  if (rc.command == "search") {
    c["mode"] = rc.mode;
    c["add"] = rc.add;
    c["ceiling"] = num(rc.ceiling);
  }
  if (rc.command == "calibrate") {
    c["n"] = rc.n;
    c["p"] = num(rc.p);
    c["sigma_max"] = num(rc.sigma_max);
  }
  if (rc.command == "nsd") {
    c["a"] = num(rc.a);
    c["var"] = num(rc.var);
    c["n"] = rc.n;
  }
  return c;
}

inline void add_common(CLI::App* sub, RunConfig& rc, bool needs_data) {
  auto* d = sub->add_option("--data", rc.data, "newline-delimited input values");
  if (needs_data) d->required()->check(CLI::ExistingFile);
  sub->add_option("--family", rc.family, "normal | t:nu | huber[:k]")->capture_default_str();
  sub->add_option("--noise", rc.noise, "none | range | improper:b")->capture_default_str();
  sub->add_option("--sigma0", rc.sigma0, "scale floor")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--criterion", rc.criterion, "aic | bic")->capture_default_str()->check(CLI::IsMember({"aic", "bic"}));
  sub->add_option("--restarts", rc.restarts, "EM starts per order")->capture_default_str()->check(CLI::Range(1, 100000));
  sub->add_option("--seed", rc.seed, "random start seed")->capture_default_str();
  sub->add_option("--max-iters", rc.max_iters, "EM iteration cap")->capture_default_str()->check(CLI::Range(1, 100000000));
  sub->add_option("--rel-tol", rc.rel_tol, "EM relative tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--threads", rc.threads, "worker threads (default $LSMIX_THREADS or 1)");
  sub->add_option("--out", rc.out, "report path (default stdout)");
  sub->add_option("--format", rc.format, "json | csv (nsd also: text)")->check(CLI::IsMember({"json", "csv", "text"}));
  sub->add_option("--plot-data", rc.plot_data, "CSV plot data path");
}

/// Argument list minus output destinations, thread count and rerun source.
inline std::vector<std::string> echo_args(const std::vector<std::string>& args) {
  static const std::vector<std::string> kDrop = {"--out", "--plot-data", "--threads", "--from-report", "--format"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    bool dropped = false;
    for (const auto& d : kDrop) {
      if (a == d) {
        ++i;
        dropped = true;
      } else if (a.rfind(d + "=", 0) == 0) {
        dropped = true;
      }
    }
    if (!dropped) out.push_back(a);
  }
  return out;
}

/// Replace --from-report FILE with the argument list echoed in that report.
inline std::vector<std::string> expand_rerun(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::optional<std::string> source;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--from-report") {
      if (i + 1 >= args.size()) throw InputError("--from-report needs a path");
      source = args[++i];
    } else if (args[i].rfind("--from-report=", 0) == 0) {
      source = args[i].substr(14);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!source) return args;
  std::ifstream in(*source);
  if (!in) throw InputError("cannot open report '" + *source + "'");
  Json report;
  try {
    report = Json::parse(in);
  } catch (const Json::exception& e) {
    throw InputError("report '" + *source + "' is not valid JSON: " + e.what());
  }
  if (!report.contains("args") || !report["args"].is_array()) throw InputError("report has no echoed args");
  auto out = report["args"].get<std::vector<std::string>>();
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

}  // namespace detail

/// Runs one CLI invocation (args exclude the program name) and returns the exit code.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  CLI::App app{"Location-scale mixture fitting and breakdown analysis", "lsmix"};
  app.require_subcommand(1);
  auto* fit_cmd = app.add_subcommand("fit", "fit an s-component mixture");
  auto* select_cmd = app.add_subcommand("select", "choose the order by AIC/BIC");
  auto* classify_cmd = app.add_subcommand("classify", "posterior classification");
  auto* bound_cmd = app.add_subcommand("bound", "breakdown certificates");
  auto* search_cmd = app.add_subcommand("search", "empirical breakdown searches");
  auto* calibrate_cmd = app.add_subcommand("calibrate", "tune the scale floor and noise level");
  auto* nsd_cmd = app.add_subcommand("nsd", "Normal standard dataset");
  for (auto* sub : {fit_cmd, select_cmd, classify_cmd, bound_cmd, search_cmd}) detail::add_common(sub, rc, true);
  for (auto* sub : {calibrate_cmd, nsd_cmd}) detail::add_common(sub, rc, false);
  for (auto* sub : {fit_cmd, select_cmd, classify_cmd, bound_cmd, search_cmd}) {
    sub->add_option("--s", rc.s, "number of components")->check(CLI::Range(1, 1000));
    sub->add_option("--s-max", rc.s_max, "largest order in the sweep")->capture_default_str()->check(CLI::Range(1, 1000));
  }
  auto* cert = bound_cmd->add_option("--certificate", rc.certificate, "improper-noise | bic | bic-gross")
                   ->capture_default_str();
  bound_cmd->add_option("--theorem", rc.certificate, "alias: 4.11 | 4.13 | 4.16")->excludes(cert);
  bound_cmd->add_option("--g-max", rc.g_max, "largest g checked (default 2n)");
  search_cmd->add_option("--mode", rc.mode, "outlier-threshold | probe")
      ->capture_default_str()
      ->check(CLI::IsMember({"outlier-threshold", "probe"}));
  search_cmd->add_option("--add", rc.add, "comma-separated points to add (probe)");
  search_cmd->add_option("--ceiling", rc.ceiling, "largest outlier position tried")->capture_default_str();
  calibrate_cmd->add_option("--n", rc.n, "benchmark size")->capture_default_str()->check(CLI::Range(3, 1000000));
  calibrate_cmd->add_option("--p", rc.p, "target probability")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  calibrate_cmd->add_option("--sigma-max", rc.sigma_max, "application scale ceiling")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  nsd_cmd->add_option("--a", rc.a, "location")->capture_default_str();
  nsd_cmd->add_option("--var", rc.var, "variance")->capture_default_str()->check(CLI::PositiveNumber);
  nsd_cmd->add_option("--n", rc.n, "number of points")->capture_default_str()->check(CLI::Range(1, 100000000));

  try {
    args = detail::expand_rerun(args);
    rc.echo = detail::echo_args(args);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ExitCode::ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return ExitCode::ok;
  } catch (const CLI::ParseError& e) {
    err << "lsmix: " << e.what() << '\n';
    return ExitCode::invalid_input;
  } catch (const std::exception& e) {
    err << "lsmix: " << e.what() << '\n';
    return ExitCode::invalid_input;
  }
  rc.command = app.get_subcommands().front()->get_name();
  if (rc.threads == 0) rc.threads = default_threads();
  if (rc.format.empty()) rc.format = rc.command == "nsd" ? "text" : "json";
  if (rc.format == "text" && rc.command != "nsd") {
    err << "lsmix: --format text is only available for nsd\n";
    return ExitCode::invalid_input;
  }

  try {
    Output o;
    if (rc.command == "fit") o = detail::cmd_fit(rc);
    if (rc.command == "select") o = detail::cmd_select(rc);
    if (rc.command == "classify") o = detail::cmd_classify(rc);
    if (rc.command == "bound") o = detail::cmd_bound(rc);
    if (rc.command == "search") o = detail::cmd_search(rc);
    if (rc.command == "calibrate") o = detail::cmd_calibrate(rc);
    if (rc.command == "nsd") o = detail::cmd_nsd(rc);

    std::string body;
    if (rc.format == "json") {
      Json report = {{"schema_version", kSchemaVersion},
                     {"command", rc.command},
                     {"args", rc.echo},
                     {"config", detail::config_json(rc)},
                     {"result", o.result}};
      body = report.dump(2) + "\n";
    } else if (rc.format == "csv") {
      body = to_csv(o);
    } else {
      for (const auto& row : o.table) body += row[1] + "\n";
    }
    if (rc.out.empty()) {
      out << body;
    } else {
      write_atomic(rc.out, body);
    }
    if (!rc.plot_data.empty()) write_atomic(rc.plot_data, to_csv(o));
    if (o.exit == ExitCode::not_converged) err << "lsmix: optimizer did not converge for every fit\n";
    return o.exit;
  } catch (const HypothesisViolated& e) {
    err << "lsmix: hypothesis violated: " << e.what() << '\n';
    return ExitCode::hypothesis_violated;
  } catch (const CalibrationError& e) {
    err << "lsmix: " << e.what() << '\n';
    return ExitCode::not_converged;
  } catch (const InputError& e) {
    err << "lsmix: " << e.what() << '\n';
    return ExitCode::invalid_input;
  } catch (const std::invalid_argument& e) {
    err << "lsmix: " << e.what() << '\n';
    return ExitCode::invalid_input;
  } catch (const std::exception& e) {
    err << "lsmix: " << e.what() << '\n';
    return ExitCode::failure;
  }
}

}  // namespace lsmix::cli
