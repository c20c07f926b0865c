#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "spellkit/errors.hpp"
#include "spellkit/io.hpp"
#include "spellkit/pipeline.hpp"

namespace {

// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

void apply_thread_cap() {
#ifdef _OPENMP
  if (const char* env = std::getenv("SPELLKIT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
#endif
}

struct CommonOpts {
  std::string input;
  std::string out_dir = "spellkit_out";
  std::string season = "all";
  std::string method = "both";
  double threshold = 1.0;
  std::uint64_t seed = 0;
  int replicates = 3000;
  double alpha = 0.05;
  bool smooth_outliers = false;
  bool allow_negative_s = false;
  std::string station;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--input", o.input, "daily rainfall CSV (date,depth_mm)")
      ->required();
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--threshold", o.threshold, "rainy-day threshold in mm")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--season", o.season, "year|s1|s2|all")
      ->check(CLI::IsMember({"year", "s1", "s2", "all"}));
  cmd->add_option("--method", o.method, "dm|im|both")
      ->check(CLI::IsMember({"dm", "im", "both"}));
  cmd->add_option("--seed", o.seed, "master seed for all stochastic steps");
  cmd->add_option("--replicates", o.replicates, "Monte-Carlo replicates")
      ->check(CLI::Range(100, 1000000));
  cmd->add_option("--alpha", o.alpha, "significance level");
  cmd->add_flag("--smooth-outliers", o.smooth_outliers,
                "smooth isolated outlier frequencies before the fit test");
  cmd->add_flag("--allow-negative-s", o.allow_negative_s,
                "lift the s >= 0 fitting constraint");
  cmd->add_option("--station", o.station, "station label (default: file stem)");
}

spellkit::PipelineConfig to_config(const CommonOpts& o, bool want_out) {
  spellkit::PipelineConfig cfg;
  cfg.input = o.input;
  if (want_out) cfg.out_dir = o.out_dir;
  cfg.station = o.station;
  cfg.threshold = o.threshold;
  cfg.seasons = o.season == "year" ? spellkit::PipelineConfig::Seasons::year
                : o.season == "s1" ? spellkit::PipelineConfig::Seasons::s1
                : o.season == "s2" ? spellkit::PipelineConfig::Seasons::s2
                                   : spellkit::PipelineConfig::Seasons::all;
  cfg.method = o.method == "dm"   ? spellkit::PipelineConfig::MethodChoice::dm
               : o.method == "im" ? spellkit::PipelineConfig::MethodChoice::im
                                  : spellkit::PipelineConfig::MethodChoice::both;
  cfg.seed = o.seed;
  cfg.replicates = o.replicates;
  cfg.alpha = o.alpha;
  cfg.smooth_outliers = o.smooth_outliers;
  cfg.allow_negative_s = o.allow_negative_s;
  return cfg;
}

void print_fit_summary(const spellkit::StationReport& report, std::ostream& os) {
  os << "station,period,method,variable,provenance,family,theta,s,a,loglik,n,"
        "converged\n";
  for (const auto& pr : report.periods) {
    for (const auto& mr : pr.methods) {
      for (spellkit::Variable v :
           {spellkit::Variable::it, spellkit::Variable::ws, spellkit::Variable::ds,
            spellkit::Variable::wch, spellkit::Variable::dch}) {
        const auto& vm = mr.bundle[v];
        if (!vm.fit && !vm.derived_params) continue;
        os << report.station << ',' << pr.period << ','
           << spellkit::method_name(mr.method) << ',' << spellkit::variable_name(v)
           << ',' << (vm.provenance == spellkit::Provenance::fitted ? "fitted" : "derived")
           << ',';
        if (vm.fit)
          os << spellkit::family_name(vm.fit->family) << ',' << vm.fit->params.theta
             << ',' << vm.fit->params.s << ',' << vm.fit->params.a << ','
             << vm.fit->loglik << ',' << vm.fit->n << ',' << vm.fit->converged;
        else
          os << "geometric," << vm.derived_params->theta << ','
             << vm.derived_params->s << ',' << vm.derived_params->a << ",,,";
        os << '\n';
      }
    }
  }
}

void print_gof_summary(const spellkit::StationReport& report, std::ostream& os) {
  os << "station,period,method,variable,chi2_ref,p_value,replicates,smoothed\n";
  for (const auto& pr : report.periods)
    for (const auto& mr : pr.methods)
      for (const auto& [v, g] : mr.gof)
        os << report.station << ',' << pr.period << ','
           << spellkit::method_name(mr.method) << ',' << spellkit::variable_name(v)
           << ',' << g.chi2_ref << ',' << g.p_value << ',' << g.replicates << ','
           << (g.smoothed ? 1 : 0) << '\n';
}

void print_trend_summary(const spellkit::StationReport& report, std::ostream& os) {
  os << "station,period,variable,n,tau,s,var_s,var_corrected,correction_factor,"
        "significant_lags,z,z_corrected,p_classical,p_corrected\n";
  for (const auto& pr : report.periods)
    for (const auto& [v, tr] : pr.trends) {
      std::size_t n = 0;
      switch (v) {
        case spellkit::Variable::it: n = pr.samples.it.n(); break;
        case spellkit::Variable::ws: n = pr.samples.ws.n(); break;
        case spellkit::Variable::ds: n = pr.samples.ds.n(); break;
        default: break;
      }
      os << report.station << ',' << pr.period << ',' << spellkit::variable_name(v)
         << ',' << n << ',' << tr.tau << ',' << tr.s << ',' << tr.var_s << ','
         << tr.var_corrected << ',' << tr.correction_factor << ','
         << tr.significant_lags << ',' << tr.z << ',' << tr.z_corrected << ','
         << tr.p_classical << ',' << tr.p_corrected << '\n';
    }
}

std::ofstream open_or_die(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw spellkit::ParseError("cannot write output file: " + p.string());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap();

  CLI::App app{"spellkit - rainfall spell and inter-arrival time modelling"};
  app.require_subcommand(1);

  CommonOpts opts;
  CLI::App* cmd_extract = app.add_subcommand(
      "extract", "extract it/ws/ds/wch/dch samples from a rainfall series");
  CLI::App* cmd_fit = app.add_subcommand(
      "fit", "fit the discrete law family and select a model per variable");
  CLI::App* cmd_gof = app.add_subcommand(
      "gof", "Monte-Carlo goodness-of-fit for every variable and method");
  CLI::App* cmd_trend = app.add_subcommand(
      "trend", "Mann-Kendall trend tests with autocorrelation correction");
  CLI::App* cmd_report = app.add_subcommand(
      "report", "full pipeline: extract, fit, test, diagnose, write tables");
  for (CLI::App* c : {cmd_extract, cmd_fit, cmd_gof, cmd_trend, cmd_report})
    add_common(c, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    namespace fs = std::filesystem;
    if (cmd_extract->parsed()) {
      // extraction needs no fitting or randomness
      spellkit::PipelineConfig cfg = to_config(opts, false);
      spellkit::StationReport report;
      report.config = cfg;
      report.station = !cfg.station.empty() ? cfg.station : cfg.input.stem().string();
      const auto parsed = spellkit::parse_series(cfg.input);
      const auto ind = spellkit::mark_rainy(parsed.series, cfg.threshold);
      std::vector<spellkit::SeasonSpec> seasons;
      switch (cfg.seasons) {
        case spellkit::PipelineConfig::Seasons::year:
          seasons = {spellkit::SeasonSpec::year()};
          break;
        case spellkit::PipelineConfig::Seasons::s1:
          seasons = {spellkit::SeasonSpec::s1()};
          break;
        case spellkit::PipelineConfig::Seasons::s2:
          seasons = {spellkit::SeasonSpec::s2()};
          break;
        case spellkit::PipelineConfig::Seasons::all:
          seasons = {spellkit::SeasonSpec::year(), spellkit::SeasonSpec::s1(),
                     spellkit::SeasonSpec::s2()};
          break;
      }
      for (const auto& season : seasons) {
        spellkit::PeriodReport pr;
        pr.period = season.name;
        pr.samples = spellkit::extract_all(ind, season, {cfg.threshold});
        report.periods.push_back(std::move(pr));
      }
      fs::create_directories(opts.out_dir);
      spellkit::write_samples_csv(report, fs::path(opts.out_dir) / "samples.csv");
      std::cout << "wrote " << (fs::path(opts.out_dir) / "samples.csv").string()
                << '\n';
      return 0;
    }

    spellkit::PipelineConfig cfg = to_config(opts, cmd_report->parsed());
    const spellkit::StationReport report = spellkit::run_pipeline(cfg);

    bool any_data_error = false;
    bool any_error = false;
    for (const auto& pr : report.periods) {
      for (const auto& e : pr.errors) std::cerr << "error: " << e << '\n';
      any_error |= !pr.errors.empty();
      any_data_error |= pr.data_error;
    }

    fs::create_directories(opts.out_dir);
    if (cmd_fit->parsed()) {
      auto out = open_or_die(fs::path(opts.out_dir) / "fits.csv");
      print_fit_summary(report, out);
      print_fit_summary(report, std::cout);
    } else if (cmd_gof->parsed()) {
      auto out = open_or_die(fs::path(opts.out_dir) / "gof.csv");
      print_gof_summary(report, out);
      print_gof_summary(report, std::cout);
    } else if (cmd_trend->parsed()) {
      auto out = open_or_die(fs::path(opts.out_dir) / "trend.csv");
      print_trend_summary(report, out);
      print_trend_summary(report, std::cout);
    } else if (cmd_report->parsed()) {
      auto out = open_or_die(fs::path(opts.out_dir) / "fits.csv");
      print_fit_summary(report, out);
      auto gout = open_or_die(fs::path(opts.out_dir) / "gof.csv");
      print_gof_summary(report, gout);
      auto tout = open_or_die(fs::path(opts.out_dir) / "trend.csv");
      print_trend_summary(report, tout);
      spellkit::write_samples_csv(report, fs::path(opts.out_dir) / "samples.csv");
      std::cout << "report written to "
                << (fs::path(opts.out_dir) / "report.json").string()
                << (report.complete ? "" : " (incomplete)") << '\n';
    }
    if (any_error) return any_data_error ? kExitData : kExitNumerical;
    return 0;
  } catch (const spellkit::ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const spellkit::NonConvergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
