#include "spellkit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "spellkit/errors.hpp"
#include "spellkit/io.hpp"
#include "spellkit/rng.hpp"

namespace spellkit {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr Variable kVariables[] = {Variable::it, Variable::ws, Variable::ds,
                                   Variable::wch, Variable::dch};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

int variable_index(Variable v) { return static_cast<int>(v); }

std::uint64_t gof_stream_id(int period_idx, Method m, Variable v) {
  return 0x60fULL * 1000 + static_cast<std::uint64_t>(period_idx) * 64 +
         static_cast<std::uint64_t>(m == Method::im) * 16 +
         static_cast<std::uint64_t>(variable_index(v));
}

MethodReport build_method_report(Method method, PeriodReport& pr,
                                 const PipelineConfig& cfg, int period_idx) {
  MethodOptions mopt;
  mopt.alpha = cfg.alpha;
  mopt.fit.s_nonneg = !cfg.allow_negative_s;
  mopt.fit.seed = cfg.seed ^ 0x5f3c9d2eULL;

  MethodReport mr;
  mr.method = method;
  mr.bundle = method == Method::dm
                  ? run_dm(pr.samples.it, mopt)
                  : run_im(pr.samples.ws, pr.samples.ds, mopt);

  std::vector<QuantilePair> q_pairs;
  for (Variable v : kVariables) {
    const SpellSample& sample = [&]() -> const SpellSample& {
      switch (v) {
        case Variable::it: return pr.samples.it;
        case Variable::ws: return pr.samples.ws;
        case Variable::ds: return pr.samples.ds;
        case Variable::wch: return pr.samples.wch;
        case Variable::dch: return pr.samples.dch;
      }
      throw std::invalid_argument("unknown variable");
    }();
    if (sample.values.empty()) continue;

    GofOptions gopt;
    gopt.replicates = cfg.replicates;
    gopt.smooth = cfg.smooth_outliers;
    const RngStream rng(cfg.seed, gof_stream_id(period_idx, method, v));
    const GofResult g = mc_gof(sample.values, mr.bundle[v].table, rng, gopt);
    mr.gof[v] = GofSummary{g.chi2_ref, g.p_value, cfg.replicates, g.smoothed};

    if (sample.n() < 100)
      pr.notes.push_back(std::string(variable_name(v)) + " (" +
                         method_name(method) +
                         "): 99th-percentile comparison on fewer than 100 values");
    const QuantilePair qp = quantile_compare(sample, mr.bundle[v].table, 0.99);
    mr.q99[v] = qp;
    q_pairs.push_back(qp);
  }
  mr.see_q99 = see(q_pairs);
  return mr;
}

PeriodReport build_period_report(const RainyIndicator& ind, const SeasonSpec& season,
                                 const PipelineConfig& cfg, int period_idx,
                                 const std::string& station) {
  ExtractionConfig ecfg;
  ecfg.threshold = cfg.threshold;

  PeriodReport pr;
  pr.period = season.name;
  pr.samples = extract_all(ind, season, ecfg);
  for (SpellSample* s : {&pr.samples.it, &pr.samples.ws, &pr.samples.ds,
                         &pr.samples.wch, &pr.samples.dch})
    s->station = station;

  for (Variable v : kVariables) {
    const SpellSample& sample = [&]() -> const SpellSample& {
      switch (v) {
        case Variable::it: return pr.samples.it;
        case Variable::ws: return pr.samples.ws;
        case Variable::ds: return pr.samples.ds;
        case Variable::wch: return pr.samples.wch;
        case Variable::dch: return pr.samples.dch;
      }
      throw std::invalid_argument("unknown variable");
    }();
    if (sample.values.empty()) {
      pr.notes.push_back(std::string(variable_name(v)) + ": no observations");
      continue;
    }
    pr.stats[v] = summary_stats(sample);
    pr.ratios[v] = survival_ratios(sample, 10);
    if ((v == Variable::it || v == Variable::ws || v == Variable::ds)) {
      std::vector<double> as_real(sample.values.begin(), sample.values.end());
      if (as_real.size() >= 20)
        pr.trends[v] = mk_test_corrected(as_real);
      else
        pr.notes.push_back(std::string(variable_name(v)) +
                           ": too short for trend tests");
    }
  }
  if (!pr.samples.ws.values.empty() && !pr.samples.wch.values.empty())
    pr.ws_wch_ratio = cumfreq_ratio(pr.samples.ws, pr.samples.wch);
  if (!pr.samples.ds.values.empty() && !pr.samples.dch.values.empty())
    pr.ds_dch_ratio = cumfreq_ratio(pr.samples.ds, pr.samples.dch);

  // A failure here aborts the period but not the report: the error is
  // recorded and the report marked incomplete by the caller.
  const std::string context = "station " + station + ", period " + season.name + ": ";
  try {
    if (cfg.method != PipelineConfig::MethodChoice::im)
      pr.methods.push_back(build_method_report(Method::dm, pr, cfg, period_idx));
    if (cfg.method != PipelineConfig::MethodChoice::dm)
      pr.methods.push_back(build_method_report(Method::im, pr, cfg, period_idx));
  } catch (const std::invalid_argument& e) {
    pr.errors.push_back(context + e.what());
    pr.data_error = true;
  } catch (const std::exception& e) {
    pr.errors.push_back(context + e.what());
  }
  return pr;
}

ordered_json params_json(const LerchParams& p) {
  return ordered_json{{"theta", p.theta}, {"s", p.s}, {"a", p.a}};
}

ordered_json variable_json(const MethodReport& mr, Variable v) {
  const VariableModel& vm = mr.bundle[v];
  ordered_json j;
  j["provenance"] = vm.provenance == Provenance::fitted ? "fitted" : "derived";
  if (vm.fit) {
    j["family"] = family_name(vm.fit->family);
    j["params"] = params_json(vm.fit->params);
    j["loglik"] = vm.fit->loglik;
    j["n"] = vm.fit->n;
    j["converged"] = vm.fit->converged;
    if (!vm.fit->warnings.empty()) j["warnings"] = vm.fit->warnings;
  } else if (vm.derived_params) {
    j["family"] = family_name(Family::geometric);
    j["params"] = params_json(*vm.derived_params);
  }
  j["table_max_k"] = vm.table.max_k();
  j["tail_mass"] = vm.table.tail_mass();
  if (vm.trace) {
    ordered_json sel = ordered_json::array();
    for (const auto& e : vm.trace->entries) {
      ordered_json je;
      je["family"] = family_name(e.family);
      if (e.fit) {
        je["loglik"] = e.fit->loglik;
        je["converged"] = e.fit->converged;
      }
      if (e.vs_full) {
        je["d"] = e.vs_full->d;
        je["df"] = e.vs_full->df;
        je["p"] = e.vs_full->p;
      }
      if (!e.decision.empty()) je["decision"] = e.decision;
      if (!e.error.empty()) je["error"] = e.error;
      sel.push_back(je);
    }
    j["selection"] = sel;
    j["chosen"] = family_name(vm.trace->chosen);
  }
  if (const auto it = mr.gof.find(v); it != mr.gof.end()) {
    j["gof"] = ordered_json{{"chi2_ref", it->second.chi2_ref},
                            {"p_value", it->second.p_value},
                            {"replicates", it->second.replicates},
                            {"smoothed", it->second.smoothed}};
  }
  if (const auto it = mr.q99.find(v); it != mr.q99.end()) {
    j["q99"] = ordered_json{{"empirical", it->second.empirical},
                            {"theoretical", it->second.theoretical}};
  }
  return j;
}

}  // namespace

StationReport run_pipeline(const PipelineConfig& config) {
  if (config.replicates < 100)
    throw std::invalid_argument("run_pipeline: replicates must be >= 100");
  if (!(config.alpha > 0.0 && config.alpha < 1.0))
    throw std::invalid_argument("run_pipeline: alpha must be in (0, 1)");
  if (!(config.threshold > 0.0))
    throw std::invalid_argument("run_pipeline: threshold must be > 0");

  StationReport report;
  report.config = config;
  report.station =
      !config.station.empty() ? config.station : config.input.stem().string();

  const ParsedSeries parsed = parse_series(config.input);
  report.warnings = parsed.warnings;

  const RainyIndicator ind = mark_rainy(parsed.series, config.threshold);

  std::vector<SeasonSpec> seasons;
  switch (config.seasons) {
    case PipelineConfig::Seasons::year: seasons = {SeasonSpec::year()}; break;
    case PipelineConfig::Seasons::s1: seasons = {SeasonSpec::s1()}; break;
    case PipelineConfig::Seasons::s2: seasons = {SeasonSpec::s2()}; break;
    case PipelineConfig::Seasons::all:
      seasons = {SeasonSpec::year(), SeasonSpec::s1(), SeasonSpec::s2()};
      break;
  }

  int period_idx = 0;
  for (const SeasonSpec& season : seasons) {
    report.periods.push_back(
        build_period_report(ind, season, config, period_idx, report.station));
    if (!report.periods.back().errors.empty()) report.complete = false;
    ++period_idx;
  }

  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    std::ofstream out(config.out_dir / "report.json", std::ios::binary);
    if (!out)
      throw ParseError("cannot write report to " + config.out_dir.string());
    out << report_to_json(report);
    emit_plot_tables(report, config.out_dir);
  }
  return report;
}

std::string report_to_json(const StationReport& report) {
  ordered_json j;
  j["schema_version"] = report.schema_version;
  j["station"] = report.station;
  j["seed"] = report.config.seed;
  j["config"] = ordered_json{
      {"input", report.config.input.string()},
      {"threshold", report.config.threshold},
      {"seasons",
       report.config.seasons == PipelineConfig::Seasons::all    ? "all"
       : report.config.seasons == PipelineConfig::Seasons::year ? "year"
       : report.config.seasons == PipelineConfig::Seasons::s1   ? "s1"
                                                                : "s2"},
      {"method",
       report.config.method == PipelineConfig::MethodChoice::both ? "both"
       : report.config.method == PipelineConfig::MethodChoice::dm ? "dm"
                                                                  : "im"},
      {"replicates", report.config.replicates},
      {"alpha", report.config.alpha},
      {"smooth_outliers", report.config.smooth_outliers},
      {"allow_negative_s", report.config.allow_negative_s}};
  j["complete"] = report.complete;
  j["warnings"] = report.warnings;

  ordered_json periods = ordered_json::array();
  for (const PeriodReport& pr : report.periods) {
    ordered_json jp;
    jp["period"] = pr.period;

    ordered_json sizes;
    for (Variable v : kVariables) {
      const SpellSample& s = [&]() -> const SpellSample& {
        switch (v) {
          case Variable::it: return pr.samples.it;
          case Variable::ws: return pr.samples.ws;
          case Variable::ds: return pr.samples.ds;
          case Variable::wch: return pr.samples.wch;
          case Variable::dch: return pr.samples.dch;
        }
        throw std::invalid_argument("unknown variable");
      }();
      sizes[variable_name(v)] = s.n();
    }
    jp["sample_sizes"] = sizes;

    ordered_json stats;
    for (const auto& [v, st] : pr.stats) {
      ordered_json js{{"min", st.min},     {"q1", st.q1},       {"median", st.median},
                      {"q3", st.q3},       {"max", st.max},     {"mean", st.mean},
                      {"stddev", st.stddev}};
      if (st.skewness) js["skewness"] = *st.skewness;
      stats[variable_name(v)] = js;
    }
    jp["summary"] = stats;

    ordered_json trends;
    for (const auto& [v, tr] : pr.trends) {
      trends[variable_name(v)] =
          ordered_json{{"tau", tr.tau},
                       {"s", tr.s},
                       {"var_s", tr.var_s},
                       {"var_corrected", tr.var_corrected},
                       {"correction_factor", tr.correction_factor},
                       {"significant_lags", tr.significant_lags},
                       {"z", tr.z},
                       {"z_corrected", tr.z_corrected},
                       {"p_classical", tr.p_classical},
                       {"p_corrected", tr.p_corrected}};
    }
    jp["trends"] = trends;

    ordered_json ratios;
    for (const auto& [v, rs] : pr.ratios) {
      ordered_json arr = ordered_json::array();
      for (const auto& pt : rs.points)
        arr.push_back(ordered_json{{"r", pt.r}, {"ratio", pt.ratio}});
      ratios[variable_name(v)] = arr;
    }
    jp["survival_ratios"] = ratios;

    const auto cum_json = [](const std::vector<CumFreqPoint>& pts) {
      ordered_json arr = ordered_json::array();
      for (const auto& pt : pts)
        arr.push_back(ordered_json{{"k", pt.k}, {"ratio", pt.ratio}});
      return arr;
    };
    jp["cumfreq_ratios"] =
        ordered_json{{"ws_wch", cum_json(pr.ws_wch_ratio)},
                     {"ds_dch", cum_json(pr.ds_dch_ratio)}};

    ordered_json methods = ordered_json::array();
    for (const MethodReport& mr : pr.methods) {
      ordered_json jm;
      jm["method"] = method_name(mr.method);
      ordered_json vars;
      for (Variable v : kVariables) vars[variable_name(v)] = variable_json(mr, v);
      jm["variables"] = vars;
      jm["see_q99"] = mr.see_q99;
      methods.push_back(jm);
    }
    jp["methods"] = methods;
    if (!pr.notes.empty()) jp["notes"] = pr.notes;
    if (!pr.errors.empty()) jp["errors"] = pr.errors;
    periods.push_back(jp);
  }
  j["periods"] = periods;
  return j.dump(2) + "\n";
}

namespace {

const SpellSample& sample_of(const PeriodReport& pr, Variable v) {
  switch (v) {
    case Variable::it: return pr.samples.it;
    case Variable::ws: return pr.samples.ws;
    case Variable::ds: return pr.samples.ds;
    case Variable::wch: return pr.samples.wch;
    case Variable::dch: return pr.samples.dch;
  }
  throw std::invalid_argument("unknown variable");
}

double ecdf_at(const std::vector<int>& values, int k) {
  long c = 0;
  for (int x : values)
    if (x <= k) ++c;
  return static_cast<double>(c) / static_cast<double>(values.size());
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ParseError("cannot write output file: " + p.string());
  return out;
}

}  // namespace

void emit_plot_tables(const StationReport& report,
                      const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);

  {  // survival ratio series
    std::ofstream out = open_out(out_dir / "ratios.csv");
    out << "station,period,variable,r,ratio\n";
    for (const auto& pr : report.periods)
      for (const auto& [v, rs] : pr.ratios)
        for (const auto& pt : rs.points)
          out << report.station << ',' << pr.period << ',' << variable_name(v)
              << ',' << pt.r << ',' << fmt(pt.ratio) << '\n';
  }

  {  // cumulative-frequency ratios (spell vs chain)
    std::ofstream out = open_out(out_dir / "cumfreq_ratios.csv");
    out << "station,period,pair,k,ratio\n";
    for (const auto& pr : report.periods) {
      for (const auto& pt : pr.ws_wch_ratio)
        out << report.station << ',' << pr.period << ",ws_wch," << pt.k << ','
            << fmt(pt.ratio) << '\n';
      for (const auto& pt : pr.ds_dch_ratio)
        out << report.station << ',' << pr.period << ",ds_dch," << pt.k << ','
            << fmt(pt.ratio) << '\n';
    }
  }

  {  // empirical vs fitted cumulative curves
    std::ofstream out = open_out(out_dir / "fit_curves.csv");
    out << "station,period,method,variable,k,empirical_cum,fitted_cum\n";
    for (const auto& pr : report.periods) {
      for (const auto& mr : pr.methods) {
        for (Variable v : kVariables) {
          const SpellSample& s = sample_of(pr, v);
          if (s.values.empty()) continue;
          const int k_max = *std::max_element(s.values.begin(), s.values.end());
          const PmfTable& tab = mr.bundle[v].table;
          for (int k = 1; k <= k_max; ++k)
            out << report.station << ',' << pr.period << ','
                << method_name(mr.method) << ',' << variable_name(v) << ',' << k
                << ',' << fmt(ecdf_at(s.values, k)) << ',' << fmt(tab.cdf(k))
                << '\n';
        }
      }
    }
  }

  {  // per-k absolute differences, both methods side by side
    std::ofstream out = open_out(out_dir / "absdiff.csv");
    out << "station,period,variable,k,absdiff_dm,absdiff_im\n";
    for (const auto& pr : report.periods) {
      const MethodReport* dm = nullptr;
      const MethodReport* im = nullptr;
      for (const auto& mr : pr.methods)
        (mr.method == Method::dm ? dm : im) = &mr;
      for (Variable v : kVariables) {
        const SpellSample& s = sample_of(pr, v);
        if (s.values.empty()) continue;
        const int k_max = *std::max_element(s.values.begin(), s.values.end());
        for (int k = 1; k <= k_max; ++k) {
          out << report.station << ',' << pr.period << ',' << variable_name(v)
              << ',' << k << ',';
          const double e = ecdf_at(s.values, k);
          if (dm)
            out << fmt(std::fabs(e - dm->bundle[v].table.cdf(k)));
          out << ',';
          if (im)
            out << fmt(std::fabs(e - im->bundle[v].table.cdf(k)));
          out << '\n';
        }
      }
    }
  }

  {  // quantile comparison with a SEE footer per method
    std::ofstream out = open_out(out_dir / "quantiles.csv");
    out << "record,station,period,method,variable,q,empirical,theoretical,see\n";
    for (const auto& pr : report.periods) {
      for (const auto& mr : pr.methods) {
        for (const auto& [v, qp] : mr.q99)
          out << "point," << report.station << ',' << pr.period << ','
              << method_name(mr.method) << ',' << variable_name(v) << ",0.99,"
              << qp.empirical << ',' << qp.theoretical << ",\n";
      }
    }
    for (const auto& pr : report.periods)
      for (const auto& mr : pr.methods)
        out << "see," << report.station << ',' << pr.period << ','
            << method_name(mr.method) << ",,0.99,,," << fmt(mr.see_q99) << '\n';
  }
}

void write_samples_csv(const StationReport& report,
                       const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "station,period,variable,value\n";
  for (const auto& pr : report.periods)
    for (Variable v : kVariables)
      for (int x : sample_of(pr, v).values)
        out << report.station << ',' << pr.period << ',' << variable_name(v)
            << ',' << x << '\n';
}

}  // namespace spellkit
