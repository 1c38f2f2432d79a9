#include "memcap/memcap.h"

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/experiments.hpp"
#include "core/io.hpp"
#include "core/phase.hpp"
#include "core/signal.hpp"

using namespace memcap;

extern "C" {

struct mc_config {
  FullConfig rep;
};

struct mc_table {
  std::vector<std::string> col_names;
  std::vector<std::vector<double>> cols;  // column-major
  std::string label_name;
  std::vector<std::string> labels;  // empty or one per row
  std::size_t rows = 0;
};

struct mc_report {
  ExperimentReport rep;
  std::string json;
};

}  // extern "C"

namespace {

thread_local std::string g_last_error;

mc_status status_of(const Error& e) {
  switch (e.code()) {
    case ErrorCode::Validation: return MC_ERR_VALIDATION;
    case ErrorCode::Domain: return MC_ERR_DOMAIN;
    case ErrorCode::StepBudgetExceeded:
    case ErrorCode::StepUnderflow:
    case ErrorCode::NonFinite: return MC_ERR_NUMERIC;
    case ErrorCode::InsufficientSpikes:
    case ErrorCode::NoLimitCycle:
    case ErrorCode::DegenerateFixedPoint:
    case ErrorCode::BracketNotFound: return MC_ERR_NO_DATA;
    case ErrorCode::UnknownExperiment:
    case ErrorCode::Config: return MC_ERR_UNKNOWN_NAME;
    case ErrorCode::Io: return MC_ERR_IO;
    case ErrorCode::InvalidArg: return MC_ERR_INVALID_ARG;
    default: return MC_ERR_INTERNAL;
  }
}

template <class F>
mc_status guarded(F&& fn) {
  try {
    fn();
    return MC_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MC_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return MC_ERR_INTERNAL;
  }
}

mc_status fail_arg(const char* msg) {
  g_last_error = msg;
  return MC_ERR_INVALID_ARG;
}

mc_status copy_out(const std::string& s, char* buf, size_t* len) {
  if (!len) return fail_arg("len is null");
  size_t need = s.size() + 1;
  if (buf && *len >= need) {
    std::memcpy(buf, s.c_str(), need);
    *len = need;
    return MC_OK;
  }
  *len = need;
  if (!buf) return MC_OK;
  g_last_error = "buffer too small";
  return MC_ERR_INVALID_ARG;
}

mc_table* trace_to_table(const CircuitTrace& tr) {
  auto* t = new mc_table;
  t->col_names = {"t", "x", "q", "V_C", "I_M", "I_r", "r_series", "V_drive"};
  t->cols = {tr.t,   tr.x,   tr.q,        tr.v_c,
             tr.i_m, tr.i_r, tr.r_series, tr.v_drive};
  t->rows = tr.size();
  return t;
}

}  // namespace

extern "C" {

const char* mc_version(void) { return "1.0.0"; }

const char* mc_last_error(void) { return g_last_error.c_str(); }

mc_status mc_config_create(mc_config** out) {
  if (!out) return fail_arg("out is null");
  return guarded([&] { *out = new mc_config{default_config()}; });
}

void mc_config_destroy(mc_config* cfg) { delete cfg; }

mc_status mc_config_load_file(mc_config* cfg, const char* path) {
  if (!cfg || !path) return fail_arg("cfg/path is null");
  return guarded([&] { cfg->rep = load_config_file(path); });
}

mc_status mc_config_set(mc_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return fail_arg("cfg/key/value is null");
  return guarded([&] { apply_override(cfg->rep, key, value); });
}

mc_status mc_config_get(const mc_config* cfg, const char* key, char* buf,
                        size_t* len) {
  if (!cfg || !key) return fail_arg("cfg/key is null");
  std::string value;
  mc_status st = guarded([&] { value = get_value(cfg->rep, key); });
  if (st != MC_OK) return st;
  return copy_out(value, buf, len);
}

mc_status mc_config_keys(char* buf, size_t* len) {
  std::string all;
  for (const std::string& k : config_keys()) {
    if (!all.empty()) all += '\n';
    all += k;
  }
  return copy_out(all, buf, len);
}

mc_status mc_config_validate(const mc_config* cfg) {
  if (!cfg) return fail_arg("cfg is null");
  return guarded([&] { cfg->rep.validate(); });
}

void mc_table_destroy(mc_table* t) { delete t; }

size_t mc_table_rows(const mc_table* t) { return t ? t->rows : 0; }

size_t mc_table_cols(const mc_table* t) { return t ? t->cols.size() : 0; }

const char* mc_table_col_name(const mc_table* t, size_t col) {
  if (!t || col >= t->col_names.size()) return "";
  return t->col_names[col].c_str();
}

mc_status mc_table_value(const mc_table* t, size_t row, size_t col,
                         double* out) {
  if (!t || !out) return fail_arg("table/out is null");
  if (row >= t->rows || col >= t->cols.size())
    return fail_arg("row/col out of range");
  *out = t->cols[col][row];
  return MC_OK;
}

const char* mc_table_row_label(const mc_table* t, size_t row) {
  if (!t || row >= t->labels.size()) return "";
  return t->labels[row].c_str();
}

const char* mc_table_label_name(const mc_table* t) {
  return t ? t->label_name.c_str() : "";
}

mc_status mc_table_write_csv(const mc_table* t, const char* path,
                             int precision) {
  if (!t || !path) return fail_arg("table/path is null");
  if (precision <= 0 || precision > 17) return fail_arg("precision out of range");
  return guarded([&] {
    CsvWriter w(path, precision);
    std::vector<std::string> names = t->col_names;
    if (!t->labels.empty()) names.push_back(t->label_name);
    w.header(names);
    for (std::size_t i = 0; i < t->rows; ++i) {
      std::vector<double> row;
      for (const auto& col : t->cols) row.push_back(col[i]);
      if (!t->labels.empty())
        w.row(row, t->labels[i]);
      else
        w.row(row);
    }
  });
}

mc_status mc_eval(const mc_config* cfg, double V, double x, double q,
                  mc_point_eval* out) {
  if (!cfg || !out) return fail_arg("cfg/out is null");
  return guarded([&] {
    const ModelParams& p = cfg->rep.model;
    p.validate();
    CircuitState s{x, q};
    out->capacitance = capacitance(p, x);
    out->memristance = memristance(p, x);
    PotentialValue pv = potential_and_gradient(p, x);
    out->potential = pv.U;
    out->potential_dx = pv.dU_dx;
    out->v_c = memcap_voltage(p, s);
    out->i_m = out->v_c / out->memristance;
    FieldValue f = vector_field(p, V, cfg->rep.r, s);
    out->dx_dt = f.dx_dt;
    out->dq_dt = f.dq_dt;
  });
}

mc_status mc_jacobian(const mc_config* cfg, double V, double x, double q,
                      double out[7]) {
  if (!cfg || !out) return fail_arg("cfg/out is null");
  return guarded([&] {
    cfg->rep.model.validate();
    Jacobian2 j = jacobian(cfg->rep.model, V, cfg->rep.r, CircuitState{x, q});
    out[0] = j.a11;
    out[1] = j.a12;
    out[2] = j.a21;
    out[3] = j.a22;
    out[4] = j.det();
    out[5] = j.tr();
    out[6] = j.delta();
  });
}

mc_status mc_simulate(const mc_config* cfg, mc_table** out) {
  if (!cfg || !out) return fail_arg("cfg/out is null");
  return guarded([&] {
    const FullConfig& c = cfg->rep;
    c.validate();
    CircuitTrace tr =
        simulate_circuit(c.model, c.drive(), c.series(), c.initial_state(),
                         c.sim.T, c.integrator, c.sim.dt_out);
    *out = trace_to_table(tr);
  });
}

mc_status mc_fixed_points(const mc_config* cfg, double V, mc_table** out) {
  if (!cfg || !out) return fail_arg("cfg/out is null");
  return guarded([&] {
    cfg->rep.model.validate();
    std::vector<FixedPoint> fps =
        find_fixed_points(cfg->rep.model, V, cfg->rep.r);
    auto* t = new mc_table;
    t->col_names = {"V", "x", "q", "det", "Tr", "Delta"};
    t->cols.assign(6, {});
    t->label_name = "Type";
    for (const FixedPoint& fp : fps) {
      t->cols[0].push_back(V);
      t->cols[1].push_back(fp.x);
      t->cols[2].push_back(fp.q);
      t->cols[3].push_back(fp.det);
      t->cols[4].push_back(fp.tr);
      t->cols[5].push_back(fp.delta);
      t->labels.push_back(to_string(fp.kind));
    }
    t->rows = fps.size();
    *out = t;
  });
}

mc_status mc_thresholds(const mc_config* cfg, double v_min, double v_max,
                        double bisect_tol, double out[4]) {
  if (!cfg || !out) return fail_arg("cfg/out is null");
  return guarded([&] {
    cfg->rep.validate();
    ThresholdScanOptions opts;
    if (v_max > v_min) {
      opts.v_min = v_min;
      opts.v_max = v_max;
    }
    if (bisect_tol > 0) opts.bisect_tol = bisect_tol;
    Thresholds th =
        scan_thresholds(cfg->rep.model, cfg->rep.r, cfg->rep.integrator, opts);
    out[0] = th.v0;
    out[1] = th.v1;
    out[2] = th.v1_prime;
    out[3] = th.v2;
  });
}

mc_status mc_analytic_v1prime(const mc_config* cfg, double* out) {
  if (!cfg || !out) return fail_arg("cfg/out is null");
  return guarded([&] {
    cfg->rep.model.validate();
    *out = analytic_v1prime(cfg->rep.model, cfg->rep.r);
  });
}

mc_status mc_limit_cycle(const mc_config* cfg, double V, double x0, double q0,
                         double T, int* found, double* period, double* omega) {
  if (!cfg || !found || !period || !omega)
    return fail_arg("cfg/found/period/omega is null");
  return guarded([&] {
    cfg->rep.validate();
    CycleOptions opts;
    if (T > 0) opts.T = T;
    opts.dt_out = cfg->rep.sim.dt_out;
    auto lc = detect_limit_cycle(cfg->rep.model, V, cfg->rep.r,
                                 CircuitState{x0, q0}, cfg->rep.integrator,
                                 opts);
    *found = lc ? 1 : 0;
    *period = lc ? lc->period : 0.0;
    *omega = lc ? lc->omega : 0.0;
  });
}

mc_status mc_frequency_scan(const mc_config* cfg, double v_min, double v_max,
                            int n, mc_table** out) {
  if (!cfg || !out) return fail_arg("cfg/out is null");
  if (n < 2 || !(v_max > v_min)) return fail_arg("need n >= 2, v_max > v_min");
  return guarded([&] {
    cfg->rep.validate();
    auto* t = new mc_table;
    t->col_names = {"V", "omega_natural", "period", "period_std", "n_spikes"};
    t->cols.assign(5, {});
    for (int i = 0; i < n; ++i) {
      double V = v_min + (v_max - v_min) * i / (n - 1);
      auto nf = dc_spike_frequency(cfg->rep.model, cfg->rep.r, V,
                                   cfg->rep.integrator, cfg->rep.sim.T,
                                   {6.6, 2.0207}, cfg->rep.sim.dt_out);
      t->cols[0].push_back(V);
      t->cols[1].push_back(nf ? nf->omega : 0.0);
      t->cols[2].push_back(nf ? nf->period_mean : 0.0);
      t->cols[3].push_back(nf ? nf->period_std : 0.0);
      t->cols[4].push_back(nf ? double(nf->n_intervals + 1) : 0.0);
    }
    t->rows = n;
    *out = t;
  });
}

mc_status mc_trace_spectrum(const mc_table* trace, const char* column,
                            double skip_fraction, mc_table** out) {
  if (!trace || !column || !out) return fail_arg("trace/column/out is null");
  if (skip_fraction < 0.0 || skip_fraction >= 1.0)
    return fail_arg("skip_fraction must be in [0, 1)");
  return guarded([&] {
    std::size_t t_col = SIZE_MAX, col = SIZE_MAX;
    for (std::size_t i = 0; i < trace->col_names.size(); ++i) {
      if (trace->col_names[i] == "t") t_col = i;
      if (trace->col_names[i] == column) col = i;
    }
    if (col == SIZE_MAX || t_col == SIZE_MAX)
      throw Error(ErrorCode::InvalidArg,
                  std::string("no such column '") + column + "'");
    if (trace->rows < 16)
      throw Error(ErrorCode::Validation, "trace too short for a spectrum");
    double dt = trace->cols[t_col][1] - trace->cols[t_col][0];
    std::size_t skip =
        static_cast<std::size_t>(skip_fraction * double(trace->rows));
    std::vector<double> samples(trace->cols[col].begin() + skip,
                                trace->cols[col].end());
    Spectrum spec = single_sided_spectrum(samples, dt);
    auto* t = new mc_table;
    t->col_names = {"omega", "P1"};
    t->cols = {spec.omega, spec.p1};
    t->rows = spec.omega.size();
    *out = t;
  });
}

mc_status mc_sync_scan(const mc_config* cfg, double v_dc, double delta_v,
                       const double* omegas, size_t n, mc_table** out) {
  if (!cfg || !omegas || !out) return fail_arg("cfg/omegas/out is null");
  if (n == 0) return fail_arg("need at least one omega");
  return guarded([&] {
    cfg->rep.validate();
    SyncOptions sopts;
    sopts.dt_out = cfg->rep.sim.dt_out;
    auto nf = dc_spike_frequency(cfg->rep.model, cfg->rep.r, v_dc,
                                 cfg->rep.integrator, 1.5, sopts.init,
                                 sopts.dt_out);
    double omega_nat = nf ? nf->omega : 0.0;
    auto* t = new mc_table;
    t->col_names = {"V_dc",   "omega_source",     "locked",
                    "dominant_omega", "best_N",  "best_M",
                    "omega_spike",    "omega_natural_dc", "all_peaks_matched"};
    t->cols.assign(9, {});
    t->label_name = "response_class";
    for (size_t i = 0; i < n; ++i) {
      SyncReport rep =
          sync_analysis(cfg->rep.model, cfg->rep.r, v_dc, delta_v, omegas[i],
                        cfg->rep.integrator, sopts, omega_nat);
      const LatticeMatch* dom = nullptr;
      for (const LatticeMatch& m : rep.peaks)
        if (!dom || m.p1 > dom->p1) dom = &m;
      t->cols[0].push_back(v_dc);
      t->cols[1].push_back(omegas[i]);
      t->cols[2].push_back(rep.locked ? 1.0 : 0.0);
      t->cols[3].push_back(rep.dominant_omega);
      t->cols[4].push_back(dom ? double(dom->n) : 0.0);
      t->cols[5].push_back(dom ? double(dom->m) : 0.0);
      t->cols[6].push_back(rep.omega_spike);
      t->cols[7].push_back(rep.omega_natural_dc);
      t->cols[8].push_back(rep.all_peaks_matched ? 1.0 : 0.0);
      t->labels.push_back(to_string(rep.response_class));
    }
    t->rows = n;
    *out = t;
  });
}

mc_status mc_portrait(const mc_config* cfg, double V, const double window[4],
                      double t_evolve, const char* out_dir, int* n_files) {
  if (!cfg || !out_dir) return fail_arg("cfg/out_dir is null");
  return guarded([&] {
    cfg->rep.validate();
    PortraitOptions opts;
    if (window) {
      opts.x_min = window[0];
      opts.x_max = window[1];
      opts.q_min = window[2];
      opts.q_max = window[3];
    }
    if (t_evolve > 0) opts.t_evolve = t_evolve;
    Portrait port =
        phase_portrait(cfg->rep.model, V, cfg->rep.r, cfg->rep.integrator, opts);
    ensure_directory(out_dir);
    std::string dir(out_dir);
    {
      CsvWriter w(dir + "/field.csv");
      w.header({"x", "q", "ux", "uq"});
      for (std::size_t i = 0; i < port.x_grid.size(); ++i)
        w.row({port.x_grid[i], port.q_grid[i], port.fx_grid[i],
               port.fq_grid[i]});
    }
    {
      CsvWriter w(dir + "/trajectories.csv");
      w.header({"trajectory", "t", "x", "q"});
      for (std::size_t k = 0; k < port.trajectories.size(); ++k)
        for (std::size_t i = 0; i < port.trajectories[k].t.size(); ++i)
          w.row({double(k), port.trajectories[k].t[i],
                 port.trajectories[k].x[i], port.trajectories[k].q[i]});
    }
    {
      CsvWriter w(dir + "/fixed_points.csv");
      w.header({"V", "x", "q", "det", "Tr", "Delta", "Type"});
      for (const FixedPoint& fp : port.fixed_points)
        w.row({V, fp.x, fp.q, fp.det, fp.tr, fp.delta}, to_string(fp.kind));
    }
    if (n_files) *n_files = 3;
  });
}

mc_status mc_experiment_list(char* buf, size_t* len) {
  std::string all;
  for (const std::string& name : experiment_names()) {
    if (!all.empty()) all += '\n';
    all += name;
  }
  return copy_out(all, buf, len);
}

mc_status mc_experiment_run(const mc_config* cfg, const char* name,
                            const char* out_dir, int want_svg,
                            mc_report** out) {
  if (!cfg || !name || !out_dir || !out)
    return fail_arg("cfg/name/out_dir/out is null");
  return guarded([&] {
    ExperimentFormats fmt;
    fmt.svg = want_svg != 0;
    ExperimentReport rep = run_experiment(name, cfg->rep, out_dir, fmt);
    auto* r = new mc_report{rep, rep.to_json()};
    *out = r;
  });
}

void mc_report_destroy(mc_report* rep) { delete rep; }

const char* mc_report_json(const mc_report* rep) {
  return rep ? rep->json.c_str() : "";
}

int mc_report_all_passed(const mc_report* rep) {
  return rep && rep->rep.all_passed() ? 1 : 0;
}

size_t mc_report_n_checks(const mc_report* rep) {
  return rep ? rep->rep.checks.size() : 0;
}

size_t mc_report_n_failed(const mc_report* rep) {
  if (!rep) return 0;
  size_t n = 0;
  for (const CheckResult& c : rep->rep.checks)
    if (!c.pass) ++n;
  return n;
}

}  // extern "C"
