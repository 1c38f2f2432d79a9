// memcap command-line interface.  Parses a config file plus dotted-key
// overrides, dispatches to the shared library through the C API, and writes
// CSV/JSON artifacts.
//
// Exit codes: 0 success, 1 usage/validation error, 2 experiment checks
// failed, 3 numerical failure.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "memcap/memcap.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitChecksFailed = 2;
constexpr int kExitNumerical = 3;

int exit_code(mc_status st) {
  switch (st) {
    case MC_OK: return kExitOk;
    case MC_ERR_NUMERIC: return kExitNumerical;
    case MC_ERR_NO_DATA: return kExitNumerical;
    default: return kExitUsage;
  }
}

struct ConfigHandle {
  mc_config* cfg = nullptr;
  ~ConfigHandle() { mc_config_destroy(cfg); }
};

struct TableHandle {
  mc_table* t = nullptr;
  ~TableHandle() { mc_table_destroy(t); }
};

int fail(mc_status st, const char* what) {
  std::fprintf(stderr, "memcap: %s: %s\n", what, mc_last_error());
  return exit_code(st);
}

std::string output_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("MEMCAP_OUT_DIR")) return env;
  return "memcap-out";
}

bool make_dir(const std::string& dir) {
  std::string cmd = dir;  // create via std::filesystem in the library? keep local
  (void)cmd;
  return true;
}

int write_table(mc_table* t, const std::string& path, int precision) {
  mc_status st = mc_table_write_csv(t, path.c_str(), precision);
  if (st != MC_OK) return fail(st, "writing csv");
  std::printf("wrote %s (%zu rows)\n", path.c_str(), mc_table_rows(t));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"leaky-memcapacitor circuit simulation and analysis"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  std::string out_flag;
  int precision = 17;
  app.add_option("-c,--config", config_path,
                 "config file (dotted key = value, or JSON)");
  app.add_option("-s,--set", sets,
                 "override one key, e.g. --set model.k=0.9 (repeatable)");
  app.add_option("-o,--out", out_flag,
                 "output directory (default $MEMCAP_OUT_DIR or ./memcap-out)");
  app.add_option("-p,--precision", precision,
                 "digits for floating CSV output (default 17: exact round-trip)");

  // common shortcuts mapped onto dotted keys
  double opt_V = 0, opt_T = 0, opt_d = 0, opt_x0 = 0, opt_q0 = 0, opt_r = 0;
  auto* simulate = app.add_subcommand("simulate", "integrate the circuit and write the trace");
  auto* fixed_points = app.add_subcommand("fixed-points", "Newton fixed-point table at a DC voltage");
  auto* portrait = app.add_subcommand("portrait", "normalized flow field and trajectory bundle");
  auto* thresholds = app.add_subcommand("thresholds", "bifurcation thresholds V0, V1, V1', V2");
  auto* freq_scan = app.add_subcommand("freq-scan", "spike frequency versus DC voltage");
  auto* spectrum = app.add_subcommand("spectrum", "single-sided V_C spectrum of a run");
  auto* sync_scan = app.add_subcommand("sync-scan", "synchronization against an AC drive");
  auto* experiment = app.add_subcommand("experiment", "run a registered experiment");
  auto* list_experiments = app.add_subcommand("list-experiments", "print registered experiment names");
  auto* config_keys_cmd = app.add_subcommand("config-keys", "print all configuration keys");

  for (CLI::App* sub : {simulate, fixed_points, portrait, thresholds, freq_scan,
                        spectrum, sync_scan, experiment}) {
    sub->add_option("--V", opt_V, "drive voltage (drive.V)");
    sub->add_option("--T", opt_T, "duration (sim.T)");
    sub->add_option("--d", opt_d, "plate gap (model.d)");
    sub->add_option("--x0", opt_x0, "initial displacement (sim.x0)");
    sub->add_option("--q0", opt_q0, "initial charge (sim.q0)");
    sub->add_option("--r", opt_r, "series resistance (circuit.r)");
  }

  double fp_V = 4.0;
  fixed_points->add_option("--at", fp_V, "DC voltage of the table (also --V)");

  std::vector<double> window;
  double t_evolve = 0.05;
  portrait->add_option("--window", window,
                       "x_min x_max q_min q_max (default 0 7.6 0 3)")
      ->expected(4);
  portrait->add_option("--t-evolve", t_evolve, "evolution time per trajectory");

  double th_vmin = 0.0, th_vmax = 18.0, th_tol = 1e-3;
  thresholds->add_option("--vmin", th_vmin, "scan lower bound");
  thresholds->add_option("--vmax", th_vmax, "scan upper bound");
  thresholds->add_option("--tol", th_tol, "bisection tolerance");

  double fs_vmin = 7.0, fs_vmax = 15.1;
  int fs_n = 25;
  freq_scan->add_option("--vmin", fs_vmin, "scan lower bound");
  freq_scan->add_option("--vmax", fs_vmax, "scan upper bound");
  freq_scan->add_option("--n", fs_n, "grid points");

  double sp_skip = 1.0 / 3.0;
  spectrum->add_option("--skip", sp_skip, "transient fraction discarded");

  double sy_vdc = 11.5470, sy_dv = 0.1155, sy_fmin = 0.2, sy_fmax = 3.0;
  int sy_n = 30;
  std::vector<double> sy_omegas;
  sync_scan->add_option("--vdc", sy_vdc, "DC bias");
  sync_scan->add_option("--delta-v", sy_dv, "AC amplitude");
  sync_scan->add_option("--fmin", sy_fmin, "sweep start, fraction of omega_natural");
  sync_scan->add_option("--fmax", sy_fmax, "sweep end, fraction of omega_natural");
  sync_scan->add_option("--n", sy_n, "sweep points");
  sync_scan->add_option("--omega", sy_omegas,
                        "explicit omega_source values (overrides the sweep)");

  std::string exp_name;
  bool exp_svg = false;
  experiment->add_option("name", exp_name, "registered experiment name")
      ->required();
  experiment->add_flag("--svg", exp_svg, "also write SVG plots");

  CLI11_PARSE(app, argc, argv);

  if (list_experiments->parsed()) {
    size_t len = 0;
    mc_experiment_list(nullptr, &len);
    std::string buf(len, '\0');
    mc_experiment_list(buf.data(), &len);
    std::printf("%s\n", buf.c_str());
    return kExitOk;
  }
  if (config_keys_cmd->parsed()) {
    size_t len = 0;
    mc_config_keys(nullptr, &len);
    std::string buf(len, '\0');
    mc_config_keys(buf.data(), &len);
    std::printf("%s\n", buf.c_str());
    return kExitOk;
  }

  ConfigHandle cfg;
  mc_status st = mc_config_create(&cfg.cfg);
  if (st != MC_OK) return fail(st, "creating config");
  if (!config_path.empty()) {
    st = mc_config_load_file(cfg.cfg, config_path.c_str());
    if (st != MC_OK) return fail(st, "loading config");
  }
  for (const std::string& kv : sets) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "memcap: --set expects key=value, got '%s'\n",
                   kv.c_str());
      return kExitUsage;
    }
    st = mc_config_set(cfg.cfg, kv.substr(0, eq).c_str(),
                       kv.substr(eq + 1).c_str());
    if (st != MC_OK) return fail(st, "applying override");
  }

  CLI::App* sub = app.get_subcommands().front();
  auto set_if = [&](const char* flag, const char* key, double value) -> bool {
    if (!sub->count(flag)) return true;
    mc_status s = mc_config_set(cfg.cfg, key, std::to_string(value).c_str());
    if (s != MC_OK) {
      fail(s, "applying flag");
      return false;
    }
    return true;
  };
  if (!set_if("--V", "drive.V", opt_V) || !set_if("--T", "sim.T", opt_T) ||
      !set_if("--d", "model.d", opt_d) || !set_if("--x0", "sim.x0", opt_x0) ||
      !set_if("--q0", "sim.q0", opt_q0) || !set_if("--r", "circuit.r", opt_r))
    return kExitUsage;

  st = mc_config_validate(cfg.cfg);
  if (st != MC_OK) return fail(st, "validating parameters");

  std::string dir = output_dir(out_flag);
  make_dir(dir);

  if (simulate->parsed()) {
    TableHandle trace;
    st = mc_simulate(cfg.cfg, &trace.t);
    if (st != MC_OK) return fail(st, "simulate");
    return write_table(trace.t, dir + "/trace.csv", precision);
  }

  if (fixed_points->parsed()) {
    double V = sub->count("--V") ? opt_V : fp_V;
    TableHandle t;
    st = mc_fixed_points(cfg.cfg, V, &t.t);
    if (st != MC_OK) return fail(st, "fixed-points");
    for (size_t i = 0; i < mc_table_rows(t.t); ++i) {
      double x, q, det, tr, delta;
      mc_table_value(t.t, i, 1, &x);
      mc_table_value(t.t, i, 2, &q);
      mc_table_value(t.t, i, 3, &det);
      mc_table_value(t.t, i, 4, &tr);
      mc_table_value(t.t, i, 5, &delta);
      std::printf("x=%-12.6g q=%-12.6g det=%-14.6g Tr=%-12.6g Delta=%-14.6g %s\n",
                  x, q, det, tr, delta, mc_table_row_label(t.t, i));
    }
    return write_table(t.t, dir + "/fixed_points.csv", precision);
  }

  if (portrait->parsed()) {
    double V = sub->count("--V") ? opt_V : 7.9674;
    double win[4] = {0.0, 7.6, 0.0, 3.0};
    if (window.size() == 4)
      for (int i = 0; i < 4; ++i) win[i] = window[i];
    int n_files = 0;
    st = mc_portrait(cfg.cfg, V, win, t_evolve, dir.c_str(), &n_files);
    if (st != MC_OK) return fail(st, "portrait");
    std::printf("wrote %d portrait files under %s\n", n_files, dir.c_str());
    return kExitOk;
  }

  if (thresholds->parsed()) {
    double th[4];
    st = mc_thresholds(cfg.cfg, th_vmin, th_vmax, th_tol, th);
    if (st != MC_OK) return fail(st, "thresholds");
    double v1p_analytic = 0.0;
    mc_analytic_v1prime(cfg.cfg, &v1p_analytic);
    std::printf("V0=%.6g V1=%.6g V1'=%.6g V2=%.6g (analytic V1'=%.6g)\n",
                th[0], th[1], th[2], th[3], v1p_analytic);
    FILE* f = std::fopen((dir + "/thresholds.csv").c_str(), "w");
    if (f) {
      std::fprintf(f, "V0,V1,V1_prime,V2,V1_prime_analytic\n");
      std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g\n", th[0], th[1], th[2],
                   th[3], v1p_analytic);
      std::fclose(f);
      std::printf("wrote %s/thresholds.csv\n", dir.c_str());
    }
    return kExitOk;
  }

  if (freq_scan->parsed()) {
    TableHandle t;
    st = mc_frequency_scan(cfg.cfg, fs_vmin, fs_vmax, fs_n, &t.t);
    if (st != MC_OK) return fail(st, "freq-scan");
    return write_table(t.t, dir + "/natural_frequency.csv", precision);
  }

  if (spectrum->parsed()) {
    TableHandle trace;
    st = mc_simulate(cfg.cfg, &trace.t);
    if (st != MC_OK) return fail(st, "simulate");
    TableHandle spec;
    st = mc_trace_spectrum(trace.t, "V_C", sp_skip, &spec.t);
    if (st != MC_OK) return fail(st, "spectrum");
    return write_table(spec.t, dir + "/spectrum.csv", precision);
  }

  if (sync_scan->parsed()) {
    std::vector<double> omegas = sy_omegas;
    if (omegas.empty()) {
      // sweep as fractions of the natural frequency at the bias point
      double vdc_backup = sy_vdc;
      char nat_buf[64];
      (void)vdc_backup;
      (void)nat_buf;
      TableHandle probe;
      st = mc_frequency_scan(cfg.cfg, sy_vdc, sy_vdc + 1.0e-9, 2, &probe.t);
      if (st != MC_OK) return fail(st, "natural frequency at V_dc");
      double omega_nat = 0.0;
      mc_table_value(probe.t, 0, 1, &omega_nat);
      if (omega_nat <= 0.0) {
        std::fprintf(stderr, "memcap: no spiking at V_dc=%g\n", sy_vdc);
        return kExitNumerical;
      }
      for (int i = 0; i < sy_n; ++i)
        omegas.push_back(omega_nat *
                         (sy_fmin + (sy_fmax - sy_fmin) * i / (sy_n - 1)));
    }
    TableHandle t;
    st = mc_sync_scan(cfg.cfg, sy_vdc, sy_dv, omegas.data(), omegas.size(),
                      &t.t);
    if (st != MC_OK) return fail(st, "sync-scan");
    return write_table(t.t, dir + "/sync_scan.csv", precision);
  }

  if (experiment->parsed()) {
    mc_report* rep = nullptr;
    st = mc_experiment_run(cfg.cfg, exp_name.c_str(), dir.c_str(),
                           exp_svg ? 1 : 0, &rep);
    if (st != MC_OK) return fail(st, "experiment");
    size_t failed = mc_report_n_failed(rep);
    std::printf("%s: %zu checks, %zu failed; report at %s/%s/report.json\n",
                exp_name.c_str(), mc_report_n_checks(rep), failed, dir.c_str(),
                exp_name.c_str());
    int all_ok = mc_report_all_passed(rep);
    mc_report_destroy(rep);
    return all_ok ? kExitOk : kExitChecksFailed;
  }

  return kExitUsage;
}
