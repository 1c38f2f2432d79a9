// Temporary calibration probe (not part of the deliverable).
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "core/circuit.hpp"
#include "core/config.hpp"
#include "core/phase.hpp"
#include "core/signal.hpp"

using namespace memcap;

static double now() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

int main(int argc, char** argv) {
  ModelParams p;
  IntegratorConfig cfg;
  std::string mode = argc > 1 ? argv[1] : "basic";

  if (mode == "basic") {
    // fixed points at the reference table voltages
    for (double V : {0.0, 4.0, 6.9, 7.0, 8.0, 15.5, 17.5}) {
      auto fps = find_fixed_points(p, V, 1e-3);
      std::printf("V=%.4f  n=%zu\n", V, fps.size());
      for (auto& fp : fps)
        std::printf("   x=%.6f q=%.6f det=%.6g tr=%.6g delta=%.6g  %s\n", fp.x,
                    fp.q, fp.det, fp.tr, fp.delta, to_string(fp.kind));
    }
    ModelParams p2 = p;
    p2.memristance = TypeII{50.0};
    for (double V : {0.0, 6.0, 8.0, 9.0, 10.0, 14.7, 16.0}) {
      auto fps = find_fixed_points(p2, V, 1e-3);
      std::printf("typeII V=%.4f  n=%zu\n", V, fps.size());
      for (auto& fp : fps)
        std::printf("   x=%.6f q=%.6f det=%.6g tr=%.6g delta=%.6g  %s\n", fp.x,
                    fp.q, fp.det, fp.tr, fp.delta, to_string(fp.kind));
    }
  } else if (mode == "sim") {
    double V = argc > 2 ? atof(argv[2]) : 8.0829;
    double T = argc > 3 ? atof(argv[3]) : 1.5;
    double x0 = argc > 4 ? atof(argv[4]) : 0.0;
    double q0 = argc > 5 ? atof(argv[5]) : 0.0;
    double dt_out = argc > 6 ? atof(argv[6]) : 1e-4;
    if (argc > 7) { cfg.rtol = atof(argv[7]); cfg.atol = cfg.rtol * 1e-3; }
    double t0 = now();
    CircuitTrace tr = simulate_circuit(p, Drive::dc(V), SeriesElement::fixed(1e-3),
                                       {x0, q0}, T, cfg, dt_out);
    double el = now() - t0;
    SpikeTrain train = detect_spikes(tr, p);
    std::printf("V=%g T=%g: %zu samples, %ld acc %ld rej steps, %.2fs wall\n",
                V, T, tr.size(), tr.stats.n_accepted, tr.stats.n_rejected, el);
    std::printf("spikes: %zu\n", train.size());
    if (train.size() >= 6) {
      // post-transient stats
      std::vector<double> tail(train.times.end() - std::min<size_t>(train.size(), 20),
                               train.times.end());
      for (size_t i = 1; i < tail.size(); ++i)
        std::printf("  isi %.6f\n", tail[i] - tail[i - 1]);
      SpikeTrain tt; tt.times = train.times;
      auto nf = natural_frequency(tt, (int)train.size() / 2);
      std::printf("omega=%.3f period=%.6g std=%.3g\n", nf.omega,
                  nf.period_mean, nf.period_std);
    }
    // terminal state + field
    size_t n = tr.size() - 1;
    CircuitState s{tr.x[n], tr.q[n]};
    FieldValue f = vector_field(p, V, 1e-3, s);
    std::printf("terminal x=%.8f q=%.8f |dx|=%.3g |dq|=%.3g\n", s.x, s.q,
                std::fabs(f.dx_dt), std::fabs(f.dq_dt));
    std::printf("x range [%.4f,%.4f] vc range [%.4f,%.4f]\n",
                *std::min_element(tr.x.begin(), tr.x.end()),
                *std::max_element(tr.x.begin(), tr.x.end()),
                *std::min_element(tr.v_c.begin(), tr.v_c.end()),
                *std::max_element(tr.v_c.begin(), tr.v_c.end()));
  } else if (mode == "cycle") {
    double V = argc > 2 ? atof(argv[2]) : 7.9674;
    double x0 = argc > 3 ? atof(argv[3]) : 6.6;
    double q0 = argc > 4 ? atof(argv[4]) : 2.0207;
    double t0 = now();
    CycleOptions copts; copts.dt_out = 1e-5;
    auto lc = detect_limit_cycle(p, V, 1e-3, {x0, q0}, cfg, copts);
    double el = now() - t0;
    if (lc) {
      std::printf("V=%g: cycle period=%.6g omega=%.2f ncross=%d  (%.2fs)\n", V,
                  lc->period, lc->omega, lc->n_crossings, el);
      std::printf("  vc [%.4f, %.4f], skewness=%.3f\n", lc->v_c_min, lc->v_c_max,
                  skewness(lc->v_c));
    } else {
      std::printf("V=%g: no cycle (%.2fs)\n", V, el);
    }
  } else if (mode == "thresholds") {
    double t0 = now();
    ThresholdScanOptions topt;
    Thresholds th = scan_thresholds(p, 1e-3, cfg, topt);
    std::printf("V0=%.4f V1=%.4f V1'=%.4f V2=%.4f  (%.1fs)\n", th.v0, th.v1,
                th.v1_prime, th.v2, now() - t0);
    std::printf("analytic V1' = %.6f\n", analytic_v1prime(p, 1e-3));
  } else if (mode == "folds2") {
    ModelParams p2 = p;
    p2.memristance = TypeII{50.0};
    double t0 = now();
    auto folds = fold_transitions(p2, 1e-3, 0.0, 18.0, 0.05, 1e-3);
    for (auto& f : folds)
      std::printf("typeII fold at V=%.4f  (%d -> %d)\n", f.v, f.count_below,
                  f.count_above);
    std::printf("typeII analytic V1'(10rho0)=%.4f V1'(rho0)=%.4f  (%.1fs)\n",
                analytic_v1prime(p2, 1e-3),
                analytic_v1prime(p2, 1e-3, p2.rho0), now() - t0);
  } else if (mode == "sync") {
    double vdc = argc > 2 ? atof(argv[2]) : 11.5470;
    double frac = argc > 3 ? atof(argv[3]) : 1.0;
    auto nf = dc_spike_frequency(p, 1e-3, vdc, cfg);
    if (!nf) { std::printf("no dc spikes at %g\n", vdc); return 1; }
    std::printf("omega_natural(%.4f) = %.3f\n", vdc, nf->omega);
    double t0 = now();
    SyncReport rep = sync_analysis(p, 1e-3, vdc, 0.1155, frac * nf->omega, cfg,
                                   {}, nf->omega);
    std::printf("omega_src=%.3f: class=%s locked=%d (p=%d q=%d) nspikes=%d "
                "omega_spike=%.3f dom=%.3f allmatched=%d  (%.2fs)\n",
                frac * nf->omega, to_string(rep.response_class), rep.locked,
                rep.lock_p, rep.lock_q, rep.n_spikes, rep.omega_spike,
                rep.dominant_omega, (int)rep.all_peaks_matched, now() - t0);
    for (auto& pk : rep.peaks)
      std::printf("   peak w=%.3f p1=%.4g  -> N=%d M=%d err=%.3g %s\n",
                  pk.observed, pk.p1, pk.n, pk.m, pk.error,
                  pk.matched ? "ok" : "UNMATCHED");
  } else if (mode == "freqscan") {
    double v1 = argc > 2 ? atof(argv[2]) : 6.9893;
    double v2 = argc > 3 ? atof(argv[3]) : 15.1242;
    int n = argc > 4 ? atoi(argv[4]) : 25;
    double t0 = now();
    double margin = 0.01 * (v2 - v1);
    for (int i = 0; i < n; ++i) {
      double V = v1 + margin + (v2 - v1 - 2 * margin) * i / (n - 1);
      auto nf = dc_spike_frequency(p, 1e-3, V, cfg);
      std::printf("  V=%.4f omega=%s\n", V,
                  nf ? std::to_string(nf->omega).c_str() : "none");
    }
    std::printf("(%.1fs)\n", now() - t0);
  } else if (mode == "portrait") {
    double V = argc > 2 ? atof(argv[2]) : 7.0437;
    double t0 = now();
    Portrait port = phase_portrait(p, V, 1e-3, cfg);
    std::printf("V=%g: %zu fps, %zu trajectories (%.2fs)\n", V,
                port.fixed_points.size(), port.trajectories.size(), now() - t0);
    // terminal behavior: near a sink vs elsewhere
    int to_sink = 0, elsewhere = 0, bad = 0;
    for (auto& tr : port.trajectories) {
      if (!tr.ok || tr.x.empty()) { ++bad; continue; }
      double xe = tr.x.back(), qe = tr.q.back();
      bool sink = false;
      for (auto& fp : port.fixed_points) {
        if (fp.kind != FixedPointKind::SinkNode &&
            fp.kind != FixedPointKind::SinkSpiral)
          continue;
        if (std::hypot(xe - fp.x, qe - fp.q) < 1e-2) sink = true;
      }
      (sink ? to_sink : elsewhere)++;
    }
    std::printf("  terminal: %d at sink, %d elsewhere, %d failed\n", to_sink,
                elsewhere, bad);
  } else if (mode == "switch") {
    // up: from (0,0) static at 7.5, pulse 8.5 for 0.1 -> spiking after
    // down: from (6.6,2.0207) cycling at 7.5, pulse 6.5 for 0.1 -> static
    for (int dir = 0; dir < 2; ++dir) {
      std::vector<PiecewiseSegment> segs{{0.3, 7.5},
                                         {0.1, dir ? 6.5 : 8.5},
                                         {0.6, 7.5}};
      CircuitState init = dir ? CircuitState{6.6, 2.0207} : CircuitState{0, 0};
      CircuitTrace tr = simulate_circuit(p, Drive::piecewise(segs),
                                         SeriesElement::fixed(1e-3), init, 1.0,
                                         cfg, 1e-5);
      SpikeTrain train = detect_spikes(tr, p);
      int before = 0, pulse = 0, after = 0;
      for (double t : train.times) {
        if (t < 0.3) ++before;
        else if (t < 0.4) ++pulse;
        else if (t > 0.45) ++after;
      }
      std::printf("%s: spikes before=%d pulse=%d after=%d\n",
                  dir ? "down(cycle->sink)" : "up(sink->cycle)", before, pulse,
                  after);
    }
  } else if (mode == "lockscan") {
    double vdc = argc > 2 ? atof(argv[2]) : 11.5470;
    auto nf = dc_spike_frequency(p, 1e-3, vdc, cfg);
    if (!nf) { std::printf("no dc spikes at %g\n", vdc); return 1; }
    std::printf("omega_natural(%.4f) = %.3f\n", vdc, nf->omega);
    std::vector<double> fracs{0.3,0.4,0.5,0.6,0.67,0.75,0.8,0.85,0.9,0.95,
                              0.98,1.0,1.02,1.05,1.1,1.15,1.2,1.33,1.5,1.7,2.0,2.5,3.0};
    double t0 = now();
    for (double f : fracs) {
      SyncReport rep = sync_analysis(p, 1e-3, vdc, 0.1155, f * nf->omega, cfg,
                                     {}, nf->omega);
      std::printf("  f=%.2f w=%.0f: %-22s locked=%d p=%d q=%d wspike=%.0f\n", f,
                  f * nf->omega, to_string(rep.response_class), rep.locked,
                  rep.lock_p, rep.lock_q, rep.omega_spike);
    }
    std::printf("(%.1fs)\n", now() - t0);
  } else if (mode == "burst") {
    std::string kind = argc > 2 ? argv[2] : "kernel";
    double T = argc > 3 ? atof(argv[3]) : 0.2;
    SeriesElement series = kind == "kernel"
                               ? SeriesElement(KernelMemristor{})
                               : SeriesElement(ThresholdMemristor{});
    double V = kind == "kernel" ? 13.8564 : 7.9674;
    double t0 = now();
    CircuitTrace tr = simulate_circuit(p, Drive::dc(V), series, {0.0, 0.0}, T,
                                       cfg, 1e-4);
    double el = now() - t0;
    SpikeTrain train = detect_spikes(tr, p);
    std::printf("%s V=%g T=%g: %zu spikes, r range [%.5g, %.5g], %ld steps, %.2fs\n",
                kind.c_str(), V, T, train.size(),
                *std::min_element(tr.r_series.begin(), tr.r_series.end()),
                *std::max_element(tr.r_series.begin(), tr.r_series.end()),
                tr.stats.n_accepted, el);
    for (size_t i = 1; i < train.size() && i < 80; ++i)
      std::printf("  t=%.5f isi=%.5f\n", train.times[i],
                  train.times[i] - train.times[i - 1]);
  }
  return 0;
}
