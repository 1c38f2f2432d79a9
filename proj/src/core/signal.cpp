#include "core/signal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace memcap {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_pow2(std::size_t n) { return n && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (!is_pow2(n))
    throw Error(ErrorCode::InvalidArg, "fft_inplace requires power-of-two size");
  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        std::complex<double> u = a[i + j];
        std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse)
    for (auto& v : a) v /= static_cast<double>(n);
}

std::vector<std::complex<double>> dft(const std::vector<double>& samples) {
  const std::size_t n = samples.size();
  if (n == 0) return {};
  if (is_pow2(n)) {
    std::vector<std::complex<double>> a(samples.begin(), samples.end());
    fft_inplace(a, false);
    return a;
  }
  // Bluestein: X_k = conj(w_k) * IFFT(FFT(a) .* FFT(b)), with the chirp
  // phases taken mod 2n to keep the arguments small.
  const std::size_t m = next_pow2(2 * n - 1);
  std::vector<std::complex<double>> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t sq = (i * i) % (2 * n);
    double ang = kPi * static_cast<double>(sq) / static_cast<double>(n);
    w[i] = std::complex<double>(std::cos(ang), -std::sin(ang));
  }
  std::vector<std::complex<double>> a(m, 0.0), b(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) a[i] = samples[i] * w[i];
  b[0] = std::conj(w[0]);
  for (std::size_t i = 1; i < n; ++i) b[i] = b[m - i] = std::conj(w[i]);
  fft_inplace(a, false);
  fft_inplace(b, false);
  for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
  fft_inplace(a, true);
  std::vector<std::complex<double>> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * w[i];
  return out;
}

Spectrum single_sided_spectrum(const std::vector<double>& samples, double dt,
                               bool hann) {
  const std::size_t n = samples.size();
  if (n < 8)
    throw Error(ErrorCode::Validation, "spectrum needs at least 8 samples");
  if (!(dt > 0.0)) throw Error(ErrorCode::Validation, "requires dt > 0");
  Spectrum spec;
  spec.dt = dt;
  spec.n = n;
  spec.mean = std::accumulate(samples.begin(), samples.end(), 0.0) /
              static_cast<double>(n);
  std::vector<double> y(n);
  if (hann) {
    double gain = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double w = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) /
                                       static_cast<double>(n - 1)));
      y[i] = (samples[i] - spec.mean) * w;
      gain += w;
    }
    double scale = static_cast<double>(n) / gain;  // amplitude correction
    for (double& v : y) v *= scale;
  } else {
    for (std::size_t i = 0; i < n; ++i) y[i] = samples[i] - spec.mean;
  }
  std::vector<std::complex<double>> x = dft(y);
  std::size_t n_bins = n / 2 + 1;
  spec.omega.resize(n_bins);
  spec.p1.resize(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) {
    spec.omega[k] = 2.0 * kPi * static_cast<double>(k) /
                    (static_cast<double>(n) * dt);
    double amp = std::abs(x[k]) / static_cast<double>(n);
    bool interior = k != 0 && !(n % 2 == 0 && k == n / 2);
    spec.p1[k] = interior ? 2.0 * amp : amp;
  }
  return spec;
}

std::vector<SpectrumPeak> spectrum_peaks(const Spectrum& spec, double frac,
                                         std::size_t merge_bins) {
  std::vector<SpectrumPeak> peaks;
  if (spec.p1.size() < 3) return peaks;
  double global = *std::max_element(spec.p1.begin() + 1, spec.p1.end());
  double floor_v = frac * global;
  for (std::size_t k = 1; k + 1 < spec.p1.size(); ++k) {
    if (spec.p1[k] < floor_v) continue;
    if (spec.p1[k] >= spec.p1[k - 1] && spec.p1[k] > spec.p1[k + 1]) {
      if (!peaks.empty() && k - peaks.back().bin <= merge_bins) {
        if (spec.p1[k] > peaks.back().p1)
          peaks.back() = {spec.omega[k], spec.p1[k], k};
      } else {
        peaks.push_back({spec.omega[k], spec.p1[k], k});
      }
    }
  }
  return peaks;
}

SpikeTrain detect_spikes(const std::vector<double>& samples, double t0,
                         double dt, const SpikeOptions& opts) {
  SpikeTrain train;
  train.options = opts;
  const std::size_t n = samples.size();
  if (n < 2) return train;

  if (opts.criterion == SpikeCriterion::XThreshold) {
    long last = -1;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (samples[i] < opts.threshold && samples[i + 1] >= opts.threshold) {
        if (last >= 0 &&
            static_cast<long>(i) - last < opts.debounce_samples)
          continue;
        double f = (opts.threshold - samples[i]) / (samples[i + 1] - samples[i]);
        train.times.push_back(t0 + (static_cast<double>(i) + f) * dt);
        last = static_cast<long>(i);
      }
    }
    return train;
  }

  // VcPeaks: local maxima with prominence above a fraction of the global
  // peak-to-peak range.
  double lo = *std::min_element(samples.begin(), samples.end());
  double hi = *std::max_element(samples.begin(), samples.end());
  double prom = opts.prominence_frac * (hi - lo);
  if (!(prom > 0.0)) return train;
  double valley = samples[0];
  long last_peak = -1;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    valley = std::min(valley, samples[i]);
    if (samples[i] >= samples[i - 1] && samples[i] > samples[i + 1] &&
        samples[i] - valley >= prom) {
      if (last_peak >= 0 && static_cast<long>(i) - last_peak < opts.debounce_samples)
        continue;
      train.times.push_back(t0 + static_cast<double>(i) * dt);
      last_peak = static_cast<long>(i);
      valley = samples[i];  // reset; must dip by prom before the next peak
    }
  }
  return train;
}

SpikeTrain detect_spikes(const CircuitTrace& trace, const ModelParams& p,
                         SpikeCriterion criterion) {
  SpikeOptions opts;
  opts.criterion = criterion;
  opts.threshold = p.x_c;
  const std::vector<double>& src =
      criterion == SpikeCriterion::XThreshold ? trace.x : trace.v_c;
  return detect_spikes(src, trace.t.empty() ? 0.0 : trace.t.front(), trace.dt,
                       opts);
}

NaturalFrequency natural_frequency(const SpikeTrain& train, int discard_head) {
  std::size_t start = static_cast<std::size_t>(std::max(discard_head, 0));
  if (train.times.size() < start + 5)
    throw Error(ErrorCode::InsufficientSpikes,
                "need at least 5 spikes after discarding " +
                    std::to_string(discard_head) + ", have " +
                    std::to_string(train.times.size()));
  std::vector<double> intervals;
  for (std::size_t i = start + 1; i < train.times.size(); ++i)
    intervals.push_back(train.times[i] - train.times[i - 1]);
  NaturalFrequency nf;
  nf.n_intervals = static_cast<int>(intervals.size());
  nf.period_mean = std::accumulate(intervals.begin(), intervals.end(), 0.0) /
                   intervals.size();
  double var = 0.0;
  for (double v : intervals) var += (v - nf.period_mean) * (v - nf.period_mean);
  nf.period_std = std::sqrt(var / intervals.size());
  nf.omega = 2.0 * kPi / nf.period_mean;
  return nf;
}

double skewness(const std::vector<double>& samples) {
  if (samples.size() < 3) return 0.0;
  double mean = std::accumulate(samples.begin(), samples.end(), 0.0) /
                samples.size();
  double m2 = 0.0, m3 = 0.0;
  for (double v : samples) {
    double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= samples.size();
  m3 /= samples.size();
  if (m2 <= 0.0) return 0.0;
  return m3 / std::pow(m2, 1.5);
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::I: return "I";
    case Regime::II: return "II";
    case Regime::III: return "III";
  }
  return "?";
}

Regime classify_regime(const std::vector<double>& v_c_period, double s0) {
  if (v_c_period.size() < 8)
    throw Error(ErrorCode::NoLimitCycle, "regime classification needs a waveform");
  double s = skewness(v_c_period);
  if (s < -s0) return Regime::I;
  if (s > s0) return Regime::III;
  return Regime::II;
}

const char* to_string(ResponseClass c) {
  switch (c) {
    case ResponseClass::Harmonic: return "harmonic";
    case ResponseClass::Locked: return "locked";
    case ResponseClass::Quasiperiodic: return "quasiperiodic";
    case ResponseClass::SpikeTrainLowFreq: return "spike_train_low_freq";
  }
  return "?";
}

BurstAnalysis analyze_bursts(const SpikeTrain& train, double split_factor) {
  BurstAnalysis out;
  if (train.times.size() < 2) {
    if (!train.times.empty()) out.bursts.push_back({train.times, 0.0, 0.0});
    return out;
  }
  std::vector<double> isis;
  for (std::size_t i = 1; i < train.times.size(); ++i)
    isis.push_back(train.times[i] - train.times[i - 1]);
  std::vector<double> sorted = isis;
  std::sort(sorted.begin(), sorted.end());
  double median = sorted[sorted.size() / 2];
  double split = split_factor * median;

  std::vector<std::vector<double>> groups{{train.times.front()}};
  for (std::size_t i = 1; i < train.times.size(); ++i) {
    if (train.times[i] - train.times[i - 1] > split)
      groups.push_back({});
    groups.back().push_back(train.times[i]);
  }

  std::vector<double> intra;
  for (const auto& g : groups) {
    Burst b;
    b.times = g;
    if (g.size() >= 2) {
      std::vector<double> gi;
      for (std::size_t i = 1; i < g.size(); ++i) gi.push_back(g[i] - g[i - 1]);
      intra.insert(intra.end(), gi.begin(), gi.end());
      double mean = 0.0;
      for (double v : gi) mean += v;
      mean /= gi.size();
      b.isi_mean = mean;
      if (gi.size() >= 2) {
        double var = 0.0;
        for (double v : gi) var += (v - mean) * (v - mean);
        b.isi_cv = std::sqrt(var / gi.size()) / mean;
      }
    }
    out.bursts.push_back(std::move(b));
  }
  for (std::size_t i = 1; i < out.bursts.size(); ++i)
    out.gaps.push_back(out.bursts[i].times.front() -
                       out.bursts[i - 1].times.back());
  if (!intra.empty()) {
    std::sort(intra.begin(), intra.end());
    out.intra_isi_median = intra[intra.size() / 2];
  }
  if (!out.gaps.empty() && out.intra_isi_median > 0.0)
    out.min_gap_ratio = *std::min_element(out.gaps.begin(), out.gaps.end()) /
                        out.intra_isi_median;
  return out;
}

std::optional<NaturalFrequency> dc_spike_frequency(
    const ModelParams& p, double r_series, double v_dc,
    const IntegratorConfig& cfg, double T, CircuitState init, double dt_out,
    double transient_fraction) {
  CircuitTrace trace = simulate_circuit(p, Drive::dc(v_dc),
                                        SeriesElement::fixed(r_series), init,
                                        T, cfg, dt_out);
  SpikeTrain train = detect_spikes(trace, p);
  double t_skip = transient_fraction * T;
  SpikeTrain tail;
  tail.options = train.options;
  for (double t : train.times)
    if (t >= t_skip) tail.times.push_back(t);
  if (tail.times.size() < 5) return std::nullopt;
  return natural_frequency(tail);
}

SyncReport sync_analysis(const ModelParams& p, double r_series, double v_dc,
                         double delta_v, double omega_source,
                         const IntegratorConfig& cfg, const SyncOptions& opts,
                         std::optional<double> omega_natural_dc) {
  SyncReport rep;
  rep.v_dc = v_dc;
  rep.delta_v = delta_v;
  rep.omega_source = omega_source;

  if (omega_natural_dc) {
    rep.omega_natural_dc = *omega_natural_dc;
  } else {
    auto nf = dc_spike_frequency(p, r_series, v_dc, cfg, 1.5, opts.init,
                                 opts.dt_out);
    rep.omega_natural_dc = nf ? nf->omega : 0.0;
  }

  CircuitTrace trace = simulate_circuit(
      p, Drive::dc_plus_ac(v_dc, delta_v, omega_source),
      SeriesElement::fixed(r_series), opts.init, opts.T, cfg, opts.dt_out);

  // post-transient slice
  std::size_t skip = static_cast<std::size_t>(opts.transient_fraction *
                                              static_cast<double>(trace.size()));
  if (skip >= trace.size()) skip = 0;
  std::vector<double> v_c(trace.v_c.begin() + skip, trace.v_c.end());
  std::vector<double> x(trace.x.begin() + skip, trace.x.end());
  double t0 = trace.t[skip];

  SpikeOptions sopts;
  sopts.threshold = p.x_c;
  SpikeTrain train = detect_spikes(x, t0, opts.dt_out, sopts);
  rep.n_spikes = static_cast<int>(train.size());

  if (rep.n_spikes >= 5) {
    NaturalFrequency nf = natural_frequency(train);
    rep.omega_spike = nf.omega;
  }

  Spectrum spec = single_sided_spectrum(v_c, opts.dt_out, /*hann=*/true);
  std::vector<SpectrumPeak> peaks = spectrum_peaks(spec, opts.peak_frac);
  double tol = opts.bin_tolerance * spec.bin();
  // The self-oscillation line visible in the driven spectrum is the (slightly
  // pulled) spike frequency of this run, so the lattice is built on it; the
  // undriven value only stands in when there is no spiking to measure.
  double omega_lattice = rep.n_spikes >= 5 ? rep.omega_spike : rep.omega_natural_dc;

  // only peaks inside the band the lattice can reach are classified
  double lattice_cap = opts.max_nm * (omega_lattice + omega_source) + tol;
  for (const SpectrumPeak& pk : peaks) {
    if (pk.omega > lattice_cap) continue;
    LatticeMatch best;
    best.observed = pk.omega;
    best.p1 = pk.p1;
    best.error = std::numeric_limits<double>::infinity();
    for (int nn = 0; nn <= opts.max_nm; ++nn) {
      for (int mm = -opts.max_nm; mm <= opts.max_nm; ++mm) {
        if (nn == 0 && mm == 0) continue;
        double pred = nn * omega_lattice + mm * omega_source;
        if (pred < 0.0) continue;
        double err = std::fabs(pred - pk.omega);
        if (err < best.error) {
          best.error = err;
          best.n = nn;
          best.m = mm;
          best.predicted = pred;
        }
      }
    }
    best.matched = best.error <= tol;
    rep.peaks.push_back(best);
    if (!best.matched) rep.all_peaks_matched = false;
    if (pk.p1 > rep.dominant_p1) {
      rep.dominant_p1 = pk.p1;
      rep.dominant_omega = pk.omega;
    }
  }

  if (rep.n_spikes >= 5) {
    // p:q lock = spike rate at (p/q) omega_source AND phase coherence: the
    // drive phase sampled at every p-th spike must stay put over the window
    // (a rate match alone also fires when omega_source merely sits at a
    // rational multiple of an unentrained oscillation).
    auto strobe_coherence = [&](int pp) {
      double worst = 1.0;
      for (int res = 0; res < pp; ++res) {
        double cs = 0.0, sn = 0.0;
        int cnt = 0;
        for (std::size_t i = res; i < train.times.size();
             i += static_cast<std::size_t>(pp)) {
          double phase = omega_source * train.times[i];
          cs += std::cos(phase);
          sn += std::sin(phase);
          ++cnt;
        }
        if (cnt < 4) return 0.0;
        worst = std::min(worst, std::sqrt(cs * cs + sn * sn) / cnt);
      }
      return worst;
    };
    for (int pp = 1; pp <= opts.max_pq && !rep.locked; ++pp) {
      for (int qq = 1; qq <= opts.max_pq && !rep.locked; ++qq) {
        double target = omega_source * static_cast<double>(pp) /
                        static_cast<double>(qq);
        if (std::fabs(rep.omega_spike - target) <= opts.lock_rel_tol * target &&
            strobe_coherence(pp) >= opts.min_strobe_coherence) {
          rep.locked = true;
          rep.lock_p = pp;
          rep.lock_q = qq;
        }
      }
    }
    // persistent spiking under a slow drive is its own class, whether or
    // not the spike rate also locks to a multiple of the source
    if (omega_source < opts.low_freq_fraction * rep.omega_natural_dc)
      rep.response_class = ResponseClass::SpikeTrainLowFreq;
    else if (rep.locked)
      rep.response_class = ResponseClass::Locked;
    else
      rep.response_class = ResponseClass::Quasiperiodic;
  } else {
    rep.response_class = ResponseClass::Harmonic;
  }
  return rep;
}

}  // namespace memcap
