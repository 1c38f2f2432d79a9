#pragma once

// Spike detection, natural-frequency estimation, single-sided DFT spectra,
// spiking-regime classification, and synchronization analysis against an AC
// drive.  All frequencies are angular (omega = 2*pi / period).

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "core/circuit.hpp"
#include "core/model.hpp"

namespace memcap {

// ---------------------------------------------------------------------------
// DFT

/// Forward DFT, X_k = sum_n x_n exp(-2*pi*i*n*k/N).  Radix-2 for powers of
/// two, Bluestein's chirp-z reduction otherwise, so any length is accepted.
std::vector<std::complex<double>> dft(const std::vector<double>& samples);
void fft_inplace(std::vector<std::complex<double>>& data, bool inverse);

struct Spectrum {
  double dt = 0.0;
  std::size_t n = 0;           // window length in samples
  double mean = 0.0;           // removed before the transform (DC reported here)
  std::vector<double> omega;   // 2*pi*k/(n*dt), k = 0..n/2
  std::vector<double> p1;      // single-sided amplitude
  double bin() const { return 2.0 * 3.14159265358979323846 / (n * dt); }
};

/// Single-sided amplitude spectrum: P1[k] = 2|X_k|/N for interior bins,
/// |X_k|/N at DC and Nyquist.  The sample mean is removed first.  With
/// hann=true a Hann window (amplitude-corrected) is applied, which trades
/// peak sharpness for low leakage sidelobes.
Spectrum single_sided_spectrum(const std::vector<double>& samples, double dt,
                               bool hann = false);

struct SpectrumPeak {
  double omega = 0.0;
  double p1 = 0.0;
  std::size_t bin = 0;
};

/// Local maxima of P1 above `frac` of the global maximum, merging maxima
/// closer than `merge_bins` into the strongest one.  DC bin excluded.
std::vector<SpectrumPeak> spectrum_peaks(const Spectrum& spec,
                                         double frac = 0.05,
                                         std::size_t merge_bins = 3);

// ---------------------------------------------------------------------------
// Spike trains

enum class SpikeCriterion {
  XThreshold,  // upward crossings of x through x_c (debounced)
  VcPeaks,     // local maxima of V_C above a prominence threshold
};

struct SpikeOptions {
  SpikeCriterion criterion = SpikeCriterion::XThreshold;
  double threshold = 6.4;        // x_c for XThreshold
  int debounce_samples = 10;
  double prominence_frac = 0.25;  // of peak-to-peak range, for VcPeaks
};

struct SpikeTrain {
  std::vector<double> times;  // strictly increasing
  SpikeOptions options;
  std::size_t size() const { return times.size(); }
};

SpikeTrain detect_spikes(const std::vector<double>& samples, double t0,
                         double dt, const SpikeOptions& opts);
SpikeTrain detect_spikes(const CircuitTrace& trace, const ModelParams& p,
                         SpikeCriterion criterion = SpikeCriterion::XThreshold);

struct NaturalFrequency {
  double omega = 0.0;        // 2*pi / mean inter-spike interval
  double period_mean = 0.0;
  double period_std = 0.0;
  int n_intervals = 0;
};

/// Requires at least 5 spikes after discarding `discard_head` leading ones.
NaturalFrequency natural_frequency(const SpikeTrain& train,
                                   int discard_head = 0);

double skewness(const std::vector<double>& samples);

enum class Regime { I, II, III };
const char* to_string(Regime r);

/// Classify one period of V_C by skewness: < -s0 -> I (negative spikes),
/// > +s0 -> III (positive spikes), otherwise II (near-harmonic).
Regime classify_regime(const std::vector<double>& v_c_period, double s0 = 1.0);

// ---------------------------------------------------------------------------
// Synchronization

enum class ResponseClass { Harmonic, Locked, Quasiperiodic, SpikeTrainLowFreq };
const char* to_string(ResponseClass c);

struct LatticeMatch {
  int n = 0;                 // multiple of omega_natural
  int m = 0;                 // multiple of omega_source (signed combination)
  double predicted = 0.0;    // |n*omega_natural + m*omega_source|
  double observed = 0.0;
  double error = 0.0;
  double p1 = 0.0;
  bool matched = false;
};

struct SyncReport {
  double v_dc = 0.0;
  double delta_v = 0.0;
  double omega_source = 0.0;
  double omega_natural_dc = 0.0;  // spike frequency of the undriven (DC) run
  double omega_spike = 0.0;       // spike frequency of the driven run (0 if <5 spikes)
  int n_spikes = 0;
  bool locked = false;
  int lock_p = 0, lock_q = 0;  // omega_spike ~= (p/q) * omega_source
  ResponseClass response_class = ResponseClass::Harmonic;
  double dominant_omega = 0.0;  // strongest non-DC spectral peak
  double dominant_p1 = 0.0;
  std::vector<LatticeMatch> peaks;  // one entry per significant peak
  bool all_peaks_matched = true;
};

struct SyncOptions {
  double T = 2.0;
  double transient_fraction = 0.25;  // leading fraction discarded
  double dt_out = 1.0e-5;
  CircuitState init{6.6, 2.0207};
  double peak_frac = 0.05;
  int max_nm = 5;                  // lattice search bound for N, M
  double bin_tolerance = 2.0;      // lattice match tolerance in grid bins
  int max_pq = 3;                  // lock-ratio search bound
  double lock_rel_tol = 0.01;
  double min_strobe_coherence = 0.85;  // phase-coherence floor for a lock
  double low_freq_fraction = 0.5;  // omega_source below this x omega_natural
};

/// Drive the circuit with V(t) = V_dc + delta_v sin(omega_source t), then
/// match the post-transient V_C spectrum against the
/// N*omega_natural +/- M*omega_source lattice and test spike-rate locking.
/// omega_natural_dc is computed from a DC run unless supplied.
SyncReport sync_analysis(const ModelParams& p, double r_series, double v_dc,
                         double delta_v, double omega_source,
                         const IntegratorConfig& cfg,
                         const SyncOptions& opts = {},
                         std::optional<double> omega_natural_dc = std::nullopt);

// ---------------------------------------------------------------------------
// Bursting

struct Burst {
  std::vector<double> times;
  double isi_mean = 0.0;
  double isi_cv = 0.0;  // 0 for bursts with fewer than 3 spikes
};

struct BurstAnalysis {
  std::vector<Burst> bursts;
  std::vector<double> gaps;         // between consecutive bursts
  double intra_isi_median = 0.0;    // pooled over all bursts
  double min_gap_ratio = 0.0;       // min gap / intra_isi_median
};

/// Split a spike train into bursts at gaps larger than `split_factor` times
/// the median inter-spike interval.
BurstAnalysis analyze_bursts(const SpikeTrain& train, double split_factor = 3.0);

/// Natural spike frequency under DC drive from the cycle-adjacent initial
/// condition; returns nullopt when fewer than 5 post-transient spikes occur.
std::optional<NaturalFrequency> dc_spike_frequency(
    const ModelParams& p, double r_series, double v_dc,
    const IntegratorConfig& cfg, double T = 1.5,
    CircuitState init = {6.6, 2.0207}, double dt_out = 1.0e-5,
    double transient_fraction = 1.0 / 3.0);

}  // namespace memcap
