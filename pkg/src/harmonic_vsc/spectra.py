"""Autocorrelation spectra, peak extraction and polariton bookkeeping.

Spectra are Blackman-Tukey estimates: the biased autocorrelation function is
truncated at ``max_lag``, multiplied by a symmetric lag window and cosine
transformed on a zero-padded grid. The one-sided power spectrum is scaled so
that its integral over ``omega`` equals the variance of the series.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.fft
import scipy.integrate
import scipy.signal

from .units import au_to_cm1

MIN_SAMPLES = 2**10
OBSERVABLES = ("collective_dipole", "local_dipole", "bond", "photon")


@dataclass(frozen=True)
class Spectrum:
    frequencies: np.ndarray
    intensities: np.ndarray
    source_observable: str
    resolution: float
    metadata: dict = field(default_factory=dict)

    @property
    def frequencies_cm1(self) -> np.ndarray:
        return au_to_cm1(self.frequencies)

    def integral(self) -> float:
        return float(scipy.integrate.trapezoid(self.intensities, self.frequencies))

    def value_at(self, omega: float) -> float:
        return float(np.interp(omega, self.frequencies, self.intensities))

    def band_maximum(self, omega: float, half_width: float) -> float:
        mask = np.abs(self.frequencies - omega) <= half_width
        if not mask.any():
            return self.value_at(omega)
        return float(self.intensities[mask].max())


@dataclass(frozen=True)
class Peak:
    frequency: float
    intensity: float
    width: float

    @property
    def frequency_cm1(self) -> float:
        return float(au_to_cm1(self.frequency))

    @property
    def width_cm1(self) -> float:
        return float(au_to_cm1(self.width))


@dataclass(frozen=True)
class PeakList:
    peaks: tuple
    threshold: float
    resolution: float

    def __len__(self) -> int:
        return len(self.peaks)

    def __iter__(self):
        return iter(self.peaks)

    def __getitem__(self, k) -> Peak:
        return self.peaks[k]

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([p.frequency for p in self.peaks])

    def nearest(self, omega: float) -> Peak:
        if not self.peaks:
            raise ValueError("peak list is empty")
        return min(self.peaks, key=lambda p: abs(p.frequency - omega))


class NoRabiSplittingError(ValueError):
    """No pair of peaks brackets the reference frequency."""

    def __init__(self, omega_ref: float, frequencies: Sequence[float]):
        self.omega_ref = omega_ref
        self.frequencies = tuple(float(f) for f in frequencies)
        listed = ", ".join(f"{au_to_cm1(f):.2f}" for f in self.frequencies) or "none"
        super().__init__(f"no peaks on both sides of {au_to_cm1(omega_ref):.2f} cm-1 "
                         f"(peaks at: {listed} cm-1)")


def _as_columns(series) -> np.ndarray:
    arr = np.asarray(series, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError("series must be 1-D or (n_samples, n_series)")
    return arr


def autocorrelation(series, max_lag: Optional[int] = None) -> np.ndarray:
    """Biased autocorrelation of mean-removed columns, averaged over columns.

    ``series`` is a 1-D array, a 2-D ``(n_samples, n_series)`` array or a list
    of those with equal length (for example one per random seed). Lags
    ``0..max_lag`` are returned.
    """
    blocks = series if isinstance(series, (list, tuple)) else [series]
    cols = [_as_columns(b) for b in blocks]
    n = cols[0].shape[0]
    if any(c.shape[0] != n for c in cols):
        raise ValueError("all series must have the same length")
    if n < MIN_SAMPLES:
        raise ValueError(f"series needs at least {MIN_SAMPLES} samples, got {n}")
    data = np.concatenate(cols, axis=1)
    if not np.all(np.isfinite(data)):
        raise ValueError("series contains non-finite values")
    if max_lag is None:
        max_lag = n // 4
    if not 1 <= max_lag < n:
        raise ValueError(f"max_lag must be in [1, {n - 1}]")
    data = data - data.mean(axis=0)
    n_fft = scipy.fft.next_fast_len(2 * n)
    spec = np.fft.rfft(data, n=n_fft, axis=0)
    acf = np.fft.irfft(np.abs(spec) ** 2, n=n_fft, axis=0)[: max_lag + 1] / n
    return acf.mean(axis=1)


def lag_window(name: str, max_lag: int) -> np.ndarray:
    """Right half (lags ``0..max_lag``) of a symmetric taper, 1 at lag 0."""
    if name in ("none", "boxcar", "rectangular"):
        return np.ones(max_lag + 1)
    full = scipy.signal.get_window(name, 2 * max_lag + 1, fftbins=False)
    half = full[max_lag:]
    return half / half[0]


def spectrum_from_autocorrelation(acf: np.ndarray, dt: float, window: str = "hann",
                                  zero_pad: int = 4, observable: str = "collective_dipole"
                                  ) -> Spectrum:
    """One-sided cosine transform of a tapered autocorrelation."""
    if observable not in OBSERVABLES:
        raise ValueError(f"observable must be one of {OBSERVABLES}")
    if not dt > 0:
        raise ValueError("dt must be positive")
    if zero_pad < 1:
        raise ValueError("zero_pad must be >= 1")
    max_lag = len(acf) - 1
    tapered = acf * lag_window(window, max_lag)
    n_fft = zero_pad * 2 * max_lag
    even = np.zeros(n_fft)
    even[: max_lag + 1] = tapered
    even[n_fft - max_lag:] = tapered[1:][::-1]
    power = np.fft.rfft(even).real * dt / np.pi
    # tapers with negative transform sidelobes leave small negative values
    power = np.clip(power, 0.0, None)
    d_omega = 2 * np.pi / (n_fft * dt)
    freqs = np.arange(len(power)) * d_omega
    return Spectrum(freqs, power, observable, d_omega,
                    {"window": window, "max_lag": max_lag, "zero_pad": zero_pad, "dt": dt})


def autocorrelation_spectrum(series, dt: float, window: str = "hann", max_lag: Optional[int] = None,
                             zero_pad: int = 4, observable: str = "collective_dipole") -> Spectrum:
    """Power spectrum of a sampled observable.

    Parameters
    ----------
    series : array or list of arrays
        Samples spaced by ``dt``. Columns of a 2-D array and entries of a list
        are averaged at the autocorrelation level, in the given order.
    dt : float
        Sampling interval in atomic units.
    window : str
        Lag window; any name accepted by ``scipy.signal.get_window`` or "none".
    max_lag : int, optional
        Autocorrelation truncation, default a quarter of the series length.
    zero_pad : int
        Transform length as a multiple of the two-sided lag span.
    """
    acf = autocorrelation(series, max_lag)
    return spectrum_from_autocorrelation(acf, dt, window, zero_pad, observable)


def find_peaks(spectrum: Spectrum, rel_threshold: float = 0.05) -> PeakList:
    """Local maxima above ``rel_threshold`` times the global maximum.

    Positions are refined by a parabola through the three bins around each
    maximum; widths are full widths at half maximum.
    """
    if not 0 < rel_threshold < 1:
        raise ValueError("rel_threshold must lie in (0, 1)")
    y = spectrum.intensities
    top = float(np.max(y)) if len(y) else 0.0
    if top <= 0:
        return PeakList((), rel_threshold, spectrum.resolution)
    idx, _ = scipy.signal.find_peaks(y, height=rel_threshold * top)
    if len(idx) == 0:
        return PeakList((), rel_threshold, spectrum.resolution)
    widths = scipy.signal.peak_widths(y, idx, rel_height=0.5)[0] * spectrum.resolution
    peaks = []
    for k, width in zip(idx, widths):
        y0, y1, y2 = y[k - 1], y[k], y[k + 1]
        curvature = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / curvature if curvature < 0 else 0.0
        freq = spectrum.frequencies[k] + shift * spectrum.resolution
        height = y1 - 0.25 * (y0 - y2) * shift
        peaks.append(Peak(float(freq), float(height), float(width)))
    peaks.sort(key=lambda p: p.frequency)
    return PeakList(tuple(peaks), rel_threshold, spectrum.resolution)


def rabi_splitting(peaks, omega_ref: float) -> float:
    """Splitting in cm^-1 between the nearest peaks below and above ``omega_ref`` (a.u.).

    ``peaks`` may be a :class:`PeakList` or plain frequencies in a.u.
    """
    freqs = peaks.frequencies if isinstance(peaks, PeakList) else np.asarray(peaks, dtype=float)
    below = freqs[freqs < omega_ref]
    above = freqs[freqs > omega_ref]
    if len(below) == 0 or len(above) == 0:
        raise NoRabiSplittingError(omega_ref, freqs)
    return float(au_to_cm1(above.min() - below.max()))


def dominant_pair(peaks: PeakList, omega_ref: float) -> tuple:
    """Strongest peak below and strongest peak above ``omega_ref`` (frequencies in a.u.).

    Window sidelobes of a strong line can clear the peak threshold next to it;
    keeping only the dominant peak on each side leaves the polariton pair.
    """
    below = [p for p in peaks if p.frequency < omega_ref]
    above = [p for p in peaks if p.frequency > omega_ref]
    if not below or not above:
        raise NoRabiSplittingError(omega_ref, peaks.frequencies)
    return (max(below, key=lambda p: p.intensity).frequency,
            max(above, key=lambda p: p.intensity).frequency)


def fit_power_law(x, y) -> tuple:
    """Least-squares ``log y = a log x + b``; returns ``(exponent, prefactor)``."""
    slope, intercept = np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)
    return float(slope), float(np.exp(intercept))


def write_spectrum_csv(path, spectra: Sequence[Spectrum], header: dict) -> None:
    lines = [f"# {key}: {value}" for key, value in header.items()]
    lines.append("frequency_au,frequency_cm1,intensity,observable")
    for spec in spectra:
        cm1 = spec.frequencies_cm1
        for k in range(len(spec.frequencies)):
            lines.append(f"{float(spec.frequencies[k])!r},{float(cm1[k])!r},"
                         f"{float(spec.intensities[k])!r},{spec.source_observable}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_peaks_jsonl(path, peak_lists: dict, header: dict) -> None:
    """First line is a metadata record; each further line is one peak."""
    records = [json.dumps({"record": "metadata", **header}, sort_keys=True)]
    for observable, plist in peak_lists.items():
        for p in plist:
            records.append(json.dumps({
                "record": "peak", "observable": observable, "frequency_au": p.frequency,
                "frequency_cm1": p.frequency_cm1, "intensity": p.intensity, "width_au": p.width,
                "width_cm1": p.width_cm1}, sort_keys=True))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(records) + "\n")


def trajectory_spectra(trajectories, observables: Sequence[str] = OBSERVABLES, window: str = "hann",
                       max_lag: Optional[int] = None, zero_pad: int = 4) -> dict:
    """Seed-averaged spectra of the sampled observables of a list of trajectories.

    Local dipoles and bond lengths are averaged over all molecules, so they
    describe one representative molecule.
    """
    trajs = list(trajectories)
    if not trajs:
        raise ValueError("no trajectories given")
    dt = trajs[0].sample_dt
    if any(t.sample_dt != dt for t in trajs):
        raise ValueError("trajectories must share the sampling interval")
    columns = {
        "collective_dipole": lambda t: t.collective_dipole,
        "local_dipole": lambda t: t.local_dipoles,
        "bond": lambda t: t.bond_lengths,
        "photon": lambda t: t.q_beta,
    }
    out = {}
    for name in observables:
        if name not in columns:
            raise ValueError(f"unknown observable {name!r}")
        out[name] = autocorrelation_spectrum([columns[name](t) for t in trajs], dt, window, max_lag,
                                             zero_pad, name)
    return out


@dataclass(frozen=True)
class LocalPolaritonRow:
    n_molecules: int
    lam: float
    lower_intensity: float
    upper_intensity: float
    dark_intensity: float
    collective_splitting_cm1: float
    analytic_splitting_cm1: float

    @property
    def polariton_intensity(self) -> float:
        return self.lower_intensity + self.upper_intensity


def polariton_band_intensities(spectrum: Spectrum, lower: float, upper: float, dark: float) -> tuple:
    """Spectrum maxima near the lower polariton, upper polariton and dark mode.

    Each band extends a quarter of the way to its nearest neighbour so the
    bands never overlap.
    """
    half = 0.25 * min(dark - lower, upper - dark)
    if half <= 0:
        raise ValueError("expected lower < dark < upper frequencies")
    return (spectrum.band_maximum(lower, half), spectrum.band_maximum(upper, half),
            spectrum.band_maximum(dark, half))


def local_polariton_intensity_scan(preset, n_values: Sequence[int], lambda_col: float, thermostat,
                                   n_steps: int, sample_stride: int = 5, n_seeds: int = 4,
                                   window: str = "hann", max_lag: Optional[int] = None,
                                   rel_threshold: float = 0.05) -> list:
    """Local-dipole polariton intensities at fixed collective coupling ``lambda_col``.

    For each ``N`` the coupling is ``lambda_col / sqrt(N)`` and the cavity is
    resonant with the bare asymmetric stretch. Intensities are read off the
    molecule-averaged local-dipole spectrum, in bands centred on the
    frequencies the integrator actually produces at ``thermostat.dt``; the
    splitting comes from peaks of the collective-dipole spectrum.
    """
    from .co2 import analytic_mode_dynamics
    from .dynamics import run_trajectories, verlet_frequency

    rows = []
    for n in n_values:
        lam = lambda_col / np.sqrt(n)
        cfg = preset.ensemble(int(n), lam)
        report = analytic_mode_dynamics(cfg)
        trajs = run_trajectories(cfg, thermostat, n_steps, sample_stride, n_seeds)
        specs = trajectory_spectra(trajs, ("collective_dipole", "local_dipole"), window, max_lag)
        centres = verlet_frequency(np.array([report.lower_polariton, report.upper_polariton,
                                             np.sqrt(report.k_a)]), thermostat.dt)
        lower, upper, dark = polariton_band_intensities(specs["local_dipole"], *centres)
        peaks = find_peaks(specs["collective_dipole"], rel_threshold)
        centre = 0.5 * (centres[0] + centres[1])
        split = rabi_splitting(dominant_pair(peaks, centre), centre)
        rows.append(LocalPolaritonRow(int(n), float(lam), lower, upper, dark, split,
                                      float(au_to_cm1(report.rabi_splitting))))
    return rows
