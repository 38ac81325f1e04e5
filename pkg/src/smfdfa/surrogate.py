"""Surrogate-data testing for the source of multifractal width.

Shuffled surrogates keep the marginal distribution and destroy all
temporal correlation; phase-randomized surrogates keep the periodogram
(hence all linear correlation) and approximately Gaussianize the
marginals. Comparing the spectrum width of the original against an
ensemble of either kind attributes multifractality to the distribution,
to linear correlation, or to nonlinear structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NumericalError
from .mfdfa import MfdfaConfig, analyze_segment

KINDS = ("shuffle", "phase")
DEFAULT_N_SURROGATES = 20


def shuffle(series: np.ndarray, seed: int) -> np.ndarray:
    """Uniform random permutation of the values under the seeded generator."""
    x = np.asarray(series, dtype=float)
    if x.size < 2:
        raise InputError(f"need at least 2 samples to shuffle, got {x.size}")
    return np.random.default_rng(seed).permutation(x)


def phase_surrogate(series: np.ndarray, seed: int) -> np.ndarray:
    """Phase-randomized copy: same periodogram, i.i.d. uniform phases.

    DC and (for even length) Nyquist bins keep their amplitudes real;
    every other bin gets a fresh phase. The inverse transform of a
    spectrum with conjugate symmetry is real by construction.
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < 16:
        raise InputError(f"need at least 16 samples for phase randomization, got {n}")
    spectrum = np.fft.rfft(x)
    amplitude = np.abs(spectrum)
    rng = np.random.default_rng(seed)
    # interior bins exclude DC and, when n is even, the Nyquist bin
    hi = spectrum.size - 1 if n % 2 == 0 else spectrum.size
    phases = rng.uniform(0.0, 2.0 * math.pi, hi - 1)
    rotated = spectrum.astype(complex).copy()
    rotated[1:hi] = amplitude[1:hi] * np.exp(1j * phases)
    return np.fft.irfft(rotated, n=n)


def _member(series: np.ndarray, kind: str, seed: int, index: int) -> np.ndarray:
    member_seed = seed ^ index
    if kind == "shuffle":
        return shuffle(series, member_seed)
    return phase_surrogate(series, member_seed)


@dataclass(frozen=True)
class SurrogateEnsemble:
    kind: str
    n_surrogates: int
    seed: int
    series: tuple[np.ndarray, ...]


def make_ensemble(series: np.ndarray, kind: str, n: int, seed: int) -> SurrogateEnsemble:
    """n independent surrogates; member i uses generator seed seed^i so the
    ensemble is identical no matter how members are scheduled."""
    if kind not in KINDS:
        raise InputError(f"kind must be one of {KINDS}, got {kind!r}")
    if n < 1:
        raise InputError(f"need at least 1 surrogate, got {n}")
    x = np.asarray(series, dtype=float)
    members = tuple(_member(x, kind, seed, i) for i in range(n))
    return SurrogateEnsemble(kind=kind, n_surrogates=n, seed=seed, series=members)


@dataclass(frozen=True)
class SurrogateComparison:
    """Original spectrum width against the surrogate-width distribution.

    quantile uses the rank / (n + 1) convention where rank counts
    1 + #{surrogates strictly below the original}. Surrogates whose
    analysis failed numerically are dropped and counted in n_failed.
    """

    kind: str
    original_delta_alpha: float
    surrogate_delta_alphas: tuple[float, ...]
    quantile: float
    seed: int
    n_failed: int = 0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "original_delta_alpha": self.original_delta_alpha,
            "surrogate_delta_alphas": list(self.surrogate_delta_alphas),
            "quantile": self.quantile,
            "seed": self.seed,
            "n_failed": self.n_failed,
        }


def surrogate_test(
    series: np.ndarray,
    kind: str = "shuffle",
    n: int = DEFAULT_N_SURROGATES,
    mf_config: MfdfaConfig = MfdfaConfig(),
    seed: int = 0,
) -> SurrogateComparison:
    """Spectrum width of the original vs n surrogates, identical config.

    The series is the fluctuation (return) sequence, not raw prices. A
    surrogate that fails MF-DFA (a degenerate permutation can zero a
    window) is dropped and counted rather than aborting the test.
    """
    if n < 10:
        raise InputError(f"need at least 10 surrogates for a quantile, got {n}")
    x = np.asarray(series, dtype=float)
    _, _, spectrum = analyze_segment(x, mf_config, label="original")
    widths = []
    n_failed = 0
    ensemble = make_ensemble(x, kind, n, seed)
    for i, member in enumerate(ensemble.series):
        try:
            _, _, spec = analyze_segment(member, mf_config, label=f"{kind}#{i}")
            widths.append(spec.delta_alpha)
        except NumericalError:
            n_failed += 1
    if not widths:
        raise NumericalError("every surrogate failed analysis")
    arr = np.asarray(widths)
    rank = 1 + int(np.sum(arr < spectrum.delta_alpha))
    quantile = rank / (len(widths) + 1)
    return SurrogateComparison(
        kind=kind,
        original_delta_alpha=spectrum.delta_alpha,
        surrogate_delta_alphas=tuple(widths),
        quantile=quantile,
        seed=seed,
        n_failed=n_failed,
    )
