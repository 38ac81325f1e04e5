"""Attribute spectrum width to distribution, correlation, or nonlinearity.

A wide singularity spectrum alone does not say *why* a series is
multifractal. Comparing the original width against surrogate ensembles
does:

  * shuffled surrogates keep the value distribution and destroy all
    temporal order — if the width survives shuffling, fat tails alone
    explain it;
  * phase-randomized surrogates keep the full linear correlation
    structure — if the width dies only here, nonlinear dependence was
    carrying it.

The demo runs both ensembles on a cascade (genuinely correlated
multifractality) and on white Gaussian noise (nothing to find).

Run: python3 demos/surrogate_attribution.py
"""

import numpy as np

from smfdfa.mfdfa import MfdfaConfig, generate_cascade
from smfdfa.surrogate import surrogate_test

N_SURROGATES = 20


def report(name: str, values: np.ndarray, kind: str, seed: int) -> None:
    comparison = surrogate_test(values, kind, N_SURROGATES, MfdfaConfig(), seed)
    surr = np.asarray(comparison.surrogate_delta_alphas)
    print(f"  {kind:>7}: original width {comparison.original_delta_alpha:.3f} vs "
          f"surrogates [{surr.min():.3f}, {surr.max():.3f}] "
          f"-> rank quantile {comparison.quantile:.3f}")


print(f"Each test ranks the original spectrum width against "
      f"{N_SURROGATES} surrogates;\nquantiles near 1.0 mean the surrogates "
      "cannot reproduce the width.\n")

cascade = generate_cascade(0.75, 0.25, 13)
print("binomial cascade (8192 cells):")
report("cascade", cascade, "shuffle", seed=0)
report("cascade", cascade, "phase", seed=0)
print("  -> shuffling collapses the width: the cascade's multifractality "
      "lives in the\n     ordering of values, not in their marginal "
      "distribution.\n")

noise = np.abs(np.random.default_rng(7).standard_normal(8192)) + 1e-6
print("white noise magnitudes (8192 samples):")
report("noise", noise, "shuffle", seed=0)
report("noise", noise, "phase", seed=0)
print("  -> unremarkable quantiles: a featureless series should not (and "
      "does not)\n     look significant against its own surrogates.")
