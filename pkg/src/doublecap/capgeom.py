"""Double-cap volumes and the communication lower bounds built on them.

Volumes are fractions of the unit sphere's measure. The real double cap on
``S^{d-1}`` is ``{y : |y.s| > cos(pi/4)}``; the complex one on the unit
sphere of ``C^N`` is ``{x : |<x|s>|^2 > 1/2}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np
from scipy.special import betainc, gammaln

from . import hilbert
from .montecarlo import count_hits
from .quadrature import adaptive_gauss_legendre

QUAD_RTOL = 1e-12
QUARTER_PI = math.pi / 4
CAP_COS = math.cos(QUARTER_PI)

# Upper-bound bases for orthogonality-avoiding volume, informational only.
FRANKL_WILSON_BASE = 1.203
RAIGORODSKII_BASE = 1.225
CORNER_THETA = (2 / math.sqrt(3)) ** math.sqrt(2)
DEFAULT_EPSILON = 1e-6
LINEAR_FLOOR_LOG2 = -1000.0


def _check_dim(value: int, minimum: int, name: str):
    if int(value) != value or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")


def _sin_power(m: int):
    def f(x):
        return np.sin(x) ** m

    return f


def real_cap_volume(d: int) -> float:
    """Fraction of ``S^{d-1}`` covered by two opposite caps of angular width pi/2.

    Both integrals of ``sin^{d-2}`` are done by adaptive quadrature. Above
    ``d = 1500`` the numerator approaches underflow, so the value is taken
    from :func:`log2_real_cap_volume` instead.
    """
    _check_dim(d, 2, "d")
    if d > 1500:
        return 2.0 ** log2_real_cap_volume(d)
    f = _sin_power(d - 2)
    num = adaptive_gauss_legendre(f, 0.0, QUARTER_PI, rtol=QUAD_RTOL)
    den = adaptive_gauss_legendre(f, 0.0, 2 * QUARTER_PI, rtol=QUAD_RTOL)
    return num / den


def real_cap_volume_beta(d: int) -> float:
    """Same volume through the identity ``V_d = I_{1/2}((d-1)/2, 1/2)``."""
    _check_dim(d, 2, "d")
    return float(betainc((d - 1) / 2, 0.5, 0.5))


def _log_half_sine_integral(m: int) -> float:
    # ln of int_0^{pi/2} sin^m x dx
    return 0.5 * math.log(math.pi) - math.log(2) + float(gammaln((m + 1) / 2) - gammaln(m / 2 + 1))


def log2_real_cap_volume(d: int) -> float:
    """``log2 V_d`` without forming ``V_d``; finite for any ``d``.

    The numerator integrand is divided by its maximum ``sin^m(pi/4)`` and
    written in ``t = pi/4 - x`` as ``exp(m log(cos t - sin t))``, evaluated
    through ``log1p`` so rounding is not amplified by ``m``. Only
    ``t < 800/m`` is integrated: by concavity of ``log sin`` the integrand
    is below ``e^-800`` beyond that. The denominator is the closed form via
    log-gamma.
    """
    _check_dim(d, 2, "d")
    m = d - 2
    if m == 0:
        return -1.0

    def scaled(t):
        with np.errstate(divide="ignore"):
            return np.exp(m * np.log1p(-2.0 * np.sin(0.5 * t) ** 2 - np.sin(t)))

    hi = min(QUARTER_PI, 800.0 / m)
    integral = adaptive_gauss_legendre(scaled, 0.0, hi, rtol=QUAD_RTOL)
    ln_num = m * math.log(math.sin(QUARTER_PI)) + math.log(integral)
    return (ln_num - _log_half_sine_integral(m)) / math.log(2)


def complex_cap_volume(N: int) -> float:
    """Complex double-cap volume as the ratio of ``cos x sin^{2N-3} x`` integrals."""
    _check_dim(N, 2, "N")
    m = 2 * N - 3

    def f(x):
        return np.cos(x) * np.sin(x) ** m

    num = adaptive_gauss_legendre(f, 0.0, QUARTER_PI, rtol=QUAD_RTOL)
    den = adaptive_gauss_legendre(f, 0.0, 2 * QUARTER_PI, rtol=QUAD_RTOL)
    return num / den


def complex_cap_volume_closed(N: int) -> float:
    _check_dim(N, 2, "N")
    return 2.0 ** (1 - N)


def sphere_surface(d: int) -> float:
    """Surface measure ``W_d`` of the unit sphere ``S^d`` embedded in ``R^{d+1}``."""
    return math.exp(math.log(2) + (d + 1) / 2 * math.log(math.pi) - float(gammaln((d + 1) / 2)))


def sphere_measure(d: int, r: float):
    """Measure ``W_d r^d`` of the radius-``r`` sphere ``S^d``; vectorized in ``r``."""
    return sphere_surface(d) * np.asarray(r) ** d


def complex_cap_volume_decomposed(N: int) -> float:
    """Complex double-cap volume from the ``S^1 x S^{2N-3}`` fibration of ``S^{2N-1}``.

    Write ``y = cos(t) u1 + sin(t) u2`` with ``u1`` in the plane of the cap
    axes and ``u2`` in its orthogonal complement. The two caps are
    ``t < pi/4`` and ``t > 3pi/4`` with ``t`` in ``[0, pi]``; over that range
    ``u1`` and ``-u1`` describe the same point, so each cap sweeps half of
    the circle of radius ``cos t``.
    """
    _check_dim(N, 2, "N")
    inner = 2 * N - 3

    def f(t):
        return 0.5 * sphere_measure(1, np.cos(t)) * sphere_measure(inner, np.sin(t))

    integral = adaptive_gauss_legendre(f, 0.0, QUARTER_PI, rtol=QUAD_RTOL)
    return 2.0 * integral / sphere_surface(2 * N - 1)


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    stderr: float
    hits: int
    trials: int


def monte_carlo_cap_volume(
    kind: str,
    dim: int,
    trials: int,
    seed: int,
    threads: int = 1,
) -> MonteCarloEstimate:
    """Hit fraction of random points inside the double cap about the first basis axis."""
    if trials < 1000:
        raise ValueError("trials must be >= 1000")
    if kind == "real":
        _check_dim(dim, 2, "d")

        def sampler(size, rng):
            y = hilbert.uniform_sphere_points(dim, size, rng)
            return int(np.count_nonzero(np.abs(y[:, 0]) > CAP_COS))

    elif kind == "complex":
        _check_dim(dim, 2, "N")

        def sampler(size, rng):
            x = hilbert.haar_random_states(dim, size, rng)
            return int(np.count_nonzero(np.abs(x[:, 0]) ** 2 > 0.5))

    else:
        raise ValueError(f"kind must be 'real' or 'complex', got {kind!r}")
    hits = count_hits(sampler, trials, seed, threads)
    p = hits / trials
    return MonteCarloEstimate(p, math.sqrt(p * (1 - p) / trials), hits, trials)


def asymptotic_real_cap_volume(N: int) -> float:
    """Large-``N`` approximation ``2^{2-N/2} / sqrt(2 pi N)``; not exact at any ``N``."""
    _check_dim(N, 2, "N")
    return 2.0 ** (2 - N / 2) / math.sqrt(2 * math.pi * N)


def log2_asymptotic_real_cap_volume(N: int) -> float:
    _check_dim(N, 2, "N")
    return 2 - N / 2 - 0.5 * math.log2(2 * math.pi * N)


@dataclass(frozen=True)
class BoundsRow:
    """Lower bounds in bits for ``n`` qubits, plus comparison columns.

    ``fw_log2`` and ``raig_log2`` are ``log2`` of the volume upper bounds
    ``1.203^-N`` and ``1.225^-N``; ``ref_2_pow_n_over_3`` is the
    ``2^{n/3}`` reference bound. None of the three is asserted anywhere.
    """

    n: int
    N: int
    log2_VN: float
    real_bound_bits: float
    complex_bound_bits: int
    theorem2_bits: float
    entanglement_bits: int
    fw_log2: float
    raig_log2: float
    ref_2_pow_n_over_3: float

    @property
    def VN(self) -> float | None:
        if self.log2_VN < LINEAR_FLOOR_LOG2:
            return None
        return 2.0**self.log2_VN

    def as_dict(self) -> dict:
        return asdict(self)


def theorem2_bits(n: int, epsilon: float = DEFAULT_EPSILON) -> float:
    return 2.0**n * math.log2(CORNER_THETA + epsilon)


def lower_bounds(n: int, epsilon: float = DEFAULT_EPSILON) -> BoundsRow:
    _check_dim(n, 1, "n")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon!r}")
    N = 2**n
    log2_v = log2_real_cap_volume(N)
    return BoundsRow(
        n=n,
        N=N,
        log2_VN=log2_v,
        real_bound_bits=-log2_v,
        complex_bound_bits=N - 1,
        theorem2_bits=theorem2_bits(n, epsilon),
        entanglement_bits=N - 1 - n,
        fw_log2=-N * math.log2(FRANKL_WILSON_BASE),
        raig_log2=-N * math.log2(RAIGORODSKII_BASE),
        ref_2_pow_n_over_3=2.0 ** (n / 3),
    )


def bounds_table(n_max: int, epsilon: float = DEFAULT_EPSILON) -> list[BoundsRow]:
    _check_dim(n_max, 1, "n_max")
    return [lower_bounds(n, epsilon) for n in range(1, n_max + 1)]
