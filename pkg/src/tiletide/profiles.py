"""Cutoff profiles: plateau cutoffs (exact piecewise polynomials), squared
autocorrelation cutoffs (sampled), scale-difference bumps, and the
square-summing partition of unity on the 1/3-translate lattice.

Plateau cutoffs are stored as piecewise polynomials with coefficients
derived from exact rational smoothstep integrals.  Each piece is kept in
its local coordinate u = (x - a)/(b - a), which keeps evaluation
well-conditioned and makes argument scaling exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np


def smoothstep_coeffs(r: int) -> Tuple[Fraction, ...]:
    """Coefficients of S_r(u) = int_0^u t^(r-1)(1-t)^(r-1) dt / B(r, r).

    S_r rises 0 -> 1 on [0, 1] with r-1 vanishing derivatives at both ends
    and satisfies S_r(1 - u) = 1 - S_r(u).
    """
    if r < 1:
        raise ValueError("smoothness order must be >= 1")
    beta = Fraction(
        math.factorial(r - 1) * math.factorial(r - 1), math.factorial(2 * r - 1)
    )
    coeffs = [Fraction(0)] * (2 * r)
    for k in range(r):
        coeffs[r + k] = Fraction(math.comb(r - 1, k) * (-1) ** k, r + k) / beta
    return tuple(coeffs)


def _one_minus(coeffs: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    out = [-c for c in coeffs]
    if not out:
        out = [Fraction(0)]
    out[0] += 1
    return tuple(out)


def _poly_eval(coeffs: Sequence[float], x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x, dtype=float)
    for c in reversed(coeffs):
        out = out * x + c
    return out


def poly_affine(
    coeffs: Sequence[Fraction], a: Fraction, b: Fraction
) -> Tuple[Fraction, ...]:
    """Coefficients of u -> p(a*u + b), exact."""
    out: List[Fraction] = [Fraction(0)]
    for c in reversed(list(coeffs)):
        new = [Fraction(0)] * (len(out) + 1)
        for i, o in enumerate(out):
            new[i] += o * b
            new[i + 1] += o * a
        new[0] += c
        out = new
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return tuple(out)


@dataclass(frozen=True)
class PiecewisePolynomial:
    """Compactly supported piecewise polynomial; zero outside the breaks.

    Piece i lives on [breaks[i], breaks[i+1]) and stores coefficients in
    the local coordinate u = (x - breaks[i]) / (breaks[i+1] - breaks[i]).
    """

    breaks: Tuple[Fraction, ...]
    pieces: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        if len(self.breaks) != len(self.pieces) + 1:
            raise ValueError("need exactly one more break than pieces")
        if any(a >= b for a, b in zip(self.breaks, self.breaks[1:])):
            raise ValueError("breaks must be strictly increasing")

    @property
    def support(self) -> Tuple[float, float]:
        return float(self.breaks[0]), float(self.breaks[-1])

    def piece_bounds(self) -> List[Tuple[Fraction, Fraction]]:
        return list(zip(self.breaks, self.breaks[1:]))

    def __call__(self, x) -> np.ndarray:
        xs = np.asarray(x, dtype=float)
        scalar = xs.ndim == 0
        xs = np.atleast_1d(xs)
        fb = np.array([float(b) for b in self.breaks])
        idx = np.searchsorted(fb, xs, side="right") - 1
        out = np.zeros_like(xs)
        for i, coeffs in enumerate(self.pieces):
            mask = idx == i
            if mask.any():
                a, b = float(self.breaks[i]), float(self.breaks[i + 1])
                u = (xs[mask] - a) / (b - a)
                out[mask] = _poly_eval([float(c) for c in coeffs], u)
        return out[0] if scalar else out

    def derivative(self, order: int = 1) -> "PiecewisePolynomial":
        pieces = []
        for (a, b), p in zip(self.piece_bounds(), self.pieces):
            coeffs = list(p)
            scale = Fraction(1) / (b - a)
            for _ in range(order):
                coeffs = [c * i * scale for i, c in enumerate(coeffs)][1:] or [
                    Fraction(0)
                ]
            pieces.append(tuple(coeffs))
        return PiecewisePolynomial(self.breaks, tuple(pieces))

    def scale_argument(self, s) -> "PiecewisePolynomial":
        """Piecewise polynomial of x -> p(s * x) for rational s > 0."""
        s = Fraction(s)
        if s <= 0:
            raise ValueError("scale must be positive")
        return PiecewisePolynomial(
            tuple(b / s for b in self.breaks), self.pieces
        )

    def endpoint_derivatives(self, max_order: int):
        """Per piece, x-derivative values at both piece ends, orders
        0..max_order (float)."""
        table = []
        for (a, b), p in zip(self.piece_bounds(), self.pieces):
            coeffs = list(p)
            scale = Fraction(1) / (b - a)
            vals = []
            for m in range(max_order + 1):
                at0 = float(coeffs[0]) if coeffs else 0.0
                at1 = float(sum(coeffs)) if coeffs else 0.0
                vals.append((at0, at1))
                coeffs = [c * i * scale for i, c in enumerate(coeffs)][1:]
            table.append(vals)
        return table

    def moments(self, max_order: int) -> np.ndarray:
        """M_k = int p(x) x^k dx for k = 0..max_order (exact, floatified)."""
        out = [Fraction(0)] * (max_order + 1)
        for (a, b), p in zip(self.piece_bounds(), self.pieces):
            w = b - a
            # int_0^1 u^j p(u) du
            uint = [
                sum(c / (i + j + 1) for i, c in enumerate(p))
                for j in range(max_order + 1)
            ]
            for k in range(max_order + 1):
                acc = Fraction(0)
                for j in range(k + 1):
                    acc += math.comb(k, j) * a ** (k - j) * w ** (j + 1) * uint[j]
                out[k] += acc
        return np.array([float(v) for v in out])

    def fourier(self, s) -> np.ndarray:
        """Semi-analytic int p(x) exp(2 pi i s x) dx, vectorized in s.

        Each piece is handled in its local coordinate: a power series in
        the piece phase when that phase is small, integration by parts
        otherwise.  Both branches are accurate to roundoff.
        """
        ss = np.atleast_1d(np.asarray(s, dtype=float))
        w = 2j * np.pi * ss
        out = np.zeros(ss.shape, dtype=complex)
        for (a, b), p in zip(self.piece_bounds(), self.pieces):
            width = float(b - a)
            v = w * width  # local phase: integral is width*e^(w a)*J(v)
            phase_a = np.exp(w * float(a))
            small = np.abs(v) < 15.0
            piece_vals = np.zeros(ss.shape, dtype=complex)
            if small.any():
                vs = v[small]
                # J(v) = sum_k v^k / k! * int u^k p(u) du
                acc = np.zeros(vs.shape, dtype=complex)
                term = np.ones(vs.shape, dtype=complex)
                for k in range(90):
                    uk = float(sum(c / (i + k + 1) for i, c in enumerate(p)))
                    if k > 0:
                        term = term * vs / k
                    acc += term * uk
                    if np.max(np.abs(term)) < 1e-19:
                        break
                piece_vals[small] = acc
            if (~small).any():
                vl = v[~small]
                # J(v) = sum_m (-1)^m (e^v p^(m)(1) - p^(m)(0)) / v^(m+1)
                coeffs = list(p)
                ev = np.exp(vl)
                acc = np.zeros(vl.shape, dtype=complex)
                sign = 1.0
                vpow = vl.copy()
                while coeffs:
                    at0 = float(coeffs[0])
                    at1 = float(sum(coeffs))
                    acc += sign * (ev * at1 - at0) / vpow
                    coeffs = [c * i for i, c in enumerate(coeffs)][1:]
                    sign = -sign
                    vpow = vpow * vl
                piece_vals[~small] = acc
            out += width * phase_a * piece_vals
        return out if np.ndim(s) else out[0]


def ppoly_combine(
    terms: Sequence[Tuple[Fraction, PiecewisePolynomial]]
) -> PiecewisePolynomial:
    """Exact linear combination sum c_k p_k on the merged break lattice."""
    if not terms:
        raise ValueError("no terms")
    breaks = sorted({b for _, p in terms for b in p.breaks})
    pieces = []
    for x0, x1 in zip(breaks, breaks[1:]):
        acc: Tuple[Fraction, ...] = (Fraction(0),)
        for coef, p in terms:
            coef = Fraction(coef)
            for (a, b), src in zip(p.piece_bounds(), p.pieces):
                if a <= x0 and x1 <= b:
                    w = b - a
                    local = poly_affine(src, (x1 - x0) / w, (x0 - a) / w)
                    padded = list(acc) + [Fraction(0)] * max(
                        0, len(local) - len(acc)
                    )
                    for i, c in enumerate(local):
                        padded[i] += coef * c
                    acc = tuple(padded)
                    break
        pieces.append(acc)
    return PiecewisePolynomial(tuple(breaks), tuple(pieces))


def bump_ppoly(
    support: Tuple[Fraction, Fraction],
    flat: Tuple[Fraction, Fraction],
    smoothness: int,
) -> PiecewisePolynomial:
    """Bump equal to 1 on [flat], 0 outside [support], smoothstep sides."""
    a, b = Fraction(support[0]), Fraction(support[1])
    c, d = Fraction(flat[0]), Fraction(flat[1])
    if not (a < c <= d < b):
        raise ValueError("need support[0] < flat[0] <= flat[1] < support[1]")
    s = smoothstep_coeffs(smoothness)
    return PiecewisePolynomial(
        breaks=(a, c, d, b),
        pieces=(s, (Fraction(1),), _one_minus(s)),
    )


# ---------------------------------------------------------------------------
# Cutoff profiles
# ---------------------------------------------------------------------------


class CutoffProfile:
    """Common surface of the two cutoff constructions."""

    form: str
    support: Tuple[float, float]

    def __call__(self, x) -> np.ndarray:  # pragma: no cover - interface
        raise NotImplementedError

    def inverse_transform(self, s) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError


@dataclass(frozen=True)
class PlateauCutoff(CutoffProfile):
    """Even cutoff: exactly 1 on [-1, 1], 0 outside [-2, 2], C^(r-1)."""

    ppoly: PiecewisePolynomial
    smoothness: int
    form: str = "plateau"

    @property
    def support(self) -> Tuple[float, float]:
        return (-2.0, 2.0)

    def __call__(self, x) -> np.ndarray:
        return self.ppoly(x)

    def inverse_transform(self, s) -> np.ndarray:
        return self.ppoly.fourier(s)

    def derivative(self, order: int = 1) -> PiecewisePolynomial:
        return self.ppoly.derivative(order)


def build_cutoff_plateau(r: int) -> PlateauCutoff:
    """Plateau cutoff with smoothstep transitions of order r (C^(r-1))."""
    if r < 2:
        raise ValueError("smoothness order must be >= 2")
    one = Fraction(1)
    two = Fraction(2)
    s = smoothstep_coeffs(r)
    ppoly = PiecewisePolynomial(
        breaks=(-two, -one, one, two),
        pieces=(s, (one,), _one_minus(s)),
    )
    return PlateauCutoff(ppoly=ppoly, smoothness=r)


@dataclass(frozen=True)
class AutocorrCutoff(CutoffProfile):
    """Squared autocorrelation cutoff, sampled on a fine grid.

    Built as (theta*theta)^2 from a base bump supported in [-1/2, 1/2],
    normalized so the inverse transform at 0 equals 1; the inverse
    transform is nonnegative up to quadrature noise.
    """

    xs: np.ndarray
    values: np.ndarray
    form: str = "autocorr"

    @property
    def support(self) -> Tuple[float, float]:
        return (-1.0, 1.0)

    @property
    def spacing(self) -> float:
        return float(self.xs[1] - self.xs[0])

    def __call__(self, x) -> np.ndarray:
        return np.interp(
            np.asarray(x, dtype=float), self.xs, self.values, left=0.0, right=0.0
        )

    def inverse_transform(self, s) -> np.ndarray:
        ss = np.atleast_1d(np.asarray(s, dtype=float))
        phase = np.exp(2j * np.pi * np.outer(ss, self.xs))
        vals = (phase @ self.values) * self.spacing
        return vals if np.ndim(s) else vals[0]

    def mass(self) -> float:
        return float(np.sum(self.values) * self.spacing)


def build_cutoff_autocorr(
    base: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    base_smoothness: int = 4,
    samples: int = 4096,
) -> AutocorrCutoff:
    """Squared-autocorrelation cutoff from a base bump on [-1/2, 1/2].

    `base` may be any symmetric real function supported in [-1/2, 1/2];
    the default is a plateau bump of the given smoothness.
    """
    if base is None:
        base = bump_ppoly(
            (Fraction(-1, 2), Fraction(1, 2)),
            (Fraction(-1, 4), Fraction(1, 4)),
            base_smoothness,
        )
    half = samples // 2
    dx = 0.5 / half
    xs0 = (np.arange(2 * half + 1) - half) * dx  # covers [-1/2, 1/2]
    theta = np.asarray(base(xs0), dtype=float)
    if not np.any(theta):
        raise ValueError("base bump is identically zero on the sample grid")
    if not np.allclose(theta, theta[::-1], atol=1e-12 * max(1.0, np.abs(theta).max())):
        raise ValueError("base bump must be symmetric")
    auto = np.convolve(theta, theta) * dx  # supported in [-1, 1]
    alpha = auto**2
    xs = (np.arange(len(alpha)) - (len(alpha) - 1) // 2) * dx
    mass = float(np.sum(alpha) * dx)
    if mass <= 0:
        raise ValueError("degenerate base bump")
    return AutocorrCutoff(xs=xs, values=alpha / mass)


# ---------------------------------------------------------------------------
# Scale differences and the 1/3-translate partition of unity
# ---------------------------------------------------------------------------


def theta_profile(profile: CutoffProfile, s) -> np.ndarray:
    """Difference alpha(s) - alpha(2s): vanishes for |s| <= 1/2 and |s| >= 2."""
    if profile.form != "plateau":
        raise ValueError("scale differences require a plateau profile")
    return profile(s) - profile(2 * np.asarray(s, dtype=float))


def theta_scaled(profile: CutoffProfile, i: int, s) -> np.ndarray:
    """theta(2^i s); summing over i >= k1 telescopes to alpha(2^k1 s)."""
    return theta_profile(profile, np.ldexp(np.asarray(s, dtype=float), i))


GAMMA_BUMP = bump_ppoly(
    (Fraction(1, 5), Fraction(4, 5)),
    (Fraction(7, 20), Fraction(13, 20)),
    6,
)


def _gamma_denominator(x: np.ndarray) -> np.ndarray:
    # bump support length 3/5 < 2/3: at most two translates contribute
    den = np.zeros_like(x)
    lmin = np.floor(3 * (x - 0.8)).astype(int)
    for off in range(0, 4):
        den += GAMMA_BUMP(x - (lmin + off) / 3.0)
    return den


def gamma_partition(l: int, xi) -> np.ndarray:
    """gamma(xi - l/3) for the square-summing partition of unity.

    gamma^2(x) = b(x) / sum_m b(x - m/3) for a fixed bump b supported on
    [0.2, 0.8]; the translates by thirds then square-sum to 1 identically.
    """
    x = np.asarray(xi, dtype=float) - l / 3.0
    scalar = np.ndim(xi) == 0
    x = np.atleast_1d(x)
    num = GAMMA_BUMP(x)
    out = np.zeros_like(x)
    mask = num > 0
    if mask.any():
        out[mask] = np.sqrt(num[mask] / _gamma_denominator(x[mask]))
    return out[0] if scalar else out


def partition_check(grid) -> float:
    """max over the grid of |sum_l gamma(xi - l/3)^2 - 1|."""
    xi = np.atleast_1d(np.asarray(grid, dtype=float))
    total = np.zeros_like(xi)
    lmin = np.floor(3 * (xi - 0.8)).astype(int)
    for off in range(0, 4):
        total += gamma_partition(0, xi - (lmin + off) / 3.0) ** 2
    return float(np.max(np.abs(total - 1.0)))


def fitted_decay_exponent(values, s) -> float:
    """Least-squares slope of log|values| against log s (sign flipped)."""
    mags = np.abs(np.asarray(values))
    mask = mags > 0
    logs = np.log(np.asarray(s, dtype=float)[mask])
    logv = np.log(mags[mask])
    slope = np.polyfit(logs, logv, 1)[0]
    return -float(slope)
