"""Symbol carving: Taylor expansion of the coarse-scale factor about the
midpoint argument, and Fourier coefficient matrices on frequency squares.

The band variables are u = xi2 - xi1 (fine scale, ~2^-i) and
v = xi3 - xi2 (coarse scale, ~2^-j); every symbol in the carving depends
on (xi1, xi2, xi3) only through (u, v), so carvings are sampled on 2-d
boxes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, TextIO, Tuple

import numpy as np

from .grid import Interval
from .profiles import (
    PiecewisePolynomial,
    PlateauCutoff,
    bump_ppoly,
    fitted_decay_exponent,
    ppoly_combine,
    theta_scaled,
)


class QuadratureError(RuntimeError):
    """Quadrature failed to converge at the resolution cap."""


def scale_difference_ppoly(profile: PlateauCutoff) -> PiecewisePolynomial:
    """The single-scale bump alpha(t) - alpha(2t) as an exact piecewise
    polynomial (supported on 1/2 <= |t| <= 2)."""
    pp = profile.ppoly
    return ppoly_combine([(Fraction(1), pp), (Fraction(-1), pp.scale_argument(2))])


# ---------------------------------------------------------------------------
# Taylor carving
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TaylorCarving:
    """Sampled Taylor expansion of phi_j(v) about v + u/2.

    term m is ((-u/2)^m / m!) phi_j^(m)(v + u/2), with the derivative
    factored as phi_j^(m) = 2^(j m) phi*_{m,j} and phi*_{m,j} bounded
    uniformly in j.
    """

    order: int
    scale_i: int
    scale_j: int
    u_grid: np.ndarray
    v_grid: np.ndarray
    phi_scaled: PiecewisePolynomial
    phi_star: Tuple[PiecewisePolynomial, ...]  # orders 0..order+1
    theta_band: np.ndarray  # theta_i on u_grid

    @property
    def gap(self) -> int:
        return self.scale_i - self.scale_j

    def term_values(self, m: int, u, v) -> np.ndarray:
        """m-th Taylor term at arbitrary (u, v) (broadcasting)."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        arg = v + u / 2.0
        deriv = np.ldexp(self.phi_star[m](arg), self.scale_j * m)
        return (-u / 2.0) ** m / math.factorial(m) * deriv

    def term_grid(self, m: int) -> np.ndarray:
        return self.term_values(m, self.u_grid[:, None], self.v_grid[None, :])

    def partial_sum_grid(self) -> np.ndarray:
        total = np.zeros((len(self.u_grid), len(self.v_grid)))
        for m in range(self.order + 1):
            total += self.term_grid(m)
        return total

    def target_grid(self) -> np.ndarray:
        """phi_j(v), constant in u."""
        vals = self.phi_scaled(self.v_grid)
        return np.broadcast_to(vals[None, :], (len(self.u_grid), len(self.v_grid)))

    def remainder_grid(self) -> np.ndarray:
        """Remainder as the defining difference."""
        return self.target_grid() - self.partial_sum_grid()

    def remainder_integral_grid(self, nodes: int = 32) -> np.ndarray:
        """Independent remainder via the integral form of Taylor's theorem:
        (1/n!) int_a^x (x - t)^n phi_j^(n+1)(t) dt with x = v, a = v + u/2."""
        n = self.order
        x = self.v_grid[None, :, None]
        a = (self.v_grid[None, :] + self.u_grid[:, None] / 2.0)[..., None]
        gl_nodes, gl_weights = np.polynomial.legendre.leggauss(nodes)
        mid = (a + x) / 2.0
        half = (x - a) / 2.0
        t = mid + half * gl_nodes
        dphi = np.ldexp(
            self.phi_star[n + 1](t.ravel()).reshape(t.shape),
            self.scale_j * (n + 1),
        )
        integrand = (x - t) ** n * dphi
        return (half[..., 0] * (integrand @ gl_weights)) / math.factorial(n)

    def reconstruction_residual(self) -> float:
        """max |phi_j(v) - partial sum - integral remainder|, relative to
        the sup of |phi_j|."""
        resid = self.target_grid() - self.partial_sum_grid() - self.remainder_integral_grid()
        scale = float(np.max(np.abs(self.phi_scaled(self.v_grid)))) or 1.0
        return float(np.max(np.abs(resid))) / scale

    def term_sup(self, m: int) -> float:
        return float(np.max(np.abs(self.term_grid(m))))

    def remainder_sup(self) -> float:
        return float(np.max(np.abs(self.remainder_grid())))


def taylor_carve(
    profile: PlateauCutoff,
    scale_i: int,
    scale_j: int,
    order: int,
    samples: int = 48,
) -> TaylorCarving:
    """Carve phi_j(xi3 - xi2) on the band supp theta_i x supp phi_j.

    Requires scale_i - scale_j > 10 and enough profile smoothness to take
    order + 1 classical derivatives.
    """
    if scale_i - scale_j <= 10:
        raise ValueError(
            f"scale gap must exceed 10, got {scale_i} - {scale_j} = {scale_i - scale_j}"
        )
    if order < 0:
        raise ValueError("order must be >= 0")
    if order + 1 > profile.smoothness - 1:
        raise ValueError(
            f"plateau smoothness {profile.smoothness} cannot support "
            f"{order + 1} classical derivatives"
        )
    base = scale_difference_ppoly(profile)
    phi_scaled = base.scale_argument(Fraction(2) ** scale_j)
    phi_star = tuple(
        base.derivative(m).scale_argument(Fraction(2) ** scale_j)
        for m in range(order + 2)
    )
    u_lo, u_hi = 2.0 ** (-scale_i - 1), 2.0 ** (-scale_i + 1)
    v_lo, v_hi = 2.0 ** (-scale_j - 1), 2.0 ** (-scale_j + 1)
    u_grid = np.linspace(u_lo, u_hi, samples)
    v_grid = np.linspace(v_lo, v_hi, samples)
    theta_band = theta_scaled(profile, scale_i, u_grid)
    return TaylorCarving(
        order=order,
        scale_i=scale_i,
        scale_j=scale_j,
        u_grid=u_grid,
        v_grid=v_grid,
        phi_scaled=phi_scaled,
        phi_star=phi_star,
        theta_band=theta_band,
    )


def error_term_bound(m: int, k: int) -> float:
    """Net bookkeeping factor 2^k * 2^(-m k) = 2^(-(m-1) k) for the m-th
    order error models at scale gap k; summable over k only for m >= 2."""
    if m <= 1:
        raise ValueError(f"unsupported regime: order m={m} does not sum over gaps")
    if k <= 10:
        raise ValueError(f"scale gap must exceed 10, got {k}")
    return math.ldexp(1.0, -(m - 1) * k)


# ---------------------------------------------------------------------------
# Fourier coefficients on frequency squares
# ---------------------------------------------------------------------------


def representative_square(
    theta_scale: int,
    side_offset: int = 10,
    index: int = 1,
    band_multiple: Fraction = Fraction(3, 2),
) -> Tuple[Interval, Interval]:
    """A frequency square crossing the band xi2 - xi1 ~ 2^(-i).

    The side is 2^(-i - side_offset), small against the band distance, and
    the factor intervals sit at integer indices (index, index + d) with
    d*side = band_multiple * 2^(-i).  Using the same (side_offset, index,
    band_multiple) at two scales gives exactly scale-covariant squares.
    """
    side = Fraction(2) ** (-theta_scale - side_offset)
    d = Fraction(band_multiple) * 2**side_offset
    if d.denominator != 1:
        raise ValueError("band_multiple * 2^side_offset must be an integer")
    d = int(d)
    w1 = Interval(side * index, side * (index + 1))
    w2 = Interval(side * (index + d), side * (index + d + 1))
    return w1, w2


def default_window(smoothness: int = 8) -> PiecewisePolynomial:
    """Window profile supported on (8/10) of a unit side, flat on (1/2)."""
    return bump_ppoly(
        (Fraction(-2, 5), Fraction(2, 5)),
        (Fraction(-1, 4), Fraction(1, 4)),
        smoothness,
    )


@dataclass(frozen=True)
class CoeffMatrix:
    """Fourier coefficients of theta_i(xi2 - xi1) psi1(xi1) psi2(xi2) on a
    frequency square identified with the torus."""

    values: np.ndarray  # [n1 + n_max, n2 + n_max]
    n_max: int
    side: float
    centers: Tuple[float, float]
    theta_scale: int
    resolution: int
    converged: bool

    def coefficient(self, n1: int, n2: int) -> complex:
        if abs(n1) > self.n_max or abs(n2) > self.n_max:
            raise IndexError("coefficient index out of range")
        return complex(self.values[n1 + self.n_max, n2 + self.n_max])

    def shell_maxima(self, radii: Sequence[int]) -> np.ndarray:
        """max |C(n1,n2)| over the sup-norm shell |n|_inf = R, per R."""
        n = self.n_max
        out = []
        for R in radii:
            best = 0.0
            for k in range(-R, R + 1):
                for n1, n2 in ((k, R), (k, -R), (R, k), (-R, k)):
                    best = max(best, abs(self.values[n1 + n, n2 + n]))
            out.append(best)
        return np.array(out)

    def decay_slope(self, r_lo: int = 4, r_hi: Optional[int] = None) -> float:
        r_hi = r_hi if r_hi is not None else self.n_max
        radii = np.arange(r_lo, r_hi + 1)
        maxima = self.shell_maxima(radii)
        return -fitted_decay_exponent(maxima, radii)

    def to_csv(self, stream: TextIO) -> None:
        writer = csv.writer(stream)
        writer.writerow(["n1", "n2", "re", "im"])
        n = self.n_max
        for n1 in range(-n, n + 1):
            for n2 in range(-n, n + 1):
                z = self.values[n1 + n, n2 + n]
                writer.writerow([n1, n2, repr(float(z.real)), repr(float(z.imag))])


def _coeff_pass(
    profile: PlateauCutoff,
    theta_scale: int,
    w1: Interval,
    w2: Interval,
    window: PiecewisePolynomial,
    n_max: int,
    resolution: int,
) -> np.ndarray:
    side = float(w1.length)
    x1 = np.linspace(float(w1.left), float(w1.right), resolution)
    x2 = np.linspace(float(w2.left), float(w2.right), resolution)
    h1, h2 = x1[1] - x1[0], x2[1] - x2[0]
    wt1 = np.full(resolution, h1)
    wt1[[0, -1]] = h1 / 2
    wt2 = np.full(resolution, h2)
    wt2[[0, -1]] = h2 / 2
    c1, c2 = float(w1.center), float(w2.center)
    psi1 = window((x1 - c1) / side)
    psi2 = window((x2 - c2) / side)
    band = theta_scaled(profile, theta_scale, x2[None, :] - x1[:, None])
    v = band * (psi1 * wt1)[:, None] * (psi2 * wt2)[None, :]
    ns = np.arange(-n_max, n_max + 1)
    e1 = np.exp(-2j * np.pi * np.outer(ns, x1) / side)
    e2 = np.exp(-2j * np.pi * np.outer(x2, ns) / side)
    return (e1 @ v.astype(complex) @ e2) / side**2


def fourier_coeffs(
    square: Tuple[Interval, Interval],
    theta_scale: int,
    profile: PlateauCutoff,
    window: Optional[PiecewisePolynomial] = None,
    n_max: int = 32,
    tol: float = 1e-9,
    base_resolution: int = 65,
    max_resolution: int = 1025,
) -> CoeffMatrix:
    """Coefficient matrix by 2-d trapezoid quadrature, resolution doubled
    until entrywise change is below `tol` (raises QuadratureError at the
    cap otherwise)."""
    w1, w2 = square
    if w1.length != w2.length:
        raise ValueError("square sides must have equal length")
    window = window if window is not None else default_window()
    resolution = base_resolution
    prev = _coeff_pass(profile, theta_scale, w1, w2, window, n_max, resolution)
    while True:
        next_res = 2 * (resolution - 1) + 1
        if next_res > max_resolution:
            raise QuadratureError(
                f"coefficients not converged to {tol} at resolution {resolution}"
            )
        cur = _coeff_pass(profile, theta_scale, w1, w2, window, n_max, next_res)
        delta = float(np.max(np.abs(cur - prev)))
        if delta < tol:
            return CoeffMatrix(
                values=cur,
                n_max=n_max,
                side=float(w1.length),
                centers=(float(w1.center), float(w2.center)),
                theta_scale=theta_scale,
                resolution=next_res,
                converged=True,
            )
        prev, resolution = cur, next_res


def reconstruct_product(
    matrix: CoeffMatrix,
    square: Tuple[Interval, Interval],
    profile: PlateauCutoff,
    window: Optional[PiecewisePolynomial] = None,
    points: int = 33,
) -> float:
    """max |Fourier partial sum - product| over a grid on the square."""
    w1, w2 = square
    window = window if window is not None else default_window()
    side = float(w1.length)
    x1 = np.linspace(float(w1.left), float(w1.right), points)
    x2 = np.linspace(float(w2.left), float(w2.right), points)
    psi1 = window((x1 - float(w1.center)) / side)
    psi2 = window((x2 - float(w2.center)) / side)
    product = (
        theta_scaled(profile, matrix.theta_scale, x2[None, :] - x1[:, None])
        * psi1[:, None]
        * psi2[None, :]
    )
    ns = np.arange(-matrix.n_max, matrix.n_max + 1)
    e1 = np.exp(2j * np.pi * np.outer(x1, ns) / side)
    e2 = np.exp(2j * np.pi * np.outer(ns, x2) / side)
    series = e1 @ matrix.values @ e2
    return float(np.max(np.abs(series - product)))
