"""Shifted dyadic geometry: intervals, tiles, tri-tiles, order relations,
sparseness, and rank-1 family generation.

All geometry is exact: endpoints are `fractions.Fraction` values, so set
inclusions, dilations by large constants, and shifts by thirds are decided
without rounding.  Floats enter only downstream (quadrature, packets).

Component indices `t` are 1-based (t in {1, 2, 3}) throughout.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

#: Dilation factor used by the strict/partial tile orders (`lt`, `le`).
ORDER_DILATION = 3
#: Dilation factor used by the weak tile order (`lesssim`).
WEAK_ORDER_DILATION = 10**7
#: Dilation factor used by sparseness of cube families.
SPARSE_DILATION = 10**9
#: Scales congruent mod this value are automatically sparse-compatible,
#: because 2**31 > SPARSE_DILATION.
SPARSE_SCALE_STRIDE = 31

#: Admissible mesh shifts for frequency intervals.
FREQUENCY_SHIFTS = (Fraction(0), Fraction(1, 3), Fraction(2, 3))


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions, strings, and floats to an exact Fraction.

    Floats convert via their exact binary value; prefer ints/strings for
    window endpoints when thirds are involved.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12) if x != int(x) else Fraction(int(x))
    return Fraction(x)


@dataclass(frozen=True)
class Interval:
    """Half-open interval [left, right) with exact rational endpoints."""

    left: Fraction
    right: Fraction

    def __post_init__(self):
        if not (self.left < self.right):
            raise ValueError(f"empty interval [{self.left}, {self.right})")

    @property
    def length(self) -> Fraction:
        return self.right - self.left

    @property
    def center(self) -> Fraction:
        return (self.left + self.right) / 2

    def dilate(self, factor) -> "Interval":
        """Interval with the same center and `factor` times the length."""
        f = as_fraction(factor)
        half = self.length * f / 2
        c = self.center
        return Interval(c - half, c + half)

    def contains(self, other: "Interval") -> bool:
        return self.left <= other.left and other.right <= self.right

    def properly_contains(self, other: "Interval") -> bool:
        return self.contains(other) and self != other

    def intersects(self, other: "Interval") -> bool:
        return self.left < other.right and other.left < self.right

    def translate(self, offset) -> "Interval":
        d = as_fraction(offset)
        return Interval(self.left + d, self.right + d)

    def minkowski_sum(self, other: "Interval") -> "Interval":
        return Interval(self.left + other.left, self.right + other.right)

    def contains_point(self, x) -> bool:
        x = as_fraction(x)
        return self.left <= x < self.right


@dataclass(frozen=True)
class DyadicInterval:
    """Member of a shifted dyadic mesh.

    The realized interval is  2^scale * (index + (0,1) + (-1)^scale * shift),
    so the length is exactly 2^scale.  Spatial intervals use shift 0; mesh
    frequency intervals use shift in {0, 1/3, 2/3}.  Arbitrary rational
    shifts are accepted so ad-hoc intervals (e.g. sum intervals) can be
    represented; the mesh generator only emits the admissible shifts.
    """

    scale: int
    index: int
    shift: Fraction = Fraction(0)
    left: Fraction = field(init=False, compare=False, repr=False)
    right: Fraction = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.shift, Fraction):
            object.__setattr__(self, "shift", as_fraction(self.shift))
        unit = Fraction(2) ** self.scale
        sign = 1 if self.scale % 2 == 0 else -1
        left = unit * (self.index + sign * self.shift)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", left + unit)

    @property
    def length(self) -> Fraction:
        return Fraction(2) ** self.scale

    @property
    def center(self) -> Fraction:
        return self.left + self.length / 2

    @property
    def interval(self) -> Interval:
        return Interval(self.left, self.right)

    def dilate(self, factor) -> Interval:
        return self.interval.dilate(factor)

    def ancestor(self, depth: int) -> "DyadicInterval":
        """Unshifted dyadic ancestor `depth` scales up (shift-0 only)."""
        if self.shift != 0:
            raise ValueError("ancestors are defined for unshifted intervals only")
        if depth < 0:
            raise ValueError("depth must be >= 0")
        return DyadicInterval(self.scale + depth, self.index >> depth)

    def contains(self, other: "DyadicInterval") -> bool:
        return self.left <= other.left and other.right <= self.right


def mesh_intervals(shift, scale: int, window: Tuple) -> List[DyadicInterval]:
    """All mesh intervals of the given shift and scale whose realization
    intersects the (bounded) window, ordered by index."""
    sigma = as_fraction(shift)
    lo, hi = as_fraction(window[0]), as_fraction(window[1])
    if hi <= lo:
        return []
    unit = Fraction(2) ** scale
    sign = 1 if scale % 2 == 0 else -1
    s = sign * sigma
    # need  2^scale (k + s) < hi  and  2^scale (k + s + 1) > lo
    kmax_bound = hi / unit - s          # k < kmax_bound
    kmin_bound = lo / unit - s - 1      # k > kmin_bound
    kmin = _floor(kmin_bound) + 1
    kmax = _ceil(kmax_bound) - 1
    return [DyadicInterval(scale, k, sigma) for k in range(kmin, kmax + 1)]


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


# ---------------------------------------------------------------------------
# Tiles and tile orders
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Tile:
    """Phase-space rectangle: spatial interval x frequency interval."""

    spatial: DyadicInterval
    freq: DyadicInterval

    @property
    def area(self) -> Fraction:
        return self.spatial.length * self.freq.length


class TileRelation(Enum):
    EQUAL = "equal"
    LT = "lt"
    LE = "le"
    LESSSIM = "lesssim"
    LESSSIM_PRIME = "lesssim_prime"
    NONE = "none"


def _check_areas(a: Tile, b: Tile) -> None:
    if a.area != b.area:
        raise ValueError(
            f"mismatched tile area normalization: {a.area} vs {b.area}"
        )


def tile_lt(a: Tile, b: Tile) -> bool:
    """a < b: spatial(a) properly inside spatial(b), 3-dilate of freq(b)
    inside 3-dilate of freq(a)."""
    _check_areas(a, b)
    return (
        b.spatial.interval.properly_contains(a.spatial.interval)
        and a.freq.dilate(ORDER_DILATION).contains(b.freq.dilate(ORDER_DILATION))
    )


def tile_le(a: Tile, b: Tile) -> bool:
    return a == b or tile_lt(a, b)


def tile_lesssim(a: Tile, b: Tile) -> bool:
    """a <~ b: spatial(a) inside spatial(b), 10^7-dilates nested."""
    _check_areas(a, b)
    return (
        b.spatial.interval.contains(a.spatial.interval)
        and a.freq.dilate(WEAK_ORDER_DILATION).contains(
            b.freq.dilate(WEAK_ORDER_DILATION)
        )
    )


def tile_lesssim_prime(a: Tile, b: Tile) -> bool:
    return tile_lesssim(a, b) and not tile_le(a, b)


def tile_relation(p: Tile, p_prime: Tile) -> TileRelation:
    """Strongest relation of `p_prime` relative to `p`.

    LT means p_prime < p.  LE/LESSSIM never surface as the strongest value:
    LE collapses to EQUAL or LT, and a LESSSIM that is not LE is
    LESSSIM_PRIME by definition.  Use the predicates for membership tests.
    """
    _check_areas(p, p_prime)
    if p_prime == p:
        return TileRelation.EQUAL
    if tile_lt(p_prime, p):
        return TileRelation.LT
    if tile_lesssim(p_prime, p):
        return TileRelation.LESSSIM_PRIME
    return TileRelation.NONE


# ---------------------------------------------------------------------------
# Tri-tiles and families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TriTile:
    """Three tiles sharing one spatial interval.

    Components 1 and 2 have length 1/|I|; component 3 is the sum interval
    of the first two, hence twice as long.  `tile(t)` takes t in {1, 2, 3}.
    """

    spatial: DyadicInterval
    freqs: Tuple[DyadicInterval, DyadicInterval, DyadicInterval]

    def tile(self, t: int) -> Tile:
        if t not in (1, 2, 3):
            raise ValueError(f"component index must be 1, 2 or 3, got {t}")
        return Tile(self.spatial, self.freqs[t - 1])

    @property
    def frequency_cube(self) -> "FrequencyCube":
        return FrequencyCube(
            intervals=tuple(f.interval for f in self.freqs),
            side=self.freqs[0].length,
        )

    @property
    def uid(self) -> str:
        parts = [f"{self.spatial.scale}:{self.spatial.index}"]
        for f in self.freqs:
            parts.append(f"{f.scale}:{f.index}:{f.shift}")
        return "|".join(parts)


@dataclass(frozen=True)
class FrequencyCube:
    """Product of the three frequency intervals of a tri-tile.

    `side` is the length of the first two components and is the scale used
    by the sparseness clauses (the third component is the doubled sum
    interval, so the box is not literally a cube).
    """

    intervals: Tuple[Interval, Interval, Interval]
    side: Fraction

    def dilated(self, factor) -> Tuple[Interval, Interval, Interval]:
        return tuple(iv.dilate(factor) for iv in self.intervals)

    def dilate_intersects(self, other: "FrequencyCube", factor) -> bool:
        # endpoint arithmetic kept inline: this runs O(n^2) times
        f = as_fraction(factor)
        for x, y in zip(self.intervals, other.intervals):
            cx, cy = x.center, y.center
            hx, hy = x.length * f / 2, y.length * f / 2
            if not (cx - hx < cy + hy and cy - hy < cx + hx):
                return False
        return True


@dataclass(frozen=True)
class TileFamily:
    """Finite tri-tile family with a common shift triple."""

    members: Tuple[TriTile, ...]
    shift: Tuple[Fraction, Fraction, Fraction] = (
        Fraction(0),
        Fraction(0),
        Fraction(0),
    )
    metadata: Optional[Tuple[Tuple[str, str], ...]] = None

    def __post_init__(self):
        if len(set(self.members)) != len(self.members):
            raise ValueError("tri-tile family has duplicate members")
        for m in self.members:
            for t in range(3):
                if m.freqs[t].shift != self.shift[t]:
                    raise ValueError(
                        f"member component {t + 1} shift {m.freqs[t].shift} "
                        f"differs from family shift {self.shift[t]}"
                    )

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


@dataclass(frozen=True)
class SparseReport:
    ok: bool
    violation: Optional[Tuple[int, int, str]] = None  # (i, j, clause)


def _cube_ints(cubes: Sequence[FrequencyCube]) -> List[List[Tuple[int, int]]]:
    flat = [iv for c in cubes for iv in c.intervals]
    ints = _integerize(flat)
    return [ints[3 * i : 3 * i + 3] for i in range(len(cubes))]


def _dilates_intersect_int(
    a: Sequence[Tuple[int, int]], b: Sequence[Tuple[int, int]], factor: int
) -> bool:
    for (la, ra), (lb, rb) in zip(a, b):
        ca, cb = la + ra, lb + rb
        ha, hb = (ra - la) * factor, (rb - lb) * factor
        if not (ca - ha < cb + hb and cb - hb < ca + ha):
            return False
    return True


def is_sparse(cubes: Sequence[FrequencyCube]) -> SparseReport:
    """Check the two sparseness clauses on a set of frequency cubes.

    Duplicate cubes are collapsed first (sparseness is a property of the
    cube *set*; several tri-tiles may share one cube).
    """
    unique: List[FrequencyCube] = []
    seen = set()
    for c in cubes:
        if c not in seen:
            seen.add(c)
            unique.append(c)
    ints = _cube_ints(unique)
    sides = [box[0][1] - box[0][0] for box in ints]
    for i, j in itertools.combinations(range(len(unique)), 2):
        if sides[i] == sides[j]:
            if _dilates_intersect_int(ints[i], ints[j], SPARSE_DILATION):
                return SparseReport(False, (i, j, "equal-scale dilates intersect"))
        else:
            small, big = min(sides[i], sides[j]), max(sides[i], sides[j])
            if not (SPARSE_DILATION * small < big):
                return SparseReport(False, (i, j, "scales too close"))
    return SparseReport(True)


def split_sparse(family: TileFamily) -> List[TileFamily]:
    """Partition a family into sparse parts.

    Scales are first split into residue classes mod SPARSE_SCALE_STRIDE
    (within a class, distinct scales differ by a factor > SPARSE_DILATION);
    equal-scale conflicts are then removed by greedy coloring of the
    dilate-intersection graph in member order.
    """
    if not family.members:
        return []
    groups: Dict[int, List[TriTile]] = {}
    for m in family.members:
        r = m.freqs[0].scale % SPARSE_SCALE_STRIDE
        groups.setdefault(r, []).append(m)
    parts: List[TileFamily] = []
    for r in sorted(groups):
        members = groups[r]
        cubes = [m.frequency_cube for m in members]
        ints = _cube_ints(cubes)
        colors: List[int] = []
        for i in range(len(members)):
            used = set()
            for j in range(i):
                if (
                    cubes[j] != cubes[i]
                    and cubes[j].side == cubes[i].side
                    and _dilates_intersect_int(ints[j], ints[i], SPARSE_DILATION)
                ):
                    used.add(colors[j])
            c = 0
            while c in used:
                c += 1
            colors.append(c)
        for c in range(max(colors) + 1):
            chosen = tuple(m for m, col in zip(members, colors) if col == c)
            if chosen:
                parts.append(TileFamily(chosen, family.shift))
    return parts


@dataclass(frozen=True)
class Rank1Report:
    ok: bool
    violation: Optional[Tuple[int, int, int]] = None  # (i, j, clause)
    detail: str = ""


def _integerize(intervals: Sequence[Interval]) -> List[Tuple[int, int]]:
    """Endpoints as integers over the lcm denominator (exact)."""
    from math import lcm

    den = 1
    for iv in intervals:
        den = lcm(den, iv.left.denominator, iv.right.denominator)
    return [
        (
            iv.left.numerator * (den // iv.left.denominator),
            iv.right.numerator * (den // iv.right.denominator),
        )
        for iv in intervals
    ]


def _dilate_contains_int(outer: Tuple[int, int], inner: Tuple[int, int], factor: int) -> bool:
    """factor-dilate of `outer` contains factor-dilate of `inner`, on
    integer endpoints; doubled centers avoid halving."""
    co = outer[0] + outer[1]
    ci = inner[0] + inner[1]
    ho = (outer[1] - outer[0]) * factor
    hi = (inner[1] - inner[0]) * factor
    return co - ho <= ci - hi and ci + hi <= co + ho


def is_rank1(family: TileFamily) -> Rank1Report:
    """Exhaustive pairwise check of the three rank-1 clauses.

    Clause 3 is applied with the scale condition exactly as stated
    (|I'| < 10^9 |I|), which is implied whenever some component of the
    primed tri-tile is dominated; the check therefore demands that exactly
    one component be dominated, with the others weakly-but-not-fully
    dominated.
    """
    members = family.members
    n = len(members)
    if n < 2:
        return Rank1Report(True)
    spat = _integerize([m.spatial.interval for m in members])
    freq = [
        _integerize([m.freqs[t].interval for m in members]) for t in range(3)
    ]
    for a in range(n):
        sa = spat[a]
        for b in range(a + 1, n):
            sb = spat[b]
            if sa == sb:
                # clause 1 is at stake only here: a shared component tile
                # needs a shared spatial interval
                for t in range(3):
                    if freq[t][a] == freq[t][b]:
                        return Rank1Report(
                            False, (a, b, 1), f"shared component {t + 1}"
                        )
                continue  # equal spatial: no strict nesting either way
            if sb[0] <= sa[0] and sa[1] <= sb[1]:
                ip, iq = a, b  # member a plays the dominated candidate
            elif sa[0] <= sb[0] and sb[1] <= sa[1]:
                ip, iq = b, a
            else:
                continue  # spatially incomparable; clauses 2-3 vacuous
            dominated = [
                t + 1
                for t in range(3)
                if _dilate_contains_int(freq[t][ip], freq[t][iq], ORDER_DILATION)
            ]
            if not dominated:
                continue
            for t in range(3):
                if not _dilate_contains_int(
                    freq[t][ip], freq[t][iq], WEAK_ORDER_DILATION
                ):
                    return Rank1Report(
                        False,
                        (ip, iq, 2),
                        f"component {dominated[0]} dominated but "
                        f"component {t + 1} not weakly dominated",
                    )
            sp, sq = spat[ip], spat[iq]
            if sp[1] - sp[0] < SPARSE_DILATION * (sq[1] - sq[0]):
                if len(dominated) > 1:
                    return Rank1Report(
                        False,
                        (ip, iq, 3),
                        f"components {dominated} simultaneously dominated",
                    )
    return Rank1Report(True)


# ---------------------------------------------------------------------------
# Model family generation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelFamilies:
    """Linked pair of tri-tile families for the discrete model form.

    `links[p]` lists the members of `q_family` whose third frequency
    interval sits inside the second frequency interval of `p`.
    """

    p_family: TileFamily
    q_family: TileFamily
    links: Dict[TriTile, Tuple[TriTile, ...]]
    parameters: Dict[str, object]


def _dyadic_slots_inside(scale: int, window: Tuple[Fraction, Fraction]) -> List[int]:
    lo, hi = window
    unit = Fraction(2) ** scale
    mmin = _ceil(lo / unit)
    mmax = _floor(hi / unit) - 1
    return list(range(mmin, mmax + 1))


def _dyadic_slots_intersecting(scale: int, window: Tuple[Fraction, Fraction]) -> List[int]:
    lo, hi = window
    unit = Fraction(2) ** scale
    mmin = _floor(lo / unit)
    mmax = _ceil(hi / unit) - 1
    return list(range(mmin, mmax + 1))


def generate_model_families(
    scale_gap: int,
    p_scales: Iterable[int],
    spatial_window: Tuple,
    frequency_window: Tuple,
    component_offset: int = 8,
    q_per_p: Optional[int] = None,
) -> ModelFamilies:
    """Build the coarse family, the frequency-finer linked family, and the
    containment links between them.

    For each coarse spatial scale j the coarse tri-tiles carry frequency
    intervals of length 2^-j at indices (l, l+n, sum), n = component_offset.
    The fine tri-tiles live at component frequency scale 2^-(j+k+1), so
    their sum intervals have length 2^-(j+k) and exactly 2^k of them fit
    inside each coarse second component (k = scale_gap).  Fine spatial
    intervals are the length-2^(j+k+1) dyadic intervals meeting the spatial
    window; coarse spatial intervals are those contained in it.

    `q_per_p` caps the fine frequency slots per coarse interval (an evenly
    strided subfamily; rank-1 and sparseness are hereditary under taking
    subfamilies).  Even offsets are required so sum intervals stay dyadic;
    offsets >= 8 make the generated families rank 1.
    """
    k = scale_gap
    if k <= 10:
        raise ValueError(f"scale_gap must exceed 10, got {k}")
    n = component_offset
    if n < 2 or n % 2 != 0:
        raise ValueError(f"component_offset must be a positive even integer, got {n}")
    if q_per_p is not None and q_per_p < 1:
        raise ValueError("q_per_p must be >= 1")
    swin = (as_fraction(spatial_window[0]), as_fraction(spatial_window[1]))
    fwin = (as_fraction(frequency_window[0]), as_fraction(frequency_window[1]))
    p_scales = sorted(set(int(j) for j in p_scales))
    if not p_scales:
        raise ValueError("p_scales is empty")

    p_members: List[TriTile] = []
    q_members: List[TriTile] = []
    q_seen = set()
    for j in p_scales:
        f_scale = -j
        unit = Fraction(2) ** f_scale
        lmin = _ceil(fwin[0] / unit)
        lmax = _floor(fwin[1] / unit) - (n + 1)
        configs = list(range(lmin, lmax + 1))
        slots = _dyadic_slots_inside(j, swin)
        if not configs:
            raise ValueError(
                f"frequency window too small for scale {j}: needs width >= "
                f"{(n + 1) * unit}"
            )
        if not slots:
            raise ValueError(
                f"spatial window too small for scale {j}: needs width >= {2**j}"
            )
        for l1 in configs:
            freqs = (
                DyadicInterval(f_scale, l1),
                DyadicInterval(f_scale, l1 + n),
                DyadicInterval(f_scale + 1, (2 * l1 + n) // 2),
            )
            for m in slots:
                p_members.append(TriTile(DyadicInterval(j, m), freqs))
        # fine family for this coarse scale
        jq = j + k + 1
        fq_scale = -jq
        q_slots = _dyadic_slots_intersecting(jq, swin)
        for l1 in configs:
            base = 2 ** (k + 1) * (l1 + n)
            # 2*q1 + n ranges over [base, base + 2^(k+1) - 2] in steps of 2
            q1_lo = (base - n) // 2
            q1_hi = (base + 2 ** (k + 1) - 2 - n) // 2
            q1_values = list(range(q1_lo, q1_hi + 1))
            if q_per_p is not None and len(q1_values) > q_per_p:
                stride = len(q1_values) // q_per_p
                q1_values = q1_values[:: stride][:q_per_p]
            for q1 in q1_values:
                qfreqs = (
                    DyadicInterval(fq_scale, q1),
                    DyadicInterval(fq_scale, q1 + n),
                    DyadicInterval(fq_scale + 1, (2 * q1 + n) // 2),
                )
                for m in q_slots:
                    qt = TriTile(DyadicInterval(jq, m), qfreqs)
                    if qt not in q_seen:
                        q_seen.add(qt)
                        q_members.append(qt)

    p_family = TileFamily(tuple(p_members))
    q_family = TileFamily(tuple(q_members))
    # links depend on frequency data only; group by config before expanding
    q_by_config: Dict[Tuple[DyadicInterval, ...], List[TriTile]] = {}
    for q in q_family:
        q_by_config.setdefault(q.freqs, []).append(q)
    p_configs = {}
    for p in p_family:
        p_configs.setdefault(p.freqs, None)
    config_links = {
        pf: tuple(
            q
            for qf, qs in q_by_config.items()
            if pf[1].interval.contains(qf[2].interval)
            for q in qs
        )
        for pf in p_configs
    }
    links: Dict[TriTile, Tuple[TriTile, ...]] = {
        p: config_links[p.freqs] for p in p_family
    }
    return ModelFamilies(
        p_family=p_family,
        q_family=q_family,
        links=links,
        parameters={
            "scale_gap": k,
            "p_scales": tuple(p_scales),
            "spatial_window": swin,
            "frequency_window": fwin,
            "component_offset": n,
            "q_per_p": q_per_p,
        },
    )
