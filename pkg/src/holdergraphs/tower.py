"""Exact construction of the self-affine rectangle tower.

Level 1 is the unit square carrying the tent density ``tent(y) = 1 - |2y - 1|``
(constant in x).  Each level-n rectangle of size ``width_n x height_n`` is
split into ``2*(rows-1)*copies`` columns and ``rows`` mesh rows; every odd
column receives one "black" child rectangle spanning two mesh rows, placed by
a triangle wave so that adjacent occupied columns differ by at most one
position and every position occurs exactly ``copies`` times per parent.  The
child density is scaled so that the mass of every horizontal line is
preserved from one level to the next.

All geometry and all densities are ``fractions.Fraction`` values; nothing in
this module rounds.  Point evaluation of the cumulative line mass
``u_n(x, y)`` costs O(n) arithmetic operations because completed columns are
counted in closed form from the wave, never enumerated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence, Union

from .errors import AddressError, CapExceeded, DomainError, Infeasible, RangeError

Rational = Union[Fraction, int]

ZERO = Fraction(0)
ONE = Fraction(1)

BRUTE_FORCE_CAP = 10**6


def tent(y: Rational) -> Fraction:
    """Symmetric tent profile: 0 at y=0 and y=1, peak 1 at y=1/2, 0 outside."""
    y = Fraction(y)
    v = 1 - abs(2 * y - 1)
    return v if v > 0 else ZERO


def tent_slope(y: Rational, side: int = +1) -> Fraction:
    """One-sided slope of the tent profile (``side=+1`` from the right)."""
    y = Fraction(y)
    if side >= 0:
        if y < 0 or y >= 1:
            return ZERO
        return Fraction(2) if y < Fraction(1, 2) else Fraction(-2)
    if y <= 0 or y > 1:
        return ZERO
    return Fraction(2) if y <= Fraction(1, 2) else Fraction(-2)


@dataclass(frozen=True)
class TowerParams:
    """Construction knobs: ``copies = 2**a`` columns per position, ``rows = 2**b``
    mesh rows per parent, integrability exponent p and target Hoelder exponent."""

    a: int
    b: int
    p: Fraction = Fraction(2)
    alpha: Fraction = Fraction(1, 2)
    max_depth: int = 8

    def __post_init__(self) -> None:
        if self.a < 2 or self.b < 2:
            raise DomainError("need a >= 2 and b >= 2 so copies, rows >= 4")
        object.__setattr__(self, "p", Fraction(self.p))
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        if self.p <= 1:
            raise DomainError("p must exceed 1")
        if not (0 < self.alpha < 1):
            raise DomainError("alpha must lie in (0, 1)")
        if self.max_depth < 1:
            raise DomainError("max_depth must be positive")

    @property
    def copies(self) -> int:
        return 1 << self.a

    @property
    def rows(self) -> int:
        return 1 << self.b

    @property
    def columns_per_parent(self) -> int:
        return 2 * (self.rows - 1) * self.copies

    @property
    def occupied_per_parent(self) -> int:
        return (self.rows - 1) * self.copies

    @property
    def wave_period(self) -> int:
        return 2 * (self.rows - 1)

    @property
    def child_density_factor(self) -> int:
        # width_n / (width_{n+1} * copies): the density gain per level.
        return 2 * (self.rows - 1)


@dataclass(frozen=True)
class LevelGeometry:
    level: int
    width: Fraction
    height: Fraction
    rect_count: int
    columns_per_parent: int
    occupied_per_parent: int


@dataclass(frozen=True)
class Rect:
    x0: Fraction
    y0: Fraction
    width: Fraction
    height: Fraction

    @property
    def x1(self) -> Fraction:
        return self.x0 + self.width

    @property
    def y1(self) -> Fraction:
        return self.y0 + self.height

    @property
    def y_center(self) -> Fraction:
        return self.y0 + self.height / 2

    @property
    def x_center(self) -> Fraction:
        return self.x0 + self.width / 2


UNIT_SQUARE = Rect(ZERO, ZERO, ONE, ONE)


@dataclass(frozen=True)
class RectAddress:
    """Per-level (column, position) path from the unit square down to one
    black rectangle; ``len(path) == level - 1``."""

    path: tuple[tuple[int, int], ...]

    @property
    def level(self) -> int:
        return len(self.path) + 1


def level_geometry(params: TowerParams, level: int) -> LevelGeometry:
    """Exact per-level sizes from the recursion width -> width/columns,
    height -> 2*height/rows, starting from the unit square."""
    if level < 1 or level > params.max_depth:
        raise RangeError(f"level {level} outside [1, {params.max_depth}]")
    cols = params.columns_per_parent
    width = Fraction(1, cols**(level - 1))
    height = Fraction(2, params.rows)**(level - 1)
    return LevelGeometry(
        level=level,
        width=width,
        height=height,
        rect_count=params.occupied_per_parent**(level - 1),
        columns_per_parent=cols,
        occupied_per_parent=params.occupied_per_parent,
    )


def column_position(params: TowerParams, k: int) -> int:
    """Vertical position of the k-th occupied column (triangle wave with
    doubled endpoints, period 2*(rows-1))."""
    if not 0 <= k < params.occupied_per_parent:
        raise RangeError(f"occupied column index {k} outside [0, {params.occupied_per_parent})")
    m = k % params.wave_period
    top = params.rows - 2
    return m if m <= top else params.wave_period - 1 - m


def _completed_position_count(params: TowerParams, completed: int, i: int) -> int:
    """How many of the first ``completed`` occupied columns carry position i."""
    q, r = divmod(completed, params.wave_period)
    n = 2 * q
    if i < r:
        n += 1
    if params.wave_period - 1 - i < r:
        n += 1
    return n


def hat_weight(params: TowerParams, i: int, s: Rational) -> Fraction:
    """Piecewise-linear partition-of-unity hat for position i, evaluated at the
    parent-normalized coordinate s in [0, 1].

    Hat 0 plateaus at 1 on [0, 1/rows]; hat rows-2 plateaus on
    [(rows-1)/rows, 1]; interior hats ramp 0 -> 1 -> 0 across three mesh nodes.
    The weights sum to 1 exactly for every s and at most two are nonzero.
    """
    N = params.rows
    if not 0 <= i <= N - 2:
        raise RangeError(f"position {i} outside [0, {N - 2}]")
    s = Fraction(s)
    if s < 0 or s > 1:
        raise DomainError("normalized coordinate outside [0, 1]")
    t = s * N
    if i == 0:
        if t <= 1:
            return ONE
        if t < 2:
            return 2 - t
        return ZERO
    if i == N - 2:
        if t >= N - 1:
            return ONE
        if t > N - 2:
            return t - (N - 2)
        return ZERO
    if i < t < i + 1:
        return t - i
    if i + 1 <= t < i + 2:
        return (i + 2) - t
    return ZERO


def hat_slope(params: TowerParams, i: int, s: Rational, side: int = +1) -> Fraction:
    """One-sided d(hat)/ds; slopes are 0 or +-rows on each mesh cell."""
    N = params.rows
    if not 0 <= i <= N - 2:
        raise RangeError(f"position {i} outside [0, {N - 2}]")
    s = Fraction(s)
    if s < 0 or s > 1:
        return ZERO
    t = s * N
    # pick the mesh cell the one-sided derivative lives in
    if side >= 0:
        if t >= N:
            return ZERO
        cell = int(t)
    else:
        if t <= 0:
            return ZERO
        cell = int(t) if t != int(t) else int(t) - 1
    if i == 0:
        return Fraction(-N) if cell == 1 else ZERO
    if i == N - 2:
        return Fraction(N) if cell == N - 2 else ZERO
    if cell == i:
        return Fraction(N)
    if cell == i + 1:
        return Fraction(-N)
    return ZERO


def active_positions(params: TowerParams, s: Rational) -> list[tuple[int, Fraction]]:
    """Positions whose y-interval contains s, with their hat weights.

    Intervals are taken lower-open, upper-closed, except interval 0 which
    keeps its lower end (so s=0 belongs to position 0 only and s=1 to the top
    position only).  At most two positions are returned.
    """
    N = params.rows
    s = Fraction(s)
    if s < 0 or s > 1:
        raise DomainError("normalized coordinate outside [0, 1]")
    t = s * N
    j = int(t)
    if t == j:  # exact mesh node: intervals (i, i+2] with i in {j-2, j-1}
        cands = [j - 2, j - 1]
        if j == 0:
            cands = [0]
    else:
        cands = [j - 1, j]
    out = []
    for i in cands:
        if 0 <= i <= N - 2:
            out.append((i, hat_weight(params, i, s)))
    return out


def _position_contains(params: TowerParams, i: int, s: Fraction) -> bool:
    N = params.rows
    t = s * N
    if i == 0:
        return 0 <= t <= 2
    return i < t <= i + 2


def _position_contains_sided(params: TowerParams, i: int, s: Fraction, side: int) -> bool:
    """Membership of the displaced point s + side*0+; one-sided derivatives
    live on the open interval in the displacement direction."""
    t = s * params.rows
    if side >= 0:
        lo_ok = t >= i if i > 0 else t >= 0
        return lo_ok and t < i + 2
    return t > i and t <= i + 2


def _active_positions_sided(params: TowerParams, s: Fraction, side: int) -> list[tuple[int, Fraction]]:
    """Positions active on the one-sided neighborhood of s, with weights at s.

    At an exact mesh node a hat whose support starts there carries weight 0
    but a nonzero one-sided slope; derivative sums must include it.
    """
    N = params.rows
    t = s * N
    j = int(t)
    if t == j:
        cands = [j - 1, j] if side >= 0 else [j - 2, j - 1]
        if j == 0 and side >= 0:
            cands = [0]
    else:
        cands = [j - 1, j]
    return [(i, hat_weight(params, i, s)) for i in cands if 0 <= i <= N - 2]


def _child_rect(params: TowerParams, rect: Rect, column: int, position: int) -> Rect:
    cw = rect.width / params.columns_per_parent
    return Rect(
        x0=rect.x0 + column * cw,
        y0=rect.y0 + position * rect.height / params.rows,
        width=cw,
        height=2 * rect.height / params.rows,
    )


def rect_of(params: TowerParams, addr: RectAddress) -> Rect:
    """Materialize the rectangle a (column, position) path addresses."""
    rect = UNIT_SQUARE
    for column, position in addr.path:
        if not 0 <= column < params.columns_per_parent:
            raise AddressError(f"column {column} out of range")
        if column % 2 == 0:
            raise AddressError(f"column {column} is even (unoccupied)")
        if column_position(params, (column - 1) // 2) != position:
            raise AddressError(f"position {position} does not match column {column}")
        rect = _child_rect(params, rect, column, position)
    return rect


def locate(params: TowerParams, n: int, x: Rational, y: Rational) -> Optional[RectAddress]:
    """Address of the level-n black rectangle containing (x, y), or None.

    Columns are half-open on the right, so points on a column boundary belong
    to the column on their right; x = 1 therefore falls outside every level
    n >= 2.  Cost is O(n); no enumeration.
    """
    x, y = Fraction(x), Fraction(y)
    if not (0 <= x <= 1 and 0 <= y <= 1):
        raise DomainError("point outside the unit square")
    if n < 1 or n > params.max_depth:
        raise RangeError(f"level {n} outside [1, {params.max_depth}]")
    rect = UNIT_SQUARE
    path: list[tuple[int, int]] = []
    for _ in range(n - 1):
        cols = params.columns_per_parent
        cw = rect.width / cols
        c = int((x - rect.x0) / cw)
        if c >= cols or c % 2 == 0:
            return None
        i = column_position(params, (c - 1) // 2)
        s = (y - rect.y0) / rect.height
        if not _position_contains(params, i, s):
            return None
        path.append((c, i))
        rect = _child_rect(params, rect, c, i)
    return RectAddress(tuple(path))


def density(params: TowerParams, addr: RectAddress, y: Rational) -> Fraction:
    """Density value inside the addressed rectangle on the line y: the tent
    profile times ``2*(rows-1) * hat`` per descent level."""
    y = Fraction(y)
    rect = UNIT_SQUARE
    value = tent(y)
    gain = params.child_density_factor
    for column, position in addr.path:
        if column % 2 == 0 or not 0 <= column < params.columns_per_parent:
            raise AddressError(f"invalid column {column}")
        if column_position(params, (column - 1) // 2) != position:
            raise AddressError("position does not match column")
        s = (y - rect.y0) / rect.height
        if s < 0 or s > 1 or not _position_contains(params, position, s):
            raise AddressError("y outside the addressed rectangle")
        value *= gain * hat_weight(params, position, s)
        rect = _child_rect(params, rect, column, position)
    return value


def line_mass(params: TowerParams, n: int, x: Rational, y: Rational) -> Fraction:
    """Exact cumulative mass u_n(x, y): the integral of the level-n density
    along the horizontal line y from 0 to x.

    Completed occupied columns to the left of x are counted in closed form
    from the triangle wave (each contributes ``hat * density * width / copies``
    by mass preservation), and the recursion descends only into the single
    column containing x.  Cost O(n).
    """
    x, y = Fraction(x), Fraction(y)
    if not (0 <= x <= 1 and 0 <= y <= 1):
        raise DomainError("point outside the unit square")
    if n < 1 or n > params.max_depth:
        raise RangeError(f"level {n} outside [1, {params.max_depth}]")
    total = ZERO
    rect = UNIT_SQUARE
    dens = tent(y)
    for _ in range(n - 1):
        if dens == 0:
            return total
        cols = params.columns_per_parent
        cw = rect.width / cols
        c = int((x - rect.x0) / cw)
        c = min(c, cols)
        completed = c // 2  # occupied (odd) columns strictly left of column c
        s = (y - rect.y0) / rect.height
        per_column = dens * rect.width / params.copies
        for i, weight in active_positions(params, s):
            if weight:
                cnt = _completed_position_count(params, completed, i)
                if cnt:
                    total += cnt * weight * per_column
        if c >= cols or c % 2 == 0:
            return total
        i = column_position(params, (c - 1) // 2)
        if not _position_contains(params, i, s):
            return total
        dens *= params.child_density_factor * hat_weight(params, i, s)
        rect = _child_rect(params, rect, c, i)
    total += dens * (x - rect.x0)
    return total


def line_mass_dy(params: TowerParams, n: int, x: Rational, y: Rational,
                 side: int = +1) -> tuple[Fraction, Fraction]:
    """(u_n, one-sided d(u_n)/dy) at exact points, via the product rule pushed
    through the same closed-form recursion as :func:`line_mass`."""
    x, y = Fraction(x), Fraction(y)
    if not (0 <= x <= 1 and 0 <= y <= 1):
        raise DomainError("point outside the unit square")
    if n < 1 or n > params.max_depth:
        raise RangeError(f"level {n} outside [1, {params.max_depth}]")
    total = ZERO
    dtotal = ZERO
    rect = UNIT_SQUARE
    dens = tent(y)
    ddens = tent_slope(y, side)
    for _ in range(n - 1):
        cols = params.columns_per_parent
        cw = rect.width / cols
        c = int((x - rect.x0) / cw)
        c = min(c, cols)
        completed = c // 2
        s = (y - rect.y0) / rect.height
        ds = 1 / rect.height
        per_col = rect.width / params.copies
        for i, weight in _active_positions_sided(params, s, side):
            cnt = _completed_position_count(params, completed, i)
            if cnt:
                slope = hat_slope(params, i, s, side)
                total += cnt * weight * dens * per_col
                dtotal += cnt * per_col * (slope * ds * dens + weight * ddens)
        if c >= cols or c % 2 == 0:
            return total, dtotal
        i = column_position(params, (c - 1) // 2)
        if not _position_contains_sided(params, i, s, side):
            return total, dtotal
        weight = hat_weight(params, i, s)
        slope = hat_slope(params, i, s, side)
        gain = params.child_density_factor
        dens, ddens = (gain * weight * dens,
                       gain * (slope * ds * dens + weight * ddens))
        rect = _child_rect(params, rect, c, i)
    total += dens * (x - rect.x0)
    dtotal += ddens * (x - rect.x0)
    return total, dtotal


def rects_on_line(params: TowerParams, n: int, y: Rational,
                  cap: int = BRUTE_FORCE_CAP) -> Iterator[tuple[Rect, Fraction]]:
    """All level-n rectangles whose y-interval contains y, left to right,
    with their density values.  Raises :class:`CapExceeded` when the level
    holds more rectangles than ``cap``."""
    y = Fraction(y)
    if not 0 <= y <= 1:
        raise DomainError("y outside [0, 1]")
    if level_geometry(params, n).rect_count > cap:
        raise CapExceeded(f"level {n} holds more than {cap} rectangles")

    def recurse(rect: Rect, dens: Fraction, level: int) -> Iterator[tuple[Rect, Fraction]]:
        if level == n:
            yield rect, dens
            return
        s = (y - rect.y0) / rect.height
        active = {i: w for i, w in active_positions(params, s)}
        gain = params.child_density_factor
        for k in range(params.occupied_per_parent):
            i = column_position(params, k)
            if i in active:
                child = _child_rect(params, rect, 2 * k + 1, i)
                yield from recurse(child, dens * gain * active[i], level + 1)

    yield from recurse(UNIT_SQUARE, tent(y), 1)


def line_mass_bruteforce(params: TowerParams, n: int, x: Rational, y: Rational,
                         cap: int = BRUTE_FORCE_CAP) -> Fraction:
    """Independent oracle for :func:`line_mass`: materialize every level-n
    rectangle on the line and integrate the piecewise-constant density."""
    x, y = Fraction(x), Fraction(y)
    if not (0 <= x <= 1 and 0 <= y <= 1):
        raise DomainError("point outside the unit square")
    total = ZERO
    for rect, dens in rects_on_line(params, n, y, cap=cap):
        if rect.x1 <= x:
            total += dens * rect.width
        elif rect.x0 < x:
            total += dens * (x - rect.x0)
        else:
            break
    return total


def _descend_extreme(params: TowerParams, rect: Rect, level: int, n: int,
                     rightmost: bool) -> Rect:
    for _ in range(n - level):
        c = params.columns_per_parent - 1 if rightmost else 1
        i = column_position(params, (c - 1) // 2)
        rect = _child_rect(params, rect, c, i)
    return rect


def graph_interval(params: TowerParams, n: int, x: Rational) -> tuple[Fraction, Fraction]:
    """y-interval of the level-n graph approximant above x.

    If x descends through occupied columns all the way to level n the
    rectangle's y-interval is returned.  Otherwise x sits over a gap; the
    returned interval degenerates to the point on the affine segment joining
    the y-centers of the nearest level-n rectangles on each side (constant
    extension when no occupied column exists to the left).
    """
    x = Fraction(x)
    if not 0 <= x <= 1:
        raise DomainError("x outside [0, 1]")
    if n < 1 or n > params.max_depth:
        raise RangeError(f"level {n} outside [1, {params.max_depth}]")
    rect = UNIT_SQUARE
    stack: list[tuple[Rect, int]] = []
    for level in range(1, n):
        cols = params.columns_per_parent
        cw = rect.width / cols
        c = int((x - rect.x0) / cw)
        if c >= cols:
            c = cols - 1  # x on the right edge: fold into the last (occupied) column
        if c % 2 == 1:
            stack.append((rect, c))
            rect = _child_rect(params, rect, c, column_position(params, (c - 1) // 2))
            continue
        # gap: interpolate between the nearest occupied chains on both sides
        right = _child_rect(params, rect, c + 1, column_position(params, c // 2))
        right = _descend_extreme(params, right, level + 1, n, rightmost=False)
        left: Optional[Rect] = None
        if c >= 2:
            left = _child_rect(params, rect, c - 1, column_position(params, (c - 2) // 2))
            left = _descend_extreme(params, left, level + 1, n, rightmost=True)
        else:
            for idx in range(len(stack) - 1, -1, -1):
                anc_rect, anc_c = stack[idx]
                if anc_c >= 3:
                    left = _child_rect(params, anc_rect, anc_c - 2,
                                       column_position(params, (anc_c - 3) // 2))
                    left = _descend_extreme(params, left, idx + 2, n, rightmost=True)
                    break
        if left is None:
            v = right.y_center
        else:
            run = right.x_center - left.x_center
            v = left.y_center + (right.y_center - left.y_center) * (x - left.x_center) / run
        return v, v
    return rect.y0, rect.y1


def graph_midpoint(params: TowerParams, n: int, x: Rational) -> Fraction:
    lo, hi = graph_interval(params, n, x)
    return (lo + hi) / 2


def solve_parameters(alpha: Rational, p: Rational, search_bound: int = 64) -> TowerParams:
    """Lexicographically smallest (a, b) with a, b <= search_bound satisfying,
    in exact arithmetic, the gradient-integrability inequality
    ``b*(p-1) + 1 < a*p`` and the graph-regularity inequality
    ``alpha*(1 + a + b) <= b - 1``.  Raises :class:`Infeasible` otherwise."""
    alpha = Fraction(alpha)
    p = Fraction(p)
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    if p <= 1:
        raise DomainError("p must exceed 1")
    if search_bound < 2:
        raise DomainError("search bound too small")
    for a in range(2, search_bound + 1):
        for b in range(2, search_bound + 1):
            if b * (p - 1) + 1 < a * p and alpha * (1 + a + b) <= b - 1:
                return TowerParams(a=a, b=b, p=p, alpha=alpha)
    raise Infeasible(
        f"no (a, b) <= {search_bound} satisfies both inequalities for "
        f"alpha={alpha}, p={p}")


def gradient_ratio_log2(params: TowerParams, p: Optional[Rational] = None) -> Fraction:
    """Exact log2 of the modeled gradient-series term ratio
    ``2 * rows**(p-1) / copies**p`` = 2**(1 + b*(p-1) - a*p)."""
    p = params.p if p is None else Fraction(p)
    return Fraction(1) + params.b * (p - 1) - params.a * p


def condition1_holds(params: TowerParams, p: Optional[Rational] = None) -> bool:
    """Term ratio of the modeled gradient series below 1, checked exactly."""
    return gradient_ratio_log2(params, p) < 0


def condition2_holds(params: TowerParams, n: int, alpha: Optional[Rational] = None) -> bool:
    """Exact per-level regularity check in exponent form:
    ``n*(b-1) >= alpha*(n*(a+b) + 1)``.

    This is the per-level inequality whose n = 1 case is exactly the solver's
    ``alpha*(1+a+b) <= b-1``; it holds for every n >= 1 once it holds at n = 1.
    """
    alpha = params.alpha if alpha is None else Fraction(alpha)
    return n * (params.b - 1) >= alpha * (n * (params.a + params.b) + 1)


def position_profiles(params: TowerParams, n: int,
                      limit: Optional[int] = None) -> Iterator[tuple[int, ...]]:
    """Distinct position chains (i_2, ..., i_n); every chain is realized by
    some column path.  Truncated after ``limit`` chains when given."""
    it = itertools.product(range(params.rows - 1), repeat=n - 1)
    if limit is None:
        yield from it
    else:
        yield from itertools.islice(it, limit)


def profile_interval(params: TowerParams, profile: Sequence[int]) -> tuple[Fraction, Fraction]:
    """y-interval of the deepest rectangle of a position chain."""
    lo, h = ZERO, ONE
    for i in profile:
        lo += i * h / params.rows
        h = 2 * h / params.rows
    return lo, lo + h


def profile_density(params: TowerParams, profile: Sequence[int], y: Rational,
                    side: int = +1) -> tuple[Fraction, Fraction]:
    """(density, one-sided d/dy) along a position chain at height y."""
    y = Fraction(y)
    lo, h = ZERO, ONE
    value = tent(y)
    dvalue = tent_slope(y, side)
    gain = params.child_density_factor
    for i in profile:
        s = (y - lo) / h
        if s < 0 or s > 1:
            raise DomainError("y outside the profile's y-interval")
        w = hat_weight(params, i, s)
        dw = hat_slope(params, i, s, side) / h
        value, dvalue = gain * w * value, gain * (dw * value + w * dvalue)
        lo += i * h / params.rows
        h = 2 * h / params.rows
    return value, dvalue
