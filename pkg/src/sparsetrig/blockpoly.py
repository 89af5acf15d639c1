"""Lazy polynomials built from carrier * contracted-payload blocks.

The constructions in this package multiply low-degree carriers C_i(t) by
payloads H_i contracted to enormous rates r_i:

    W(t) = sum_i C_i(t) * H_i(r_i * t),      spec H_i excludes 0.

Supports multiply out to sizes (and degrees) that cannot be materialized,
so this module represents W structurally and provides

  * exact values at grid points through modular index arithmetic
    (e^{i r t_j} only depends on r mod M and the parity of r);
  * exact coefficient norms from per-block products, valid because the
    frequency blocks k*r_i + spec C_i are validated pairwise disjoint;
  * certified pointwise upper bounds (and boundary-family lower bounds)
    for the partial-sum maxima S* and S**, based on decomposing any
    window into complete half-block segments plus at most two cut blocks.

Rates may be exact integers or LazyRate objects a * b^e whose value is
never materialized; frequency bookkeeping then runs in signed-log space
with explicit relative margins instead of exact integer comparisons.

Sampling health: values are exact pointwise regardless of gcd(r_i, M),
but a small orbit M/gcd means the grid sees few distinct payload samples;
the orbit fraction is recorded so reports can flag degenerate sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .circle import CircleGrid
from .trigpoly import TrigPoly, coeff_norms

#: relative log2 margin required between lazily compared frequencies
LOG_MARGIN = 1e-9


class LazyRate:
    """Positive integer mult * base**exp, never materialized.

    Supports exactly what the block machinery needs: residues mod M,
    parity, multiplication by small integers, and log2-based ordering.
    """

    __slots__ = ("mult", "base", "exp", "log2")

    def __init__(self, mult: int, base: int, exp: int):
        if mult < 1 or base < 2 or exp < 0:
            raise ValueError("need mult >= 1, base >= 2, exp >= 0")
        self.mult = int(mult)
        self.base = int(base)
        self.exp = int(exp)
        self.log2 = math.log2(self.mult) + self.exp * math.log2(self.base)

    def __mod__(self, m: int) -> int:
        return (self.mult * pow(self.base, self.exp, m)) % m

    def times(self, k: int) -> "LazyRate":
        return LazyRate(self.mult * k, self.base, self.exp)

    @property
    def is_odd(self) -> bool:
        return self.mult % 2 == 1 and (self.base % 2 == 1 or self.exp == 0)

    def __repr__(self):
        return f"LazyRate({self.mult}*{self.base}^{self.exp})"


Rate = Union[int, LazyRate]


def rate_log2(r: Rate) -> float:
    if isinstance(r, LazyRate):
        return r.log2
    return math.log2(r)


def rate_mod(r: Rate, m: int) -> int:
    return r % m


def rate_is_odd(r: Rate) -> bool:
    if isinstance(r, LazyRate):
        return r.is_odd
    return r % 2 == 1


@total_ordering
class Freq:
    """Signed frequency magnitude in log2 space.

    Exact for small integers; beyond 2^52 the ordering carries a ulp-level
    ambiguity, which the layout validators guard with explicit margins.
    """

    __slots__ = ("sign", "log2")

    def __init__(self, sign: int, log2: float):
        self.sign = 0 if log2 == -math.inf else sign
        self.log2 = log2 if self.sign else -math.inf

    @staticmethod
    def of(x) -> "Freq":
        if isinstance(x, Freq):
            return x
        if x == 0:
            return Freq(0, -math.inf)
        if isinstance(x, LazyRate):
            return Freq(1, x.log2)
        return Freq(1 if x > 0 else -1, math.log2(abs(x)))

    def _key(self):
        return (self.sign, self.sign * self.log2 if self.sign else 0.0)

    def __eq__(self, other):
        return self._key() == Freq.of(other)._key()

    def __lt__(self, other):
        return self._key() < Freq.of(other)._key()

    def __neg__(self):
        return Freq(-self.sign, self.log2)

    def __abs__(self):
        return Freq(abs(self.sign), self.log2)

    def __float__(self):
        if self.sign == 0:
            return 0.0
        if self.log2 > 1020:
            return math.inf * self.sign
        return self.sign * 2.0 ** self.log2

    def clearly_below(self, other: "Freq", margin: float = LOG_MARGIN) -> bool:
        """True when self < other with a relative log2 margin."""
        o = Freq.of(other)
        if self.sign != o.sign:
            return self.sign < o.sign
        if self.sign == 0:
            return False
        if self.sign > 0:
            return self.log2 < o.log2 - margin
        return self.log2 > o.log2 + margin

    def __repr__(self):
        return f"Freq({'+' if self.sign > 0 else '-' if self.sign < 0 else '0'}2^{self.log2:.3f})"


def freq_times_rate(k: int, r: Rate) -> Freq:
    if k == 0:
        return Freq(0, -math.inf)
    return Freq(1 if k > 0 else -1, math.log2(abs(k)) + rate_log2(r))


def contracted_index_map(rate: Rate, grid: CircleGrid) -> np.ndarray:
    """sigma with theta_{sigma(j)} = rate * t_j (mod 2 pi), exact for any rate.

    With t_j = -pi + 2 pi j / M, the angle rate*t_j reduces to the grid by
    e^{i r t_j} = (-1)^r omega^{r j}; the half-turn lands on index M/2 when
    the rate is even, 0 otherwise.
    """
    m = grid.size
    r = rate_mod(rate, m)
    base = 0 if rate_is_odd(rate) else (m // 2)
    return (base + r * np.arange(m, dtype=np.int64)) % m


def orbit_fraction(rate: Rate, grid: CircleGrid) -> float:
    """Fraction of distinct grid angles hit by t -> rate * t."""
    g = math.gcd(rate_mod(rate, grid.size), grid.size)
    return 1.0 / g


def _half(p: TrigPoly, sign: int) -> TrigPoly:
    if sign > 0:
        return TrigPoly({k: c for k, c in p.coeffs.items() if k > 0})
    return TrigPoly({k: c for k, c in p.coeffs.items() if k < 0})


@dataclass(frozen=True)
class BlockTerm:
    """One carrier * contracted payload product.

    The rate must exceed the carrier's spectral spread so the translated
    carrier copies k * rate + spec C stay disjoint within the term.
    """

    carrier: TrigPoly
    payload: TrigPoly
    rate: Rate

    def __post_init__(self):
        if not len(self.carrier) or not len(self.payload):
            raise ValueError("carrier and payload must be nonzero")
        if self.payload[0] != 0:
            raise ValueError("payload must have zero mean coefficient")
        spec = self.carrier.spectrum()
        spread = spec[-1] - spec[0]
        if not Freq.of(spread).clearly_below(Freq.of(self.rate), 0.0):
            raise ValueError("rate must exceed the carrier spectral spread")

    @property
    def lazy(self) -> bool:
        return isinstance(self.rate, LazyRate)

    def carrier_span(self) -> Tuple[int, int]:
        spec = self.carrier.spectrum()
        return spec[0], spec[-1]

    def _corner(self, k: int, off: int):
        """Frequency k * rate + off, exact int or Freq for lazy rates."""
        if self.lazy:
            base = freq_times_rate(k, self.rate)
            return base if k != 0 else Freq.of(off)
        return k * self.rate + off

    def degree(self):
        lo_c, hi_c = self.carrier_span()
        ks = self.payload.spectrum()
        corners = [self._corner(k, off) for k in (ks[0], ks[-1]) for off in (lo_c, hi_c)]
        if self.lazy:
            return max(abs(Freq.of(c)) for c in corners)
        return max(abs(c) for c in corners)

    def segments(self) -> List[dict]:
        """Frequency intervals of the two payload halves."""
        out = []
        lo_c, hi_c = self.carrier_span()
        ks = list(self.payload.spectrum())
        for sign, group in ((-1, [k for k in ks if k < 0]),
                            (+1, [k for k in ks if k > 0])):
            if group:
                out.append({"sign": sign,
                            "lo": self._corner(min(group), lo_c),
                            "hi": self._corner(max(group), hi_c)})
        return out


class BlockSum:
    """Lazy sum of carrier * payload(rate * t) terms.

    layout="segments": the two payload halves of each term occupy pairwise
    disjoint frequency intervals, so S*/S** brackets are available.
    layout="subblocks": only the individual sub-blocks k*r_i + spec C_i
    are disjoint (segments may interleave); coefficient statistics remain
    exact but partial-sum control falls back to the crude l1 bound.
    """

    def __init__(self, terms: Sequence[BlockTerm], layout: str = "segments"):
        if not terms:
            raise ValueError("need at least one term")
        if layout not in ("segments", "subblocks"):
            raise ValueError(f"unknown layout {layout!r}")
        self.terms = list(terms)
        self.layout = layout
        self.lazy = any(t.lazy for t in self.terms)
        self._segments = self._collect_segments()
        if layout == "segments":
            self._validate_segments()
        else:
            self._validate_subblocks()

    # -- layout ------------------------------------------------------------

    def _collect_segments(self):
        segs = []
        for i, term in enumerate(self.terms):
            for seg in term.segments():
                seg["term"] = i
                if self.lazy:
                    seg["lo"] = Freq.of(seg["lo"])
                    seg["hi"] = Freq.of(seg["hi"])
                segs.append(seg)
        segs.sort(key=lambda s: Freq.of(s["lo"]) if self.lazy else s["lo"])
        return segs

    def _require_below(self, a, b, what: str):
        if self.lazy:
            if not Freq.of(a).clearly_below(Freq.of(b)):
                raise ValueError(what)
        elif a >= b:
            raise ValueError(what)

    def _validate_segments(self):
        # disjoint segment intervals: any frequency window then decomposes
        # into complete segments plus at most two cut blocks
        for a, b in zip(self._segments, self._segments[1:]):
            self._require_below(
                a["hi"], b["lo"],
                f"block segments overlap: terms {a['term']} and {b['term']}")

    def _validate_subblocks(self):
        if self.lazy:
            # lazy universes only arise from the geometric-rate cascade,
            # whose segments are validated; interleaved lazy layouts are
            # not supported
            raise ValueError("subblocks layout requires exact integer rates")
        ivs = []
        for t in self.terms:
            lo_c, hi_c = t.carrier_span()
            for k in t.payload.spectrum():
                ivs.append((k * t.rate + lo_c, k * t.rate + hi_c))
        ivs.sort()
        for a, b in zip(ivs, ivs[1:]):
            if a[1] >= b[0]:
                raise ValueError("sub-blocks overlap; coefficient stats unsafe")

    # -- basic stats ---------------------------------------------------------

    def degree(self):
        degs = [t.degree() for t in self.terms]
        if self.lazy:
            return max(Freq.of(d) for d in degs)
        return max(degs)

    def degree_log2(self) -> float:
        d = self.degree()
        return d.log2 if isinstance(d, Freq) else math.log2(max(int(d), 1))

    def min_abs_freq(self):
        vals = []
        for seg in self._segments:
            lo, hi = seg["lo"], seg["hi"]
            if self.lazy:
                lo, hi = Freq.of(lo), Freq.of(hi)
                if lo.sign <= 0 <= hi.sign and not (lo.sign == hi.sign):
                    return Freq.of(0)
                vals.append(min(abs(lo), abs(hi)))
            else:
                vals.append(0 if lo <= 0 <= hi else min(abs(lo), abs(hi)))
        return min(vals)

    def spectrum_size(self) -> int:
        return sum(len(t.carrier) * len(t.payload) for t in self.terms)

    def iter_coeffs(self, limit: Optional[int] = None) -> Iterator[Tuple[object, complex]]:
        """Yield (frequency, coefficient); frequencies are exact only for
        integer rates (structural tuples otherwise via iter_structure)."""
        if self.lazy:
            raise OverflowError("lazy rates: use iter_structure() instead")
        count = 0
        for t in self.terms:
            for k, hk in t.payload.coeffs.items():
                base = k * t.rate
                for c, cc in t.carrier.coeffs.items():
                    yield base + c, hk * cc
                    count += 1
                    if limit is not None and count >= limit:
                        return

    def iter_structure(self) -> Iterator[Tuple[int, int, int, complex]]:
        """Yield (term_index, payload_k, carrier_k, coefficient)."""
        for i, t in enumerate(self.terms):
            for k, hk in t.payload.coeffs.items():
                for c, cc in t.carrier.coeffs.items():
                    yield i, k, c, hk * cc

    def coeff_zero(self) -> complex:
        return 0j  # payloads exclude frequency 0 and rates exceed carriers

    def coeff_linf(self) -> float:
        return max(coeff_norms(t.carrier).linf * coeff_norms(t.payload).linf
                   for t in self.terms)

    def coeff_l1(self) -> float:
        return sum(coeff_norms(t.carrier).l1 * coeff_norms(t.payload).l1
                   for t in self.terms)

    def coeff_lp(self, p: float) -> float:
        tot = 0.0
        for t in self.terms:
            tot += (coeff_norms(t.carrier, [p]).lp[p]
                    * coeff_norms(t.payload, [p]).lp[p]) ** p
        return tot ** (1.0 / p)

    def is_analytic(self) -> bool:
        if self.lazy:
            return all(Freq.of(seg["lo"]).sign > 0 for seg in self._segments)
        return all(seg["lo"] > 0 for seg in self._segments)

    def min_orbit_fraction(self, grid: CircleGrid) -> float:
        return min(orbit_fraction(t.rate, grid) for t in self.terms)

    # -- values ---------------------------------------------------------------

    def values(self, grid: CircleGrid, allow_alias: bool = True) -> np.ndarray:
        out = np.zeros(grid.size, dtype=complex)
        for t in self.terms:
            cv = t.carrier.values(grid, allow_alias=True)
            pv = t.payload.values(grid, allow_alias=True)
            out += cv * pv[contracted_index_map(t.rate, grid)]
        return out

    # -- partial-sum brackets ---------------------------------------------------

    def _segment_values(self, grid: CircleGrid) -> List[np.ndarray]:
        vals = []
        carrier_cache = {}
        for seg in self._segments:
            i = seg["term"]
            t = self.terms[i]
            if i not in carrier_cache:
                carrier_cache[i] = t.carrier.values(grid, allow_alias=True)
            half = _half(t.payload, seg["sign"])
            pv = half.values(grid, allow_alias=True)
            vals.append(carrier_cache[i] * pv[contracted_index_map(t.rate, grid)])
        return vals

    def _cut_bounds(self, grid: CircleGrid) -> List[np.ndarray]:
        """Pointwise bound on any rectangular cut inside each segment."""
        out = []
        for seg in self._segments:
            t = self.terms[seg["term"]]
            half = _half(t.payload, seg["sign"])
            half_l1 = coeff_norms(half).l1
            h_linf = coeff_norms(t.payload).linf
            c_l1 = coeff_norms(t.carrier).l1
            cv = np.abs(t.carrier.values(grid, allow_alias=True))
            out.append(cv * half_l1 + h_linf * c_l1)
        return out

    def sstar_star_bracket(self, grid: CircleGrid) -> Tuple[np.ndarray, np.ndarray]:
        """(lower, upper) pointwise brackets for sup over windows |S_{n,m}|.

        lower: exact maximum over windows whose endpoints fall between
        segments; upper: lower family plus a certified bound on the at
        most two cut blocks any other window adds.
        """
        if self.layout != "segments":
            raise ValueError("partial-sum brackets need the segments layout")
        segs = self._segment_values(grid)
        m = grid.size
        prefixes = np.zeros((len(segs) + 1, m), dtype=complex)
        for i, sv in enumerate(segs):
            prefixes[i + 1] = prefixes[i] + sv
        dmid = np.zeros(m)
        for i in range(len(segs) + 1):
            d = np.abs(prefixes[i + 1:] - prefixes[i])
            if d.size:
                np.maximum(dmid, d.max(axis=0), out=dmid)
        cuts = self._cut_bounds(grid)
        top1 = np.zeros(m)
        top2 = np.zeros(m)
        for c in cuts:
            swap = c > top1
            top2 = np.where(swap, top1, np.maximum(top2, np.minimum(c, top1)))
            top1 = np.where(swap, c, top1)
        return dmid, dmid + top1 + top2

    def sstar_star_upper_max(self, grid: CircleGrid) -> float:
        return float(self.sstar_star_bracket(grid)[1].max())

    def sstar_upper(self, grid: CircleGrid) -> np.ndarray:
        """Pointwise upper bound for sup over windows on the grid."""
        if self.layout == "segments":
            return self.sstar_star_bracket(grid)[1]
        return np.full(grid.size, self.coeff_l1())


class ScaledProduct:
    """Outer special product Q(R t) * P with R > 2 deg P and Q^(0) = 0.

    Q and P may each be a TrigPoly or a BlockSum; the partial-sum bound
    follows the standard block decomposition: any window value is
    P(t) * (window of Q)(Rt) plus at most two cut outer blocks, each a
    coefficient of Q times a window of P.
    """

    def __init__(self, q, rate: Rate, p, q_sstar_bound: Optional[float] = None):
        self.q = q
        self.p = p
        self.rate = rate
        dp = Freq.of(_deg_freq(p))
        two_dp = Freq(dp.sign, dp.log2 + 1.0) if dp.sign else Freq.of(0)
        if not two_dp.clearly_below(Freq.of(rate), 0.0):
            raise ValueError("rate must exceed 2 * deg(inner)")
        if _coeff0(q) != 0:
            raise ValueError("outer factor must have zero mean coefficient")
        #: scalar bound for sup_t sup_windows |S(Q)|: crude l1 by default
        self.q_sstar_bound = q_sstar_bound if q_sstar_bound is not None else _l1(q)

    @property
    def lazy(self) -> bool:
        return isinstance(self.rate, LazyRate) or getattr(self.p, "lazy", False) \
            or getattr(self.q, "lazy", False)

    def degree(self):
        dq = Freq.of(_deg_freq(self.q))
        return Freq(1, dq.log2 + rate_log2(self.rate)) if dq.sign else Freq.of(0)

    def degree_log2(self) -> float:
        d = self.degree()
        return d.log2

    def min_abs_freq(self):
        mq = Freq.of(_min_abs_freq(self.q))
        if mq.sign == 0:
            return Freq.of(0)
        # min |k_q R + k_p| >= minabs(Q) R - deg(P): in log space the inner
        # degree is negligible against the rate by construction
        return Freq(1, mq.log2 + rate_log2(self.rate) - 1e-12)

    def spectrum_size(self):
        return _size(self.q) * _size(self.p)

    def is_analytic(self) -> bool:
        return Freq.of(_min_freq(self.q)).sign > 0 and _analytic_inner_ok(self)

    def coeff_linf(self):
        return _linf(self.q) * _linf(self.p)

    def coeff_l1(self):
        return _l1(self.q) * _l1(self.p)

    def coeff_zero(self):
        return 0j

    def iter_coeffs(self, limit: Optional[int] = None):
        if self.lazy:
            raise OverflowError("lazy rates: frequencies not materializable")
        count = 0
        for kq, cq in _iter_coeffs(self.q):
            base = kq * self.rate
            for kp, cp in _iter_coeffs(self.p):
                yield base + kp, cq * cp
                count += 1
                if limit is not None and count >= limit:
                    return

    def values(self, grid: CircleGrid, allow_alias: bool = True) -> np.ndarray:
        qv = _values(self.q, grid)
        pv = _values(self.p, grid)
        return qv[contracted_index_map(self.rate, grid)] * pv

    def sstar_upper(self, grid: CircleGrid) -> np.ndarray:
        """Pointwise certified bound on sup over windows of |S_{n,m}|."""
        pv = np.abs(_values(self.p, grid))
        inner = _sstarstar_upper(self.p, grid)
        return pv * self.q_sstar_bound + 2.0 * _linf(self.q) * inner

    def min_orbit_fraction(self, grid: CircleGrid) -> float:
        base = orbit_fraction(self.rate, grid)
        if isinstance(self.p, BlockSum):
            base = min(base, self.p.min_orbit_fraction(grid))
        if isinstance(self.q, BlockSum):
            base = min(base, self.q.min_orbit_fraction(grid))
        return base


# -- polymorphic helpers over TrigPoly | BlockSum | ScaledProduct -----------

def _deg_freq(x):
    return x.degree()


def _coeff0(x):
    if isinstance(x, TrigPoly):
        return x[0]
    return x.coeff_zero()


def _l1(x):
    if isinstance(x, TrigPoly):
        return coeff_norms(x).l1
    return x.coeff_l1()


def _linf(x):
    if isinstance(x, TrigPoly):
        return coeff_norms(x).linf
    return x.coeff_linf()


def _size(x):
    if isinstance(x, TrigPoly):
        return len(x)
    return x.spectrum_size()


def _min_abs_freq(x):
    return x.min_abs_freq()


def _min_freq(x):
    if isinstance(x, TrigPoly):
        return min(x.spectrum()) if len(x) else 0
    if isinstance(x, BlockSum):
        lows = [seg["lo"] for seg in x._segments]
        return Freq.of(lows[0]) if x.lazy else lows[0]
    return _min_freq_scaled(x)


def _min_freq_scaled(x: ScaledProduct):
    mq = Freq.of(_min_freq(x.q))
    if mq.sign == 0:
        return Freq.of(0)
    return Freq(mq.sign, mq.log2 + rate_log2(x.rate))


def _analytic_inner_ok(x: ScaledProduct) -> bool:
    # the inner polynomial's degree is dominated by minabs(Q) * rate
    mq = Freq.of(_min_abs_freq(x.q))
    dp = Freq.of(_deg_freq(x.p))
    if dp.sign == 0:
        return True
    return dp.clearly_below(Freq(1, mq.log2 + rate_log2(x.rate)), 0.0)


def _values(x, grid: CircleGrid) -> np.ndarray:
    return x.values(grid, allow_alias=True) if not isinstance(x, TrigPoly) \
        else x.values(grid, allow_alias=True)


def _iter_coeffs(x):
    if isinstance(x, TrigPoly):
        return iter(x.coeffs.items())
    return x.iter_coeffs()


def _sstarstar_upper(x, grid: CircleGrid) -> np.ndarray:
    if isinstance(x, TrigPoly):
        # crude but always valid pointwise bound
        return np.full(grid.size, coeff_norms(x).l1)
    if isinstance(x, BlockSum):
        if x.layout == "segments":
            return x.sstar_star_bracket(grid)[1]
        return np.full(grid.size, x.coeff_l1())
    # ScaledProduct: S**(Q_[R] P) <= |P| * bound(S**Q) + 2 linf(Q) * S**(P)
    pv = np.abs(_values(x.p, grid))
    return pv * x.q_sstar_bound + 2.0 * _linf(x.q) * _sstarstar_upper(x.p, grid)


def values_of(x, grid: CircleGrid) -> np.ndarray:
    return _values(x, grid)


def spectrum_size_of(x) -> int:
    return _size(x)


def degree_log2_of(x) -> float:
    if isinstance(x, TrigPoly):
        return math.log2(max(x.degree(), 1))
    return x.degree_log2()


def min_abs_freq_of(x):
    return x.min_abs_freq()


def analytic_of(x) -> bool:
    return x.is_analytic()


def sstar_upper_of(x, grid: CircleGrid) -> np.ndarray:
    if isinstance(x, TrigPoly):
        return np.full(grid.size, coeff_norms(x).l1)
    return x.sstar_upper(grid)


def l1_of(x) -> float:
    return _l1(x)


def linf_of(x) -> float:
    return _linf(x)


def iter_coeffs_of(x, limit: Optional[int] = None):
    if isinstance(x, TrigPoly):
        items = sorted(x.coeffs.items())
        return iter(items[:limit] if limit else items)
    if not hasattr(x, "iter_coeffs"):
        raise OverflowError("no materializable coefficient stream")
    return x.iter_coeffs(limit)
