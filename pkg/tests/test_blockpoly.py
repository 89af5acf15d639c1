import math

import numpy as np
import pytest

from sparsetrig import trigpoly as tp
from sparsetrig.blockpoly import (BlockSum, BlockTerm, Freq, LazyRate,
                                  ScaledProduct, contracted_index_map,
                                  orbit_fraction)
from sparsetrig.circle import CircleGrid
from sparsetrig.trigpoly import TrigPoly


def materialize(x) -> TrigPoly:
    return TrigPoly(dict(x.iter_coeffs()))


def small_blocksum():
    carrier1 = TrigPoly({-1: 0.5, 0: 1.0, 1: 0.5})
    carrier2 = TrigPoly({-1: 0.25j, 1: -0.25j})
    payload = TrigPoly({-2: 0.5, -1: 1.0, 1: 1.0, 2: 0.5})
    return BlockSum([BlockTerm(carrier1, payload, 11),
                     BlockTerm(carrier2, payload, 101)], layout="segments")


def test_values_match_materialized():
    grid = CircleGrid(2048)
    w = small_blocksum()
    mat = materialize(w)
    assert np.allclose(w.values(grid), mat.values(grid), atol=1e-10)


def test_coeff_stats_match():
    w = small_blocksum()
    mat = materialize(w)
    norms = tp.coeff_norms(mat, [2.0, 3.0])
    assert w.coeff_l1() == pytest.approx(norms.l1)
    assert w.coeff_linf() == pytest.approx(norms.linf)
    assert w.coeff_lp(2.0) == pytest.approx(norms.lp[2.0])
    assert w.coeff_zero() == 0
    assert w.degree() == mat.degree()
    assert w.spectrum_size() == len(mat)


def test_bracket_contains_truth():
    grid = CircleGrid(2048)
    w = small_blocksum()
    mat = materialize(w)
    truth = tp.s_star_star(mat, grid).values.real
    lower, upper = w.sstar_star_bracket(grid)
    assert np.all(lower <= truth + 1e-9)
    assert np.all(truth <= upper + 1e-9)


def test_segment_overlap_rejected():
    carrier = TrigPoly({-3: 1, 3: 1})
    payload = TrigPoly({-1: 1, 1: 1})
    with pytest.raises(ValueError):
        BlockSum([BlockTerm(carrier, payload, 7),
                  BlockTerm(carrier, payload, 9)], layout="segments")


def test_subblocks_layout():
    carrier = TrigPoly({0: 1.0})
    payload = TrigPoly({-1: 1, 1: 1})
    w = BlockSum([BlockTerm(carrier, payload, 10),
                  BlockTerm(carrier, payload, 17)], layout="subblocks")
    grid = CircleGrid(512)
    mat = materialize(w)
    assert np.allclose(w.values(grid), mat.values(grid))
    assert np.all(w.sstar_upper(grid) >= tp.s_star_star(mat, grid).values.real - 1e-9)
    with pytest.raises(ValueError):
        w.sstar_star_bracket(grid)


def test_scaled_product_matches():
    grid = CircleGrid(4096)
    q = TrigPoly({-2: 0.25, -1: 0.5, 1: 0.5, 2: 0.25})
    p = TrigPoly({-1: 1.0, 0: 2.0, 1: 1.0})
    sp = ScaledProduct(q, 37, p)
    mat = tp.multiply(tp.contract(q, 37), p)
    assert np.allclose(sp.values(grid), mat.values(grid), atol=1e-10)
    assert sp.coeff_l1() == pytest.approx(tp.coeff_norms(mat).l1)
    truth = tp.s_star_star(mat, grid).values.real
    assert np.all(truth <= sp.sstar_upper(grid) + 1e-9)
    assert sorted(k for k, _ in sp.iter_coeffs()) == list(mat.spectrum())


def test_scaled_product_preconditions():
    q = TrigPoly({1: 1.0})
    p = TrigPoly({-3: 1.0, 3: 1.0})
    with pytest.raises(ValueError):
        ScaledProduct(q, 6, p)  # rate <= 2 deg p
    with pytest.raises(ValueError):
        ScaledProduct(TrigPoly({0: 1.0, 1: 1.0}), 100, p)  # mean not zero


def test_lazy_rate_mod_parity_log():
    r = LazyRate(3, 10, 50)  # 3 * 10^50
    exact = 3 * 10 ** 50
    for m in (7, 64, 16382):
        assert r % m == exact % m
    assert not r.is_odd
    assert LazyRate(3, 3, 7).is_odd
    assert r.log2 == pytest.approx(math.log2(exact))
    assert r.times(5) % 97 == (5 * exact) % 97


def test_contracted_index_map_lazy_vs_exact():
    grid = CircleGrid(64)
    exact = 3 * 7 ** 5
    lazy = LazyRate(3, 7, 5)
    assert np.array_equal(contracted_index_map(exact, grid),
                          contracted_index_map(lazy, grid))
    # exactness of the angle identification
    idx = contracted_index_map(exact, grid)
    assert np.allclose(np.cos(grid.points[idx]), np.cos(exact * grid.points),
                       atol=1e-9)


def test_lazy_blocksum_values():
    grid = CircleGrid(2 * 127)
    carrier = TrigPoly({0: 2.0})
    payload = TrigPoly({-1: 0.5, 1: 0.5})  # cos(rate t)
    lazy = BlockSum([BlockTerm(carrier, payload, LazyRate(1, 3, 40))],
                    layout="segments")
    exact = 3 ** 40
    # exact reference: reduce the angle with integer arithmetic (float
    # products of 3^40 * t cannot resolve mod 2 pi)
    m = grid.size
    base = ((1 - exact) * (m // 2)) % m
    idx = (base + (exact % m) * np.arange(m)) % m
    expect = 2.0 * np.cos(grid.points[idx])
    assert np.allclose(lazy.values(grid).real, expect, atol=1e-9)
    assert lazy.lazy and isinstance(lazy.degree(), Freq)
    assert lazy.min_abs_freq().log2 > 0
    # small-rate sanity against plain float evaluation
    small = BlockSum([BlockTerm(carrier, payload, 243)], layout="segments")
    assert np.allclose(small.values(grid).real,
                       2.0 * np.cos(243.0 * grid.points), atol=1e-9)


def test_orbit_fraction():
    grid = CircleGrid(64)
    assert orbit_fraction(9, grid) == 1.0
    assert orbit_fraction(32, grid) == pytest.approx(1 / 32)
    assert orbit_fraction(LazyRate(1, 2, 100), grid) == pytest.approx(1 / 64)


def test_freq_ordering():
    a = Freq.of(-(10 ** 40))
    b = Freq.of(-5)
    c = Freq.of(0)
    d = Freq.of(7)
    e = Freq(1, 1e9)  # astronomically large positive
    assert a < b < c < d < e
    assert abs(a) > abs(b)
    assert Freq.of(128).clearly_below(Freq.of(256))
    assert not Freq.of(128).clearly_below(Freq.of(128))
