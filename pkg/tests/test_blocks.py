import math

import pytest

from sparsetrig import blocks as bl


def test_block_b1_examples():
    assert bl.block_B1(2, 3).elements == (-6, -3, 3, 6)
    assert bl.block_B1_plus(1, 16).elements == (16,)


def test_block_b2_example():
    assert bl.block_B2(1, 1).elements == (0, 2, 5)


def test_block_b_example():
    assert bl.block_B(1, 1).elements == (-21, -18, -16, -14, -11, 11, 14, 16, 18, 21)


def test_block_d_examples():
    assert bl.block_D(1, 1).elements == (16, 18, 21)
    assert bl.block_D_nu(1, 1, 100).elements == (116, 118, 121)


def test_block_b_nu_symmetric():
    b = bl.block_B_nu(1, 1, 100)
    assert b.is_symmetric()
    with pytest.raises(bl.BlockRangeError):
        bl.block_B_nu(1, 1, 10)  # nu <= max B(1,1) = 21


def test_s_cap():
    with pytest.raises(bl.BlockRangeError):
        bl.block_B(7, 1)
    bl.block_B(7, 1, s_cap=7)  # explicit cap override works


def test_linearize_example():
    cert = bl.linearize(1, 10)
    pos = [(b, l) for b, l, _ in cert.entries if b > 0]
    assert [b for b, _ in pos] == [119, 140, 151, 169, 180, 201]
    assert [l for _, l in pos] == [12, 14, 15, 17, 18, 20]
    assert all(r <= 1 for _, _, r in cert.entries)


def test_lattice_properties():
    # s <= 3, a <= 50: symmetry, hole, sparsity, injective linearization
    for s in (1, 2, 3):
        hole = (2 * s) ** (2 * s + 1)
        for a in range(1, 51):
            b = bl.block_B(s, a)
            assert b.is_symmetric()
            assert b.min_abs() > hole * a
            cert = bl.linearize(s, a)  # raises on any injectivity failure
            gap_bound = a - 2 * cert.C_s
            els = b.elements
            for x, y in zip(els, els[1:]):
                assert y - x > gap_bound
            d = bl.block_D(s, a)
            assert all(x > 0 for x in d.elements)


def test_membership_oracle_matches_sets():
    for s in (1, 2):
        for a in (1, 7, 20):
            b = set(bl.block_B(s, a).elements)
            d = set(bl.block_D(s, a).elements)
            lo = min(b) - 3
            hi = max(b) + 3
            probe = set(range(lo, hi + 1, max((hi - lo) // 500, 1))) | b | d
            for x in probe:
                assert bl.block_member_B(x, s, a) == (x in b), (s, a, x)
                assert bl.block_member_D(x, s, a) == (x in d), (s, a, x)


def test_shift_divide():
    lam = bl.SpectrumSet((1, 5))
    assert bl.shift_spectrum(lam, 1).elements == (0, 4)
    assert bl.divide_spectrum(bl.SpectrumSet((2, 3, 4, 8)), 2).elements == (1, 2, 4)
    assert bl.divide_spectrum(bl.shift_spectrum(lam, 0), 1).elements == lam.elements


def test_spectrum_set_invariants():
    with pytest.raises(ValueError):
        bl.SpectrumSet((3, 3))
    with pytest.raises(ValueError):
        bl.SpectrumSet((5, 2))
    s = bl.SpectrumSet((-4, 1, 9))
    assert 1 in s and 2 not in s


def test_hadamard_builder_ratios():
    n = 150
    eps = lambda i: 1.0 / (i + 2)
    built = bl.build_hadamard_spectrum(eps, n)
    pos = built.spectrum.positive()
    assert len(pos) >= n
    for i in range(min(len(pos), n) - 1):
        assert pos[i + 1] / pos[i] > 1.0 + eps(i + 1), i
    assert built.spectrum.is_symmetric()
    assert len(built.manifest) >= 1
    # embedded blocks really are subsets
    els = set(built.spectrum.elements)
    for m in built.manifest:
        blk = bl.block_B(m.s, m.a)
        assert set(blk.elements) <= els
    # manifest s strictly increasing
    ss = [m.s for m in built.manifest]
    assert ss == sorted(set(ss))


def test_hadamard_builder_monotonicity_guard():
    with pytest.raises(ValueError):
        bl.build_hadamard_spectrum([0.1, 0.2, 0.1, 0.1], 3)


def test_hadamard_builder_degenerate_zero_eps():
    built = bl.build_hadamard_spectrum(lambda n: 0.0, 40)
    pos = built.spectrum.positive()
    for x, y in zip(pos, pos[1:]):
        assert y > x


def test_squares_builder():
    built = bl.build_squares_spectrum(lambda k: float(k), 3)
    assert built.spectrum.is_symmetric()
    worst = 0.0
    for m in built.manifest:
        assert m.kind == "B_nu"
        a = m.a // 2
        assert m.nu == a * a
    for b in built.spectrum.positive():
        k = round(math.isqrt(b))
        # nearest square among k-1, k, k+1
        tau = min(abs(b - (k + d) ** 2) for d in (-1, 0, 1))
        kk = min(((abs(b - (k + d) ** 2), k + d) for d in (-1, 0, 1)))[1]
        worst = max(worst, tau / math.sqrt(max(kk, 1)))
    assert worst < 1.0


def test_analytic_builders_positive():
    built = bl.build_analytic_hadamard_spectrum(lambda i: 1.0 / (i + 2), 80)
    assert all(x > 0 for x in built.spectrum.elements)
    pos = built.spectrum.elements
    for i in range(len(pos) - 1):
        assert pos[i + 1] / pos[i] > 1.0 + 1.0 / (i + 3)
    els = set(pos)
    for m in built.manifest:
        assert set(bl.block_D(m.s, m.a).elements) <= els

    built2 = bl.build_analytic_squares_spectrum(lambda k: float(k), 2)
    assert all(x > 0 for x in built2.spectrum.elements)
    assert [m.s for m in built2.manifest] == [1, 2]


def test_spectrum_file_roundtrip(tmp_path):
    s = bl.SpectrumSet((-5, 2, 10 ** 25))
    path = tmp_path / "s.txt"
    s.to_file(path)
    assert bl.spectrum_from_file(path).elements == s.elements
