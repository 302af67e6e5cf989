from __future__ import annotations

import numpy as np
import pytest

from mcrd.discrete import trapezoid_mean
from mcrd.multimode import PATTERNS, assemble, assemble_for_length, partition_for_mass


def _base_means(t):
    return [trapezoid_mean(a) for a in (t.u.us, t.v, t.w)]


@pytest.mark.parametrize("pattern", PATTERNS)
@pytest.mark.parametrize("j", [1, 2, 3])
def test_means_lengths_residuals(short_triple, pattern, j):
    m = assemble(short_triple, pattern, j)
    segs = 2 * j if pattern in ("Lambda", "V") else 2 * j + 1
    assert m.total_length == segs * short_triple.u.ell
    assert len(m.us) == segs * (len(short_triple.u.us) - 1) + 1
    assert np.allclose(np.diff(m.xs), short_triple.u.dx, rtol=1e-9)
    for a, b in zip(m.means(), _base_means(short_triple)):
        assert abs(a - b) <= 1e-12 * max(1.0, abs(b))
    base_fd = np.abs(short_triple.u.residual("fd2")).max()
    assert np.abs(m.residual("fd2")).max() <= 4 * base_fd
    base_sp = np.abs(short_triple.u.residual("spectral")).max()
    assert np.abs(m.residual("spectral")).max() <= 4 * base_sp


@pytest.mark.parametrize("pattern", PATTERNS)
def test_first_segment_bit_for_bit(short_triple, pattern):
    base = short_triple.u.us
    first = assemble(short_triple, pattern, 3).segment(0)
    expect = base if pattern in ("V", "U") else base[::-1]
    assert np.array_equal(first, expect)


def test_lambda1_shape(short_triple):
    m = assemble(short_triple, "Lambda", 1)
    n = len(short_triple.u.us)
    # decreasing spike base: Lambda_1 peaks at the centre, valleys at both ends
    assert m.us[n - 1] == short_triple.u.us[0] == m.us.max()
    assert m.us[0] == m.us[-1] == short_triple.u.us[-1]
    assert np.array_equal(m.us, m.us[::-1])


def test_u1_is_base_then_shifted_lambda1(short_triple):
    n = len(short_triple.u.us)
    u1 = assemble(short_triple, "U", 1).us
    lam = assemble(short_triple, "Lambda", 1).us
    assert np.array_equal(u1[:n], short_triple.u.us)
    assert np.array_equal(u1[n - 1:], lam)


def test_recursions(short_triple):
    lam1 = assemble(short_triple, "Lambda", 1).us
    v1 = assemble(short_triple, "V", 1).us
    for j in (2, 3):
        for name, piece in (("Lambda", lam1), ("V", v1), ("U", lam1), ("N", v1)):
            prev = assemble(short_triple, name, j - 1).us
            cur = assemble(short_triple, name, j).us
            assert np.array_equal(cur[: len(prev)], prev)
            assert np.array_equal(cur[len(prev) - 1:], piece)


def test_neumann_matching_at_junctions(short_triple):
    m = assemble(short_triple, "N", 2)
    step = len(short_triple.u.us) - 1
    for k in range(1, 5):
        i = k * step
        # even reflection about the junction: the discrete Neumann condition
        assert m.us[i + 1] == m.us[i - 1]


def test_partition_counts():
    ell = 100.0
    even = partition_for_mass(ell, 24.0)  # n_M = 4, k = 2
    assert sorted(p for p in even if p[0] in ("Lambda", "V")) == sorted(
        [("Lambda", 1, 25.0), ("Lambda", 2, 25.0), ("V", 1, 25.0), ("V", 2, 25.0)])
    assert sorted(p for p in even if p[0] in ("U", "N")) == [("N", 1, ell / 3), ("U", 1, ell / 3)]
    odd = partition_for_mass(ell, 20.0)  # n_M = 5, k = 2
    un = sorted(p for p in odd if p[0] in ("U", "N"))
    assert un == [("N", 1, 20.0), ("N", 2, 20.0), ("U", 1, 20.0), ("U", 2, 20.0)]
    assert len([p for p in odd if p[0] in ("Lambda", "V")]) == 4


def test_partition_errors():
    with pytest.raises(ValueError):
        partition_for_mass(100.0, 60.0)
    with pytest.raises(ValueError):
        partition_for_mass(100.0, 0.0)


def test_invalid_pattern(short_triple):
    with pytest.raises(ValueError):
        assemble(short_triple, "W", 1)
    with pytest.raises(ValueError):
        assemble(short_triple, "V", 0)


def test_assemble_for_length_resolves_base():
    from mcrd.equilibria import mu_bar

    m = assemble_for_length(mu_bar(0.1, 2.0) + 2.0, 100.0 / 3, 0.1, 2.0, "U", 1, n=256)
    assert m.total_length == pytest.approx(100.0)
    assert m.base.u.ell == pytest.approx(100.0 / 3)
