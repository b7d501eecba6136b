"""Boundary matrix: entries, determinant identities, scaling, scan, asymptotics.

Frozen entry/determinant constants come from an independent 50-digit mpmath
evaluation of the textbook entry formulas at pinned inputs.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lopstokes import (
    FluidParams,
    Sector,
    SpectralPoint,
    asymptotic_report,
    assemble,
    char_roots,
    omega1,
    omega2,
    scan_lower_bound,
)
from lopstokes.config import GridSpec, REFERENCE_PARAMS
from lopstokes.errors import AsymptoticMismatch
from lopstokes.lopatinski import (
    ENTRY_DEGREES,
    entries_minus,
    entries_minus_raw,
    entries_plus,
    entries_plus_raw,
)

REF = REFERENCE_PARAMS

P1 = SpectralPoint(lam=2.0 + 1.5j, xi=(0.7, -0.4))
P3 = SpectralPoint(lam=1e6 * cmath.exp(2j), xi=(1e-3,))
FLUID4 = FluidParams(2.0, 3.0, 0.5, 1.5, 2.5, 0.7)
P4 = SpectralPoint(lam=0.02 - 0.05j, xi=(40.0, -9.0))

O1_ENTRIES = {
    "l11p": 1.8300944717141206116 + 0.41095212815761891639j,
    "l12p": 0.39442831025272345232 - 0.0068595057053612015422j,
    "l21p": 0.60681278500418992665 - 0.01055308570055569468j,
    "l22p": 2.3462646666923634183 + 0.63701503130843995511j,
    "l11m": 3.0627452212017464341 + 0.66474055980849218739j,
    "l12m": 1.1692641390698135581 + 0.5359309728924331597j,
    "l21m": 1.4502936715420365037 + 0.66474055980849218739j,
    "l22m": 6.4692641390698135581 + 3.5359309728924331597j,
}
O1_DET = 46.158537625408672064 + 69.367396206703281627j
O3_DET = -4463362610735.3275303 - 5167770005634.8150629j
O4_DET = 27855505.463162974972 - 3939.271161908254173j


def rel(got, want):
    return abs(got - want) / abs(want)


def random_points(n=120, seed=5):
    rng = np.random.default_rng(seed)
    pts = []
    for _ in range(n):
        mag = 10.0 ** rng.uniform(-4, 8)
        ang = rng.uniform(-3 * math.pi / 4, 3 * math.pi / 4)
        a = 10.0 ** rng.uniform(-4, 8)
        if rng.integers(2):
            xi = (float(a),)
        else:
            xi = (float(a) * 0.6, float(a) * 0.8)
        pts.append(SpectralPoint(lam=mag * cmath.exp(1j * ang), xi=xi))
    return pts


class TestFrozenEntries:
    def test_entries_point_one(self):
        m = assemble(REF, P1)
        got = dict(zip(("l11p", "l12p", "l21p", "l22p"), m.l_plus))
        got.update(zip(("l11m", "l12m", "l21m", "l22m"), m.l_minus))
        for name, want in O1_ENTRIES.items():
            assert rel(got[name], want) < 1e-13, name

    def test_det_point_one(self):
        assert rel(assemble(REF, P1).det, O1_DET) < 1e-13

    def test_det_point_three(self):
        assert rel(assemble(REF, P3).det, O3_DET) < 1e-13

    def test_det_point_four(self):
        assert rel(assemble(FLUID4, P4).det, O4_DET) < 1e-13

    def test_stabilized_p_example(self):
        # rho_+=2, mu_+=nu_+=1, lam=3, A=1: A_+ = 2, B_+ = sqrt(7),
        # P = (A_+ B_+ + A^2)/(rho_+ lam/(2 mu_+ + nu_+) + A^2) = (2 sqrt7 + 1)/3
        fluid = FluidParams(2.0, 1.0, 1.0, 1.0, 1.0)
        sp = SpectralPoint(lam=3.0, xi=(1.0,))
        r = char_roots(fluid, sp)
        l11p = entries_plus(fluid, sp, r)[0]
        # L+11 = mu (mu+nu)/(2mu+nu) A_+ P
        p_val = l11p * 3.0 / (2.0 * r.a_plus)
        want = (2.0 * math.sqrt(7.0) + 1.0) / 3.0
        assert rel(p_val, want) < 1e-14

    def test_minus_entries_closed_form(self):
        # mu_-=1, A=1, B_-=2 means L-11 = 3, L-22 = 6
        fluid = FluidParams(1.0, 3.0, 1.0, 1.0, 1.0)  # rho_-lam/mu_- + A^2 = 4
        sp = SpectralPoint(lam=1.0, xi=(1.0,))
        r = char_roots(fluid, sp)
        assert rel(r.b_minus, 2.0) < 1e-15
        l11m, l12m, l21m, l22m = entries_minus(fluid, sp, r)
        assert rel(l11m, 3.0) < 1e-14
        assert rel(l12m, 1.0) < 1e-14
        assert rel(l21m, 1.0) < 1e-14
        assert rel(l22m, 6.0) < 1e-14

    def test_plus_small_lambda_limit(self):
        # L+21 -> 2 mu^2/(2mu+nu) = 2/3 at reference as lambda -> 0
        sp = SpectralPoint(lam=1e-12 + 0.0j, xi=(1.0,))
        l21p = entries_plus(REF, sp, char_roots(REF, sp))[2]
        assert rel(l21p, 2.0 / 3.0) < 1e-6

    def test_minus_small_lambda_vanishing(self):
        # L-21 -> 0 like lambda at fixed A
        base = abs(entries_minus(REF, P_at(1e-6), char_roots(REF, P_at(1e-6)))[2])
        smaller = abs(entries_minus(REF, P_at(1e-8), char_roots(REF, P_at(1e-8)))[2])
        assert smaller < 2e-2 * base


def P_at(lam_mag):
    return SpectralPoint(lam=complex(lam_mag), xi=(1.0,))


class TestStabilizedForms:
    # The raw forms divide by (or subtract) nearly cancelling quantities, so
    # their own rounding error grows like eps/gate near the cancellation edge;
    # the stated tolerances are only meaningful where the raw oracle itself
    # still carries the digits.  Points closer to the edge get a
    # conditioning-aware bound instead of being skipped.

    def test_plus_raw_agreement(self):
        checked = 0
        for sp in random_points(seed=31):
            r = char_roots(REF, sp)
            scale2 = (math.sqrt(abs(sp.lam)) + sp.a) ** 2
            gate = abs(r.a_plus * r.b_plus - sp.a ** 2) / scale2
            if gate <= 1e-8:
                continue
            stable = entries_plus(REF, sp, r)
            raw = entries_plus_raw(REF, sp, r)
            bound = 1e-10 if gate > 1e-4 else 100.0 * 2.3e-16 / gate
            for s, w in zip(stable, raw):
                assert rel(s, w) < bound
            checked += 1
        assert checked > 60

    def test_minus_raw_agreement(self):
        checked = 0
        for sp in random_points(seed=37):
            r = char_roots(REF, sp)
            gate = abs(r.b_minus - sp.a) / (abs(r.b_minus) + sp.a)
            if gate <= 1e-10:
                continue
            stable = entries_minus(REF, sp, r)
            raw = entries_minus_raw(REF, sp, r)
            bound = 1e-11 if gate > 1e-3 else 100.0 * 2.3e-16 / gate
            for s, w in zip(stable, raw):
                assert rel(s, w) < bound
            checked += 1
        assert checked > 60


class TestDeterminantIdentities:
    @given(
        mag=st.floats(1e-4, 1e8),
        ang=st.floats(-(math.pi - math.pi / 4), math.pi - math.pi / 4),
        a=st.floats(1e-4, 1e8),
        two_d=st.booleans(),
    )
    @settings(max_examples=150)
    def test_factorized_equals_direct(self, mag, ang, a, two_d):
        xi = (a,) if two_d else (a * 0.6, a * 0.8)
        m = assemble(REF, SpectralPoint(lam=mag * cmath.exp(1j * ang), xi=xi))
        direct = complex(np.linalg.det(m.matrix()))
        assert rel(m.det, direct) < 1e-13

    def test_block_split_definition(self):
        m = assemble(REF, P1)
        det_p = m.l_plus[0] * m.l_plus[3] - m.l_plus[1] * m.l_plus[2]
        det_m = m.l_minus[0] * m.l_minus[3] - m.l_minus[1] * m.l_minus[2]
        assert rel(m.det_plus, det_p) < 1e-15
        assert rel(m.det_minus, det_m) < 1e-15
        assert rel(m.det, m.l_minus[3] * det_p + m.l_plus[3] * det_m) < 1e-15

    @pytest.mark.parametrize("fluid,sp", [(REF, P1), (REF, P3), (FLUID4, P4)])
    def test_adjugate_identity(self, fluid, sp):
        m = assemble(fluid, sp)
        prod = m.matrix() @ m.cofactors() / m.det
        assert float(np.max(np.abs(prod - np.eye(3)))) < 1e-12

    def test_solve_matches_inverse(self):
        m = assemble(REF, P1)
        rhs = np.array([1.0 + 2.0j, -0.5j, 0.25], dtype=np.complex128)
        x = m.solve(rhs)
        assert float(np.max(np.abs(m.matrix() @ x - rhs))) < 1e-13 * float(np.max(np.abs(rhs)))

    @pytest.mark.parametrize("s", [0.5, 2.0, 10.0])
    def test_parabolic_homogeneity(self, s):
        m0 = assemble(REF, P1)
        m1 = assemble(REF, P1.scaled(s))
        named0 = dict(zip(("l11p", "l12p", "l21p", "l22p"), m0.l_plus))
        named0.update(zip(("l11m", "l12m", "l21m", "l22m"), m0.l_minus))
        named1 = dict(zip(("l11p", "l12p", "l21p", "l22p"), m1.l_plus))
        named1.update(zip(("l11m", "l12m", "l21m", "l22m"), m1.l_minus))
        for name, deg in ENTRY_DEGREES.items():
            if name == "det":
                continue
            assert rel(named1[name], s ** deg * named0[name]) < 1e-12, name
        assert rel(m1.det, s ** 4 * m0.det) < 1e-12

    def test_entry_mutation_is_internally_consistent(self):
        clean = assemble(REF, P1)
        mut = assemble(REF, P1, perturb=("l12p", 1e-3))
        assert rel(mut.l_plus[1], clean.l_plus[1] * 1.001) < 1e-15
        det_p = mut.l_plus[0] * mut.l_plus[3] - mut.l_plus[1] * mut.l_plus[2]
        det_m = mut.l_minus[0] * mut.l_minus[3] - mut.l_minus[1] * mut.l_minus[2]
        assert rel(mut.det, mut.l_minus[3] * det_p + mut.l_plus[3] * det_m) < 1e-15
        assert mut.det != clean.det


class TestAsymptotics:
    def test_reference_constants(self):
        assert omega1(FluidParams(1.0, 2.0, 1.0, 1.0, 1.0)) == pytest.approx(8.0)
        assert omega2(REF) == pytest.approx(2.0 * math.sqrt(2.0) + 4.0, rel=1e-15)

    def test_report_at_100(self):
        w1, w2, (d1, d2) = asymptotic_report(REF, 100.0)
        assert w1 == omega1(REF) and w2 == omega2(REF)
        assert max(d1, d2) <= 0.05

    def test_report_tightens_with_ratio(self):
        _, _, dev3 = asymptotic_report(REF, 1e3, dev_tol=math.inf)
        _, _, dev6 = asymptotic_report(REF, 1e6, dev_tol=math.inf)
        assert max(dev6) < max(dev3)
        _, _, dev4 = asymptotic_report(REF, 1e4)
        assert max(dev4) <= 0.005

    def test_ratio_below_100_rejected(self):
        with pytest.raises(AsymptoticMismatch):
            asymptotic_report(REF, 50.0)

    def test_custom_fluid_constants_positive(self):
        assert omega1(FLUID4) > 0.0
        assert omega2(FLUID4) > 0.0


SMALL_GRID = GridSpec(
    lam_min=1e-2, lam_max=1e2, lam_per_decade=2, n_angles=5,
    a_min=1e-2, a_max=1e2, a_per_decade=2,
)


class TestScan:
    def test_report_shape(self):
        sector = Sector(epsilon=math.pi / 4)
        rep = scan_lower_bound(REF, sector, grid=SMALL_GRID, refine=True)
        assert rep.omega > 0.0
        assert rep.n_points == 9 * 5 * 9
        assert rep.refine_drift is not None and rep.refine_drift < 0.5
        assert abs(rep.worst_lam) > 0.0 and rep.worst_a > 0.0
        d = rep.to_dict()
        for key in ("omega", "omega1", "omega2", "worst_point", "regime_deviations",
                    "grid", "n_points", "refine_drift"):
            assert key in d
        assert d["worst_point"]["ratio"] == rep.omega

    def test_scan_narrower_sector_not_worse(self):
        # shrinking the angle span cannot lower the infimum
        wide = scan_lower_bound(REF, Sector(epsilon=math.pi / 4), grid=SMALL_GRID)
        narrow = scan_lower_bound(REF, Sector(epsilon=math.pi / 2), grid=SMALL_GRID)
        assert narrow.omega >= wide.omega
