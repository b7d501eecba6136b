"""Multiplier-class estimator: calibration symbols, verdicts, claim table.

Calibration constants are hand-derivable: on the scan directions (1,0) and
(0.6,0.8) the symbol i xi_1 / A has |m| = 1, |d_xi1 m| A = 0.64 and
|d_xi2 m| A = 0.48 (the (1,0) direction contributes zeros that must land
in the discarded-below-noise count, not in the constants).
"""

import math

import numpy as np
import pytest

from lopstokes import (
    ClassGridSpec,
    FluidParams,
    GridTooCoarse,
    Sector,
    Tolerances,
    certify_table,
    class_cutoff,
    declared_claims,
    estimate_class,
)
from lopstokes.multiplier import KAPPAS, Claim
from lopstokes.config import REFERENCE_PARAMS

REF = REFERENCE_PARAMS
SECTOR = Sector(epsilon=math.pi / 4)

SMALL = ClassGridSpec(lam_min=1e-2, lam_max=1e4, lam_per_decade=2,
                      n_angles=5, a_min=1e-2, a_max=1e2, a_per_decade=2)

LAMBDA0_REF = 50.118723362727245


def run(fn, s, mtype, **kw):
    return estimate_class(fn, claimed=(s, mtype), sector=SECTOR,
                          grid=SMALL, fluid=REF, **kw)


class TestCalibration:
    def test_direction_symbol_passes_type2(self):
        rep = run(lambda kit, i1, i2: i1 / kit.a, 0, 2)
        assert rep.verdict == "pass"
        assert rep.constants[("00", 0)] == pytest.approx(1.0, rel=1e-9)
        assert rep.constants[("10", 0)] == pytest.approx(0.64, rel=1e-5)
        assert rep.constants[("01", 0)] == pytest.approx(0.48, rel=1e-5)
        # lambda-independent symbol: every (tau d_tau) estimate is exactly 0
        # (tau = 0 rays carry a zero noise floor, so these resolve as 0.0)
        assert all(rep.constants[(k, 1)] == 0.0 for k in KAPPAS)
        assert rep.discarded > 0

    def test_a_squared_passes_type1(self):
        rep = run(lambda kit, i1, i2: kit.a * kit.a + 0j, 2, 1)
        assert rep.verdict == "pass"
        # second xi_1 derivative of A^2 is exactly 2 against the unit bound
        assert rep.constants[("20", 0)] == pytest.approx(2.0, rel=1e-6)
        assert rep.constants[("00", 0)] <= 1.0 + 1e-9

    def test_a_claimed_order_one_type1_fails(self):
        # d^2 A ~ 1/A beats (sqrt|lam|+A)^{-1} at the small-A large-lam
        # corner, so refinement widening must blow the drift up
        rep = run(lambda kit, i1, i2: kit.a + 0j, 1, 1)
        assert rep.verdict == "fail"
        assert rep.max_drift() >= Tolerances().class_drift

    def test_overclaimed_degree_fails(self):
        # L12+ is order 2; claiming order 1 under-counts one scale power
        rep = run(lambda kit, i1, i2: kit.l12p, 1, 1)
        assert rep.verdict == "fail"

    def test_product_rule(self):
        # order-2 type-1 entry times the order--4 type-2 inverse determinant
        rep = run(lambda kit, i1, i2: kit.l12p / kit.det, -2, 2)
        assert rep.verdict == "pass"


class TestEstimator:
    def test_bare_callable_requires_claimed(self):
        with pytest.raises(ValueError):
            estimate_class(lambda kit, i1, i2: kit.l11p, grid=SMALL)

    def test_claim_object_roundtrip(self):
        cl = Claim("probe", 1.0, 1, lambda kit, i1, i2: kit.l11p)
        rep = estimate_class(cl, sector=SECTOR, grid=SMALL, fluid=REF)
        assert (rep.name, rep.s, rep.mtype, rep.lam_floor) == ("probe", 1.0, 1, 0.0)
        assert rep.verdict == "pass"

    def test_rows_shape(self):
        rep = run(lambda kit, i1, i2: kit.l11p, 1, 1)
        rows = list(rep.rows())
        assert len(rows) == 12
        for kappa, ell, c, drift in rows:
            assert kappa in KAPPAS
            assert ell in (0, 1)
            assert c >= 0.0
            assert math.isnan(drift) or drift > 0.0
        assert math.isfinite(rep.max_drift())
        assert rep.n_base > 0 and rep.n_refined > rep.n_base

    def test_floor_inserted_into_grid(self):
        floor = 3.7  # off-grid magnitude
        rep = estimate_class(lambda kit, i1, i2: kit.l11p, claimed=(1, 1),
                             sector=SECTOR, grid=SMALL, fluid=REF,
                             lam_floor=floor)
        assert rep.lam_floor == floor
        assert rep.verdict == "pass"
        # magnitudes at and above the floor only: 3.7 plus the grid tail
        n_mags = 1 + int(np.sum(SMALL.lam_mags() > floor))
        assert rep.n_base == n_mags * 5 * 9 * 2

    def test_floor_beyond_range_collapses_to_single_magnitude(self):
        # the floor magnitude itself is always kept on the grid
        rep = estimate_class(lambda kit, i1, i2: kit.l11p, claimed=(1, 1),
                             sector=SECTOR, grid=SMALL, fluid=REF,
                             lam_floor=1e12)
        assert rep.n_base == 1 * 5 * 9 * 2
        assert rep.n_refined == 1 * 5 * 25 * 2

    def test_unresolvable_verdict_raises(self):
        from lopstokes.multiplier import _verdict
        key = ("00", 0)
        with pytest.raises(GridTooCoarse):
            _verdict({key: 1.0}, {key: 1.0}, {key: False}, {key: False}, 2.0)


class TestClaimTable:
    def test_declared_claims_structure(self):
        claims = declared_claims(lambda0=7.5)
        assert len(claims) == 45
        names = [c.name for c in claims]
        assert len(set(names)) == 45
        assert all(c.mtype in (1, 2) for c in claims)
        floored = [c for c in claims if c.lam_floor == 7.5]
        assert len(floored) == 13
        assert all(c.lam_floor in (0.0, 7.5) for c in claims)
        by_name = {c.name: c for c in claims}
        assert (by_name["L12+"].s, by_name["L12+"].mtype) == (2, 1)
        assert (by_name["detL_inv"].s, by_name["detL_inv"].mtype) == (-4, 2)
        assert (by_name["K"].s, by_name["K"].mtype) == (1, 2)

    def test_class_cutoff_reference(self):
        assert class_cutoff(REF, SECTOR) == pytest.approx(LAMBDA0_REF, rel=1e-12)

    def test_certify_table_reference(self):
        reports = certify_table(REF, sector=SECTOR, lambda0=LAMBDA0_REF)
        assert len(reports) == 45
        failures = [r.name for r in reports if r.verdict != "pass"]
        assert failures == []
        assert sum(1 for r in reports if r.lam_floor == LAMBDA0_REF) == 13
        worst = max(r.max_drift() for r in reports)
        assert worst < Tolerances().class_drift
