import math

import numpy as np
import pytest
from oracles import dense_total

from phasecart.apparatus import GUIDE_FIELD, POINT_A, POINT_B, POINT_F, POINT_I, Region
from phasecart.errors import ConfigError, ConsistencyError, SingularPathError
from phasecart.phase import (
    SIGN_CONVENTION,
    ParameterPath,
    continue_phase,
    dynamical_phase,
    geometric_phase,
    rectangle_path,
    total_phase,
    trace_path,
    winding_number,
)
from phasecart.spin import SPIN_UP, SpinState

G = GUIDE_FIELD


def assert_branch_continuity(trace):
    phases = trace.phases
    assert np.all(np.abs(np.diff(phases)) < 180)
    assert np.all(np.diff(trace.arclengths) > 0)


class TestPath:
    def test_needs_two_vertices(self):
        with pytest.raises(ConfigError):
            ParameterPath(((0, 0),))

    def test_closed_needs_three(self):
        with pytest.raises(ConfigError):
            ParameterPath(((0, 0), (1, 1)), closed=True)

    def test_repeated_vertex(self):
        with pytest.raises(ConfigError):
            ParameterPath(((0, 0), (0, 0), (1, 1)))

    def test_bad_steps(self):
        with pytest.raises(ConfigError):
            ParameterPath(((0, 0), (1, 1)), steps_per_segment=0)

    def test_closed_drops_repeated_start(self):
        p = ParameterPath(((0, 0), (1, 0), (1, 1), (0, 0)), closed=True)
        assert len(p.vertices) == 3 and len(p.segments) == 3


class TestContinuePhase:
    def test_linear_phase_is_followed_across_many_turns(self):
        # 115 deg per grid step: every step must be bisected to stay on branch
        res = continue_phase(lambda t: np.exp(1j * 20.0 * np.asarray(t)), np.linspace(0, 1, 11))
        assert math.degrees(res[-1][2]) == pytest.approx(math.degrees(20.0), abs=1e-9)
        assert any(r[3] for r in res)

    def test_zero_raises(self):
        with pytest.raises(SingularPathError, match="phase singularity"):
            continue_phase(lambda t: np.asarray(t) - 0.5, np.linspace(0, 1, 11))


class TestTrace:
    def test_first_sample_is_principal_phase(self):
        tr = trace_path(ParameterPath(((10, 20), (30, -5))))
        s0 = tr.samples[0]
        assert s0.phase_unwrapped_deg == pytest.approx(math.degrees(math.atan2(s0.c.imag, s0.c.real)), abs=1e-12)
        assert tr.total_phase_deg == tr.samples[-1].phase_unwrapped_deg - s0.phase_unwrapped_deg

    def test_base_samples_are_kept(self):
        tr = trace_path(ParameterPath((POINT_I, POINT_A, POINT_F), 100))
        base = [s.step for s in tr.samples if not s.refined]
        assert base == list(range(201))
        assert all(s.step != int(s.step) for s in tr.samples if s.refined)

    @pytest.mark.parametrize("via", [POINT_A, POINT_B])
    def test_reversal_is_odd_multiple_of_pi(self, via):
        tr = trace_path(ParameterPath((POINT_I, via, POINT_F)))
        assert_branch_continuity(tr)
        n = tr.total_phase_deg / 180
        assert abs(n - round(n)) < 1e-6 and round(n) % 2 == 1

    def test_a_and_b_differ_by_full_turn(self):
        a = trace_path(ParameterPath((POINT_I, POINT_A, POINT_F))).total_phase_deg
        b = trace_path(ParameterPath((POINT_I, POINT_B, POINT_F))).total_phase_deg
        oracle = dense_total([POINT_I, POINT_A, POINT_F]) - dense_total([POINT_I, POINT_B, POINT_F])
        assert abs(abs(oracle) - 360) < 1e-6
        assert a - b == pytest.approx(oracle, abs=1e-6)

    def test_retraced_path_cancels(self):
        tr = trace_path(ParameterPath((POINT_I, POINT_A, POINT_I)))
        assert tr.total_phase_deg == pytest.approx(0, abs=1e-9)

    def test_through_zero_raises(self):
        with pytest.raises(SingularPathError):
            trace_path(ParameterPath((POINT_I, POINT_F)))

    def test_matches_dense_oracle_on_random_paths(self):
        rng = np.random.default_rng(11)
        checked = 0
        while checked < 5:
            verts = [tuple(v) for v in rng.uniform(-200, 200, size=(3, 2))]
            try:
                tr = trace_path(ParameterPath(tuple(verts)))
            except SingularPathError:
                continue
            assert_branch_continuity(tr)
            assert tr.total_phase_deg == pytest.approx(dense_total(verts), abs=1e-6)
            checked += 1

    def test_refinement_stability(self):
        rng = np.random.default_rng(5)
        checked = 0
        while checked < 5:
            verts = tuple(tuple(v) for v in rng.uniform(-200, 200, size=(3, 2)))
            try:
                coarse = trace_path(ParameterPath(verts, 100))
            except SingularPathError:
                continue
            if coarse.min_contrast <= 0.05:
                continue
            fine = trace_path(ParameterPath(verts, 200))
            assert abs(fine.total_phase_deg - coarse.total_phase_deg) < 1e-9 / coarse.min_contrast
            checked += 1

    def test_near_zero_forces_refinement(self):
        tr = trace_path(ParameterPath((POINT_I, (0.05, 0.05), POINT_F)))
        assert_branch_continuity(tr)
        assert sum(s.refined for s in tr.samples) > 0
        assert tr.min_contrast < 0.05

    def test_json_shape(self):
        d = trace_path(ParameterPath((POINT_I, POINT_A, POINT_F))).to_dict()
        assert set(d) == {"path", "samples", "total_phase_deg", "min_contrast", "sign_convention"}


class TestWinding:
    def test_origin_is_minus_one(self):
        assert winding_number(rectangle_path(-10, 10, -10, 10)) == -1

    def test_q180_is_plus_one(self):
        assert winding_number(rectangle_path(G - 10, G + 10, G - 10, G + 10)) == 1

    def test_empty_loop(self):
        assert winding_number(rectangle_path(150, 170, 150, 170)) == 0

    def test_both_zeros(self):
        assert winding_number(rectangle_path(-20, 150, -20, 150)) == 0

    def test_orientation_antisymmetry(self):
        loop = rectangle_path(-10, 10, -10, 10)
        assert winding_number(loop.reversed()) == -winding_number(loop)

    def test_additivity(self):
        v = (60, 60)
        w1 = [v, (-60, 60), (-60, -60), (60, -60)]
        w2 = [v, (190, 60), (190, 190), (60, 190)]
        joined = winding_number(ParameterPath(tuple(w1 + w2), closed=True))
        parts = winding_number(ParameterPath(tuple(w1), closed=True)) + winding_number(
            ParameterPath(tuple(w2), closed=True)
        )
        assert joined == parts == 0
        assert winding_number(ParameterPath(tuple(w2), closed=True)) == 1

    def test_matches_dense_oracle(self):
        verts = [(-10, -10), (10, -10), (10, 10), (-10, 10)]
        assert dense_total(verts, closed=True) / 360 * SIGN_CONVENTION == pytest.approx(-1, abs=1e-9)

    def test_open_path_rejected(self):
        with pytest.raises(ConfigError):
            winding_number(ParameterPath(((0, 0), (1, 1))))

    def test_non_integer_winding_flagged(self, monkeypatch):
        import phasecart.phase as ph

        real = ph.trace_path

        def skewed(path, config):
            tr = real(path, config)
            return ph.PhaseTrace(tr.path, tr.samples, tr.total_phase_deg + 1.0, tr.min_contrast)

        monkeypatch.setattr(ph, "trace_path", skewed)
        with pytest.raises(ConsistencyError):
            winding_number(rectangle_path(-10, 10, -10, 10))


class TestDynamicalGeometric:
    def test_transverse_region(self):
        assert dynamical_phase([Region((1, 0, 0), 123.0)], SPIN_UP) == 0

    def test_z_region(self):
        assert dynamical_phase([Region((0, 0, 1), 100.0)], SPIN_UP) == pytest.approx(-50, abs=1e-12)

    def test_ideal_dual_flipper_has_no_dynamical_phase(self):
        for dbeta in (-40, 0, 17, 40):
            az = math.radians(90 + dbeta)
            regions = [Region((1, 0, 0), 180.0), Region((math.cos(az), math.sin(az), 0), 180.0)]
            assert abs(dynamical_phase(regions, SPIN_UP)) < 1e-12

    def test_z_region_is_not_geometric(self):
        regions = [Region((0, 0, 1), 100.0)]
        assert total_phase(regions, SPIN_UP) == pytest.approx(-50, abs=1e-9)
        assert geometric_phase(regions, SPIN_UP) == pytest.approx(0, abs=1e-9)

    def test_spin_one_z_region(self):
        state = SpinState.basis(1, 1)
        assert dynamical_phase([Region((0, 0, 1), 250.0)], state) == pytest.approx(-250, abs=1e-12)
        assert geometric_phase([Region((0, 0, 1), 250.0)], state) == pytest.approx(0, abs=1e-9)

    def test_full_flip_from_pole_is_singular(self):
        with pytest.raises(SingularPathError):
            geometric_phase([Region((1, 0, 0), 180.0)], SPIN_UP)

    def test_noncyclic_geometric_phase(self):
        # |+z> turned about x by 90 then about z by 90: the closed form for the
        # Pancharatnam phase is arg(cos45 * e^{-i45}) = -45 and <J.n> of the
        # entry states is 0 then 0, so everything is geometric.
        regions = [Region((1, 0, 0), 90.0), Region((0, 0, 1), 90.0)]
        assert dynamical_phase(regions, SPIN_UP) == pytest.approx(0, abs=1e-12)
        assert geometric_phase(regions, SPIN_UP) == pytest.approx(-45, abs=1e-9)

    def test_needs_enough_substeps(self):
        with pytest.raises(ConfigError):
            total_phase([Region((0, 0, 1), 10.0)], SPIN_UP, substeps=10)
