import numpy as np
import pytest

from firngas import oracle
from firngas.assembly import Tridiagonal, assemble_system
from firngas.errors import SingularMatrixError, TimeStepError, ValidationError
from firngas.mesh import build_uniform
from firngas.model import AtmosphereSeries, CoefficientProfile, RescaledContext
from firngas.solver import Trajectory, run, solve_tridiagonal, step

ONE = CoefficientProfile.constant(1.0)
DECAY = CoefficientProfile.affine(1.0, -1.0)


def ctx(mcoef=0.0, gcoef=1.0, fcoef=1.0):
    return RescaledContext(T_e=1.0, z_F=1.0, mcoef=mcoef, gcoef=gcoef, fcoef=fcoef)


class TestSolveTridiagonal:
    def test_identity(self):
        band = Tridiagonal(np.zeros(2), np.ones(3), np.zeros(2))
        rhs = np.array([1.0, -2.0, 3.0])
        np.testing.assert_allclose(solve_tridiagonal(band, rhs), rhs)

    def test_hand_elimination(self):
        band = Tridiagonal([1.0], [2.0, 2.0], [1.0])
        np.testing.assert_allclose(solve_tridiagonal(band, [3.0, 3.0]),
                                   [1.0, 1.0], atol=1e-14)

    def test_residual_on_random_dominant(self):
        rng = np.random.default_rng(42)
        for _ in range(30):
            m = rng.integers(2, 60)
            band = Tridiagonal(rng.normal(size=m - 1),
                               np.abs(rng.normal(size=m)) + 3.0,
                               rng.normal(size=m - 1))
            rhs = rng.normal(size=m)
            x = solve_tridiagonal(band, rhs)
            residual = np.max(np.abs(band.matvec(x) - rhs))
            assert residual <= 1e-10 * max(np.max(np.abs(rhs)), 1.0)

    def test_pivoted_fallback(self):
        # zero first pivot: unpivoted path fails, pivoted succeeds
        band = Tridiagonal([1.0], [0.0, 1.0], [1.0])
        x = solve_tridiagonal(band, np.array([1.0, 1.0]))
        np.testing.assert_allclose(band.matvec(x), [1.0, 1.0], atol=1e-12)

    def test_singular_carries_pivot_index(self):
        band = Tridiagonal([0.0], [0.0, 1.0], [0.0])
        with pytest.raises(SingularMatrixError) as info:
            solve_tridiagonal(band, np.array([1.0, 1.0]))
        assert info.value.pivot_index == 0

    def test_dimension_guard(self):
        band = Tridiagonal([1.0], [2.0, 2.0], [1.0])
        with pytest.raises(ValidationError):
            solve_tridiagonal(band, np.zeros(3))


class TestStep:
    def test_zero_forcing_preserves_zero(self):
        mesh = build_uniform(6)
        sys_ = assemble_system(mesh, np.ones(6), np.ones(6), ctx(), 0.01)
        lam = step(sys_, np.zeros(5), AtmosphereSeries.zero(), 0.0, 0.01)
        np.testing.assert_array_equal(lam, np.zeros(5))

    def test_matches_dense_oracle(self):
        mesh = build_uniform(4)
        sys_ = assemble_system(mesh, np.ones(4), np.ones(4), ctx(), 0.01)
        atm = AtmosphereSeries.ramp()
        lam0 = np.array([0.1, 0.2, 0.3])
        from firngas.assembly import assemble_rhs, assemble_v1, assemble_v3
        v1 = assemble_v1(0.0, 0.01, atm, mesh, sys_.f_samples)
        v3 = assemble_v3(0.01, atm, mesh, sys_.f_samples, sys_.d_samples, ctx())
        rhs = assemble_rhs(lam0, v1, v3, sys_.Mf, 1.0, 0.01)
        np.testing.assert_allclose(step(sys_, lam0, atm, 0.0, 0.01),
                                   oracle.dense_solve(sys_.V, rhs), atol=1e-12)

    def test_interval_must_match_system(self):
        mesh = build_uniform(4)
        sys_ = assemble_system(mesh, np.ones(4), np.ones(4), ctx(), 0.01)
        with pytest.raises(ValidationError):
            step(sys_, np.zeros(3), AtmosphereSeries.zero(), 0.0, 0.02)


class TestTrajectory:
    def test_reconstruct_full(self):
        mesh = build_uniform(3)
        traj = Trajectory(times=np.array([0.0, 1.0]),
                          interior=np.array([[0.0, 0.0], [0.3, 0.7]]),
                          boundary=np.array([0.0, 1.0]), mesh=mesh)
        np.testing.assert_array_equal(traj.reconstruct_full(0), [0.0, 0.0, 0.0])
        np.testing.assert_array_equal(traj.reconstruct_full(1), [1.0, 0.3, 0.7])
        with pytest.raises(ValidationError):
            traj.reconstruct_full(2)

    def test_must_start_from_zero(self):
        mesh = build_uniform(3)
        with pytest.raises(ValidationError):
            Trajectory(times=np.array([0.0, 1.0]),
                       interior=np.array([[0.1, 0.0], [0.3, 0.7]]),
                       boundary=np.array([0.0, 1.0]), mesh=mesh)

    def test_csv_stride(self, tmp_path):
        mesh = build_uniform(5)
        traj = run(mesh, ONE, ONE, ctx(), AtmosphereSeries.ramp(), dt=0.02)
        path = tmp_path / "traj.csv"
        traj.write_csv(path, stride=10)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("t,0,")
        # down-sampled but the final level is always kept
        assert lines[-1].split(",")[0] == "1"
        assert len(lines) < traj.n_levels + 1


class TestRun:
    def test_zero_forcing_exactly_zero(self):
        traj = run(build_uniform(11), ONE, ONE, ctx(), AtmosphereSeries.zero(), dt="auto")
        assert np.all(traj.interior == 0.0)
        assert np.all(traj.boundary == 0.0)

    def test_boundary_node_exact(self):
        atm = AtmosphereSeries.ramp()
        traj = run(build_uniform(11), ONE, ONE, ctx(), atm, dt="auto")
        for k in range(traj.n_levels):
            assert traj.reconstruct_full(k)[0] == atm(traj.times[k])

    def test_ramp_stays_bounded(self):
        traj = run(build_uniform(51), ONE, ONE, ctx(fcoef=0.1), AtmosphereSeries.ramp(),
                   dt=0.01)
        assert traj.interior.min() >= -0.05
        assert traj.interior.max() <= 1.05

    def test_linearity_in_forcing(self):
        mesh = build_uniform(21)
        base = run(mesh, ONE, ONE, ctx(), AtmosphereSeries.ramp(), dt="auto")
        scaled = run(mesh, ONE, ONE, ctx(), AtmosphereSeries.ramp().scaled(3.7), dt="auto")
        np.testing.assert_allclose(scaled.interior, 3.7 * base.interior,
                                   rtol=1e-12, atol=1e-14)

    def test_determinism(self):
        mesh = build_uniform(21)
        a = run(mesh, DECAY, DECAY, ctx(), AtmosphereSeries.ramp(), dt="auto")
        b = run(mesh, DECAY, DECAY, ctx(), AtmosphereSeries.ramp(), dt="auto")
        assert np.array_equal(a.interior, b.interior)
        assert np.array_equal(a.times, b.times)

    def test_times_land_on_one(self):
        traj = run(build_uniform(11), ONE, ONE, ctx(), AtmosphereSeries.ramp(), dt=0.003)
        assert traj.times[-1] == 1.0
        # interior steps are uniform
        np.testing.assert_allclose(np.diff(traj.times)[:-1], 0.003, rtol=1e-12)

    def test_dt_above_bound_rejected(self):
        with pytest.raises(TimeStepError) as info:
            run(build_uniform(11), ONE, ONE, ctx(), AtmosphereSeries.ramp(), dt=0.9)
        assert info.value.dt_max > 0.0

    def test_force_overrides_bound(self):
        traj = run(build_uniform(11), ONE, ONE, ctx(), AtmosphereSeries.ramp(),
                   dt=0.5, force=True)
        assert np.all(np.isfinite(traj.interior))

    def test_inadmissible_profile_rejected(self):
        bad = CoefficientProfile.constant(-1.0)
        from firngas.errors import AssumptionError
        with pytest.raises(AssumptionError):
            run(build_uniform(11), bad, ONE, ctx(), AtmosphereSeries.zero(), dt=0.01)

    def test_degenerate_pair_completes(self):
        traj = run(build_uniform(31), DECAY, DECAY, ctx(), AtmosphereSeries.ramp(),
                   dt="auto")
        assert np.all(np.isfinite(traj.interior))
        assert traj.times[-1] == 1.0
