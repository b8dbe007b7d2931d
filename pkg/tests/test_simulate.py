import math

import numpy as np
import pytest

from jumpest import model as mdl
from jumpest.simulate import (
    _micro_grid,
    dump_path_csv,
    fractional_parts,
    replicate_rng,
    sample_jump_times,
    sample_marks,
    simulate_path,
    simulate_replicate,
)


def _fields(p):
    return (p.obs, p.jump_times, p.marks, p.grid_index, p.frac,
            p.x_pre, p.x_post, p.jumps, p.w_before, p.w_after)


class TestSampling:
    def test_fixed_k_zero(self):
        assert sample_jump_times(replicate_rng(0, 0), mdl.FixedK(0)).size == 0

    def test_fixed_k_sorted_in_unit_interval(self):
        for r in range(50):
            t = sample_jump_times(replicate_rng(1, r), mdl.FixedK(2))
            assert t.size == 2 and 0.0 < t[0] < t[1] < 1.0

    def test_poisson_count_mean(self):
        rng = replicate_rng(2, 0)
        counts = [sample_jump_times(rng, mdl.PoissonRate(3.0)).size for _ in range(100_000)]
        assert np.mean(counts) == pytest.approx(3.0, abs=0.05)

    def test_uniform_mark_mean(self):
        marks = sample_marks(replicate_rng(3, 0), mdl.UniformInterval(0.5, 1.5), 100_000)
        assert marks.mean() == pytest.approx(1.0, abs=0.01)

    def test_gaussian_shifted_floor(self):
        marks = sample_marks(replicate_rng(4, 0), mdl.GaussianShifted(1.0, 0.2, 0.05), 50_000)
        assert np.all(np.abs(marks) >= 0.05)

    def test_gaussian_shifted_preserves_sign(self):
        marks = sample_marks(replicate_rng(5, 0), mdl.GaussianShifted(0.0, 0.01, 0.5), 10_000)
        assert set(np.unique(np.abs(marks))) == {0.5}
        assert 0.4 < np.mean(marks > 0) < 0.6

    def test_zero_marks(self):
        assert sample_marks(replicate_rng(0, 0), mdl.UniformInterval(0.5, 1.5), 0).size == 0


class TestFractionalParts:
    @pytest.mark.parametrize("t, n, idx, frac", [
        (0.5, 10, 5, 0.0),
        (0.37, 10, 3, 0.7),
        (0.999, 100, 99, 0.9),
    ])
    def test_examples(self, t, n, idx, frac):
        i, f = fractional_parts([t], n)
        assert i[0] == idx
        assert f[0] == pytest.approx(frac, abs=1e-9)

    def test_range_invariant(self):
        rng = np.random.default_rng(6)
        for n in (7, 100, 9999):
            t = np.sort(rng.uniform(1e-9, 1 - 1e-9, 200))
            i, f = fractional_parts(t, n)
            assert np.all((0 <= i) & (i <= n - 1))
            assert np.all((0.0 <= f) & (f < 1.0))
            assert np.all(np.abs(n * t - (i + f)) < 1e-9 * n)


class TestSimulatePath:
    def test_pure_diffusion_no_jump_fields(self):
        m = mdl.compound_poisson_model()
        p = simulate_path(m, [], [], replicate_rng(0, 0), 50)
        assert p.k == 0 and p.jumps.size == 0 and p.obs.size == 51

    def test_deterministic_skeleton(self):
        m = mdl.ModelSpec(drift=mdl.ConstantDrift(0.0), diffusion=mdl.ConstantDiffusion(0.0), x0=1.0)
        p = simulate_path(m, [0.5], [2.0], replicate_rng(0, 0), 10)
        assert np.array_equal(p.obs[:6], np.full(6, 1.0))
        assert np.array_equal(p.obs[6:], np.full(5, 3.0))
        assert p.x_pre[0] == 1.0 and p.x_post[0] == 3.0 and p.jumps[0] == 2.0

    def test_increment_variance(self):
        m = mdl.fixed_k_model(k=0, sigma=1.0)
        incs = []
        for r in range(1000):
            p = simulate_replicate(m, 100, 20, 7, r)
            incs.append(np.diff(p.obs))
        v = np.var(np.concatenate(incs))
        assert v == pytest.approx(1.0 / 100, rel=0.02)

    def test_reproducible_bitwise(self):
        for m in (mdl.compound_poisson_model(), mdl.bounded_sine_model(), mdl.modulated_model(k=2)):
            a = simulate_replicate(m, 200, 5, 42, 3)
            b = simulate_replicate(m, 200, 5, 42, 3)
            for fa, fb in zip(_fields(a), _fields(b)):
                assert np.array_equal(fa, fb)

    def test_streams_differ_across_replicates(self):
        m = mdl.compound_poisson_model()
        a = simulate_replicate(m, 100, 1, 42, 0)
        b = simulate_replicate(m, 100, 1, 42, 1)
        assert not np.array_equal(a.obs, b.obs)

    def test_martingale_mean(self):
        m = mdl.fixed_k_model(k=0, sigma=1.0)
        ends = np.array([simulate_replicate(m, 50, 1, 11, r).obs[-1] for r in range(10_000)])
        se = ends.std(ddof=1) / math.sqrt(ends.size)
        assert abs(ends.mean()) <= 3 * se

    def test_ito_isometry(self):
        m = mdl.fixed_k_model(k=0, sigma=1.3)
        ends = np.array([simulate_replicate(m, 50, 1, 12, r).obs[-1] for r in range(10_000)])
        assert np.var(ends, ddof=1) == pytest.approx(1.3 ** 2, rel=0.03)

    def test_jump_identities(self):
        for m in (mdl.compound_poisson_model(), mdl.modulated_model(k=3)):
            for r in range(30):
                p = simulate_replicate(m, 500, 4, 13, r)
                for k in range(p.k):
                    assert p.x_post[k] == p.x_pre[k] + p.jumps[k]
                    assert p.jumps[k] == mdl.eval_jump(m, p.x_pre[k], p.marks[k])
                gi, fr = fractional_parts(p.jump_times, p.n)
                assert np.array_equal(gi, p.grid_index)
                assert np.array_equal(fr, p.frac)
                assert np.all(np.isfinite(p.obs))

    def test_bridge_fragments_partition_cell_increment(self):
        # replay the walker's draws to recover the per-step Brownian increments
        m = mdl.bounded_sine_model()
        for r in range(20):
            p = simulate_replicate(m, 300, 6, 14, r)
            rng = replicate_rng(14, r)
            T = sample_jump_times(rng, m.jump_time_law)
            marks = sample_marks(rng, m.mark_law, T.size)
            assert np.array_equal(T, p.jump_times) and np.array_equal(marks, p.marks)
            dt, _, _, base_pos, jump_pos = _micro_grid(300, T, 6)
            z = rng.standard_normal(dt.size)
            w_inc = np.sqrt(dt) * z
            for k in range(p.k):
                cs = int(base_pos[p.grid_index[k]]) * 6
                ce = int(base_pos[p.grid_index[k] + 1]) * 6
                jb = int(jump_pos[k]) * 6
                total = p.w_before[k] + p.w_after[k]
                assert total == pytest.approx(float(np.sum(w_inc[cs:ce])), abs=1e-12)

    def test_bridge_exact_for_constant_coefficients(self):
        m = mdl.compound_poisson_model(sigma=1.0, b0=0.25)
        for r in range(40):
            p = simulate_replicate(m, 200, 20, 15, r)
            if p.has_multijump_cell:
                continue
            for k in range(p.k):
                ik = p.grid_index[k]
                cell_inc = p.obs[ik + 1] - p.obs[ik]
                rebuilt = 0.25 / 200 + 1.0 * (p.w_before[k] + p.w_after[k]) + p.jumps[k]
                assert cell_inc == pytest.approx(rebuilt, abs=1e-12)

    def test_multiple_jumps_in_one_cell(self):
        m = mdl.compound_poisson_model()
        p = simulate_path(m, [0.512, 0.518], [1.0, 0.7], replicate_rng(0, 0), 100)
        assert p.has_multijump_cell
        assert p.grid_index[0] == p.grid_index[1] == 51
        assert p.x_post[0] == p.x_pre[0] + 1.0
        assert p.x_post[1] == p.x_pre[1] + 0.7
        # fragments of the second jump span the whole cell, so they rebuild its increment
        cell_inc = p.obs[52] - p.obs[51]
        assert cell_inc == pytest.approx(1.7 + p.w_before[1] + p.w_after[1], abs=1e-12)

    def test_jump_exactly_on_grid_point(self):
        m = mdl.compound_poisson_model()
        p = simulate_path(m, [0.5], [1.0], replicate_rng(1, 0), 10)
        assert p.grid_index[0] == 5 and p.frac[0] == 0.0
        assert p.w_before[0] == 0.0
        assert p.obs[5] == p.x_pre[0]
        assert p.obs[6] - p.obs[5] == pytest.approx(1.0 + p.w_after[0], abs=1e-12)

    def test_rejects_bad_jump_times(self):
        m = mdl.compound_poisson_model()
        rng = replicate_rng(0, 0)
        with pytest.raises(ValueError):
            simulate_path(m, [0.6, 0.4], [1.0, 1.0], rng, 10)
        with pytest.raises(ValueError):
            simulate_path(m, [0.4, 0.4], [1.0, 1.0], rng, 10)
        with pytest.raises(ValueError):
            simulate_path(m, [1.2], [1.0], rng, 10)
        with pytest.raises(ValueError):
            simulate_path(m, [0.4], [1.0, 2.0], rng, 10)
        with pytest.raises(ValueError):
            simulate_path(m, [0.4], [1.0], rng, 0)
        with pytest.raises(ValueError):
            simulate_path(m, [0.4], [1.0], rng, 10, substeps=0)


class TestDump:
    def test_csv_and_sidecar(self, tmp_path):
        m = mdl.compound_poisson_model()
        p = simulate_replicate(m, 20, 1, 9, 0)
        out = tmp_path / "path.csv"
        sidecar = dump_path_csv(p, str(out))
        lines = out.read_text().splitlines()
        assert lines[0] == "i,t,X"
        assert len(lines) == 22
        import json
        meta = json.loads(open(sidecar).read())
        assert meta["n"] == 20
        assert len(meta["jump_times"]) == p.k
