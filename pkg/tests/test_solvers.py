import numpy as np
import pytest

import sourcecond as sc
from sourcecond.errors import ConfigurationError, InputError


class TestSolveConfig:
    def test_validation(self):
        with pytest.raises(ConfigurationError):
            sc.SolveConfig(max_iters=0)
        with pytest.raises(ConfigurationError):
            sc.SolveConfig(grad_tol=-1.0)
        with pytest.raises(ConfigurationError):
            sc.SolveConfig(tau=0.0)
        with pytest.raises(ConfigurationError):
            sc.SolveConfig(sigma=-0.1)


class TestSourceGradient:
    def test_identity_example(self):
        fwd = sc.IdentityMap((2,))
        g = sc.source_gradient(np.zeros(2), np.array([1.0, 0.0]), fwd,
                               sc.ProxFunctional("l1"))
        assert np.allclose(g, [-1.0, 0.0])

    def test_zero_at_fixed_point(self):
        fwd = sc.IdentityMap((2,))
        u = np.array([1.0, 0.0])
        v = np.array([1.0, 0.5])  # prox(u + v) = u
        g = sc.source_gradient(v, u, fwd, sc.ProxFunctional("l1"))
        assert np.max(np.abs(g)) == 0.0

    def test_matches_finite_differences(self, rng):
        prox = sc.ProxFunctional("l1")
        h = 1e-6
        for _ in range(20):
            m = sc.MatrixMap(rng.standard_normal((6, 4)))
            u = rng.standard_normal(4)
            v = rng.standard_normal(6)
            g = sc.source_gradient(v, u, m, prox)
            fd = np.zeros(6)
            for i in range(6):
                e = np.zeros(6)
                e[i] = h
                fd[i] = (sc.source_objective(v + e, u, m, prox)
                         - sc.source_objective(v - e, u, m, prox)) / (2 * h)
            assert np.linalg.norm(fd - g) <= 1e-5 * max(np.linalg.norm(g), 1e-12)

    def test_shape_mismatch(self):
        fwd = sc.IdentityMap((3,))
        with pytest.raises(InputError):
            sc.source_gradient(np.zeros(2), np.zeros(3), fwd, sc.ProxFunctional("l1"))


class TestBregmanLoss:
    def test_nonnegative_and_zero_at_certificate(self, rng):
        prox = sc.ProxFunctional("l1")
        u = np.array([1.0, 0.0])
        assert sc.bregman_loss(u, u + np.array([1.0, 0.2]), prox) <= 1e-15
        for _ in range(20):
            p = rng.standard_normal(2) * 3
            assert sc.bregman_loss(u, p, prox) >= -1e-12

    def test_convexity_probe(self, rng):
        fwd = sc.MatrixMap(rng.standard_normal((5, 3)))
        u = rng.standard_normal(3)
        prox = sc.ProxFunctional("l1")
        for _ in range(25):
            v1 = rng.standard_normal(5)
            v2 = rng.standard_normal(5)
            lam = rng.uniform()
            mix = sc.source_objective(lam * v1 + (1 - lam) * v2, u, fwd, prox)
            bound = (lam * sc.source_objective(v1, u, fwd, prox)
                     + (1 - lam) * sc.source_objective(v2, u, fwd, prox))
            assert mix <= bound + 1e-10


class TestSolveSourceGd:
    def test_identity_converges_fast(self):
        fwd = sc.IdentityMap((2,))
        cfg = sc.SolveConfig(max_iters=100, grad_tol=1e-12, record_every=1)
        rep = sc.solve_source_gd(np.array([1.0, 0.0]), fwd, sc.ProxFunctional("l1"), cfg)
        assert rep.termination == "tolerance"
        assert rep.iterations <= 5
        assert rep.final_grad_norm < 1e-12
        assert rep.v[0] == pytest.approx(1.0, abs=1e-12)
        assert abs(rep.v[1]) <= 1.0

    def test_step_size_guard(self):
        fwd = sc.MatrixMap(np.diag([2.0, 1.0]))
        cfg = sc.SolveConfig(max_iters=10, tau=1.0)  # 1/||K||^2 = 0.25
        with pytest.raises(ConfigurationError):
            sc.solve_source_gd(np.ones(2), fwd, sc.ProxFunctional("l1"), cfg)

    def test_fixed_point_soundness(self, rng):
        fwd = sc.MatrixMap(rng.standard_normal((5, 3)))
        u = sc.soft_threshold(rng.standard_normal(3), 0.2)
        prox = sc.ProxFunctional("l1")
        cfg = sc.SolveConfig(max_iters=50_000, grad_tol=1e-10, record_every=4)
        rep = sc.solve_source_gd(u, fwd, prox, cfg)
        assert rep.termination == "tolerance"
        re_eval = np.linalg.norm(sc.source_gradient(rep.v, u, fwd, prox))
        assert re_eval == pytest.approx(rep.final_grad_norm, abs=1e-12)
        assert rep.v_norm == pytest.approx(np.linalg.norm(rep.v), abs=1e-12)
        assert rep.history[-1][1] == rep.final_grad_norm

    def test_plain_descent_residual_eventually_decreasing(self, rng):
        fwd = sc.MatrixMap(rng.standard_normal((4, 6)))
        u = sc.soft_threshold(rng.standard_normal(6), 0.5)
        cfg = sc.SolveConfig(max_iters=400, grad_tol=0.0, record_every=1)
        rep = sc.solve_source_gd(u, fwd, sc.ProxFunctional("l1"), cfg, accelerate=False)
        norms = [h[1] for h in rep.history]
        tail = norms[len(norms) // 2:]
        assert all(b <= a * (1 + 1e-10) for a, b in zip(tail, tail[1:]))

    def test_accelerated_objective_decreases_from_start(self, rng):
        fwd = sc.MatrixMap(rng.standard_normal((4, 6)))
        u = sc.soft_threshold(rng.standard_normal(6), 0.5)
        prox = sc.ProxFunctional("l1")
        values = []
        cfg = sc.SolveConfig(max_iters=300, grad_tol=0.0, record_every=10)
        sc.solve_source_gd(u, fwd, prox, cfg,
                           monitor=lambda k, v: values.append(
                               sc.source_objective(v, u, fwd, prox)))
        assert values[-1] <= values[0]
        assert max(values[len(values) // 2:]) <= values[0] + 1e-12


class TestSolveRangeCd:
    def test_constant_image_is_immediate(self):
        u = np.full((8, 8), 0.4)
        rep = sc.solve_range_cd(u, sc.IdentityMap(u.shape), sc.grad2(8, 8),
                                sc.ProxFunctional("group_l21"),
                                sc.SolveConfig(max_iters=10, grad_tol=0.0))
        assert rep.termination == "tolerance"
        assert rep.iterations == 0
        assert not np.any(rep.v) and not np.any(rep.q)

    def test_denoising_certificate(self, denoise_cert):
        rep = denoise_cert["report"]
        assert rep.termination == "tolerance"
        assert rep.final_grad_norm <= 1e-10
        assert denoise_cert["check"].passed

    def test_step_size_guards(self):
        u = np.zeros((8, 8))
        with pytest.raises(ConfigurationError):
            sc.solve_range_cd(u, sc.IdentityMap(u.shape), sc.grad2(8, 8),
                              sc.ProxFunctional("group_l21"),
                              sc.SolveConfig(max_iters=5, sigma=1.0 / 8.0))
        with pytest.raises(ConfigurationError):
            sc.solve_range_cd(u, sc.IdentityMap(u.shape), sc.grad2(8, 8),
                              sc.ProxFunctional("group_l21"),
                              sc.SolveConfig(max_iters=5, tau=1.5))

    def test_offset_field_shifts_fixed_point(self, rng):
        # J(u) = H(Au + b): the dual field must certify membership at Au + b
        u = np.zeros((8, 8))
        a = sc.grad2(8, 8)
        b = 0.05 * rng.standard_normal(a.codomain_shape)
        rep = sc.solve_range_cd(u, sc.IdentityMap(u.shape), a,
                                sc.ProxFunctional("group_l21"),
                                sc.SolveConfig(max_iters=50_000, grad_tol=1e-11), b=b)
        assert rep.termination == "tolerance"
        prox_h = sc.ProxFunctional("group_l21")
        target = a.apply(u) + b
        assert np.max(np.abs(prox_h.prox(target + rep.q) - target)) < 1e-9

    def test_fixed_point_soundness(self, denoise_cert):
        from sourcecond.solvers import _range_cd_metric

        rep = denoise_cert["report"]
        a_field = denoise_cert["grad_op"].apply(denoise_cert["u"])
        metric = _range_cd_metric(rep.v, rep.q, a_field, denoise_cert["fwd"],
                                  denoise_cert["grad_op"], sc.ProxFunctional("group_l21"))
        assert metric == pytest.approx(rep.final_grad_norm, abs=1e-12)


class TestSolvePalm:
    def test_huge_weight_kills_certificate(self, phantom64):
        a = sc.grad2(64, 64)
        rep = sc.solve_palm(phantom64, a, sc.ProxFunctional("group_l21"), 1e6,
                            sc.SolveConfig(max_iters=20, grad_tol=0.0))
        assert rep.nnz == 0
        assert not np.any(rep.v)

    def test_invalid_weight(self, phantom64):
        a = sc.grad2(64, 64)
        with pytest.raises(ConfigurationError):
            sc.solve_palm(phantom64, a, sc.ProxFunctional("group_l21"), 0.0,
                          sc.SolveConfig(max_iters=5))

    def test_mask_count_monotone_in_weight(self):
        from sourcecond.experiments import shepp_logan

        u = shepp_logan(32)
        a = sc.grad2(32, 32)
        counts = []
        for beta in (0.02, 0.06, 0.1, 0.2, 0.5):
            rep = sc.solve_palm(u, a, sc.ProxFunctional("group_l21"), beta,
                                sc.SolveConfig(max_iters=300, grad_tol=0.0,
                                               record_every=100))
            counts.append(sc.extract_mask(rep.v).count)
        assert all(x >= y for x, y in zip(counts, counts[1:]))

    def test_certificate_is_complex_and_dc_free(self, phantom64):
        a = sc.grad2(64, 64)
        rep = sc.solve_palm(phantom64, a, sc.ProxFunctional("group_l21"), 0.1,
                            sc.SolveConfig(max_iters=50, grad_tol=0.0, record_every=25))
        assert np.iscomplexobj(rep.v)
        # zero-mean dual fields cannot generate a zero-frequency component
        assert rep.v[0, 0] == 0.0


class TestExtractMask:
    def test_all_zero_keeps_dc_only(self):
        mask = sc.extract_mask(np.zeros((6, 6), dtype=complex))
        assert mask.count == 1 and mask.grid[0, 0]

    def test_three_nonzeros_away_from_dc(self):
        vt = np.zeros((6, 6), dtype=complex)
        vt[1, 2] = 1.0
        vt[3, 3] = 1.0j
        vt[5, 0] = -2.0
        mask = sc.extract_mask(vt)
        assert mask.count == 4
        assert mask.grid[0, 0] and mask.grid[1, 2] and mask.grid[3, 3] and mask.grid[5, 0]


class TestRangeData:
    def test_small_alpha_limit(self, rng):
        fwd = sc.MatrixMap(rng.standard_normal((4, 3)))
        u = rng.standard_normal(3)
        v = rng.standard_normal(4)
        out = sc.range_data(u, fwd, v, 1e-300)
        assert np.allclose(out, fwd.apply(u))

    def test_shifts_by_scaled_certificate(self, rng):
        fwd = sc.IdentityMap((5,))
        u = rng.standard_normal(5)
        v = rng.standard_normal(5)
        assert np.allclose(sc.range_data(u, fwd, v, 0.5), u + 0.5 * v)

    def test_rejects_nonpositive_alpha(self, rng):
        fwd = sc.IdentityMap((5,))
        with pytest.raises(InputError):
            sc.range_data(np.zeros(5), fwd, np.zeros(5), 0.0)
