import itertools

import numpy as np
import pytest

from qldpcdec.bp import (
    BpConfig,
    TannerGraph,
    check_message,
    output_llr_and_decide,
    prior_llr,
    run_bp,
    variable_message,
)
from qldpcdec.codes import build_builtin
from qldpcdec.gf2 import SparseBitMatrix, mat_vec


class TestCheckMessage:
    def test_single_message_pass_through(self):
        assert check_message([3.5], 0, 1.0) == pytest.approx(3.5)

    def test_syndrome_sign_flip(self):
        assert check_message([3.5], 1, 1.0) == pytest.approx(-3.5)

    def test_hand_evaluation(self):
        # (-1)^1 * 1 * sign(2.0)*sign(-5.0) * min(2.0, 5.0) = +2.0
        assert check_message([2.0, -5.0], 1, 1.0) == pytest.approx(2.0)

    def test_sign_zero_is_positive(self):
        assert check_message([0.0, -3.0], 0, 1.0) == pytest.approx(-0.0)
        assert check_message([0.0, 3.0], 0, 1.0, saturation=9.0) >= 0.0

    def test_degree_one_check_emits_saturation(self):
        assert check_message([], 0, 0.5, saturation=25.0) == 25.0
        assert check_message([], 1, 0.5, saturation=25.0) == -25.0

    def test_alpha_scales(self):
        assert check_message([4.0, 6.0], 0, 0.5) == pytest.approx(2.0)


class TestVariableMessage:
    def test_degree_one_variable(self):
        assert variable_message(2.2, []) == pytest.approx(2.2)

    def test_hand_sum(self):
        assert variable_message(2.2, [-1.0, 0.5]) == pytest.approx(1.7)

    def test_symmetric_cancellation(self):
        assert variable_message(0.0, [1.0, -1.0]) == 0.0

    def test_clipping(self):
        assert variable_message(20.0, [10.0, 10.0], saturation=25.0) == 25.0
        assert variable_message(-20.0, [-10.0], saturation=25.0) == -25.0


class TestOutputLlr:
    def test_hand_sum_with_decision(self):
        p_out, bit = output_llr_and_decide(2.2, [-1.0, 0.5, -3.0])
        assert p_out == pytest.approx(-1.3)
        assert bit == 1

    def test_prior_only(self):
        assert output_llr_and_decide(5.0, []) == (5.0, 0)

    def test_zero_ties_to_no_error(self):
        assert output_llr_and_decide(0.0, []) == (0.0, 0)


def reference_bp(H: SparseBitMatrix, s, p_in, cfg: BpConfig):
    """Flooding min-sum assembled from the three message-update functions."""
    dense = H.to_dense()
    m, n = dense.shape
    chk_n = [list(np.nonzero(dense[c])[0]) for c in range(m)]
    var_n = [list(np.nonzero(dense[:, v])[0]) for v in range(n)]
    if not np.any(s):
        return np.zeros(n, dtype=np.uint8), np.asarray(p_in, float).copy(), True, 0
    v2c = {(c, v): p_in[v] for c in range(m) for v in chk_n[c]}
    c2v = {}
    alphas = cfg.alphas()
    p_out = np.asarray(p_in, float).copy()
    est = np.zeros(n, dtype=np.uint8)
    for it in range(cfg.max_iters):
        for c in range(m):
            for v in chk_n[c]:
                incoming = [v2c[(c, vp)] for vp in chk_n[c] if vp != v]
                c2v[(c, v)] = check_message(incoming, s[c], alphas[it], cfg.saturation)
        for v in range(n):
            inc_all = [c2v[(c, v)] for c in var_n[v]]
            p_out[v], est[v] = output_llr_and_decide(p_in[v], inc_all, cfg.saturation)
            total = p_in[v] + sum(inc_all)
            for c in var_n[v]:
                extr = variable_message(p_in[v], [c2v[(cp, v)] for cp in var_n[v] if cp != c],
                                        cfg.saturation)
                fast = float(np.clip(total - c2v[(c, v)], -cfg.saturation, cfg.saturation))
                assert abs(extr - fast) < 1e-9
                v2c[(c, v)] = fast
        if np.array_equal(mat_vec(H, est), s):
            return est, p_out, True, it + 1
    return np.zeros(n, dtype=np.uint8), p_out, False, cfg.max_iters


def random_instance(rng, m=6, n=10, density=0.35):
    while True:
        dense = (rng.random((m, n)) < density).astype(np.uint8)
        if dense.sum(axis=1).min() >= 1 and dense.sum(axis=0).min() >= 1:
            return SparseBitMatrix.from_dense(dense)


class TestRunBp:
    def test_zero_syndrome_short_circuit(self):
        H = SparseBitMatrix.from_dense(np.array([[1, 1, 0], [0, 1, 1]], dtype=np.uint8))
        out = run_bp(H, [0, 0], np.full(3, 2.0), BpConfig(max_iters=10))
        assert out.converged and out.iterations_used == 0
        assert not out.estimate.any()
        assert np.array_equal(out.out_llr, np.full(3, 2.0))

    def test_gb48_single_error_one_iteration(self):
        code = build_builtin("gb-48")
        H = code.H_x
        prior = np.full(48, prior_llr(0.01))
        for j in [0, 17, 47]:
            e = np.zeros(48, dtype=np.uint8)
            e[j] = 1
            out = run_bp(H, mat_vec(H, e), prior, BpConfig(max_iters=50))
            assert out.converged and out.iterations_used == 1
            assert np.array_equal(out.estimate, e)

    def test_surface_single_error_two_iterations(self):
        code = build_builtin("surface-d7")
        H = code.H_x
        prior = np.full(85, prior_llr(0.01))
        for j in [0, 40, 84]:
            e = np.zeros(85, dtype=np.uint8)
            e[j] = 1
            out = run_bp(H, mat_vec(H, e), prior, BpConfig(max_iters=50))
            assert out.converged and out.iterations_used == 2
            assert np.array_equal(out.estimate, e)

    def test_converged_estimate_always_satisfies_syndrome(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            H = random_instance(rng)
            e = (rng.random(H.cols) < 0.25).astype(np.uint8)
            s = mat_vec(H, e)
            out = run_bp(H, s, np.full(H.cols, prior_llr(0.1)), BpConfig(max_iters=30))
            if out.converged:
                assert np.array_equal(mat_vec(H, out.estimate), s)
            else:
                assert not out.estimate.any()

    def test_deterministic(self):
        rng = np.random.default_rng(29)
        H = random_instance(rng, m=10, n=16)
        e = (rng.random(16) < 0.3).astype(np.uint8)
        s = mat_vec(H, e)
        p_in = rng.normal(2.0, 0.5, size=16)
        a = run_bp(H, s, p_in, BpConfig(max_iters=40))
        b = run_bp(H, s, p_in, BpConfig(max_iters=40))
        assert np.array_equal(a.estimate, b.estimate)
        assert np.array_equal(a.out_llr, b.out_llr)
        assert a.iterations_used == b.iterations_used

    def test_saturation_bounds_output(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            H = random_instance(rng, m=8, n=12, density=0.5)
            e = (rng.random(12) < 0.4).astype(np.uint8)
            out = run_bp(H, mat_vec(H, e), np.full(12, prior_llr(1e-6)),
                         BpConfig(max_iters=60, early_stop=False))
            assert np.all(np.abs(out.out_llr) <= 25.0 + 1e-12)

    def test_matches_reference_implementation(self):
        rng = np.random.default_rng(37)
        for case in range(60):
            H = random_instance(rng, m=rng.integers(3, 8), n=rng.integers(5, 12))
            e = (rng.random(H.cols) < 0.3).astype(np.uint8)
            s = mat_vec(H, e)
            p_in = rng.uniform(0.5, 4.0, size=H.cols)
            cfg = BpConfig(max_iters=25, alpha=None if case % 2 else 1.0)
            fast = run_bp(H, s, p_in, cfg)
            est, p_out, conv, iters = reference_bp(H, s, p_in, cfg)
            assert fast.converged == conv
            assert fast.iterations_used == iters
            assert np.array_equal(fast.estimate, est)
            assert np.allclose(fast.out_llr, p_out, atol=1e-9)


def random_tree(rng, max_vars=12):
    """Random bipartite tree; returns (H, diameter upper bound)."""
    n_vars = int(rng.integers(2, max_vars + 1))
    n_chks = int(rng.integers(1, n_vars + 1))
    edges = []
    vars_in = [0]
    chks_in = []
    pending_v = list(range(1, n_vars))
    pending_c = list(range(n_chks))
    rng.shuffle(pending_v)
    rng.shuffle(pending_c)
    while pending_v or pending_c:
        grow_check = pending_c and (not pending_v or rng.random() < 0.5 or not chks_in)
        if grow_check:
            c = pending_c.pop()
            v = vars_in[rng.integers(len(vars_in))]
            edges.append((c, v))
            chks_in.append(c)
        else:
            v = pending_v.pop()
            c = chks_in[rng.integers(len(chks_in))]
            edges.append((c, v))
            vars_in.append(v)
    dense = np.zeros((n_chks, n_vars), dtype=np.uint8)
    for c, v in edges:
        dense[c, v] = 1
    return SparseBitMatrix.from_dense(dense), n_vars + n_chks + 2


def brute_force_most_likely(H: SparseBitMatrix, s, llr):
    """Unique min of sum(e_i * llr_i) over configurations with H e = s."""
    n = H.cols
    best = None
    best_cost = np.inf
    tie = False
    for bits in itertools.product([0, 1], repeat=n):
        e = np.array(bits, dtype=np.uint8)
        if not np.array_equal(mat_vec(H, e), s):
            continue
        cost = float(np.dot(e, llr))
        if cost < best_cost - 1e-9:
            best, best_cost, tie = e, cost, False
        elif abs(cost - best_cost) <= 1e-9:
            tie = True
    return best, tie


def test_tree_exactness():
    """Min-sum with alpha=1 is exact max-product inference on trees."""
    rng = np.random.default_rng(41)
    checked = 0
    while checked < 50:
        H, diameter = random_tree(rng)
        priors_p = rng.uniform(0.2, 0.45, size=H.cols)
        llr = np.log((1 - priors_p) / priors_p)
        e_true = (rng.random(H.cols) < priors_p).astype(np.uint8)
        s = mat_vec(H, e_true)
        expected, tie = brute_force_most_likely(H, s, llr)
        if tie:
            continue
        out = run_bp(H, s, llr, BpConfig(max_iters=diameter, alpha=1.0, early_stop=False))
        assert out.converged
        assert np.array_equal(out.estimate, expected)
        checked += 1


def test_tanner_graph_structure_matches_matrix():
    rng = np.random.default_rng(43)
    H = random_instance(rng, m=5, n=9)
    g = TannerGraph(H)
    dense = H.to_dense()
    assert g.n_edges == int(dense.sum())
    for c in range(5):
        sup = g.chk_var[g.chk_ptr[c]:g.chk_ptr[c + 1]]
        assert sorted(sup.tolist()) == list(np.nonzero(dense[c])[0])
    seen = np.zeros(g.n_edges, dtype=bool)
    for v in range(9):
        for idx in range(g.var_ptr[v], g.var_ptr[v + 1]):
            e = g.var_edge[idx]
            assert g.chk_var[e] == v
            seen[e] = True
    assert seen.all()
