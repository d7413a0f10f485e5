"""Syndrome-driven scaled min-sum belief propagation on a Tanner graph.

The flooding schedule runs one full check-node sweep, one full variable-node
sweep, then a hard decision and syndrome consistency test per iteration.
``run_bp`` is the kernel every decoder in this package is built on; the
message update rules are also exposed as standalone functions
(``check_message``, ``variable_message``, ``output_llr_and_decide``) so the
compiled sweep can be cross-checked against a straightforward reference.

Conventions, applied everywhere for determinism:
  * sign(0) = +1, for messages and for the hard decision;
  * message and output-LLR magnitudes are clipped to the saturation constant;
  * a non-convergent run reports an all-zero error estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .gf2 import SparseBitMatrix, as_bits

DEFAULT_SATURATION = 25.0


@dataclass(frozen=True)
class BpConfig:
    """Knobs for one BP instance.

    ``alpha=None`` selects the adaptive scaling schedule
    alpha(k) = 1 - 2^(-k) with k counted from 1; a float pins it.
    ``rng_seed`` is reserved for API symmetry with the stochastic decoders:
    ``run_bp`` itself is fully deterministic.
    """

    max_iters: int = 50
    alpha: float | None = None
    saturation: float = DEFAULT_SATURATION
    rng_seed: int = 0
    early_stop: bool = True

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.saturation > 0:
            raise ValueError("saturation must be positive")

    def alphas(self) -> np.ndarray:
        k = np.arange(1, self.max_iters + 1, dtype=np.float64)
        if self.alpha is None:
            return 1.0 - np.exp2(-k)
        return np.full(self.max_iters, float(self.alpha))


@dataclass
class BpOutcome:
    estimate: np.ndarray      # uint8, all-zero unless converged
    out_llr: np.ndarray       # float64 output LLRs from the last iteration
    converged: bool
    iterations_used: int


class TannerGraph:
    """Edge-indexed adjacency of a parity-check matrix.

    Edges are numbered in check-major order; ``var_edge`` lists the same
    edge ids grouped by variable. The structure is immutable after
    construction, so any number of BP instances may share it.
    """

    def __init__(self, H: SparseBitMatrix):
        self.n_checks = H.rows
        self.n_vars = H.cols
        deg = np.zeros(H.rows, dtype=np.int64)
        for i, sup in enumerate(H.row_support):
            deg[i] = sup.size
        self.chk_ptr = np.zeros(H.rows + 1, dtype=np.int64)
        np.cumsum(deg, out=self.chk_ptr[1:])
        self.n_edges = int(self.chk_ptr[-1])
        self.chk_var = np.empty(self.n_edges, dtype=np.int32)
        for i, sup in enumerate(H.row_support):
            self.chk_var[self.chk_ptr[i]:self.chk_ptr[i + 1]] = sup
        # edges regrouped by variable
        order = np.argsort(self.chk_var, kind="stable")
        vdeg = np.bincount(self.chk_var, minlength=self.n_vars)
        self.var_ptr = np.zeros(self.n_vars + 1, dtype=np.int64)
        np.cumsum(vdeg, out=self.var_ptr[1:])
        self.var_edge = order.astype(np.int32)


def check_message(incoming, s_bit, alpha, saturation=DEFAULT_SATURATION):
    """Scaled min-sum check-to-variable update.

    *incoming* holds the variable messages from every neighbor except the
    target. An empty list (degree-1 check) yields the strongest possible
    belief, +/-saturation, rather than crashing on an empty min.
    """
    incoming = list(incoming)
    syn_sign = -1.0 if s_bit else 1.0
    if not incoming:
        return syn_sign * saturation
    sign = 1.0
    for m in incoming:
        if m < 0:
            sign = -sign
    return syn_sign * alpha * sign * min(abs(m) for m in incoming)


def variable_message(p_in, incoming_other, saturation=DEFAULT_SATURATION):
    """Variable-to-check update: prior plus extrinsic sum, clipped."""
    total = p_in + sum(incoming_other)
    return float(np.clip(total, -saturation, saturation))


def output_llr_and_decide(p_in, incoming_all, saturation=DEFAULT_SATURATION):
    """Output LLR and hard decision; p_out = 0 ties to no-error."""
    p_out = float(np.clip(p_in + sum(incoming_all), -saturation, saturation))
    return p_out, 1 if p_out < 0 else 0


@njit(cache=True)
def _min_sum_flood(chk_ptr, chk_var, var_ptr, var_edge, s, p_in, alphas, sat, early_stop):
    m = chk_ptr.shape[0] - 1
    n = var_ptr.shape[0] - 1
    n_edges = chk_var.shape[0]

    m_c2v = np.zeros(n_edges, dtype=np.float64)
    m_v2c = np.empty(n_edges, dtype=np.float64)
    for v in range(n):
        for idx in range(var_ptr[v], var_ptr[v + 1]):
            m_v2c[var_edge[idx]] = p_in[v]

    p_out = p_in.copy()
    est = np.zeros(n, dtype=np.uint8)
    n_iters = alphas.shape[0]

    for it in range(n_iters):
        alpha = alphas[it]

        for c in range(m):
            lo = chk_ptr[c]
            hi = chk_ptr[c + 1]
            syn_sign = -1.0 if s[c] == 1 else 1.0
            if hi == lo:
                continue
            if hi - lo == 1:
                # no extrinsic inputs: emit the strongest belief
                m_c2v[lo] = syn_sign * sat
                continue
            min1 = np.inf
            min2 = np.inf
            arg1 = -1
            negs = 0
            for e in range(lo, hi):
                mv = m_v2c[e]
                if mv < 0.0:
                    negs += 1
                a = -mv if mv < 0.0 else mv
                if a < min1:
                    min2 = min1
                    min1 = a
                    arg1 = e
                elif a < min2:
                    min2 = a
            prod = syn_sign if (negs & 1) == 0 else -syn_sign
            for e in range(lo, hi):
                sign_excl = -prod if m_v2c[e] < 0.0 else prod
                mag = min2 if e == arg1 else min1
                m_c2v[e] = alpha * sign_excl * mag

        for v in range(n):
            tot = p_in[v]
            for idx in range(var_ptr[v], var_ptr[v + 1]):
                tot += m_c2v[var_edge[idx]]
            po = tot
            if po > sat:
                po = sat
            elif po < -sat:
                po = -sat
            p_out[v] = po
            est[v] = 1 if po < 0.0 else 0
            for idx in range(var_ptr[v], var_ptr[v + 1]):
                e = var_edge[idx]
                mv = tot - m_c2v[e]
                if mv > sat:
                    mv = sat
                elif mv < -sat:
                    mv = -sat
                m_v2c[e] = mv

        if early_stop:
            consistent = True
            for c in range(m):
                par = 0
                for e in range(chk_ptr[c], chk_ptr[c + 1]):
                    par ^= est[chk_var[e]]
                if par != s[c]:
                    consistent = False
                    break
            if consistent:
                return est, p_out, True, it + 1

    consistent = True
    for c in range(m):
        par = 0
        for e in range(chk_ptr[c], chk_ptr[c + 1]):
            par ^= est[chk_var[e]]
        if par != s[c]:
            consistent = False
            break
    return est, p_out, consistent, n_iters


def run_bp(H, s, p_in, cfg: BpConfig) -> BpOutcome:
    """One BP instance against syndrome *s* with input LLRs *p_in*.

    *H* may be a SparseBitMatrix or a prebuilt TannerGraph. Returns at the
    first iteration whose hard decision reproduces *s*; an all-zero
    syndrome short-circuits with zero iterations consumed.
    """
    graph = H if isinstance(H, TannerGraph) else TannerGraph(H)
    s = as_bits(s, graph.n_checks)
    p_in = np.asarray(p_in, dtype=np.float64)
    if p_in.shape != (graph.n_vars,):
        raise ValueError(f"expected {graph.n_vars} input LLRs, got shape {p_in.shape}")

    if not s.any():
        return BpOutcome(
            estimate=np.zeros(graph.n_vars, dtype=np.uint8),
            out_llr=p_in.copy(),
            converged=True,
            iterations_used=0,
        )

    est, p_out, converged, iters = _min_sum_flood(
        graph.chk_ptr,
        graph.chk_var,
        graph.var_ptr,
        graph.var_edge,
        s,
        p_in,
        cfg.alphas(),
        float(cfg.saturation),
        cfg.early_stop,
    )
    if not converged:
        est = np.zeros(graph.n_vars, dtype=np.uint8)
    return BpOutcome(estimate=est, out_llr=p_out, converged=bool(converged), iterations_used=int(iters))


def prior_llr(p: float) -> float:
    """Channel LLR log((1-p)/p) for an error probability p."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"prior probability must be in (0, 1), got {p}")
    return float(np.log((1.0 - p) / p))
