"""Five syndrome decoders behind one interface.

Each decoder consumes a CodeSector (check matrix + derived constants for
one Pauli error type), a syndrome, and a channel prior, and produces a
DecodeOutcome carrying the estimate, a success flag, the cumulative number
of BP iterations consumed across every BP instance it ran, and a
termination tag. ``success=True`` always implies the estimate reproduces
the input syndrome; that is asserted on every return path.

Decoders:
  * decode_bp              plain scaled min-sum BP
  * decode_bp_osd          BP with ordered-statistics post-processing
  * decode_bpgd            BP with guided decimation between instances
  * decode_relay           memory-chained BP legs with random mixing weights
  * decode_restart_belief  root BP plus guided branch searches with
                           distance- and defect-specific early termination
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import gf2
from .bp import DEFAULT_SATURATION, BpConfig, prior_llr, run_bp
from .codes import CodeSector, CssCode, default_eta
from .gf2 import SparseBitMatrix, as_bits

# termination tags
ROOT_CONVERGED = "root_converged"
DISTANCE_RULE = "distance_rule"
DEFECT_RULE = "defect_rule"
MIN_WEIGHT_FALLBACK = "min_weight_fallback"
EXHAUSTED = "exhausted"
OSD = "osd"
DECIMATION_COMPLETE = "decimation_complete"
RELAY_CANDIDATE = "relay_candidate"

ACCEPT_MW = "accept_mw"
ACCEPT_DEFECT = "accept_defect"
REJECT = "reject"


@dataclass
class DecodeOutcome:
    estimate: np.ndarray
    success: bool
    bp_iterations: int
    termination: str


@dataclass(frozen=True)
class RestartBeliefParams:
    t_root: int = 50
    t_branch: int = 10
    eta: int = 1
    p: float = 0.01
    saturation: float = DEFAULT_SATURATION
    alpha: float | None = None

    def __post_init__(self):
        if self.t_root < 1 or self.t_branch < 1:
            raise ValueError("t_root and t_branch must be >= 1")
        if self.eta < 1:
            raise ValueError("eta must be >= 1")


@dataclass(frozen=True)
class RelayParams:
    # one mixing weight per leg reproduces the published per-code iteration
    # counts; per-variable draws converge either far slower or far faster
    leg_count: int = 301
    t1: int = 80
    t2: int = 60
    candidates: int = 5
    gamma_c: float = -0.24
    gamma_w: float = 0.66
    rng_seed: int = 0
    gamma_per_variable: bool = False
    alpha: float | None = 1.0
    saturation: float = DEFAULT_SATURATION

    def __post_init__(self):
        if self.leg_count < 1:
            raise ValueError("leg_count must be >= 1")
        if self.t2 > self.t1:
            raise ValueError("subsequent legs must not run longer than the first (t2 <= t1)")
        if self.candidates < 1:
            raise ValueError("candidate quota must be >= 1")


@dataclass(frozen=True)
class OsdParams:
    order: int = 2
    lam: int = 10

    def __post_init__(self):
        if self.order not in (0, 1, 2):
            raise ValueError(f"OSD order must be 0, 1 or 2, got {self.order}")
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")


def _consistent(H_dense, estimate, s) -> bool:
    return np.array_equal((H_dense.astype(np.int32) @ estimate.astype(np.int32)) % 2, s)


def early_termination(estimate, s, t: int, xi: int) -> str:
    """Early-exit classification for a syndrome-consistent estimate.

    accept_mw: weight <= t, so no lighter explanation of s can exist.
    accept_defect: the syndrome alone proves the true error outweighs t
    (each error bit flips at most xi checks), so the estimate is kept even
    though it is heavy.
    """
    if int(np.sum(estimate)) <= t:
        return ACCEPT_MW
    if int(np.sum(s)) > t * xi:
        return ACCEPT_DEFECT
    return REJECT


def decode_bp(sector: CodeSector, s, p: float, cfg: BpConfig) -> DecodeOutcome:
    """Single BP instance with a uniform channel prior."""
    s = as_bits(s, sector.check_matrix.rows)
    p_in = np.full(sector.n, prior_llr(p))
    out = run_bp(sector.graph, s, p_in, cfg)
    if out.converged:
        assert _consistent(sector.check_matrix.to_dense(), out.estimate, s)
        return DecodeOutcome(out.estimate, True, out.iterations_used, ROOT_CONVERGED)
    return DecodeOutcome(out.estimate, False, out.iterations_used, EXHAUSTED)


# ---------------------------------------------------------------------------
# ordered statistics post-processing
# ---------------------------------------------------------------------------

def osd_postprocess(H_x: SparseBitMatrix, s, out_llr, params: OsdParams) -> np.ndarray:
    """Syndrome-consistent estimate from BP soft output.

    Columns are taken in ascending output-LLR order (most likely erroneous
    first) and greedily accepted while they grow the rank; the accepted set
    is solved exactly, the rejected set holds the trial patterns of the
    higher orders. Order 1 tries every single rejected position; order 2
    additionally tries every pair within the first ``lam`` rejected
    positions. The lightest candidate wins, ties to the first found.
    """
    s = as_bits(s, H_x.rows)
    out_llr = np.asarray(out_llr, dtype=np.float64)
    n = H_x.cols
    perm = np.argsort(out_llr, kind="stable")

    aug = np.concatenate([H_x.to_dense()[:, perm], s[:, None]], axis=1)
    R, pivots = gf2.rref(aug)
    if pivots and pivots[-1] == n:
        raise ValueError("syndrome is outside the column space of the check matrix")
    r = len(pivots)
    pivot_cols = np.asarray(pivots, dtype=np.int64)
    nonpivot_cols = np.setdiff1d(np.arange(n), pivot_cols)

    e_s0 = R[:r, n].copy()
    best_es = e_s0
    best_et: tuple[int, ...] = ()
    best_w = int(e_s0.sum())

    if params.order >= 1 and nonpivot_cols.size:
        W = R[:r][:, nonpivot_cols]
        for idx in range(nonpivot_cols.size):
            e_s = e_s0 ^ W[:, idx]
            w = int(e_s.sum()) + 1
            if w < best_w:
                best_w, best_es, best_et = w, e_s, (idx,)
        if params.order >= 2:
            lam = min(params.lam, int(nonpivot_cols.size))
            for ia in range(lam):
                col_a = W[:, ia]
                for ib in range(ia + 1, lam):
                    e_s = e_s0 ^ col_a ^ W[:, ib]
                    w = int(e_s.sum()) + 2
                    if w < best_w:
                        best_w, best_es, best_et = w, e_s, (ia, ib)

    x_perm = np.zeros(n, dtype=np.uint8)
    x_perm[pivot_cols] = best_es
    for idx in best_et:
        x_perm[nonpivot_cols[idx]] = 1
    estimate = np.zeros(n, dtype=np.uint8)
    estimate[perm] = x_perm
    return estimate


def decode_bp_osd(sector: CodeSector, s, p: float, bp_cfg: BpConfig,
                  osd_params: OsdParams) -> DecodeOutcome:
    """BP first; on non-convergence, OSD on the final output LLRs."""
    s = as_bits(s, sector.check_matrix.rows)
    p_in = np.full(sector.n, prior_llr(p))
    out = run_bp(sector.graph, s, p_in, bp_cfg)
    if out.converged:
        return DecodeOutcome(out.estimate, True, out.iterations_used, ROOT_CONVERGED)
    estimate = osd_postprocess(sector.check_matrix, s, out.out_llr, osd_params)
    assert _consistent(sector.check_matrix.to_dense(), estimate, s)
    return DecodeOutcome(estimate, True, out.iterations_used, OSD)


# ---------------------------------------------------------------------------
# guided decimation
# ---------------------------------------------------------------------------

def decode_bpgd(sector: CodeSector, s, p: float, bp_cfg: BpConfig) -> DecodeOutcome:
    """Successive BP instances, pinning the most reliable qubit in between.

    After each non-convergent instance the not-yet-decimated position with
    the largest |output LLR| has its prior fixed to +/-saturation (sign of
    the output LLR, ties to the negative side at exactly zero); every other
    prior for the next instance is the previous instance's output LLR.
    """
    s = as_bits(s, sector.check_matrix.rows)
    H_dense = sector.check_matrix.to_dense()
    sat = bp_cfg.saturation
    p_in = np.full(sector.n, prior_llr(p))
    decimated = np.zeros(sector.n, dtype=bool)
    iters = 0
    first = True

    while True:
        out = run_bp(sector.graph, s, p_in, bp_cfg)
        iters += out.iterations_used
        if out.converged:
            assert _consistent(H_dense, out.estimate, s)
            term = ROOT_CONVERGED if first else DECIMATION_COMPLETE
            return DecodeOutcome(out.estimate, True, iters, term)
        if decimated.all():
            return DecodeOutcome(np.zeros(sector.n, dtype=np.uint8), False, iters, EXHAUSTED)
        first = False
        masked = np.abs(out.out_llr).copy()
        masked[decimated] = -np.inf
        j = int(np.argmax(masked))
        decimated[j] = True
        p_in = out.out_llr.copy()
        p_in[j] = sat if out.out_llr[j] > 0 else -sat


# ---------------------------------------------------------------------------
# relay legs
# ---------------------------------------------------------------------------

def decode_relay(sector: CodeSector, s, p: float, params: RelayParams) -> DecodeOutcome:
    """Memory-chained BP legs collecting up to S candidate solutions.

    Leg 1 runs t1 iterations from the uniform prior; every later leg mixes
    the original prior with the previous leg's output LLRs through a mixing
    weight drawn fresh from U[gamma_c - gamma_w/2, gamma_c + gamma_w/2],
    one draw per leg (or per variable node, behind the flag). The lightest
    candidate wins, ties to the first found.
    """
    s = as_bits(s, sector.check_matrix.rows)
    H_dense = sector.check_matrix.to_dense()
    rng = np.random.default_rng(params.rng_seed)
    p0 = np.full(sector.n, prior_llr(p))
    lo = params.gamma_c - params.gamma_w / 2.0
    hi = params.gamma_c + params.gamma_w / 2.0

    cfg_first = BpConfig(max_iters=params.t1, alpha=params.alpha, saturation=params.saturation)
    cfg_rest = BpConfig(max_iters=params.t2, alpha=params.alpha, saturation=params.saturation)

    iters = 0
    best = None
    best_w = np.inf
    n_candidates = 0
    prev_out = p0

    for leg in range(params.leg_count):
        if leg == 0:
            p_in = p0
            cfg = cfg_first
        else:
            if params.gamma_per_variable:
                gamma = rng.uniform(lo, hi, size=sector.n)
            else:
                gamma = rng.uniform(lo, hi)
            p_in = (1.0 - gamma) * p0 + gamma * prev_out
            cfg = cfg_rest
        out = run_bp(sector.graph, s, p_in, cfg)
        iters += out.iterations_used
        prev_out = out.out_llr
        if out.converged:
            n_candidates += 1
            w = int(out.estimate.sum())
            if w < best_w:
                best_w = w
                best = out.estimate
            if n_candidates >= params.candidates:
                break

    if best is None:
        return DecodeOutcome(np.zeros(sector.n, dtype=np.uint8), False, iters, EXHAUSTED)
    assert _consistent(H_dense, best, s)
    return DecodeOutcome(best, True, iters, RELAY_CANDIDATE)


# ---------------------------------------------------------------------------
# root-plus-branches restart search
# ---------------------------------------------------------------------------

def decode_restart_belief(sector: CodeSector, s, params: RestartBeliefParams) -> DecodeOutcome:
    """Root BP plus up to eta guided branch searches.

    The root instance runs t_root iterations from the uniform prior. A
    consistent root estimate is accepted immediately when its weight is at
    most t (minimum-weight guarantee) or when the syndrome weight proves
    the true error outweighs t (defect rule). Otherwise branch i seeds a
    trial error on the qubit with the i-th lowest root output LLR, then up
    to t-1 times: recompute the residual syndrome from the original s, pin
    the trial positions' priors to +saturation, run a t_branch-iteration
    BP, and on failure extend the trial error at the position with the
    lowest output LLR. Consistent branch candidates terminate early under
    the same two rules; the lightest one seen is the fallback answer.

    Fully deterministic: sorting and argmin ties break to the lowest qubit
    index, and no randomness enters anywhere.
    """
    s = as_bits(s, sector.check_matrix.rows)
    H_dense = sector.check_matrix.to_dense()
    t = sector.t
    xi = sector.xi
    n = sector.n
    uniform = np.full(n, prior_llr(params.p))
    eta = min(params.eta, n)

    root_cfg = BpConfig(max_iters=params.t_root, alpha=params.alpha, saturation=params.saturation)
    branch_cfg = BpConfig(max_iters=params.t_branch, alpha=params.alpha, saturation=params.saturation)

    root = run_bp(sector.graph, s, uniform, root_cfg)
    iters = root.iterations_used
    if root.converged:
        rule = early_termination(root.estimate, s, t, xi)
        if rule != REJECT:
            assert _consistent(H_dense, root.estimate, s)
            term = DISTANCE_RULE if rule == ACCEPT_MW else DEFECT_RULE
            return DecodeOutcome(root.estimate, True, iters, term)

    order = np.argsort(root.out_llr, kind="stable")
    e_min = None
    w_min = np.inf

    for i in range(eta):
        e_bar = np.zeros(n, dtype=np.uint8)
        e_bar[order[i]] = 1
        last_estimate = np.zeros(n, dtype=np.uint8)
        for _ in range(t - 1):
            s_branch = s ^ ((H_dense.astype(np.int32) @ e_bar.astype(np.int32)) % 2).astype(np.uint8)
            p_in = uniform.copy()
            p_in[e_bar == 1] = params.saturation
            out = run_bp(sector.graph, s_branch, p_in, branch_cfg)
            iters += out.iterations_used
            if out.converged:
                last_estimate = out.estimate
                break
            masked = out.out_llr.copy()
            masked[e_bar == 1] = np.inf
            e_bar[int(np.argmin(masked))] = 1

        candidate = last_estimate ^ e_bar
        if _consistent(H_dense, candidate, s):
            rule = early_termination(candidate, s, t, xi)
            if rule != REJECT:
                term = DISTANCE_RULE if rule == ACCEPT_MW else DEFECT_RULE
                return DecodeOutcome(candidate, True, iters, term)
            w = int(candidate.sum())
            if w < w_min:
                w_min = w
                e_min = candidate

    if e_min is not None:
        assert _consistent(H_dense, e_min, s)
        return DecodeOutcome(e_min, True, iters, MIN_WEIGHT_FALLBACK)
    return DecodeOutcome(np.zeros(n, dtype=np.uint8), False, iters, EXHAUSTED)


# ---------------------------------------------------------------------------
# named decoder dispatch
# ---------------------------------------------------------------------------

DECODER_NAMES = ("bp", "bp-osd", "bpgd", "relay", "rb")


@dataclass
class Decoder:
    """A decoder bound to a code, callable once per (sector, syndrome).

    ``prior_p``, when set, pins the channel prior; otherwise the caller's
    per-trial prior is used. ``seed`` only matters for the relay decoder,
    which is the one stochastic algorithm here.
    """

    name: str
    max_iters: int = 50
    alpha: float | None = None
    saturation: float = DEFAULT_SATURATION
    prior_p: float | None = None
    osd: OsdParams = field(default_factory=OsdParams)
    relay: RelayParams = field(default_factory=RelayParams)
    rb: RestartBeliefParams = field(default_factory=RestartBeliefParams)

    def decode(self, sector: CodeSector, s, prior_p: float, seed: int = 0) -> DecodeOutcome:
        p = self.prior_p if self.prior_p is not None else prior_p
        if self.name == "bp":
            return decode_bp(sector, s, p, self._bp_cfg())
        if self.name == "bp-osd":
            return decode_bp_osd(sector, s, p, self._bp_cfg(), self.osd)
        if self.name == "bpgd":
            return decode_bpgd(sector, s, p, self._bp_cfg())
        if self.name == "relay":
            return decode_relay(sector, s, p, replace(self.relay, rng_seed=seed))
        if self.name == "rb":
            return decode_restart_belief(sector, s, replace(self.rb, p=p))
        raise ValueError(f"unknown decoder {self.name!r}")

    def _bp_cfg(self) -> BpConfig:
        return BpConfig(max_iters=self.max_iters, alpha=self.alpha, saturation=self.saturation)


def make_decoder(name: str, code: CssCode | None = None, **options) -> Decoder:
    """Build a Decoder with the shipped defaults, applying keyword overrides.

    Recognized options: max_iters, alpha, saturation, prior_p,
    osd_order, lam, legs, t1, t2, candidates, gamma_c, gamma_w,
    gamma_per_variable, t_root, t_branch, eta.
    The branch budget eta defaults per code when one is supplied.
    """
    if name not in DECODER_NAMES:
        raise ValueError(f"unknown decoder {name!r}; available: {', '.join(DECODER_NAMES)}")
    opts = {k: v for k, v in options.items() if v is not None}
    dec = Decoder(
        name=name,
        max_iters=opts.pop("max_iters", 50),
        alpha=opts.pop("alpha", 1.0 if name == "relay" else None),
        saturation=opts.pop("saturation", DEFAULT_SATURATION),
        prior_p=opts.pop("prior_p", None),
    )
    dec.osd = OsdParams(
        order=opts.pop("osd_order", 2),
        lam=opts.pop("lam", 10),
    )
    dec.relay = RelayParams(
        leg_count=opts.pop("legs", 301),
        t1=opts.pop("t1", 80),
        t2=opts.pop("t2", 60),
        candidates=opts.pop("candidates", 5),
        gamma_c=opts.pop("gamma_c", -0.24),
        gamma_w=opts.pop("gamma_w", 0.66),
        gamma_per_variable=opts.pop("gamma_per_variable", False),
        alpha=dec.alpha if name == "relay" else 1.0,
        saturation=dec.saturation,
    )
    eta = opts.pop("eta", None)
    if eta is None:
        eta = default_eta(code) if code is not None else 1
    dec.rb = RestartBeliefParams(
        t_root=opts.pop("t_root", 50),
        t_branch=opts.pop("t_branch", 10),
        eta=eta,
        saturation=dec.saturation,
        alpha=dec.alpha if name == "rb" else None,
    )
    if opts:
        raise ValueError(f"unknown decoder options: {sorted(opts)}")
    return dec
