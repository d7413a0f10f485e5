"""Depolarizing-channel Monte Carlo, verification sweeps, and iteration stats.

A trial samples i.i.d. depolarizing noise, decodes the Z and X sectors
independently (Z errors against H_x, X errors against H_z), and counts a
codeword error when either sector's residual acts nontrivially on the code
space or the decoder gave up. Every trial owns an RNG stream derived from
(seed, sweep index, trial index), so the sample set is independent of the
worker count and runs are reproducible bit for bit.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from itertools import combinations
from multiprocessing import get_context

import numpy as np

from .codes import CodeSector, CssCode, dumps_code, loads_code
from .decoders import Decoder, make_decoder

_CHUNK = 512  # trials per scheduling chunk; fixed so worker count never changes results


@dataclass
class PauliSample:
    """Binary symplectic form of a Pauli error; Y sets both parts."""

    x_part: np.ndarray
    z_part: np.ndarray


def sample_depolarizing(n: int, p: float, rng) -> PauliSample:
    """Per qubit: identity with prob 1-p, else X, Y, Z with prob p/3 each."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing probability must be in [0, 1], got {p}")
    u = rng.random(n)
    kind = np.zeros(n, dtype=np.int8)  # 0=I, 1=X, 2=Y, 3=Z
    err = u < p
    which = np.floor(u[err] / p * 3).astype(np.int8) + 1 if p > 0 else np.zeros(0, np.int8)
    np.clip(which, 1, 3, out=which)
    kind[err] = which
    return PauliSample(
        x_part=((kind == 1) | (kind == 2)).astype(np.uint8),
        z_part=((kind == 3) | (kind == 2)).astype(np.uint8),
    )


def is_logical_failure_z(code: CssCode, true_z, est_z) -> bool:
    """True iff the residual Z error acts nontrivially on the code space.

    A residual inside the rowspace of H_z is a stabilizer and harmless.
    A decoder that reported failure must be counted as a logical failure by
    the caller regardless of this test.
    """
    residual = np.asarray(true_z, dtype=np.uint8) ^ np.asarray(est_z, dtype=np.uint8)
    return not code.z_sector().stabilizer_space.contains(residual)


def _sector_failure(sector: CodeSector, true_e, est_e, success: bool) -> bool:
    if not success:
        return True
    return not sector.stabilizer_space.contains(true_e ^ est_e)


def wilson_interval(failures: int, trials: int, z: float = 1.959963984540054):
    """Wilson score interval at 95% by default; sane at low counts."""
    if trials == 0:
        return 0.0, 1.0
    phat = failures / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials)) / denom
    lo = 0.0 if failures == 0 else max(0.0, center - half)
    hi = 1.0 if failures == trials else min(1.0, center + half)
    return lo, hi


@dataclass
class SweepPoint:
    p: float
    trials: int
    failures: int
    cer: float
    ci_low: float
    ci_high: float
    mean_bp_iterations: float
    wall_seconds: float = 0.0


@dataclass(frozen=True)
class DecoderSpec:
    """Picklable (name, options) pair resolvable to a Decoder for a code."""

    name: str
    options: tuple = ()

    @classmethod
    def make(cls, name: str, **options) -> "DecoderSpec":
        return cls(name, tuple(sorted(options.items())))

    def build(self, code: CssCode) -> Decoder:
        return make_decoder(self.name, code, **dict(self.options))


def channel_prior(p: float, prior_mode: str) -> float:
    """Per-sector prior probability fed to the decoders.

    ``marginal`` is the probability of a Z (or X) component under
    depolarizing noise, 2p/3; ``raw-p`` passes the physical rate through.
    Clamped away from {0, 1} so the LLR stays finite.
    """
    if prior_mode == "marginal":
        q = 2.0 * p / 3.0
    elif prior_mode == "raw-p":
        q = p
    else:
        raise ValueError(f"unknown prior mode {prior_mode!r}")
    return min(max(q, 1e-9), 1.0 - 1e-9)


def _trial_seed(seed: int, p_idx: int, trial: int, sector: int) -> int:
    return int(np.random.SeedSequence([seed, p_idx, trial, sector]).generate_state(1)[0])


def run_trial_range(code: CssCode, decoder: Decoder, p: float, p_idx: int, seed: int,
                    start: int, stop: int, prior_mode: str = "marginal",
                    z_only: bool = False):
    """Decode trials [start, stop); returns (failures, total_bp_iterations)."""
    zsec = code.z_sector()
    xsec = code.x_sector()
    hx = zsec.check_matrix.to_dense()
    hz = xsec.check_matrix.to_dense()
    q = channel_prior(p, prior_mode)
    failures = 0
    iters = 0
    for trial in range(start, stop):
        rng = np.random.default_rng([seed, p_idx, trial])
        sample = sample_depolarizing(code.n, p, rng)
        s_z = ((hx.astype(np.int32) @ sample.z_part.astype(np.int32)) % 2).astype(np.uint8)
        out_z = decoder.decode(zsec, s_z, q, seed=_trial_seed(seed, p_idx, trial, 0))
        iters += out_z.bp_iterations
        failed = _sector_failure(zsec, sample.z_part, out_z.estimate, out_z.success)
        if not z_only:
            s_x = ((hz.astype(np.int32) @ sample.x_part.astype(np.int32)) % 2).astype(np.uint8)
            out_x = decoder.decode(xsec, s_x, q, seed=_trial_seed(seed, p_idx, trial, 1))
            iters += out_x.bp_iterations
            failed = failed or _sector_failure(xsec, sample.x_part, out_x.estimate, out_x.success)
        if failed:
            failures += 1
    return failures, iters


_worker_state: dict = {}


def _worker_run(args):
    manifest, name, options, p, p_idx, seed, start, stop, prior_mode, z_only = args
    key = (manifest, name, options)
    if _worker_state.get("key") != key:
        code = loads_code(manifest)
        _worker_state["key"] = key
        _worker_state["code"] = code
        _worker_state["decoder"] = DecoderSpec(name, options).build(code)
    return run_trial_range(
        _worker_state["code"], _worker_state["decoder"], p, p_idx, seed,
        start, stop, prior_mode, z_only,
    )


def run_monte_carlo(code: CssCode, decoder_spec: DecoderSpec, p_list, failure_target: int,
                    max_trials: int, seed: int, workers: int = 1,
                    prior_mode: str = "marginal", z_only: bool = False):
    """Sweep physical error rates until failure_target failures (or max_trials).

    Trials are processed in fixed-size chunks; within a chunk the work is
    split across the pool. Both the sample set and the stopping point
    depend only on (seed, chunk size), never on the worker count.
    """
    if failure_target < 1:
        raise ValueError("failure_target must be >= 1")
    decoder = decoder_spec.build(code)
    pool = None
    manifest = dumps_code(code) if workers > 1 else None
    if workers > 1:
        pool = get_context("fork").Pool(workers)
    try:
        points = []
        for p_idx, p in enumerate(p_list):
            t0 = time.perf_counter()
            trials = failures = 0
            iter_total = 0
            while trials < max_trials and failures < failure_target:
                chunk = min(_CHUNK, max_trials - trials)
                if pool is None:
                    got = [run_trial_range(code, decoder, p, p_idx, seed,
                                           trials, trials + chunk, prior_mode, z_only)]
                else:
                    bounds = np.linspace(trials, trials + chunk, workers + 1).astype(int)
                    jobs = [
                        (manifest, decoder_spec.name, decoder_spec.options, p, p_idx,
                         seed, int(a), int(b), prior_mode, z_only)
                        for a, b in zip(bounds[:-1], bounds[1:]) if b > a
                    ]
                    got = pool.map(_worker_run, jobs)
                for f, it in got:
                    failures += f
                    iter_total += it
                trials += chunk
            ci_low, ci_high = wilson_interval(failures, trials)
            points.append(SweepPoint(
                p=p, trials=trials, failures=failures,
                cer=failures / trials if trials else 0.0,
                ci_low=ci_low, ci_high=ci_high,
                mean_bp_iterations=iter_total / trials if trials else 0.0,
                wall_seconds=time.perf_counter() - t0,
            ))
        return points
    finally:
        if pool is not None:
            pool.close()
            pool.join()


def write_sweep_csv(path, code: CssCode, decoder_name: str, seed: int, points):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["code", "decoder", "p", "trials", "failures", "cer",
                    "ci_low", "ci_high", "mean_bp_iters", "wall_seconds", "seed"])
        for pt in points:
            w.writerow([code.name, decoder_name, repr(pt.p), pt.trials, pt.failures,
                        repr(pt.cer), repr(pt.ci_low), repr(pt.ci_high),
                        repr(pt.mean_bp_iterations), f"{pt.wall_seconds:.3f}", seed])


# ---------------------------------------------------------------------------
# weight-w pattern verification and iteration statistics
# ---------------------------------------------------------------------------

class BudgetExceededError(RuntimeError):
    """Exhaustive enumeration would be too large; use sampled mode."""


@dataclass
class VerifyReport:
    code_name: str
    decoder_name: str
    mode: str
    weights: list
    patterns_tested: int
    failing_patterns: list = field(default_factory=list)
    per_weight: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failing_patterns

    def to_text(self) -> str:
        lines = [
            f"code {self.code_name} decoder {self.decoder_name} mode {self.mode} "
            f"weights {','.join(str(w) for w in self.weights)}",
        ]
        for w in self.weights:
            tested, failed = self.per_weight[w]
            lines.append(f"weight {w}: {tested} patterns, {failed} failures")
        if self.failing_patterns:
            lines.append("failing patterns (qubit indices):")
            for pat in self.failing_patterns:
                lines.append(" ".join(str(i) for i in pat))
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines)


def _sampled_patterns(n: int, w: int, count: int, rng):
    """Up to ``count`` distinct weight-w supports; all of them if few exist."""
    total = math.comb(n, w)
    if total <= count:
        return list(combinations(range(n), w))
    seen = set()
    while len(seen) < count:
        pick = tuple(sorted(rng.choice(n, size=w, replace=False).tolist()))
        seen.add(pick)
    return sorted(seen)


def verify_up_to_t(code: CssCode, decoder_spec: DecoderSpec, mode: str = "exhaustive",
                   samples: int = 10_000, seed: int = 0, weights=None,
                   budget: int = 500_000, prior_p: float = 0.01) -> VerifyReport:
    """Decode pure Z-error patterns of the given weights and adjudicate each.

    ``weights`` defaults to 1..t. Exhaustive mode enumerates every support;
    sampled mode draws ``samples`` patterns split evenly across the weights,
    without replacement within a weight.
    """
    sector = code.z_sector()
    decoder = decoder_spec.build(code)
    weights = list(weights) if weights is not None else list(range(1, code.t + 1))
    n = code.n
    for w in weights:
        if not 0 <= w <= n:
            raise ValueError(f"weight {w} outside 0..{n}")
    hx_cols = sector.check_matrix.to_dense()
    q = min(max(prior_p, 1e-9), 1.0 - 1e-9)

    if mode == "exhaustive":
        total = sum(math.comb(n, w) for w in weights)
        if total > budget:
            raise BudgetExceededError(
                f"exhaustive enumeration needs {total} patterns (budget {budget}); "
                "use sampled mode"
            )
        pattern_iter = {w: combinations(range(n), w) for w in weights}
    elif mode == "sampled":
        rng = np.random.default_rng(seed)
        per_weight = max(1, samples // len(weights))
        pattern_iter = {w: _sampled_patterns(n, w, per_weight, rng) for w in weights}
    else:
        raise ValueError(f"unknown verify mode {mode!r}")

    report = VerifyReport(code.name, decoder_spec.name, mode, weights, 0)
    for w in weights:
        tested = failed = 0
        for idx, pattern in enumerate(pattern_iter[w]):
            cols = list(pattern)
            s = np.bitwise_xor.reduce(hx_cols[:, cols], axis=1)
            out = decoder.decode(sector, s, q, seed=_trial_seed(seed, w, idx, 0))
            error = np.zeros(n, dtype=np.uint8)
            error[cols] = 1
            if _sector_failure(sector, error, out.estimate, out.success):
                failed += 1
                report.failing_patterns.append(pattern)
            tested += 1
        report.per_weight[w] = (tested, failed)
        report.patterns_tested += tested
    return report


@dataclass
class IterationRow:
    n_e: int
    samples: int
    mean_bp_iterations: float


def iteration_table(code: CssCode, decoder_spec: DecoderSpec, n_e_list,
                    samples_per_weight: int = 10_000, seed: int = 0,
                    prior_p: float = 0.01):
    """Mean BP iterations for random weight-n_e Z patterns, one row per n_e.

    Weights whose pattern count fits in the sample budget are enumerated
    exhaustively, which removes sampling noise from the means.
    """
    sector = code.z_sector()
    decoder = decoder_spec.build(code)
    hx_cols = sector.check_matrix.to_dense()
    q = min(max(prior_p, 1e-9), 1.0 - 1e-9)
    rng = np.random.default_rng(seed)
    rows = []
    for n_e in n_e_list:
        if n_e > code.n:
            raise ValueError(f"n_e={n_e} exceeds the qubit count {code.n}")
        patterns = _sampled_patterns(code.n, n_e, samples_per_weight, rng)
        total = 0
        for idx, pattern in enumerate(patterns):
            cols = list(pattern)
            if cols:
                s = np.bitwise_xor.reduce(hx_cols[:, cols], axis=1)
            else:
                s = np.zeros(sector.check_matrix.rows, dtype=np.uint8)
            out = decoder.decode(sector, s, q, seed=_trial_seed(seed, n_e, idx, 0))
            total += out.bp_iterations
        rows.append(IterationRow(n_e, len(patterns), total / len(patterns)))
    return rows
