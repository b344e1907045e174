"""Mechanical verification of the anchored-sequence properties.

Every check compares exact integers; there is no tolerance anywhere.

P1   cost of serving the base sequence and returning to the start is at
     most twice the unconstrained optimum.
E1   the anchored sequence's optimum is sandwiched between the base
     optimum and twice the base optimum.
C1a  the anchored work vector has a unique minimizer: the start
     configuration.
C1b  for every ending configuration, the extracted cost-realizing
     execution passes through the start configuration during the anchor
     block (checked on all configurations, or a seeded sample of 512).
C2   the anchored work vector equals its value at the start plus the
     matching distance from the start, entry for entry.
E2   the optimum of the q-fold repeated block is exactly q times the
     block optimum.
E3   the online cost of the repeated block is exactly q times the block
     cost, and the per-round behavior repeats verbatim.
R1   the online algorithm ends the anchored block back at the start
     configuration.  If this fails the anchor is rebuilt with a doubled
     allowance, up to a cap; running out of cap is reported as
     inconclusive rather than failure.
T1   the online cost of the base sequence is at most 2*alpha times its
     optimum.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .anchor import compute_anchor, build_chi
from .metric import (
    InputError,
    Instance,
    min_pairwise_distance,
    random_metric,
)
from .offline import extract_trace, opt_cost, opt_cost_to, work_vector_history
from .rng import SplitMix64
from .workfunction import (
    final_work_vector,
    initial_work_vector,
    run_wfa,
    update_work_vector,
    wfa_decide,
)

CHECK_IDS = ("P1", "E1", "C1a", "C1b", "C2", "E2", "E3", "R1", "T1")

CHECK_DESCRIPTIONS = {
    "P1": "returning to the start costs at most twice the optimum",
    "E1": "anchored optimum lies between the optimum and twice the optimum",
    "C1a": "the start is the unique minimizer of the anchored work vector",
    "C1b": "every extracted optimal execution revisits the start during the anchor",
    "C2": "anchored work vector = value at start + distance from start, exactly",
    "E2": "offline cost of the repeated block = repetitions x block cost",
    "E3": "online cost and behavior on the repeated block repeat verbatim",
    "R1": "the online algorithm ends the anchored block at the start",
    "T1": "online cost of the base sequence <= 2*alpha*optimum",
}

C1B_SAMPLE_CAP = 512


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    status: str  # pass | fail | inconclusive
    lhs: object
    rhs: object
    witness: object = None

    def to_json(self) -> dict:
        out = {
            "check": self.check_id,
            "status": self.status,
            "lhs": self.lhs,
            "rhs": self.rhs,
        }
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of all nine checks on one instance."""

    fingerprint: str
    alpha: int
    beta_initial: int
    beta_used: int
    q: int
    cycles: int
    min_gap: int
    checks: tuple[CheckResult, ...]
    values: dict

    def check(self, check_id: str) -> CheckResult:
        for result in self.checks:
            if result.check_id == check_id:
                return result
        raise KeyError(check_id)

    @property
    def status(self) -> str:
        statuses = {c.status for c in self.checks}
        if "fail" in statuses:
            return "fail"
        if "inconclusive" in statuses:
            return "inconclusive"
        return "pass"

    def to_json(self) -> dict:
        return {
            "fingerprint": self.fingerprint,
            "alpha": self.alpha,
            "beta_initial": self.beta_initial,
            "beta_used": self.beta_used,
            "q": self.q,
            "m": self.cycles,
            "ell": self.min_gap,
            "status": self.status,
            "checks": [c.to_json() for c in self.checks],
            "values": dict(self.values),
        }


def resolve_alpha(value, k: int) -> int:
    """Accept a positive integer or the literal token ``2k-1``."""
    if isinstance(value, str):
        token = value.strip().replace(" ", "")
        if token in ("2k-1", "2*k-1"):
            return 2 * k - 1
        try:
            value = int(token)
        except ValueError:
            raise InputError(f"alpha must be a positive integer or '2k-1', got {value!r}")
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise InputError(f"alpha must be a positive integer, got {value!r}")
    return value


def _beta_schedule(beta_initial: int, cap: int):
    """Allowance values to try: the initial one, then doubling from max(1, initial)."""
    yield beta_initial
    beta = max(1, beta_initial)
    if beta != beta_initial and beta <= cap:
        yield beta
    while beta * 2 <= cap:
        beta *= 2
        yield beta


def _bool_check(check_id, ok, lhs, rhs, witness=None) -> CheckResult:
    return CheckResult(check_id, "pass" if ok else "fail", lhs, rhs, witness)


def verify_anchored_properties(
    inst: Instance,
    alpha: int,
    beta_initial: int = 0,
    q: int = 3,
    *,
    beta_cap: int | None = None,
    sample_cap: int = C1B_SAMPLE_CAP,
) -> PropertyReport:
    """Run all nine checks on one instance; see the module docstring.

    The allowance escalation only reacts to R1: the other checks hold (or
    not) for any sufficient anchor, while R1 can legitimately need a larger
    allowance than the one assumed.
    """
    alpha = resolve_alpha(alpha, inst.k)
    if isinstance(beta_initial, bool) or not isinstance(beta_initial, int) or beta_initial < 0:
        raise InputError(f"beta must be a nonnegative integer, got {beta_initial!r}")
    if isinstance(q, bool) or not isinstance(q, int) or q < 1:
        raise InputError(f"q must be a positive integer, got {q!r}")
    if inst.k < 2:
        raise InputError("anchored verification needs k >= 2")
    gap = min_pairwise_distance(inst.initial, inst.metric)
    if beta_cap is None:
        beta_cap = (1 << 20) * gap

    start = inst.initial
    vector_base = final_work_vector(inst)
    opt_base = opt_cost(vector_base)
    trace_base = run_wfa(inst)
    alg_base = trace_base.total_cost

    p1 = _bool_check(
        "P1", opt_cost_to(vector_base, start) <= 2 * opt_base,
        opt_cost_to(vector_base, start), 2 * opt_base,
    )
    t1 = _bool_check("T1", alg_base <= 2 * alpha * opt_base, alg_base, 2 * alpha * opt_base)

    checks = {}
    values = {}
    anchor = None
    beta_used = beta_initial
    r1_ok = False
    for beta in _beta_schedule(beta_initial, beta_cap):
        beta_used = beta
        anchor = compute_anchor(inst, alpha, beta)
        anchored = inst.with_requests(inst.requests + anchor.requests)
        history = work_vector_history(anchored)
        vector_anchored = history[-1]
        opt_anchored = opt_cost(vector_anchored)

        checks["E1"] = _bool_check(
            "E1", opt_base <= opt_anchored <= 2 * opt_base,
            [opt_base, opt_anchored], [opt_anchored, 2 * opt_base],
        )

        minimum = int(vector_anchored.values.min())
        minimizers = np.flatnonzero(vector_anchored.values == minimum)
        unique_start = len(minimizers) == 1 and vector_anchored.space.configs[minimizers[0]] == start
        checks["C1a"] = _bool_check(
            "C1a", unique_start,
            [list(vector_anchored.space.configs[i]) for i in minimizers[:4]], [list(start)],
        )

        collapsed = vector_anchored.value(start) + vector_anchored.space.distance_vector(start)
        c2_bad = np.flatnonzero(vector_anchored.values != collapsed)
        checks["C2"] = _bool_check(
            "C2", c2_bad.size == 0, int(c2_bad.size), 0,
            None if c2_bad.size == 0 else {
                "config": list(vector_anchored.space.configs[c2_bad[0]]),
                "value": int(vector_anchored.values[c2_bad[0]]),
                "expected": int(collapsed[c2_bad[0]]),
            },
        )

        checks["C1b"] = _check_start_visits(history, anchored, len(inst.requests), sample_cap)

        trace_anchored = run_wfa(anchored)
        alg_anchored = trace_anchored.total_cost
        end_config = trace_anchored.config_after(len(anchored.requests))
        r1_ok = end_config == start
        checks["R1"] = _bool_check("R1", r1_ok, list(end_config), list(start))

        repeated = inst.with_requests(build_chi(inst.requests, anchor.requests, q))
        vector_repeated = final_work_vector(repeated)
        opt_repeated = opt_cost(vector_repeated)
        checks["E2"] = _bool_check("E2", opt_repeated == q * opt_anchored, opt_repeated, q * opt_anchored)

        trace_repeated = run_wfa(repeated)
        alg_repeated = trace_repeated.total_cost
        same_behavior = trace_repeated.rounds == trace_anchored.rounds * q
        e3_ok = alg_repeated == q * alg_anchored and same_behavior
        witness = None
        if not same_behavior:
            for i, (got, want) in enumerate(zip(trace_repeated.rounds, trace_anchored.rounds * q)):
                if got != want:
                    witness = {"round": i + 1}
                    break
        checks["E3"] = _bool_check("E3", e3_ok, alg_repeated, q * alg_anchored, witness)

        values = {
            "opt": opt_base,
            "alg": alg_base,
            "opt_rho_sigma": opt_anchored,
            "alg_rho_sigma": alg_anchored,
            "opt_chi": opt_repeated,
            "alg_chi": alg_repeated,
        }
        if r1_ok:
            break

    if not r1_ok:
        failed = checks["R1"]
        checks["R1"] = CheckResult("R1", "inconclusive", failed.lhs, failed.rhs, failed.witness)

    ordered = tuple(
        {"P1": p1, "T1": t1, **checks}[check_id] for check_id in CHECK_IDS
    )
    return PropertyReport(
        fingerprint=inst.fingerprint(),
        alpha=alpha,
        beta_initial=beta_initial,
        beta_used=beta_used,
        q=q,
        cycles=anchor.cycles,
        min_gap=anchor.min_gap,
        checks=ordered,
        values=values,
    )


def _check_start_visits(history, anchored: Instance, base_len: int, sample_cap: int) -> CheckResult:
    """C1b: each extracted execution must sit on the start configuration at
    the end of some round inside the anchor block."""
    space = history[-1].space
    total = len(anchored.requests)
    start = anchored.initial
    if len(space) <= sample_cap:
        ranks = range(len(space))
    else:
        stream = SplitMix64(int(anchored.fingerprint()[:16], 16))
        ranks = stream.sample(len(space), sample_cap)
    examined = 0
    for rank in ranks:
        target = space.configs[rank]
        trace = extract_trace(history, anchored, target)
        visited = any(
            trace.config_after(t) == start for t in range(base_len, total)
        )
        examined += 1
        if not visited:
            return CheckResult("C1b", "fail", examined, examined, {"target": list(target)})
    return CheckResult("C1b", "pass", examined, examined)


@dataclass(frozen=True)
class RatioRow:
    """One strict-ratio measurement: online cost against (4k-2) times optimum."""

    n: int
    k: int
    rho_len: int
    opt: int
    alg: int
    ratio: Fraction | None
    bound: int
    passed: bool


def measure_strict_ratio(inst: Instance) -> RatioRow:
    """Exact integer comparison alg <= (4k-2)*opt; a zero optimum demands a
    zero online cost."""
    alg = run_wfa(inst).total_cost
    opt = opt_cost(final_work_vector(inst))
    bound = 4 * inst.k - 2
    passed = alg <= bound * opt if opt > 0 else alg == 0
    ratio = Fraction(alg, opt) if opt > 0 else None
    return RatioRow(inst.n, inst.k, len(inst.requests), opt, alg, ratio, bound, passed)


REQUEST_MODELS = ("uniform", "roundrobin_k_plus_1", "greedy_adversary")


def generate_instance(
    n: int,
    k: int,
    rho_len: int,
    seed: int,
    request_model: str = "uniform",
    weight_range: tuple[int, int] = (1, 9),
) -> Instance:
    """Deterministic instance from a seed: random closed metric, servers on
    the first k points, requests per the chosen model.

    ``uniform`` draws each request over all points; ``roundrobin_k_plus_1``
    cycles over points 0..k starting at the uncovered point k;
    ``greedy_adversary`` always requests the uncovered point farthest from
    the current online configuration (ties to the smallest identifier),
    simulating the online algorithm while generating.
    """
    if request_model not in REQUEST_MODELS:
        raise InputError(f"unknown request model {request_model!r}, expected one of {REQUEST_MODELS}")
    if isinstance(rho_len, bool) or not isinstance(rho_len, int) or rho_len < 0:
        raise InputError(f"request count must be a nonnegative integer, got {rho_len!r}")
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise InputError(f"server count must be a positive integer, got {k!r}")
    if k > n:
        raise InputError(f"k exceeds n (k={k}, n={n})")
    stream = SplitMix64(seed)
    metric_seed = stream.next_u64()
    request_seed = stream.next_u64()
    metric = random_metric(n, metric_seed, weight_range)
    initial = tuple(range(k))

    if request_model == "uniform":
        requests_stream = SplitMix64(request_seed)
        requests = [requests_stream.randint(0, n - 1) for _ in range(rho_len)]
    elif request_model == "roundrobin_k_plus_1":
        if k + 1 > n:
            raise InputError(f"round-robin over k+1 points needs n > k (k={k}, n={n})")
        requests = [(k + i) % (k + 1) for i in range(rho_len)]
    else:  # greedy_adversary
        if k == n:
            raise InputError(f"greedy adversary needs an uncovered point (k={k}, n={n})")
        requests = []
        vector = initial_work_vector(metric, initial)
        config = initial
        for _ in range(rho_len):
            uncovered = [p for p in range(n) if p not in config]
            request = max(
                uncovered,
                key=lambda p: (min(metric.dist[p][s] for s in config), -p),
            )
            requests.append(request)
            decision = wfa_decide(vector, config, request)
            config = decision.config
            vector = update_work_vector(vector, request)
    return Instance.build(metric, k, initial, requests)


DEFAULT_CAMPAIGN = {
    "seeds": [1, 20],
    "n": [4, 8],
    "k": [2, 3],
    "rho_len": [0, 12],
    "request_model": "uniform",
    "alpha": "2k-1",
    "beta": 0,
    "q": 3,
}

CSV_COLUMNS = (
    "instance_id", "seed", "n", "k", "rho_len", "m", "ell", "beta_used",
    "opt", "alg", "opt_rho_sigma", "alg_rho_sigma",
    "P1", "E1", "C1a", "C1b", "C2", "E2", "E3", "R1", "T1", "ratio_pass",
)


def _check_range(config: dict, key: str, allow_empty: bool = False) -> tuple[int, int]:
    value = config[key]
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or any(isinstance(v, bool) or not isinstance(v, int) for v in value)
    ):
        raise InputError(f"campaign field {key!r} must be [lo, hi] integers, got {value!r}")
    lo, hi = value
    if hi < lo and not (allow_empty and hi == lo - 1):
        raise InputError(f"campaign field {key!r} has an empty range [{lo}, {hi}]")
    return lo, hi


def validate_campaign_config(config: dict) -> dict:
    """Normalize and sanity-check a campaign description."""
    if not isinstance(config, dict):
        raise InputError(f"campaign config must be an object, got {type(config).__name__}")
    required = {"seeds", "n", "k", "rho_len", "request_model", "alpha", "beta", "q"}
    missing = required - config.keys()
    if missing:
        raise InputError(f"missing campaign fields: {sorted(missing)}")
    unknown = config.keys() - required
    if unknown:
        raise InputError(f"unknown campaign fields: {sorted(unknown)}")
    seeds = _check_range(config, "seeds", allow_empty=True)
    n_range = _check_range(config, "n")
    k_range = _check_range(config, "k")
    rho_range = _check_range(config, "rho_len")
    model = config["request_model"]
    if model not in REQUEST_MODELS:
        raise InputError(f"unknown request model {model!r}, expected one of {REQUEST_MODELS}")
    if n_range[0] < 2 or n_range[1] > 16:
        raise InputError(f"campaign n range {list(n_range)} outside [2, 16]")
    if k_range[0] < 2:
        raise InputError("anchored verification needs k >= 2 for every instance")
    if rho_range[0] < 0:
        raise InputError("rho_len cannot be negative")
    headroom = 1 if model in ("roundrobin_k_plus_1", "greedy_adversary") else 0
    if k_range[0] > n_range[0] - headroom:
        raise InputError(
            f"k range {list(k_range)} infeasible for n range {list(n_range)} "
            f"under model {model!r}"
        )
    alpha = config["alpha"]
    if isinstance(alpha, str):
        resolve_alpha(alpha, 2)  # token validity only; resolved per instance
    else:
        resolve_alpha(alpha, 2)
    if isinstance(config["beta"], bool) or not isinstance(config["beta"], int) or config["beta"] < 0:
        raise InputError(f"beta must be a nonnegative integer, got {config['beta']!r}")
    if isinstance(config["q"], bool) or not isinstance(config["q"], int) or config["q"] < 1:
        raise InputError(f"q must be a positive integer, got {config['q']!r}")
    return {
        "seeds": list(seeds),
        "n": list(n_range),
        "k": list(k_range),
        "rho_len": list(rho_range),
        "request_model": model,
        "alpha": alpha,
        "beta": config["beta"],
        "q": config["q"],
    }


@dataclass(frozen=True)
class CampaignRow:
    instance_id: int
    seed: int
    instance: Instance
    report: PropertyReport
    ratio: RatioRow


@dataclass(frozen=True)
class ExperimentReport:
    config: dict
    rows: tuple[CampaignRow, ...]

    @property
    def status(self) -> str:
        statuses = {row.report.status for row in self.rows}
        if "fail" in statuses or any(not row.ratio.passed for row in self.rows):
            return "fail"
        if "inconclusive" in statuses:
            return "inconclusive"
        return "pass"

    def to_json(self) -> dict:
        return {
            "config": dict(self.config),
            "status": self.status,
            "rows": [
                {
                    "instance_id": row.instance_id,
                    "seed": row.seed,
                    "ratio_pass": row.ratio.passed,
                    "report": row.report.to_json(),
                }
                for row in self.rows
            ],
        }


def run_campaign(config: dict) -> ExperimentReport:
    """Verify and measure every instance a campaign config describes.

    Instances are independent; rows are emitted in instance order.  Every
    draw flows from the per-instance seed, so reruns reproduce the report
    byte for byte.
    """
    cfg = validate_campaign_config(config)
    lo, hi = cfg["seeds"]
    rows = []
    headroom = 1 if cfg["request_model"] in ("roundrobin_k_plus_1", "greedy_adversary") else 0
    for instance_id, seed in enumerate(range(lo, hi + 1)):
        stream = SplitMix64(seed)
        n = stream.randint(cfg["n"][0], cfg["n"][1])
        k_hi = min(cfg["k"][1], n - headroom)
        k = stream.randint(cfg["k"][0], k_hi)
        rho_len = stream.randint(cfg["rho_len"][0], cfg["rho_len"][1])
        inst = generate_instance(n, k, rho_len, seed, cfg["request_model"])
        alpha = resolve_alpha(cfg["alpha"], k)
        report = verify_anchored_properties(inst, alpha, cfg["beta"], cfg["q"])
        ratio = measure_strict_ratio(inst)
        rows.append(CampaignRow(instance_id, seed, inst, report, ratio))
    return ExperimentReport(cfg, tuple(rows))


def report_to_csv(report: ExperimentReport) -> str:
    """Fixed-schema CSV; pure function of the report, byte-stable."""
    lines = [",".join(CSV_COLUMNS)]
    for row in report.rows:
        values = row.report.values
        record = [
            row.instance_id,
            row.seed,
            row.instance.n,
            row.instance.k,
            len(row.instance.requests),
            row.report.cycles,
            row.report.min_gap,
            row.report.beta_used,
            values["opt"],
            values["alg"],
            values["opt_rho_sigma"],
            values["alg_rho_sigma"],
        ]
        record.extend(row.report.check(cid).status for cid in CHECK_IDS)
        record.append("pass" if row.ratio.passed else "fail")
        lines.append(",".join(str(v) for v in record))
    return "\n".join(lines) + "\n"
