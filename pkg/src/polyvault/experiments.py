"""Monte-Carlo harness measuring attack success rates against records.

Every trial is driven by its own RNG stream keyed on (seed, cell
parameters, trial index), so results are independent of execution order
and thread count: reruns with the same seed produce byte-identical CSV.
Timing is opt-in for the same reason; with it disabled the mean_ns column
is a constant 0.

A cell is one (q, t, s, k, omega) point; a run sweeps omega.  Instances
use feature sets with exactly omega common elements and secrets of degree
exactly k-1.
"""

from __future__ import annotations

import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import attack, bounds, gf2m, vault

PARTIAL_HEADER = (
    "q_bits,t,s,k,omega,trials,n_output,n_correct,p_out,p_cor,"
    "fail_no_index,fail_remainder,fail_split,mean_ns,seed"
)
FULL_HEADER = PARTIAL_HEADER + ",p_lower"

VARIANT_ALIASES = {
    "prob": "probabilistic",
    "probabilistic": "probabilistic",
    "det": "deterministic",
    "deterministic": "deterministic",
    "blended": "blended",
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    m_bits: int
    t: int
    s: int
    k: int
    omega_list: tuple
    trials: int
    seed: int
    threads: int = 1
    variant: str = "probabilistic"
    blend_size: int = 0
    ext_factor: int = 2
    timing: bool = False
    budget: int = 0  # full experiments: > 0 switches to the budgeted driver

    def validate(self) -> None:
        if self.variant not in VARIANT_ALIASES.values():
            raise ConfigError("unknown variant %r" % (self.variant,))
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if not 1 <= self.m_bits:
            raise ConfigError("q_bits must be positive")
        q = 1 << self.m_bits
        if not 1 <= self.k <= self.s <= self.t <= q:
            raise ConfigError("need 1 <= k <= s <= t <= q")
        if not self.omega_list:
            raise ConfigError("need at least one omega value")
        for om in self.omega_list:
            if not 0 <= om <= self.s:
                raise ConfigError("omega %d outside [0, s]" % om)
            if self.t + self.s - om > q:
                raise ConfigError(
                    "omega %d leaves no room for %d distinct elements in "
                    "GF(2^%d)" % (om, self.t + self.s - om, self.m_bits)
                )
        if self.variant == "blended":
            if self.blend_size < 0:
                raise ConfigError("blend_size must be >= 0")
            if self.ext_factor < 2:
                raise ConfigError("ext_factor must be >= 2")
            if self.m_bits * self.ext_factor > gf2m._TABLE_LIMIT:
                raise ConfigError(
                    "blended variant needs q_bits*ext_factor <= %d"
                    % gf2m._TABLE_LIMIT
                )

    def resolve_omegas(self):
        return tuple(sorted(set(self.omega_list)))


def parse_omega_list(text: str, s: int) -> tuple:
    """CLI omega argument: comma-separated integers or the word "all"."""
    if text.strip().lower() == "all":
        return tuple(range(s + 1))
    try:
        values = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError("bad omega list %r: %s" % (text, exc)) from None
    if not values:
        raise ConfigError("empty omega list")
    return values


@dataclass
class TrialStats:
    """Commutative counters for one cell; merging is plain addition."""

    n_trials: int = 0
    n_output: int = 0
    n_correct: int = 0
    fail_no_index: int = 0
    fail_remainder: int = 0
    fail_split: int = 0
    total_ns: int = 0

    def merge(self, other: "TrialStats") -> "TrialStats":
        return TrialStats(
            self.n_trials + other.n_trials,
            self.n_output + other.n_output,
            self.n_correct + other.n_correct,
            self.fail_no_index + other.fail_no_index,
            self.fail_remainder + other.fail_remainder,
            self.fail_split + other.fail_split,
            self.total_ns + other.total_ns,
        )

    def check(self) -> None:
        assert self.n_correct <= self.n_output <= self.n_trials
        failures = self.fail_no_index + self.fail_remainder + self.fail_split
        assert self.n_output + failures == self.n_trials


def trial_rng(seed, q_bits, t, s, k, omega, trial) -> random.Random:
    # string keying keeps streams stable across python versions and
    # independent of how trials are scheduled
    return random.Random("%d:%d:%d:%d:%d:%d:%d" % (seed, q_bits, t, s, k, omega, trial))


def draw_secret_exact(gf, k, rng):
    """Uniform polynomial of degree exactly k-1 (nonzero leading term)."""
    return [gf.rand_element(rng) for _ in range(k - 1)] + [gf.rand_nonzero(rng)]


def draw_overlapping_sets(gf, t, s, omega, rng):
    """Two feature sets with |A| = t, |B| = s and exactly omega common
    elements: omega shared draws plus disjoint private remainders."""
    pts = gf.rand_distinct(t + s - omega, rng)
    a = frozenset(pts[:t])
    b = frozenset(pts[:omega] + pts[t:])
    assert len(a & b) == omega
    return a, b


def _draw_blend(ext, base, size, rng, exclude=frozenset()):
    out = set()
    while len(out) < size:
        x = ext.rand_element(rng)
        if not ext.in_subfield(x, base) and x not in exclude:
            out.add(x)
    return frozenset(out)


@dataclass(frozen=True)
class Instance:
    """One enrolled record pair plus the ground truth the attack is
    scored against (effective sets: embedded-plus-blend for blended)."""

    rec_a: vault.VaultRecord
    rec_b: vault.VaultRecord
    set_a: frozenset
    set_b: frozenset

    @property
    def omega(self):
        return len(self.set_a & self.set_b)


def draw_instance(cfg: ExperimentConfig, omega, rng) -> Instance:
    gf = gf2m.field(cfg.m_bits)
    a, b = draw_overlapping_sets(gf, cfg.t, cfg.s, omega, rng)
    if cfg.variant == "probabilistic":
        rec_a, _ = vault.enroll_probabilistic(
            gf, sorted(a), cfg.k, rng, secret=draw_secret_exact(gf, cfg.k, rng)
        )
        rec_b, _ = vault.enroll_probabilistic(
            gf, sorted(b), cfg.k, rng, secret=draw_secret_exact(gf, cfg.k, rng)
        )
        return Instance(rec_a, rec_b, a, b)
    if cfg.variant == "deterministic":
        return Instance(
            vault.enroll_deterministic(gf, sorted(a), cfg.k),
            vault.enroll_deterministic(gf, sorted(b), cfg.k),
            a,
            b,
        )
    ext = gf2m.field(cfg.m_bits * cfg.ext_factor)
    blend_a = _draw_blend(ext, gf, cfg.blend_size, rng)
    blend_b = _draw_blend(ext, gf, cfg.blend_size, rng)
    rec_a, _ = vault.enroll_blended(
        gf, sorted(a), cfg.k, cfg.blend_size, cfg.ext_factor, rng,
        secret=draw_secret_exact(ext, cfg.k, rng), blend=blend_a,
    )
    rec_b, _ = vault.enroll_blended(
        gf, sorted(b), cfg.k, cfg.blend_size, cfg.ext_factor, rng,
        secret=draw_secret_exact(ext, cfg.k, rng), blend=blend_b,
    )
    emb_a = frozenset(ext.embed_from(gf, x) for x in a)
    emb_b = frozenset(ext.embed_from(gf, x) for x in b)
    return Instance(rec_a, rec_b, emb_a | blend_a, emb_b | blend_b)


_PARTIAL_FAIL_FIELD = {
    attack.FailureReason.NO_QUALIFYING_INDEX: "fail_no_index",
    attack.FailureReason.REMAINDER_TOO_LARGE: "fail_remainder",
    attack.FailureReason.NOT_SPLITTING: "fail_split",
}


def _count_failure(stats: TrialStats, reason) -> None:
    # post-qualification failures of the full attack (unlock, assembly,
    # verifier) are folded into the splitting bucket so the three columns
    # always partition the failed trials
    name = _PARTIAL_FAIL_FIELD.get(reason, "fail_split")
    setattr(stats, name, getattr(stats, name) + 1)


def _run_partial_trial(cfg, omega, trial, stats):
    rng = trial_rng(cfg.seed, cfg.m_bits, cfg.t, cfg.s, cfg.k, omega, trial)
    inst = draw_instance(cfg, omega, rng)
    if cfg.timing:
        t0 = time.perf_counter_ns()
        res = attack.partial_recovery(inst.rec_a, inst.rec_b, rng)
        stats.total_ns += time.perf_counter_ns() - t0
    else:
        res = attack.partial_recovery(inst.rec_a, inst.rec_b, rng)
    stats.n_trials += 1
    if isinstance(res, attack.Failure):
        _count_failure(stats, res.reason)
        return
    stats.n_output += 1
    correct = (
        res.omega_star == inst.omega
        and res.diff_a == inst.set_a - inst.set_b
        and res.diff_b == inst.set_b - inst.set_a
    )
    if correct:
        stats.n_correct += 1


def _run_full_trial(cfg, omega, trial, stats):
    rng = trial_rng(cfg.seed, cfg.m_bits, cfg.t, cfg.s, cfg.k, omega, trial)
    inst = draw_instance(cfg, omega, rng)
    def attempt():
        if cfg.budget > 0:
            return attack.brute_force_driver(
                inst.rec_a, inst.rec_b, omega, omega, cfg.budget, rng
            )
        return attack.full_recovery(inst.rec_a, inst.rec_b, omega, rng)
    if cfg.timing:
        t0 = time.perf_counter_ns()
        res = attempt()
        stats.total_ns += time.perf_counter_ns() - t0
    else:
        res = attempt()
    stats.n_trials += 1
    if isinstance(res, attack.Failure):
        _count_failure(stats, res.reason)
        return
    if isinstance(res, attack.Exhausted):
        stats.fail_split += 1
        return
    stats.n_output += 1
    if res.set_a == inst.set_a and res.set_b == inst.set_b:
        stats.n_correct += 1


def _run_cell(cfg: ExperimentConfig, omega, trial_fn) -> TrialStats:
    def run_range(lo, hi):
        stats = TrialStats()
        for trial in range(lo, hi):
            trial_fn(cfg, omega, trial, stats)
        return stats

    if cfg.threads <= 1:
        total = run_range(0, cfg.trials)
    else:
        step = -(-cfg.trials // cfg.threads)
        chunks = [
            (lo, min(lo + step, cfg.trials))
            for lo in range(0, cfg.trials, step)
        ]
        total = TrialStats()
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            for part in pool.map(lambda c: run_range(*c), chunks):
                total = total.merge(part)
    total.check()
    return total


def run_partial_cell(cfg: ExperimentConfig, omega) -> TrialStats:
    return _run_cell(cfg, omega, _run_partial_trial)


def run_full_cell(cfg: ExperimentConfig, omega) -> TrialStats:
    h = max(0, (cfg.t + cfg.k + 1) // 2 - omega)
    if h >= cfg.k and cfg.budget <= 0:
        raise ConfigError(
            "omega %d needs %d guesses per side but k is %d; use the "
            "budgeted driver for this range" % (omega, h, cfg.k)
        )
    return _run_cell(cfg, omega, _run_full_trial)


def averaged_band_limit(t, k) -> int:
    """Omegas strictly below this are far under the attack threshold; the
    partial sweep reports one row averaging over them."""
    return (t + k - 1) // 2


def _format_rate(num, den) -> str:
    return repr(num / den) if den else "0.0"


def _row(cfg, omega_label, stats: TrialStats, extra="") -> str:
    mean_ns = stats.total_ns // stats.n_trials if stats.n_trials else 0
    return (
        "%d,%d,%d,%d,%s,%d,%d,%d,%s,%s,%d,%d,%d,%d,%d%s"
        % (
            cfg.m_bits,
            cfg.t,
            cfg.s,
            cfg.k,
            omega_label,
            stats.n_trials,
            stats.n_output,
            stats.n_correct,
            _format_rate(stats.n_output, stats.n_trials),
            _format_rate(stats.n_correct, stats.n_trials),
            stats.fail_no_index,
            stats.fail_remainder,
            stats.fail_split,
            mean_ns,
            cfg.seed,
            extra,
        )
    )


def partial_experiment(cfg: ExperimentConfig) -> str:
    """Run the partial-recovery sweep; returns the complete CSV text."""
    cfg.validate()
    omegas = cfg.resolve_omegas()
    lines = [PARTIAL_HEADER]
    band = averaged_band_limit(cfg.t, cfg.k)
    banded = TrialStats()
    band_members = 0
    for omega in omegas:
        stats = run_partial_cell(cfg, omega)
        lines.append(_row(cfg, str(omega), stats))
        if omega < band:
            banded = banded.merge(stats)
            band_members += 1
    if band_members:
        lines.append(_row(cfg, "lt_%d" % band, banded))
    return "\n".join(lines) + "\n"


def full_experiment(cfg: ExperimentConfig) -> str:
    """Run the full-recovery sweep; returns the complete CSV text."""
    cfg.validate()
    q = 1 << cfg.m_bits
    lines = [FULL_HEADER]
    for omega in cfg.resolve_omegas():
        stats = run_full_cell(cfg, omega)
        lower = bounds.full_recovery_lower_bound(q, cfg.t, cfg.s, cfg.k, omega)
        value = float(lower.exact) if lower.exact is not None else 2.0 ** lower.log2_value
        lines.append(_row(cfg, str(omega), stats, extra="," + repr(value)))
    return "\n".join(lines) + "\n"
