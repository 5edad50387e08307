"""Seeded, parallel Monte Carlo for the walk and its cycle quantities.

All randomness flows through counter-based Philox streams keyed by
(seed, purpose, stream index), so every aggregate is bit-identical for
a fixed (seed, worker count, configuration) triple.  Workers receive
the model's canonical spec text and rebuild it locally; results are
reduced in stream-index order regardless of scheduling.

Kernels keep a compact active set: finished replications are written
to their original slots and dropped from the working arrays, so memory
tracks the surviving population, not the step count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, PreconditionError
from .tailmath import IncrementModel

# stream purposes: one lane per experiment family
CYCLES, SUP, LADDER, RENEWAL, NU = range(5)

STEP_BUDGET_DEFAULT = 10 ** 9
BARRIER_DEFAULT = 1e4
ESCAPE_FLAG_LEVEL = 1e-4

Z95 = 1.959963984540054
KS_COEF_95 = 1.358


@dataclass(frozen=True)
class RngStream:
    """Counter-based stream handle; (seed, purpose, index) is the key."""

    seed: int
    purpose: int
    index: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed,
                                    spawn_key=(self.purpose, self.index))
        return np.random.Generator(np.random.Philox(ss))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngStream or a numpy Generator")


# ----------------------------------------------------------------------
# result records
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class CycleOutcome:
    tau: int
    m_tau: float
    chi: float
    steps: int


@dataclass(frozen=True)
class LadderSample:
    psi: float
    eta: int
    censored: bool


@dataclass(frozen=True)
class SupEstimate:
    m_value: float
    hit_zero_set: bool
    barrier: float
    bias_flag: bool


@dataclass
class CycleStats:
    """Streaming aggregates over simulated cycles."""

    cycles: int = 0
    steps: int = 0
    tau_sum: int = 0
    tau_sq_sum: float = 0.0
    tau_max: int = 0
    chi_sum: float = 0.0
    m_tau_max: float = 0.0
    probe_xs: tuple[float, ...] = ()
    probe_hits: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    zero_m_tau: int = 0

    def absorb(self, tau: np.ndarray, m_tau: np.ndarray, chi: np.ndarray,
               steps: int) -> None:
        self.cycles += tau.size
        self.steps += steps
        self.tau_sum += int(tau.sum())
        self.tau_sq_sum += float(np.dot(tau, tau))
        self.tau_max = max(self.tau_max, int(tau.max(initial=0)))
        self.chi_sum += float(chi.sum())
        self.m_tau_max = max(self.m_tau_max, float(m_tau.max(initial=0.0)))
        self.zero_m_tau += int(np.count_nonzero(m_tau == 0.0))
        if self.probe_xs:
            xs = np.asarray(self.probe_xs)
            self.probe_hits += (m_tau[None, :] > xs[:, None]).sum(axis=1)

    def merge(self, other: "CycleStats") -> None:
        if self.probe_xs != other.probe_xs:
            raise ValueError("cannot merge stats with different probes")
        self.cycles += other.cycles
        self.steps += other.steps
        self.tau_sum += other.tau_sum
        self.tau_sq_sum += other.tau_sq_sum
        self.tau_max = max(self.tau_max, other.tau_max)
        self.chi_sum += other.chi_sum
        self.m_tau_max = max(self.m_tau_max, other.m_tau_max)
        self.zero_m_tau += other.zero_m_tau
        self.probe_hits = self.probe_hits + other.probe_hits

    @property
    def tau_mean(self) -> float:
        return self.tau_sum / self.cycles

    @property
    def tau_se(self) -> float:
        n = self.cycles
        var = self.tau_sq_sum / n - self.tau_mean ** 2
        return math.sqrt(max(var, 0.0) / n)


@dataclass
class CycleResult:
    stats: CycleStats
    tau: np.ndarray | None = None
    m_tau: np.ndarray | None = None
    chi: np.ndarray | None = None


@dataclass
class SupBatch:
    m_values: np.ndarray
    barrier: float
    steps: int

    @property
    def hit_zero(self) -> np.ndarray:
        return self.m_values == 0.0

    @property
    def p_hat(self) -> float:
        return float(np.mean(self.hit_zero))

    def p_interval(self, z: float = Z95) -> tuple[float, float]:
        return wilson_interval(int(self.hit_zero.sum()), self.m_values.size, z)

    @property
    def escape_estimate(self) -> float:
        """Fraction of records at or above the barrier: proxy for the
        probability that stopping missed a later record."""
        return float(np.mean(self.m_values >= self.barrier))

    @property
    def bias_flag(self) -> bool:
        return self.escape_estimate > ESCAPE_FLAG_LEVEL


@dataclass
class LadderBatch:
    psi: np.ndarray
    eta: np.ndarray
    censored: np.ndarray
    barrier: float
    steps: int

    @property
    def censor_rate(self) -> float:
        return float(np.mean(self.censored))

    def uncensored_psi(self) -> np.ndarray:
        return self.psi[~self.censored]


@dataclass
class RenewalEstimate:
    xs: tuple[float, ...]
    h_values: np.ndarray
    h_se: np.ndarray
    reps: int
    raw_points: np.ndarray | None = None
    raw_reps: int = 0


# ----------------------------------------------------------------------
# batch kernels (single stream)
# ----------------------------------------------------------------------

def _budget_guard(steps: int, budget: int) -> None:
    if steps > budget:
        raise BudgetError(
            f"step budget {budget:g} exceeded at {steps:g} increments; "
            "the model may not drift to -infinity")


def _cycles_kernel(model: IncrementModel, gen: np.random.Generator, n: int,
                   step_budget: int = STEP_BUDGET_DEFAULT
                   ) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Simulate n independent cycles; returns (tau, m_tau, chi, steps)."""
    tau = np.empty(n, dtype=np.int64)
    m_tau = np.empty(n)
    chi = np.empty(n)
    S = np.zeros(n)
    Mx = np.zeros(n)
    T = np.zeros(n, dtype=np.int64)
    idx = np.arange(n)
    steps = 0
    while idx.size:
        draws = model.sample(gen, idx.size)
        steps += idx.size
        _budget_guard(steps, step_budget)
        S += draws
        T += 1
        np.maximum(Mx, S, out=Mx)
        done = S < 0.0
        if np.any(done):
            d = idx[done]
            tau[d] = T[done]
            m_tau[d] = Mx[done]
            chi[d] = -S[done]
            keep = ~done
            S, Mx, T, idx = S[keep], Mx[keep], T[keep], idx[keep]
    return tau, m_tau, chi, steps


def _sup_kernel(model: IncrementModel, gen: np.random.Generator, n: int,
                barrier: float, step_budget: int = STEP_BUDGET_DEFAULT
                ) -> tuple[np.ndarray, int]:
    """Running maxima stopped once the walk falls `barrier` below them."""
    m_values = np.empty(n)
    S = np.zeros(n)
    Mx = np.zeros(n)
    idx = np.arange(n)
    steps = 0
    while idx.size:
        draws = model.sample(gen, idx.size)
        steps += idx.size
        _budget_guard(steps, step_budget)
        S += draws
        np.maximum(Mx, S, out=Mx)
        done = S <= Mx - barrier
        if np.any(done):
            m_values[idx[done]] = Mx[done]
            keep = ~done
            S, Mx, idx = S[keep], Mx[keep], idx[keep]
    return m_values, steps


def _ladder_kernel(model: IncrementModel, gen: np.random.Generator, n: int,
                   barrier: float, step_budget: int = STEP_BUDGET_DEFAULT
                   ) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """First strict ascent (psi, eta) or censoring at -barrier."""
    psi = np.zeros(n)
    eta = np.zeros(n, dtype=np.int64)
    censored = np.zeros(n, dtype=bool)
    S = np.zeros(n)
    T = np.zeros(n, dtype=np.int64)
    idx = np.arange(n)
    steps = 0
    while idx.size:
        draws = model.sample(gen, idx.size)
        steps += idx.size
        _budget_guard(steps, step_budget)
        S += draws
        T += 1
        up = S > 0.0
        down = (~up) & (S <= -barrier)
        done = up | down
        if np.any(done):
            d = idx[done]
            psi[d] = np.where(up[done], S[done], 0.0)
            eta[d] = T[done]
            censored[d] = down[done]
            keep = ~done
            S, T, idx = S[keep], T[keep], idx[keep]
    return psi, eta, censored, steps


def _renewal_kernel(model: IncrementModel, gen: np.random.Generator, reps: int,
                    xs: tuple[float, ...], raw_reps: int = 0,
                    step_budget: int = STEP_BUDGET_DEFAULT
                    ) -> tuple[np.ndarray, np.ndarray, int]:
    """Renewal counts of the descent ladder heights chi.

    Returns (counts matrix probes x reps, raw partial-sum points from
    the first raw_reps replications, steps).  Counts exclude the n=0
    term; callers add 1.
    """
    xs_arr = np.asarray(xs, dtype=float)
    pmax = float(xs_arr[-1])
    counts = np.zeros((xs_arr.size, reps), dtype=np.int64)
    cum = np.zeros(reps)
    idx = np.arange(reps)
    raw: list[np.ndarray] = []
    steps = 0
    while idx.size:
        _, _, chi, used = _cycles_kernel(model, gen, idx.size,
                                         step_budget=step_budget - steps)
        steps += used
        cum += chi
        counts[:, idx] += cum[None, :] <= xs_arr[:, None]
        if raw_reps:
            take = (idx < raw_reps) & (cum <= pmax)
            if np.any(take):
                raw.append(cum[take].copy())
        alive = cum <= pmax
        cum, idx = cum[alive], idx[alive]
    raw_points = np.concatenate(raw) if raw else np.empty(0)
    return counts, raw_points, steps


# ----------------------------------------------------------------------
# single-sample operations
# ----------------------------------------------------------------------

def sample_increment(model: IncrementModel, rng) -> float:
    """One increment variate."""
    gen = _as_generator(rng)
    return float(model.sample(gen, 1)[0])


def _require_negative_part(model: IncrementModel) -> None:
    if not model.has_negative_part:
        raise PreconditionError(
            "increment law has no negative part; the exit time is infinite")


def run_cycle(model: IncrementModel, rng,
              step_budget: int = STEP_BUDGET_DEFAULT) -> CycleOutcome:
    """One cycle: walk until the first strictly negative partial sum."""
    _require_negative_part(model)
    gen = _as_generator(rng)
    S = 0.0
    mx = 0.0
    t = 0
    batch = 64
    while True:
        draws = model.sample(gen, batch)
        cs = S + np.cumsum(draws)
        neg = np.nonzero(cs < 0.0)[0]
        if neg.size:
            k = int(neg[0])
            mx = max(mx, float(cs[:k + 1].max()))
            t += k + 1
            _budget_guard(t, step_budget)
            return CycleOutcome(tau=t, m_tau=mx, chi=float(-cs[k]), steps=t)
        mx = max(mx, float(cs.max()))
        S = float(cs[-1])
        t += batch
        _budget_guard(t, step_budget)


def estimate_sup(model: IncrementModel, barrier: float, rng,
                 step_budget: int = STEP_BUDGET_DEFAULT) -> SupEstimate:
    """One truncated all-time-maximum sample."""
    if barrier <= 0:
        raise PreconditionError("barrier must be positive")
    _require_negative_part(model)
    gen = _as_generator(rng)
    m_values, _ = _sup_kernel(model, gen, 1, barrier, step_budget)
    m = float(m_values[0])
    return SupEstimate(m_value=m, hit_zero_set=(m == 0.0), barrier=barrier,
                       bias_flag=False)


def sample_ladder_height(model: IncrementModel, barrier: float, rng,
                         step_budget: int = STEP_BUDGET_DEFAULT) -> LadderSample:
    """One ascending ladder attempt, censored at -barrier."""
    if barrier <= 0:
        raise PreconditionError("barrier must be positive")
    gen = _as_generator(rng)
    psi, eta, censored, _ = _ladder_kernel(model, gen, 1, barrier, step_budget)
    return LadderSample(psi=float(psi[0]), eta=int(eta[0]),
                        censored=bool(censored[0]))


# ----------------------------------------------------------------------
# sharded drivers
# ----------------------------------------------------------------------

def _shard_sizes(total: int, workers: int) -> list[int]:
    base, extra = divmod(total, workers)
    return [base + (1 if i < extra else 0) for i in range(workers)]


def _worker_entry(job: str, spec_text: str, seed: int, purpose: int,
                  index: int, size: int, kwargs: dict):
    from .distspec import spec_to_model
    model = spec_to_model(spec_text)
    gen = RngStream(seed, purpose, index).generator()
    kernel = {"cycles": _cycles_kernel, "sup": _sup_kernel,
              "ladder": _ladder_kernel, "renewal": _renewal_kernel}[job]
    return kernel(model, gen, size, **kwargs)


def _run_sharded(job: str, model: IncrementModel, total: int, seed: int,
                 purpose: int, workers: int, **kwargs) -> list:
    """Run a kernel across workers; results in stream-index order."""
    if total < 1:
        raise PreconditionError("replication count must be at least 1")
    workers = max(1, int(workers))
    sizes = _shard_sizes(total, min(workers, total))
    if len(sizes) == 1:
        gen = RngStream(seed, purpose, 0).generator()
        kernel = {"cycles": _cycles_kernel, "sup": _sup_kernel,
                  "ladder": _ladder_kernel, "renewal": _renewal_kernel}[job]
        return [kernel(model, gen, sizes[0], **kwargs)]
    if not model.spec_text:
        raise PreconditionError("parallel runs need a model built from spec text")
    with ProcessPoolExecutor(max_workers=len(sizes)) as pool:
        futures = [pool.submit(_worker_entry, job, model.spec_text, seed,
                               purpose, i, sz, kwargs)
                   for i, sz in enumerate(sizes)]
        return [f.result() for f in futures]


def simulate_cycles(model: IncrementModel, cycles: int, seed: int,
                    workers: int = 1, probes=(), keep_raw: bool = False,
                    step_budget: int = STEP_BUDGET_DEFAULT,
                    chunk: int = 1 << 20) -> CycleResult:
    """Cycle ensemble with streaming aggregates.

    Raw per-cycle arrays are returned only when keep_raw is set (memory
    is 24 bytes per cycle); aggregates and probe exceedance counts are
    always collected.
    """
    _require_negative_part(model)
    probes = tuple(float(x) for x in probes)
    workers = max(1, int(workers))
    shard_results = []
    if workers == 1:
        gen = RngStream(seed, CYCLES, 0).generator()
        stats = CycleStats(probe_xs=probes,
                           probe_hits=np.zeros(len(probes), dtype=np.int64))
        raws = []
        remaining = cycles
        while remaining > 0:
            take = min(chunk, remaining)
            tau, m_tau, chi, used = _cycles_kernel(model, gen, take,
                                                   step_budget - stats.steps)
            stats.absorb(tau, m_tau, chi, used)
            if keep_raw:
                raws.append((tau, m_tau, chi))
            remaining -= take
        if keep_raw:
            return CycleResult(
                stats=stats,
                tau=np.concatenate([r[0] for r in raws]),
                m_tau=np.concatenate([r[1] for r in raws]),
                chi=np.concatenate([r[2] for r in raws]))
        return CycleResult(stats=stats)

    results = _run_sharded("cycles", model, cycles, seed, CYCLES, workers,
                           step_budget=step_budget)
    stats = CycleStats(probe_xs=probes,
                       probe_hits=np.zeros(len(probes), dtype=np.int64))
    for tau, m_tau, chi, used in results:
        stats.absorb(tau, m_tau, chi, used)
        if keep_raw:
            shard_results.append((tau, m_tau, chi))
    if keep_raw:
        return CycleResult(
            stats=stats,
            tau=np.concatenate([r[0] for r in shard_results]),
            m_tau=np.concatenate([r[1] for r in shard_results]),
            chi=np.concatenate([r[2] for r in shard_results]))
    return CycleResult(stats=stats)


def estimate_sup_many(model: IncrementModel, reps: int, seed: int,
                      barrier: float = BARRIER_DEFAULT, workers: int = 1,
                      step_budget: int = STEP_BUDGET_DEFAULT) -> SupBatch:
    if barrier <= 0:
        raise PreconditionError("barrier must be positive")
    _require_negative_part(model)
    results = _run_sharded("sup", model, reps, seed, SUP, workers,
                           barrier=barrier, step_budget=step_budget)
    m_values = np.concatenate([r[0] for r in results])
    steps = sum(r[1] for r in results)
    return SupBatch(m_values=m_values, barrier=barrier, steps=steps)


def sample_ladder_many(model: IncrementModel, reps: int, seed: int,
                       barrier: float = BARRIER_DEFAULT, workers: int = 1,
                       step_budget: int = STEP_BUDGET_DEFAULT) -> LadderBatch:
    if barrier <= 0:
        raise PreconditionError("barrier must be positive")
    results = _run_sharded("ladder", model, reps, seed, LADDER, workers,
                           barrier=barrier, step_budget=step_budget)
    return LadderBatch(psi=np.concatenate([r[0] for r in results]),
                       eta=np.concatenate([r[1] for r in results]),
                       censored=np.concatenate([r[2] for r in results]),
                       barrier=barrier,
                       steps=sum(r[3] for r in results))


def renewal_estimate(model: IncrementModel, xs, reps: int, seed: int,
                     workers: int = 1, raw_reps: int = 0,
                     step_budget: int = STEP_BUDGET_DEFAULT) -> RenewalEstimate:
    """Estimate the descent renewal function on probes.

    H(x) = 1 + mean count of partial chi-sums at or below x; the n=0
    renewal contributes the leading 1.  Raw partial-sum points are
    collected from the first `raw_reps` replications of stream 0.
    """
    xs = tuple(sorted(float(x) for x in xs))
    if any(x < 0 for x in xs):
        raise PreconditionError("renewal probes must be nonnegative")
    _require_negative_part(model)
    workers = max(1, int(workers))
    sizes = _shard_sizes(reps, min(workers, reps))
    raw_reps = min(raw_reps, sizes[0])
    results = _run_sharded("renewal", model, reps, seed, RENEWAL, workers,
                           xs=xs, raw_reps=raw_reps, step_budget=step_budget)
    counts = np.concatenate([r[0] for r in results], axis=1)
    raw_points = results[0][1]
    h = 1.0 + counts.mean(axis=1)
    se = counts.std(axis=1, ddof=1) / math.sqrt(reps) if reps > 1 \
        else np.zeros(len(xs))
    return RenewalEstimate(xs=xs, h_values=h, h_se=se, reps=reps,
                           raw_points=raw_points if raw_reps else None,
                           raw_reps=raw_reps)


def mtau_tail_estimate(model: IncrementModel, xs, cycles: int, seed: int,
                       workers: int = 1,
                       step_budget: int = STEP_BUDGET_DEFAULT):
    """Exceedance curve of the cycle maximum with Wilson intervals.

    Returns (stats, rows) where rows are (x, p_hat, ci_lo, ci_hi, hits).
    """
    xs = tuple(float(x) for x in xs)
    result = simulate_cycles(model, cycles, seed, workers=workers, probes=xs,
                             step_budget=step_budget)
    rows = []
    for x, hits in zip(xs, result.stats.probe_hits):
        lo, hi = wilson_interval(int(hits), cycles)
        rows.append((x, hits / cycles, lo, hi, int(hits)))
    return result.stats, rows


# ----------------------------------------------------------------------
# statistics helpers
# ----------------------------------------------------------------------

def wilson_interval(k: int, n: int, z: float = Z95) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("need at least one trial")
    ph = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (ph + z2 / (2.0 * n)) / denom
    half = z * math.sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n)) / denom
    # at the boundary counts the exact endpoints avoid rounding residue
    lo = 0.0 if k == 0 else max(0.0, center - half)
    hi = 1.0 if k == n else min(1.0, center + half)
    return lo, hi


def ks_two_sample(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov sup distance."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def ks_threshold(n: int, m: int, coef: float = KS_COEF_95) -> float:
    """Large-sample 95% two-sample KS critical distance."""
    return coef * math.sqrt((n + m) / (n * m))
