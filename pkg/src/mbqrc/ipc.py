"""Information processing capacity of a readout matrix.

Targets are products of Legendre polynomials of delayed inputs,

    y_k = prod_i P_{d_i}(2 s_{k-i} - 1),    total degree d = sum_i d_i,

each reconstructed by a least-squares linear readout (plus bias) trained on
the first half of the rows and scored on the second half.  A capacity
counts only if it exceeds a surrogate threshold: the mean plus ``n_sigma``
standard deviations of the capacities of the same target cyclically
shifted against the readout, which removes the finite-sample bias.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
from itertools import combinations, permutations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .streams import substream

DEFAULT_MAX_DELAY = {1: 200, 2: 60, 3: 30, 4: 20, 5: 16, 6: 14}


def legendre(d: int, x):
    """Legendre polynomial ``P_d(x)`` by Bonnet's recursion."""
    if d < 0:
        raise ValueError("degree must be non-negative")
    x = np.asarray(x, dtype=float)
    p_prev, p = np.ones_like(x), x.copy()
    if d == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    for k in range(1, d):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    return p if p.ndim else float(p)


@dataclass(frozen=True, order=True)
class TargetSpec:
    """Delayed-input monomial: ``((delay, degree), ...)`` with distinct delays >= 1."""

    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not self.factors:
            raise ValueError("empty target spec")
        delays = [f[0] for f in self.factors]
        if len(set(delays)) != len(delays):
            raise ValueError("delays must be distinct")
        if min(delays) < 1 or min(f[1] for f in self.factors) < 1:
            raise ValueError("delays and degrees must be >= 1")
        object.__setattr__(self, "factors", tuple(sorted(tuple(f) for f in self.factors)))

    @property
    def degree(self) -> int:
        return sum(f[1] for f in self.factors)

    @property
    def max_delay(self) -> int:
        return max(f[0] for f in self.factors)

    @property
    def label(self) -> str:
        return "|".join(f"{i}:{d}" for i, d in self.factors)

    @classmethod
    def parse(cls, label: str) -> "TargetSpec":
        return cls(tuple(tuple(int(v) for v in part.split(":")) for part in label.split("|")))


def build_target(spec: TargetSpec, inputs: Sequence[float]) -> np.ndarray:
    """Target values for every time ``k`` with full history.

    Entry ``j`` corresponds to ``k = j + spec.max_delay``; earlier times lack
    the inputs the target depends on and are dropped.
    """
    s = 2.0 * np.asarray(inputs, dtype=float) - 1.0
    T = spec.max_delay
    if len(s) <= T - 1:
        raise ValueError("input sequence shorter than the target's delay")
    k = np.arange(T, len(s) + 1)
    y = np.ones(len(k))
    for delay, deg in spec.factors:
        y *= legendre(deg, s[k - delay])
    return y


def with_bias(X: np.ndarray) -> np.ndarray:
    return np.hstack([np.asarray(X, dtype=float), np.ones((len(X), 1))])


def train_readout(X: np.ndarray, y: np.ndarray, rcond: float = 1e-10) -> np.ndarray:
    """Least-squares weights minimizing ``|y - X w|^2`` (SVD, relative cutoff ``rcond``).

    ``X`` should already contain the bias column.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.shape[0] < X.shape[1]:
        raise ValueError("need at least as many rows as columns")
    if not np.any(y):
        raise ValueError("degenerate all-zero target")
    w, *_ = np.linalg.lstsq(X, y, rcond=rcond)
    return w


def capacity(y_pred: np.ndarray, y_true: np.ndarray, clip: bool = True) -> float:
    """``1 - MSE(y_pred, y_true) / <y_true^2>``, clipped below at 0 by default."""
    y_pred = np.asarray(y_pred, dtype=float)
    y_true = np.asarray(y_true, dtype=float)
    if y_pred.shape != y_true.shape or y_true.size == 0:
        raise ValueError("predictions and targets must have equal nonzero length")
    power = np.mean(y_true**2)
    if power == 0:
        raise ValueError("target has zero power")
    c = 1.0 - np.mean((y_pred - y_true) ** 2) / power
    return max(c, 0.0) if clip else float(c)


def partitions(d: int, largest: int | None = None):
    """Integer partitions of ``d`` as non-increasing tuples."""
    largest = d if largest is None else largest
    if d == 0:
        yield ()
        return
    for first in range(min(d, largest), 0, -1):
        for rest in partitions(d - first, first):
            yield (first,) + rest


def level_specs(parts: tuple[int, ...], T: int) -> list[TargetSpec]:
    """All targets of a degree family whose largest delay is exactly ``T``.

    Ordered by increasing window (span of delays).
    """
    k = len(parts)
    if T < k:
        return []
    assigns = sorted(set(permutations(parts)))
    out = []
    combos = sorted(combinations(range(1, T), k - 1), key=lambda c: (-(c[0] if c else T), c))
    for c in combos:
        delays = c + (T,)
        for a in assigns:
            out.append(TargetSpec(tuple(zip(delays, a))))
    return out


@dataclass(frozen=True)
class IPCSettings:
    d_max: int = 6
    max_delay: dict = field(default_factory=lambda: dict(DEFAULT_MAX_DELAY))
    stop_after: int = 5
    n_surrogates: int = 20
    min_shift: int = 100
    n_sigma: float = 3.0
    rcond: float = 1e-10
    seed: int = 0
    chunk: int = 256
    alive_factor: float = 2.0

    def __post_init__(self):
        if self.d_max < 1 or self.stop_after < 1 or self.n_surrogates < 2:
            raise ValueError("need d_max >= 1, stop_after >= 1 and n_surrogates >= 2")

    def delay_cap(self, d: int) -> int:
        caps = {int(k): int(v) for k, v in self.max_delay.items()}
        return caps.get(d, caps[max(caps)])


@dataclass
class CapacityRecord:
    spec: TargetSpec
    capacity: float  # raw test-set capacity, may be negative
    threshold: float  # nan when no surrogates were needed (capacity <= 0)
    retained: bool

    @property
    def degree(self) -> int:
        return self.spec.degree

    @property
    def contribution(self) -> float:
        return min(self.capacity, 1.0) if self.retained else 0.0


@dataclass
class CapacityReport:
    records: list[CapacityRecord]
    n_outputs: int  # M, readout columns excluding the bias
    settings: IPCSettings
    reached_delay: dict = field(default_factory=dict)  # family -> largest delay probed

    def by_degree(self) -> dict[int, float]:
        out = {d: 0.0 for d in range(1, self.settings.d_max + 1)}
        for r in self.records:
            out[r.degree] += r.contribution
        return out

    @property
    def raw_total(self) -> float:
        """Sum of retained contributions over all probed degrees."""
        return float(sum(self.by_degree().values()))

    @property
    def overshoot(self) -> float:
        """Amount by which :attr:`raw_total` exceeds the bound ``M``.

        Exact capacities of orthogonal targets cannot sum past ``M``; any
        excess comes from chance threshold crossings of finite-sample noise.
        """
        return max(self.raw_total - self.n_outputs, 0.0)

    @property
    def total(self) -> float:
        """``I_tot``, the retained sum restricted to ``[0, M]``."""
        return min(self.raw_total, float(self.n_outputs))

    @property
    def normalized(self) -> float:
        return self.total / self.n_outputs

    @property
    def residual(self) -> float:
        """Part of the bound ``M`` not accounted for by degrees 1..d_max."""
        return self.n_outputs - self.total

    def odd_even(self) -> dict[str, float]:
        """Retained capacity and threshold sums split by degree parity."""
        out = {"odd_capacity": 0.0, "odd_threshold": 0.0, "even_capacity": 0.0, "even_threshold": 0.0}
        for r in self.records:
            if r.retained:
                key = "odd" if r.degree % 2 else "even"
                out[f"{key}_capacity"] += r.contribution
                out[f"{key}_threshold"] += max(r.threshold, 0.0)
        return out

    def summary(self) -> dict:
        row = {f"I_{d}": v for d, v in self.by_degree().items()}
        row.update(I_tot=self.total, M=self.n_outputs, normalized=self.normalized, residual=self.residual)
        row.update(raw_total=self.raw_total, overshoot=self.overshoot)
        row.update(self.odd_even())
        row["n_targets"] = len(self.records)
        row["n_retained"] = sum(r.retained for r in self.records)
        return row

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["target", "degree", "capacity", "threshold", "retained"])
            for r in self.records:
                w.writerow([r.spec.label, r.degree, repr(r.capacity), repr(r.threshold), int(r.retained)])

    def write_summary_csv(self, path: str | Path) -> None:
        row = self.summary()
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(list(row))
            w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row.values()])


class CapacityEstimator:
    """Scores batches of targets against one readout matrix.

    ``X[j]`` must be the readout measured after injecting
    ``inputs[len(inputs) - len(X) + j]``; a target of delay 1 at that row is
    that most recent input.  Leading rows without enough input history for
    the longest delay ``history`` are dropped.  The remaining rows are split
    into equal train and test halves.
    """

    def __init__(self, X: np.ndarray, inputs: Sequence[float], settings: IPCSettings, history: int):
        X = np.asarray(X, dtype=float)
        inputs = np.asarray(inputs, dtype=float)
        off = len(inputs) - len(X)
        if off < 0:
            raise ValueError("need at least one input per readout row")
        j0 = max(0, history - 1 - off)
        n_half = (len(X) - j0) // 2
        if n_half <= 2 * settings.min_shift or n_half < X.shape[1] + 1:
            raise ValueError("insufficient data rows for train/test split")
        self.settings = settings
        self.n_outputs = X.shape[1]
        self.n_half = n_half
        Xb = with_bias(X[j0 : j0 + 2 * n_half])
        self.X_test = Xb[n_half:]
        self.gram = self.X_test.T @ self.X_test / n_half
        U, S, Vt = np.linalg.svd(Xb[:n_half], full_matrices=False)
        keep = S > settings.rcond * S[0]
        self.pinv = (Vt[keep].T / S[keep]) @ U[:, keep].T
        # row j of the used block saw inputs[self.base + j] last
        self.base = off + j0
        s_tilde = 2.0 * inputs - 1.0
        self.leg = np.stack([legendre(d, s_tilde) for d in range(settings.d_max + 1)])
        self.rows = np.arange(2 * n_half)
        # windows[d, t] = P_d of the 2 * n_half inputs starting at inputs[t]
        self.windows = np.lib.stride_tricks.sliding_window_view(self.leg, 2 * n_half, axis=1)

    def targets(self, specs: Sequence[TargetSpec]) -> np.ndarray:
        """Target matrix of shape ``(len(specs), 2 * n_half)``, one target per row."""
        Y = np.empty((len(specs), len(self.rows)))
        by_len: dict[int, list[int]] = {}
        for i, spec in enumerate(specs):
            by_len.setdefault(len(spec.factors), []).append(i)
        for k, idx in by_len.items():
            f = np.array([specs[i].factors for i in idx])  # (n, k, 2): delay, degree
            starts = self.base + 1 - f[:, :, 0]
            prod = self.windows[f[:, 0, 1], starts[:, 0]]
            for j in range(1, k):
                prod *= self.windows[f[:, j, 1], starts[:, j]]
            Y[idx] = prod
        return Y

    def _score(self, Y_train: np.ndarray, Y_test: np.ndarray) -> np.ndarray:
        """Test capacities of row-stacked targets.

        Uses ``MSE = w'Gw - 2 w'X'y/n + <y^2>`` with ``G = X'X/n`` on the test
        block, so predictions are never materialized.
        """
        W = Y_train @ self.pinv.T
        c = Y_test @ self.X_test / self.n_half
        power = np.einsum("ij,ij->i", Y_test, Y_test) / self.n_half
        mse = np.einsum("ij,jk,ik->i", W, self.gram, W) - 2 * np.einsum("ij,ij->i", W, c) + power
        return 1.0 - mse / power

    def capacities(self, Y: np.ndarray) -> np.ndarray:
        """Raw (unclipped) test capacities of each row of ``Y``."""
        return self._score(Y[:, : self.n_half], Y[:, self.n_half :])

    def threshold(self, spec: TargetSpec, y: np.ndarray) -> float:
        """Mean + ``n_sigma`` std of capacities of cyclically shifted copies of ``y``."""
        st = self.settings
        rng = substream(st.seed, "surrogate", *[v for f in spec.factors for v in f])
        shifts = rng.integers(st.min_shift, self.n_half - st.min_shift, size=st.n_surrogates)
        idx = (np.arange(self.n_half)[None, :] - shifts[:, None]) % self.n_half
        c = self._score(y[: self.n_half][idx], y[self.n_half :][idx])
        return float(np.mean(c) + st.n_sigma * np.std(c, ddof=1))

    def evaluate(self, specs: Sequence[TargetSpec]) -> list[CapacityRecord]:
        out = []
        # bound the target block to about 128 MB whatever the sample size
        chunk = max(8, min(self.settings.chunk, 2**24 // (2 * self.n_half)))
        for start in range(0, len(specs), chunk):
            batch = specs[start : start + chunk]
            Y = self.targets(batch)
            caps = self.capacities(Y)
            for col, (spec, c) in enumerate(zip(batch, caps)):
                if c > 0:
                    thr = self.threshold(spec, Y[col])
                    out.append(CapacityRecord(spec, float(c), thr, bool(c > thr)))
                else:
                    out.append(CapacityRecord(spec, float(c), float("nan"), False))
        return out


def level_alive(records: Sequence[CapacityRecord], factor: float = 2.0) -> bool:
    """Whether a delay level carries capacity beyond marginal threshold crossings.

    A large level of pure-noise targets almost always has a few members just
    above their thresholds; requiring the retained capacity to exceed
    ``factor`` times the retained thresholds keeps such levels from holding a
    family open.
    """
    kept = [r for r in records if r.retained]
    if not kept:
        return False
    return sum(r.contribution for r in kept) > factor * sum(max(r.threshold, 0.0) for r in kept)


def total_ipc(
    X: np.ndarray,
    inputs: Sequence[float],
    settings: IPCSettings | None = None,
    degrees: Iterable[int] | None = None,
) -> CapacityReport:
    """Degree-resolved capacity of readout ``X`` driven by ``inputs``.

    Degree 1 probes every delay up to its cap.  For higher degrees each
    family (integer partition of the degree) is probed by increasing largest
    delay; a family stops after ``stop_after`` consecutive levels that are not
    alive (see :func:`level_alive`), or at the degree's delay cap.
    """
    settings = settings or IPCSettings()
    degrees = list(degrees) if degrees is not None else list(range(1, settings.d_max + 1))
    history = max(settings.delay_cap(d) for d in degrees)
    est = CapacityEstimator(X, inputs, settings, history)
    records: list[CapacityRecord] = []
    reached = {}
    for d in degrees:
        cap = settings.delay_cap(d)
        for parts in partitions(d):
            dead = 0
            T = len(parts) - 1
            for T in range(len(parts), cap + 1):
                recs = est.evaluate(level_specs(parts, T))
                records.extend(recs)
                dead = 0 if level_alive(recs, settings.alive_factor) else dead + 1
                if d > 1 and dead >= settings.stop_after:
                    break
            reached[parts] = T
    return CapacityReport(records, est.n_outputs, settings, reached)


def settings_dict(settings: IPCSettings) -> dict:
    return asdict(settings)
