"""Intrinsic information: conditional mutual information minimised over Eve's post-processing.

Two routes are provided. :func:`certify_zero_cmi` decides exact conditional
independence in rational arithmetic, so a witness channel either proves a
zero or it does not. :func:`intrinsic_information_upper_bound` searches
stochastic maps E -> E~ numerically and returns the best value found, which is
an upper bound on the true minimum.

The search enumerates every deterministic map up to relabelling of the
output (one per set partition of Eve's alphabet), polishes the best few with
blockwise projected gradient descent, then runs seeded random restarts.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .dist_core import JointDistribution, VariableDef, format_rational, marginal
from .errors import (
    AlphabetMismatch,
    AlphabetTooLarge,
    InvalidChannel,
    InvalidConfig,
    OverlappingGroups,
)
from .info import NEGATIVE_SLACK, clamp, conditional_mutual_information

FLOAT_ROW_TOL = 1e-12


@dataclass(frozen=True)
class Channel:
    """Row-stochastic map from ``input_alphabet`` to ``output_alphabet``.

    ``rows[i][j]`` is P(output j | input i). Rows are either all Fractions
    (an exact channel, usable as a witness) or floats.
    """

    input_alphabet: tuple[str, ...]
    output_alphabet: tuple[str, ...]
    rows: tuple[tuple, ...]

    def __post_init__(self):
        object.__setattr__(self, "input_alphabet", tuple(self.input_alphabet))
        object.__setattr__(self, "output_alphabet", tuple(self.output_alphabet))
        rows = tuple(tuple(r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        if len(rows) != len(self.input_alphabet):
            raise InvalidChannel(f"{len(rows)} rows for {len(self.input_alphabet)} input symbols")
        if len(set(self.output_alphabet)) != len(self.output_alphabet) or not self.output_alphabet:
            raise InvalidChannel("output alphabet must be non-empty with distinct symbols")
        for sym, row in zip(self.input_alphabet, rows):
            if len(row) != len(self.output_alphabet):
                raise InvalidChannel(f"row {sym} has {len(row)} entries, expected {len(self.output_alphabet)}")
            if any(p < 0 for p in row):
                raise InvalidChannel(f"row {sym} has a negative entry")
            if self.exact:
                if sum(row, Fraction(0)) != 1:
                    raise InvalidChannel(f"row {sym} sums to {sum(row, Fraction(0))}")
            elif abs(float(sum(row)) - 1.0) > FLOAT_ROW_TOL:
                raise InvalidChannel(f"row {sym} sums to {float(sum(row))!r}")

    @property
    def exact(self) -> bool:
        return all(isinstance(p, (Fraction, int)) for row in self.rows for p in row)

    @classmethod
    def identity(cls, alphabet: Sequence[str]) -> Channel:
        n = len(alphabet)
        return cls(alphabet, alphabet, [[Fraction(int(i == j)) for j in range(n)] for i in range(n)])

    @classmethod
    def deterministic(cls, input_alphabet: Sequence[str], output_alphabet: Sequence[str], mapping: Mapping[str, str]) -> Channel:
        """Exact channel sending each input symbol to ``mapping[symbol]``; unmapped symbols map to themselves."""
        out = list(output_alphabet)
        rows = []
        for sym in input_alphabet:
            target = mapping.get(sym, sym)
            if target not in out:
                raise InvalidChannel(f"{sym} maps to {target!r}, not in the output alphabet")
            rows.append([Fraction(int(o == target)) for o in out])
        return cls(input_alphabet, output_alphabet, rows)

    @classmethod
    def from_array(cls, input_alphabet: Sequence[str], output_alphabet: Sequence[str], matrix) -> Channel:
        matrix = np.asarray(matrix, dtype=float)
        return cls(input_alphabet, output_alphabet, [[float(p) for p in row] for row in matrix])

    def as_array(self) -> np.ndarray:
        return np.array([[float(p) for p in row] for row in self.rows], dtype=float)

    def as_mapping(self) -> dict[str, dict[str, str | float]]:
        """Sparse row view used in reports and witness files."""
        out = {}
        for sym, row in zip(self.input_alphabet, self.rows):
            cells = {}
            for o, p in zip(self.output_alphabet, row):
                if p:
                    cells[o] = format_rational(Fraction(p)) if isinstance(p, (Fraction, int)) else float(p)
            out[sym] = cells
        return out


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 64
    seed: int = 0
    tol: float = 1e-9
    max_sweeps: int = 400
    polish_top: int = 4
    max_alphabet: int = 8
    snap_tol: float = 1e-6

    def __post_init__(self):
        if self.restarts < 0 or self.max_sweeps < 1 or self.polish_top < 0:
            raise InvalidConfig(f"invalid optimizer budget: {self}")
        if not (self.tol > 0 and 0 < self.snap_tol < 0.5):
            raise InvalidConfig(f"invalid optimizer tolerances: {self}")


@dataclass(frozen=True)
class IntrinsicResult:
    value: float
    channel: Channel
    certified_zero: bool
    restarts_used: int
    converged: bool
    deterministic_maps: int = 0
    notes: tuple[str, ...] = field(default=())


def _check_groups(dist: JointDistribution, x: set[str], y: set[str], eve: str):
    for n in x | y | {eve}:
        dist.position(n)
    if x & y or eve in x or eve in y:
        raise OverlappingGroups("x, y and eve must be disjoint")


def apply_channel(dist: JointDistribution, var: str, ch: Channel) -> JointDistribution:
    """Replace ``var`` by its image under ``ch``; the variable keeps its name and owner.

    Only exact channels are accepted, since the result is an exact table.
    Float channels are evaluated through :func:`cmi_under_channel`.
    """
    pos = dist.position(var)
    old = dist.variables[pos]
    if tuple(ch.input_alphabet) != old.alphabet:
        raise AlphabetMismatch(f"channel input {list(ch.input_alphabet)} does not match {var}'s alphabet {list(old.alphabet)}")
    if not ch.exact:
        raise InvalidChannel("apply_channel needs an exact (rational) channel")
    rows = dict(zip(ch.input_alphabet, ch.rows))
    table: dict[tuple[str, ...], Fraction] = {}
    for outcome, p in dist.support():
        for sym, w in zip(ch.output_alphabet, rows[outcome[pos]]):
            if w:
                key = outcome[:pos] + (sym,) + outcome[pos + 1:]
                table[key] = table.get(key, Fraction(0)) + p * w
    variables = list(dist.variables)
    variables[pos] = VariableDef(old.name, ch.output_alphabet, old.owner)
    return JointDistribution(variables, table)


def joint_tensor(dist: JointDistribution, x: Iterable[str], y: Iterable[str], eve: str) -> np.ndarray:
    """Float array P[x, y, e] with the x and y groups flattened in variable order."""
    x, y = set(x), set(y)
    _check_groups(dist, x, y, eve)
    order = [v.name for v in dist.variables]
    xs = [n for n in order if n in x]
    ys = [n for n in order if n in y]
    sub = marginal(dist, x | y | {eve})
    pos = {v.name: i for i, v in enumerate(sub.variables)}
    xidx = {s: i for i, s in enumerate(itertools.product(*(sub.variable(n).alphabet for n in xs)))}
    yidx = {s: i for i, s in enumerate(itertools.product(*(sub.variable(n).alphabet for n in ys)))}
    eidx = {s: i for i, s in enumerate(sub.variable(eve).alphabet)}
    out = np.zeros((len(xidx), len(yidx), len(eidx)))
    for outcome, p in sub.support():
        xi = xidx[tuple(outcome[pos[n]] for n in xs)]
        yi = yidx[tuple(outcome[pos[n]] for n in ys)]
        out[xi, yi, eidx[outcome[pos[eve]]]] += float(p)
    return out


def _plogp_sum(a: np.ndarray, axis) -> np.ndarray:
    safe = np.where(a > 0, a, 1.0)
    return np.sum(np.where(a > 0, a * np.log2(safe), 0.0), axis=axis)


def cmi_from_tensor(P: np.ndarray, W: np.ndarray) -> np.ndarray:
    """I(X:Y|E~) for E~ = E pushed through ``W``; ``W`` may carry leading batch axes."""
    nx, ny, ne = P.shape
    Q = np.matmul(P.reshape(nx * ny, ne), W)
    Q = Q.reshape(Q.shape[:-2] + (nx, ny, Q.shape[-1]))
    h_xyz = _plogp_sum(Q, axis=(-3, -2, -1))
    h_xz = _plogp_sum(Q.sum(axis=-2), axis=(-2, -1))
    h_yz = _plogp_sum(Q.sum(axis=-3), axis=(-2, -1))
    h_z = _plogp_sum(Q.sum(axis=(-3, -2)), axis=-1)
    # sum q log q has the opposite sign of entropy
    return h_xyz - h_xz - h_yz + h_z


def _cmi_gradient(P: np.ndarray, W: np.ndarray) -> np.ndarray:
    """d I / d W for a batch of channels ``W`` of shape (B, n, m)."""
    nx, ny, ne = P.shape
    P2 = P.reshape(nx * ny, ne)
    Q = np.matmul(P2, W).reshape(W.shape[0], nx, ny, W.shape[-1])
    tiny = 1e-300
    lq = np.log2(np.maximum(Q, tiny))
    lx = np.log2(np.maximum(Q.sum(axis=2, keepdims=True), tiny))
    ly = np.log2(np.maximum(Q.sum(axis=1, keepdims=True), tiny))
    lz = np.log2(np.maximum(Q.sum(axis=(1, 2), keepdims=True), tiny))
    G = (lq - lx - ly + lz).reshape(W.shape[0], nx * ny, W.shape[-1])
    return np.matmul(P2.T, G)


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of each vector along the last axis onto the probability simplex."""
    u = np.sort(v, axis=-1)[..., ::-1]
    css = np.cumsum(u, axis=-1) - 1.0
    ks = np.arange(1, v.shape[-1] + 1)
    rho = np.sum(u - css / ks > 0, axis=-1, keepdims=True) - 1
    theta = np.take_along_axis(css, rho, axis=-1) / (rho + 1)
    w = np.maximum(v - theta, 0.0)
    return w / w.sum(axis=-1, keepdims=True)


def _descend(P: np.ndarray, W0: np.ndarray, config: OptimizerConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Blockwise projected gradient descent, one block per channel row, for a batch of starts.

    Starts never interact: every acceptance test and step size is per start,
    so each trajectory is the one it would follow alone. Returns the final
    channels, their values and per-start convergence flags.
    """
    W = W0.copy()
    B, n, _ = W.shape
    f = cmi_from_tensor(P, W)
    steps = np.ones((B, n))
    active = np.ones(B, dtype=bool)
    for _ in range(config.max_sweeps):
        start = f.copy()
        for e in range(n):
            g = _cmi_gradient(P, W)[:, e, :]
            row = W[:, e, :].copy()
            t = steps[:, e] * 2.0
            done = ~active
            for _ in range(40):
                cand = project_simplex(row - t[:, None] * g)
                trial = W.copy()
                trial[:, e, :] = cand
                ft = cmi_from_tensor(P, trial)
                decrease = np.sum(g * (row - cand), axis=-1)
                ok = ~done & (ft < f) & (ft <= f - 1e-4 * decrease)
                W[ok] = trial[ok]
                f = np.where(ok, ft, f)
                done |= ok
                if done.all():
                    break
                t = np.where(done, t, t * 0.5)
            steps[:, e] = np.where(active, np.maximum(t, 1e-12), steps[:, e])
        active &= (start - f) >= config.tol
        if not active.any():
            break
    return W, f, ~active


def set_partition_maps(n: int) -> Iterable[tuple[int, ...]]:
    """Every deterministic map of range(n) into itself up to output relabelling.

    Each set partition is represented by the map sending every element to the
    smallest element of its block, so merged symbols take the name of the
    first symbol in their group.
    """
    def grow(prefix: list[int], blocks: int):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for b in range(blocks + 1):
            yield from grow(prefix + [b], max(blocks, b + 1))

    for rgs in grow([], 0):
        first: dict[int, int] = {}
        for i, b in enumerate(rgs):
            first.setdefault(b, i)
        yield tuple(first[b] for b in rgs)


def _map_matrix(f: Sequence[int], n: int) -> np.ndarray:
    W = np.zeros((n, n))
    W[np.arange(n), list(f)] = 1.0
    return W


def cmi_under_channel(dist: JointDistribution, x: Iterable[str], y: Iterable[str], eve: str, ch: Channel) -> float:
    """I(x : y | E~) where E~ is ``eve`` pushed through ``ch``."""
    x, y = set(x), set(y)
    _check_groups(dist, x, y, eve)
    if ch.exact:
        return conditional_mutual_information(apply_channel(dist, eve, ch), x, y, {eve})
    if tuple(ch.input_alphabet) != dist.variable(eve).alphabet:
        raise AlphabetMismatch(f"channel input does not match {eve}'s alphabet")
    return clamp(float(cmi_from_tensor(joint_tensor(dist, x, y, eve), ch.as_array())))


def certify_zero_cmi(dist: JointDistribution, x: Iterable[str], y: Iterable[str], given: Iterable[str]) -> bool:
    """True iff x and y are exactly independent conditioned on every positive-probability value of ``given``."""
    x, y, g = set(x), set(y), set(given)
    for n in x | y | g:
        dist.position(n)
    if x & y or x & g or y & g:
        raise OverlappingGroups("groups must be disjoint")
    order = [v.name for v in dist.variables]
    xs, ys, gs = ([n for n in order if n in s] for s in (x, y, g))
    pos = {n: i for i, n in enumerate(order)}
    pg: dict = {}
    pxg: dict = {}
    pyg: dict = {}
    pxyg: dict = {}
    for outcome, p in dist.support():
        kg = tuple(outcome[pos[n]] for n in gs)
        kx = tuple(outcome[pos[n]] for n in xs)
        ky = tuple(outcome[pos[n]] for n in ys)
        pg[kg] = pg.get(kg, 0) + p
        pxg[kx, kg] = pxg.get((kx, kg), 0) + p
        pyg[ky, kg] = pyg.get((ky, kg), 0) + p
        pxyg[kx, ky, kg] = pxyg.get((kx, ky, kg), 0) + p
    # P(u,v,g) P(g) = P(u,g) P(v,g) for all u, v with P(g) > 0, including zero cells
    for (kx, kg), a in pxg.items():
        for (ky, kg2), b in pyg.items():
            if kg2 == kg and pxyg.get((kx, ky, kg), 0) * pg[kg] != a * b:
                return False
    return True


def _snap(W: np.ndarray, tol: float) -> np.ndarray | None:
    near0 = np.abs(W) <= tol
    near1 = np.abs(W - 1.0) <= tol
    if not np.all(near0 | near1):
        return None
    S = near1.astype(float)
    if not np.all(S.sum(axis=1) == 1):
        return None
    return S


def _exact_from_01(alphabet: Sequence[str], S: np.ndarray) -> Channel:
    return Channel(alphabet, alphabet, [[Fraction(int(v)) for v in row] for row in S])


def _rank_key(value: float, exact: bool, W: np.ndarray) -> tuple:
    return (round(value, 12), not exact, tuple(W.ravel().tolist()))


def intrinsic_information_upper_bound(
    dist: JointDistribution,
    x: Iterable[str],
    y: Iterable[str],
    eve: str,
    config: OptimizerConfig | None = None,
) -> IntrinsicResult:
    """Smallest I(x : y | E~) found over stochastic maps E -> E~ with |E~| = |E|.

    The value is an upper bound on the intrinsic information. When the best
    channel rounds to a deterministic map under which x and y are exactly
    conditionally independent, the result is a certified zero.
    """
    config = config or OptimizerConfig()
    x, y = set(x), set(y)
    _check_groups(dist, x, y, eve)
    alphabet = dist.variable(eve).alphabet
    n = len(alphabet)
    if n > config.max_alphabet:
        raise AlphabetTooLarge(f"{eve} has {n} symbols; the search is limited to {config.max_alphabet}")
    P = joint_tensor(dist, x, y, eve)

    maps = list(set_partition_maps(n))
    mats = np.stack([_map_matrix(f, n) for f in maps])
    values = cmi_from_tensor(P, mats)
    ranked = sorted(range(len(maps)), key=lambda k: _rank_key(float(values[k]), True, mats[k]))
    candidates = [(float(values[k]), True, mats[k], True) for k in ranked[: max(1, config.polish_top)]]

    def certify(S: np.ndarray) -> Channel | None:
        ch = _exact_from_01(alphabet, S)
        return ch if certify_zero_cmi(apply_channel(dist, eve, ch), x, y, {eve}) else None

    best_value, _, best_W, best_conv = candidates[0]
    if best_value < NEGATIVE_SLACK:
        witness = certify(best_W)
        if witness is not None:
            return IntrinsicResult(0.0, witness, True, 0, True, len(maps))

    starts = [c[2] for c in candidates]
    for r in range(config.restarts):
        rng = np.random.default_rng([config.seed, r])
        starts.append(rng.dirichlet(np.ones(n), size=n))
    W, f, conv = _descend(P, np.stack(starts), config)
    for k in range(len(starts)):
        candidates.append((float(f[k]), False, W[k], bool(conv[k])))
    restarts_used = config.restarts

    best_value, best_exact, best_W, best_conv = min(candidates, key=lambda c: _rank_key(c[0], c[1], c[2]))
    S = best_W if best_exact else _snap(best_W, config.snap_tol)
    if S is not None:
        snapped_value = float(cmi_from_tensor(P, S))
        if snapped_value < NEGATIVE_SLACK:
            witness = certify(S)
            if witness is not None:
                return IntrinsicResult(0.0, witness, True, restarts_used, best_conv, len(maps))
        if best_exact:
            channel = _exact_from_01(alphabet, S)
            return IntrinsicResult(clamp(best_value), channel, False, restarts_used, best_conv, len(maps))
    channel = Channel.from_array(alphabet, alphabet, best_W)
    return IntrinsicResult(clamp(best_value), channel, False, restarts_used, best_conv, len(maps))
