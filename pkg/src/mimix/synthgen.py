"""Seeded synthetic distributions with known mutual information.

Every generator takes an integer seed and is a deterministic function of
its arguments. Independent streams for repeated trials come from
:func:`child_seed`, which derives a seed from a master seed and a position.

Distributions
-------------
exp1
    Equal-weight mixture of a correlated bivariate normal (correlation 0.9)
    and four atoms at (+-1, +-1) with masses 0.45, 0.45, 0.05, 0.05.
exp2
    X uniform on {0, ..., m-1}; Y uniform on [X, X + 2].
exp3
    ``dims`` independent exp2 pairs. The second pair has its roles swapped:
    the discrete coordinate sits on the Y side.
exp4
    X ~ Exp(1); Y = 0 with probability p, otherwise Y ~ Poisson(X).
featsel
    Twenty i.i.d. Exp(1) features observed through zero-inflated Poisson
    noise; the target is the first five features observed through
    zero-inflated exponential noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats

from .core import Dataset, ParameterError, validate_dataset

GENERATORS = ("exp1", "exp2", "exp3", "exp4", "featsel")

EXP1_CORRELATION = 0.9
EXP1_ATOMS = np.array([[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]])
EXP1_ATOM_PROBS = np.array([0.45, 0.45, 0.05, 0.05])


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def child_seed(master_seed: int, *position: int) -> int:
    """64-bit seed for the stream at ``position`` under ``master_seed``.

    Depends only on the master seed and the position, so any single trial
    can be regenerated on its own.
    """
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(p) for p in position))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _check_n(n: int) -> None:
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n!r}")


def _check_m(m: int) -> None:
    if int(m) != m or m < 2:
        raise ParameterError(f"m must be an integer >= 2, got {m!r}")


def _check_unit(name: str, value: float) -> None:
    if not 0 <= value < 1:
        raise ParameterError(f"{name} must lie in [0, 1), got {value!r}")


def gen_exp1(n: int, seed: int) -> Dataset:
    _check_n(n)
    rng = _rng(seed)
    continuous = rng.random(n) < 0.5
    r = EXP1_CORRELATION
    z1 = rng.standard_normal(n)
    z2 = rng.standard_normal(n)
    gauss = np.column_stack([z1, r * z1 + math.sqrt(1 - r * r) * z2])
    atoms = EXP1_ATOMS[rng.choice(4, size=n, p=EXP1_ATOM_PROBS)]
    xy = np.where(continuous[:, None], gauss, atoms)
    return validate_dataset(xy[:, 0], xy[:, 1])


def _exp2_pair(n: int, m: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    d = rng.integers(0, m, size=n).astype(np.float64)
    c = d + rng.uniform(0.0, 2.0, size=n)
    return d, c


def gen_exp2(n: int, m: int = 5, seed: int = 0) -> Dataset:
    _check_n(n)
    _check_m(m)
    x, y = _exp2_pair(n, m, _rng(seed))
    return validate_dataset(x, y)


def gen_exp3(n: int, m: int = 5, dims: int = 2, seed: int = 0) -> Dataset:
    _check_n(n)
    _check_m(m)
    if dims not in (2, 3):
        raise ParameterError(f"dims must be 2 or 3, got {dims!r}")
    rng = _rng(seed)
    xs, ys = [], []
    for pair in range(dims):
        d, c = _exp2_pair(n, m, rng)
        if pair == 1:
            # second pair is (Y2, X2): discrete part on the Y side
            xs.append(c)
            ys.append(d)
        else:
            xs.append(d)
            ys.append(c)
    return validate_dataset(np.column_stack(xs), np.column_stack(ys))


def gen_exp4(n: int, p: float = 0.0, seed: int = 0) -> Dataset:
    _check_n(n)
    _check_unit("p", p)
    rng = _rng(seed)
    x = rng.exponential(1.0, size=n)
    y = rng.poisson(x).astype(np.float64)
    y[rng.random(n) < p] = 0.0
    return validate_dataset(x, y)


def apply_dropout(table, level: float, seed: int) -> np.ndarray:
    """Zero each entry independently with probability ``level``."""
    _check_unit("dropout level", level)
    arr = np.array(table, dtype=np.float64, copy=True)
    if level == 0:
        return arr
    arr[_rng(seed).random(arr.shape) < level] = 0.0
    return arr


@dataclass(frozen=True)
class FeatureSelectionData:
    features: np.ndarray
    target: np.ndarray
    relevant: np.ndarray

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def feature_dataset(self, i: int) -> Dataset:
        return validate_dataset(self.features[:, i], self.target)


def gen_featsel(n: int, p_total: int = 20, q_relevant: int = 5, dropout: float = 0.15, seed: int = 0,
                target_noise: str = "exp") -> FeatureSelectionData:
    """Feature-selection benchmark: which observed features carry target information.

    With probability ``dropout`` an observation is 0; otherwise a feature
    value v is observed as Poisson(v) and a target value as an exponential
    with mean v (``target_noise="exp"``) or as Poisson(v)
    (``target_noise="poisson"``).
    """
    _check_n(n)
    if int(p_total) != p_total or p_total < 1 or int(q_relevant) != q_relevant or q_relevant < 1:
        raise ParameterError("p_total and q_relevant must be positive integers")
    if q_relevant > p_total:
        raise ParameterError(f"q_relevant={q_relevant} exceeds p_total={p_total}")
    _check_unit("dropout", dropout)
    if target_noise not in ("exp", "poisson"):
        raise ParameterError(f"target_noise must be 'exp' or 'poisson', got {target_noise!r}")
    rng = _rng(seed)
    latent = rng.exponential(1.0, size=(n, p_total))
    features = rng.poisson(latent).astype(np.float64)
    features[rng.random((n, p_total)) < dropout] = 0.0
    truth = latent[:, :q_relevant]
    if target_noise == "exp":
        target = rng.exponential(truth)
    else:
        target = rng.poisson(truth).astype(np.float64)
    target[rng.random((n, q_relevant)) < dropout] = 0.0
    relevant = np.zeros(p_total, dtype=bool)
    relevant[:q_relevant] = True
    return FeatureSelectionData(features, target, relevant)


def gen_sem_network(n: int, n_genes: int = 20, edge_prob: float = 0.15, seed: int = 0,
                    weight_range: tuple[float, float] = (0.5, 1.0)) -> tuple[np.ndarray, np.ndarray]:
    """Linear structural equation model on a random DAG.

    Returns ``(expression, edges)``: an ``n x n_genes`` table and an array of
    (parent, child) index pairs. Each gene is a weighted sum of its parents
    plus unit Gaussian noise, with random-sign weights.
    """
    _check_n(n)
    if n_genes < 3:
        raise ParameterError("need at least 3 genes")
    rng = _rng(seed)
    adj = np.triu(rng.random((n_genes, n_genes)) < edge_prob, k=1)
    weights = rng.uniform(*weight_range, size=adj.shape) * rng.choice([-1.0, 1.0], size=adj.shape)
    expr = np.zeros((n, n_genes))
    for g in range(n_genes):
        parents = np.flatnonzero(adj[:, g])
        expr[:, g] = rng.standard_normal(n)
        if parents.size:
            expr[:, g] += expr[:, parents] @ weights[parents, g]
    return expr, np.argwhere(adj)


@dataclass(frozen=True)
class GeneratorSpec:
    """A named distribution with its parameters and seed."""

    name: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.name not in GENERATORS:
            raise ParameterError(f"unknown generator {self.name!r}; choose from {GENERATORS}")
        defaults = _DEFAULT_PARAMS[self.name]
        unknown = set(self.params) - set(defaults)
        if unknown:
            raise ParameterError(f"unknown parameters for {self.name}: {sorted(unknown)}")
        merged = {**defaults, **self.params}
        object.__setattr__(self, "params", merged)
        if "m" in merged:
            _check_m(merged["m"])
        if "p" in merged:
            _check_unit("p", merged["p"])
        if "dims" in merged and merged["dims"] not in (2, 3):
            raise ParameterError(f"dims must be 2 or 3, got {merged['dims']!r}")
        if "dropout" in merged:
            _check_unit("dropout", merged["dropout"])

    def with_seed(self, seed: int) -> "GeneratorSpec":
        return GeneratorSpec(self.name, dict(self.params), seed)

    def to_dict(self) -> dict:
        return {"name": self.name, "params": dict(self.params), "seed": int(self.seed)}


_DEFAULT_PARAMS = {
    "exp1": {},
    "exp2": {"m": 5},
    "exp3": {"m": 5, "dims": 2},
    "exp4": {"p": 0.0},
    "featsel": {"p_total": 20, "q_relevant": 5, "dropout": 0.15, "target_noise": "exp"},
}


def generate(spec: GeneratorSpec, n: int):
    """Draw ``n`` samples from ``spec`` (featsel returns FeatureSelectionData)."""
    p = spec.params
    if spec.name == "exp1":
        return gen_exp1(n, spec.seed)
    if spec.name == "exp2":
        return gen_exp2(n, p["m"], spec.seed)
    if spec.name == "exp3":
        return gen_exp3(n, p["m"], p["dims"], spec.seed)
    if spec.name == "exp4":
        return gen_exp4(n, p["p"], spec.seed)
    return gen_featsel(n, p["p_total"], p["q_relevant"], p["dropout"], spec.seed, p["target_noise"])


# ground truth


@dataclass(frozen=True)
class GroundTruth:
    value: float
    provenance: str
    error: float = 0.0

    def to_dict(self) -> dict:
        return {"value": float(self.value), "provenance": self.provenance, "error": float(self.error)}


def exp2_mi(m: int) -> float:
    return math.log(m) - (m - 1) * math.log(2) / m


def exp4_series(p: float, tol: float = 1e-15) -> tuple[float, int, float]:
    """(1 - p)(2 log 2 - gamma - sum_k log(k) 2^-k), truncated once terms drop below ``tol``.

    Returns the value, the number of series terms used and a bound on the
    truncation error. For k >= 3 each term is at most 3/4 of the previous
    one, so the tail is bounded by three times the last term kept.
    """
    terms = []
    k = 1
    while True:
        t = math.log(k) * 2.0 ** -k
        terms.append(t)
        if k >= 3 and t < tol:
            break
        k += 1
    series = math.fsum(terms)
    value = (1 - p) * (2 * math.log(2) - np.euler_gamma - series)
    return value, k, (1 - p) * 3 * terms[-1]


def exp4_mi_quadrature(p: float, y_max: int = 80) -> float:
    """Exact MI of the zero-inflated Poissonization by numerical integration.

    Differs from the closed form of :func:`exp4_series` when p > 0, because
    a zero from the inflation and a Poisson zero cannot be told apart.
    """
    total = []
    for y in range(y_max + 1):
        p_y = (p if y == 0 else 0.0) + (1 - p) * 2.0 ** -(y + 1)

        def integrand(x, y=y, p_y=p_y):
            p_yx = (p if y == 0 else 0.0) + (1 - p) * stats.poisson.pmf(y, x)
            if p_yx <= 0:
                return 0.0
            return math.exp(-x) * p_yx * math.log(p_yx / p_y)

        total.append(integrate.quad(integrand, 0, np.inf, limit=200, epsabs=1e-13)[0])
    return math.fsum(total)


def _exp1_atom_part() -> float:
    # marginal mass of each of x = +-1 (and y = +-1) is 0.5 * 0.5
    joint = 0.5 * EXP1_ATOM_PROBS
    return math.fsum((joint * np.log(joint / 0.0625)).tolist())


def _exp1_log_ratio_continuous(x, y):
    """log of dP_XY / d(P_X x P_Y) at non-atom points: log(2 g(x, y) / (phi(x) phi(y)))."""
    r = EXP1_CORRELATION
    one_m = 1 - r * r
    log_g = -math.log(2 * math.pi) - 0.5 * math.log(one_m) - (x * x - 2 * r * x * y + y * y) / (2 * one_m)
    log_phi = -0.5 * math.log(2 * math.pi) - 0.5 * x * x
    log_phi_y = -0.5 * math.log(2 * math.pi) - 0.5 * y * y
    return math.log(2.0) + log_g - log_phi - log_phi_y


def exp1_mi_quadrature() -> GroundTruth:
    """Atom sum plus adaptive 2-D quadrature over the Gaussian half."""
    r = EXP1_CORRELATION
    one_m = 1 - r * r

    def integrand(y, x):
        log_g = -math.log(2 * math.pi) - 0.5 * math.log(one_m) - (x * x - 2 * r * x * y + y * y) / (2 * one_m)
        return 0.5 * math.exp(log_g) * _exp1_log_ratio_continuous(x, y)

    # Y | X = x is N(0.9 x, 0.19); integrate 12 conditional sd around the mean
    sd = math.sqrt(one_m)
    cont, err = integrate.dblquad(integrand, -12.0, 12.0, lambda x: r * x - 12 * sd, lambda x: r * x + 12 * sd,
                                  epsabs=1e-11, epsrel=1e-11)
    return GroundTruth(_exp1_atom_part() + cont, "quadrature", max(err, 1e-9))


def exp1_mi_monte_carlo(n: int = 10_000_000, seed: int = 20170523, chunk: int = 1_000_000) -> GroundTruth:
    """Monte Carlo mean of the log Radon-Nikodym derivative; error is 3 standard errors."""
    rng = _rng(seed)
    r = EXP1_CORRELATION
    one_m = 1 - r * r
    sums, sq = [], []
    atom_log = np.log(0.5 * EXP1_ATOM_PROBS / 0.0625)
    done = 0
    while done < n:
        m = min(chunk, n - done)
        continuous = rng.random(m) < 0.5
        z1 = rng.standard_normal(m)
        z2 = rng.standard_normal(m)
        x, y = z1, r * z1 + math.sqrt(one_m) * z2
        cont = (math.log(2.0) - 0.5 * math.log(one_m)
                - (x * x - 2 * r * x * y + y * y) / (2 * one_m) + 0.5 * (x * x + y * y))
        vals = np.where(continuous, cont, atom_log[rng.choice(4, size=m, p=EXP1_ATOM_PROBS)])
        sums.append(math.fsum(vals.tolist()))
        sq.append(math.fsum((vals * vals).tolist()))
        done += m
    mean = math.fsum(sums) / n
    var = math.fsum(sq) / n - mean * mean
    return GroundTruth(mean, "monte-carlo", 3 * math.sqrt(var / n))


def ground_truth(spec: GeneratorSpec) -> GroundTruth:
    """True I(X; Y) in nats for a synthetic distribution."""
    p = spec.params
    if spec.name == "exp1":
        return exp1_mi_quadrature()
    if spec.name == "exp2":
        return GroundTruth(exp2_mi(p["m"]), "closed-form")
    if spec.name == "exp3":
        return GroundTruth(p["dims"] * exp2_mi(p["m"]), "closed-form")
    if spec.name == "exp4":
        value, _, bound = exp4_series(p["p"])
        return GroundTruth(value, "closed-form", bound)
    raise ParameterError(f"no ground truth available for {spec.name!r}")
