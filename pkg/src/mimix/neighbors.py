"""Joint k-NN radii and range counts under the product max-metric.

The joint distance between samples i and j is
``max(||X_j - X_i||, ||Y_j - Y_i||)`` with ``||.||`` either the max-coordinate
or the euclidean norm. All comparisons are inclusive and every count leaves
the query sample itself out.

Two evaluation strategies give identical answers:

* ``"brute"`` evaluates distance rows in chunks with numpy (O(n^2)).
* ``"tree"`` (max norm only) finds k-th neighbor radii with a k-d tree,
  counts one-dimensional marginals on a sorted copy and other ranges with
  k-d tree ball counts.

Both compute every distance as ``|a - b|`` per coordinate followed by a max,
so the radii they return are bitwise equal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .core import Dataset, EstimatorConfig, NeighborProfile, ParameterError

SIDES = ("x", "y")

# rows per block in the brute-force kernels (block is rows x n x dim floats)
_CHUNK_ELEMS = 4_000_000


def _norm_rows(diff: np.ndarray, within_norm: str) -> np.ndarray:
    diff = np.abs(diff)
    if within_norm == "max":
        return diff.max(axis=-1)
    return np.sqrt(np.sum(diff * diff, axis=-1))


def _chunks(n: int, dim: int):
    step = max(1, _CHUNK_ELEMS // max(1, n * dim))
    for start in range(0, n, step):
        yield start, min(n, start + step)


@dataclass(frozen=True)
class NeighborProfiles:
    """Per-sample neighbor statistics as parallel arrays."""

    rho: np.ndarray
    k_tilde: np.ndarray
    n_x: np.ndarray
    n_y: np.ndarray

    def __len__(self) -> int:
        return self.rho.shape[0]

    def __getitem__(self, i: int) -> NeighborProfile:
        return NeighborProfile(float(self.rho[i]), int(self.k_tilde[i]), int(self.n_x[i]), int(self.n_y[i]))


class DistanceOracle:
    """Answers distance, radius and count queries on one dataset.

    Read-only after construction, so queries may run from several threads.
    """

    def __init__(self, dataset: Dataset, within_norm: str = "max", atom_tolerance: float = 0.0,
                 method: str = "auto"):
        if within_norm not in ("max", "euclidean"):
            raise ParameterError(f"unknown within_norm {within_norm!r}")
        if method not in ("auto", "brute", "tree"):
            raise ParameterError(f"unknown method {method!r}")
        if method == "tree" and within_norm != "max":
            raise ParameterError("the tree path only supports the max within-norm")
        if method == "auto":
            method = "tree" if within_norm == "max" else "brute"
        self.dataset = dataset
        self.within_norm = within_norm
        self.atom_tolerance = float(atom_tolerance)
        self.method = method
        self._trees = {}

    @property
    def n(self) -> int:
        return self.dataset.n

    def _side(self, side: str) -> np.ndarray:
        if side not in SIDES:
            raise ParameterError(f"side must be 'x' or 'y', got {side!r}")
        return self.dataset.x if side == "x" else self.dataset.y

    def _check_index(self, i: int) -> int:
        if not (0 <= i < self.n):
            raise IndexError(f"sample index {i} out of range for n={self.n}")
        return int(i)

    # single-pair / single-sample queries

    def joint_distance(self, i: int, j: int) -> float:
        i, j = self._check_index(i), self._check_index(j)
        x, y = self.dataset.x, self.dataset.y
        dx = _norm_rows(x[j] - x[i], self.within_norm)
        dy = _norm_rows(y[j] - y[i], self.within_norm)
        return float(max(dx, dy))

    def distance_row(self, i: int) -> np.ndarray:
        """d(i, j) for every j, self included (d(i, i) = 0)."""
        i = self._check_index(i)
        x, y = self.dataset.x, self.dataset.y
        return np.maximum(_norm_rows(x - x[i], self.within_norm), _norm_rows(y - y[i], self.within_norm))

    def kth_radius(self, i: int, k: int) -> float:
        self._check_k(k)
        row = self.distance_row(i)
        row[i] = np.inf
        return float(np.partition(row, k - 1)[k - 1])

    def count_joint_at_zero(self, i: int) -> int:
        return self.count_joint_within(i, self.atom_tolerance)

    def count_joint_within(self, i: int, r: float) -> int:
        return int(np.count_nonzero(self.distance_row(i) <= r)) - 1

    def count_marginal_within(self, side: str, i: int, r: float) -> int:
        if r < 0:
            raise ParameterError("radius must be >= 0")
        i = self._check_index(i)
        vals = self._side(side)
        return int(np.count_nonzero(_norm_rows(vals - vals[i], self.within_norm) <= r)) - 1

    # vectorised queries over all samples

    def _check_k(self, k: int) -> None:
        if k < 1:
            raise ParameterError(f"k must be >= 1, got {k}")
        if k >= self.n:
            raise ParameterError(f"k={k} must be smaller than the sample count n={self.n}")

    def kth_radii(self, k: int) -> np.ndarray:
        """rho_i for every sample: k-th smallest d(i, j) over j != i."""
        self._check_k(k)
        if self.method == "tree":
            return self._kth_radii_tree(k)
        return self._kth_radii_brute(k)

    def _kth_radii_brute(self, k: int) -> np.ndarray:
        x, y = self.dataset.x, self.dataset.y
        n = self.n
        out = np.empty(n)
        for a, b in _chunks(n, x.shape[1] + y.shape[1]):
            d = np.maximum(
                _norm_rows(x[a:b, None, :] - x[None, :, :], self.within_norm),
                _norm_rows(y[a:b, None, :] - y[None, :, :], self.within_norm),
            )
            d[np.arange(b - a), np.arange(a, b)] = np.inf
            out[a:b] = np.partition(d, k - 1, axis=1)[:, k - 1]
        return out

    def _tree_for(self, key: str, values: np.ndarray) -> cKDTree:
        tree = self._trees.get(key)
        if tree is None:
            tree = self._trees[key] = cKDTree(values)
        return tree

    def _ball_counts(self, key: str, values: np.ndarray, radii: np.ndarray) -> np.ndarray:
        # max-norm ball counts are inclusive and exact (no rescaling of r)
        tree = self._tree_for(key, values)
        return tree.query_ball_point(values, radii, p=np.inf, return_length=True).astype(np.int64) - 1

    def _kth_radii_tree(self, k: int) -> np.ndarray:
        joint = self.dataset.joint
        # the query point itself is among the k+1 returned (at distance 0)
        _, idx = self._tree_for("joint", joint).query(joint, k=k + 1, p=np.inf)
        # recompute exactly from the returned indices
        d = np.abs(joint[idx] - joint[:, None, :]).max(axis=-1)
        d.sort(axis=1)
        return d[:, k]

    def counts_joint_within(self, radii) -> np.ndarray:
        """|{j != i : d(i, j) <= radii[i]}| for every i."""
        radii = np.broadcast_to(np.asarray(radii, dtype=np.float64), (self.n,))
        if self.method == "tree":
            if not np.any(radii):
                return self._counts_exact_duplicates(self.dataset.joint)
            return self._ball_counts("joint", self.dataset.joint, radii)
        x, y = self.dataset.x, self.dataset.y
        out = np.empty(self.n, dtype=np.int64)
        for a, b in _chunks(self.n, x.shape[1] + y.shape[1]):
            d = np.maximum(
                _norm_rows(x[a:b, None, :] - x[None, :, :], self.within_norm),
                _norm_rows(y[a:b, None, :] - y[None, :, :], self.within_norm),
            )
            out[a:b] = np.count_nonzero(d <= radii[a:b, None], axis=1) - 1
        return out

    def counts_joint_at_zero(self) -> np.ndarray:
        return self.counts_joint_within(np.full(self.n, self.atom_tolerance))

    def counts_marginal_within(self, side: str, radii) -> np.ndarray:
        """|{j != i : ||side_j - side_i|| <= radii[i]}| for every i."""
        vals = self._side(side)
        radii = np.broadcast_to(np.asarray(radii, dtype=np.float64), (self.n,))
        if np.any(radii < 0):
            raise ParameterError("radii must be >= 0")
        if self.method == "tree":
            if vals.shape[1] == 1:
                return _counts_sorted_1d(vals[:, 0], radii)
            if not np.any(radii):
                return self._counts_exact_duplicates(vals)
            return self._ball_counts(side, vals, radii)
        out = np.empty(self.n, dtype=np.int64)
        for a, b in _chunks(self.n, vals.shape[1]):
            d = _norm_rows(vals[a:b, None, :] - vals[None, :, :], self.within_norm)
            out[a:b] = np.count_nonzero(d <= radii[a:b, None], axis=1) - 1
        return out

    @staticmethod
    def _counts_exact_duplicates(table: np.ndarray) -> np.ndarray:
        # + 0.0 folds -0.0 into 0.0 so the byte-wise unique agrees with ==
        _, inverse, counts = np.unique(table + 0.0, axis=0, return_inverse=True, return_counts=True)
        return counts[inverse.reshape(-1)].astype(np.int64) - 1


def _counts_sorted_1d(v: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Inclusive 1-D range counts, exactly matching ``abs(v[j] - v[i]) <= r[i]``.

    Rounded subtraction is monotone, so the matching j form one contiguous run
    in sorted order. searchsorted gives a near-exact run; the loops below
    walk its ends until the exact predicate holds.
    """
    s = np.sort(v)
    n = s.shape[0]
    lo = np.searchsorted(s, v - r, side="left")
    hi = np.searchsorted(s, v + r, side="right")

    def inside(pos):
        p = np.clip(pos, 0, n - 1)
        return (pos >= 0) & (pos < n) & (np.abs(s[p] - v) <= r)

    while True:
        grow = inside(lo - 1)
        if not grow.any():
            break
        lo = lo - grow
    while True:
        shrink = (lo < hi) & ~inside(lo)
        if not shrink.any():
            break
        lo = lo + shrink
    while True:
        grow = inside(hi)
        if not grow.any():
            break
        hi = hi + grow
    while True:
        shrink = (hi > lo) & ~inside(hi - 1)
        if not shrink.any():
            break
        hi = hi - shrink
    return (hi - lo - 1).astype(np.int64)


def build_index(dataset: Dataset, config: EstimatorConfig, method: str = "auto") -> DistanceOracle:
    """Prepare a :class:`DistanceOracle` for ``dataset`` under ``config``."""
    config.check_against(dataset)
    return DistanceOracle(dataset, config.within_norm, config.atom_tolerance, method=method)


def neighbor_profiles(oracle: DistanceOracle, k: int, detect_atoms: bool = True) -> NeighborProfiles:
    """Radii, effective neighbor counts and marginal counts for every sample.

    Where ``rho_i`` is at most the atom tolerance the sample sits on an atom:
    ``k_tilde`` is the number of coincident samples and the marginal counts
    use the tolerance as radius. Elsewhere ``k_tilde = k``. With
    ``detect_atoms=False`` the atom branch is skipped (plain KSG).
    """
    rho = oracle.kth_radii(k)
    k_tilde = np.full(oracle.n, k, dtype=np.int64)
    radius = rho
    if detect_atoms:
        atom = rho <= oracle.atom_tolerance
        if atom.any():
            k_tilde[atom] = oracle.counts_joint_at_zero()[atom]
            if oracle.atom_tolerance > 0:
                radius = np.where(atom, oracle.atom_tolerance, rho)
    n_x = oracle.counts_marginal_within("x", radius)
    n_y = oracle.counts_marginal_within("y", radius)
    return NeighborProfiles(rho, k_tilde, n_x, n_y)


def k_schedule(n: int) -> int:
    """A neighbor order growing with n, ceil(n^(1/3)).

    Satisfies k -> inf and k log(n) / n -> 0; not the default anywhere.
    """
    if n < 2:
        raise ParameterError("need at least 2 samples")
    k = int(np.ceil(n ** (1.0 / 3.0) - 1e-12))
    return max(1, min(k, n - 1))
