"""Pairwise-comparison weighting: priorities, consistency, supermatrix limits.

Weights w_m (and domain weights beta_G) are derived from reciprocal
judgement matrices. The default prioritization is the principal
right-eigenvector obtained by power iteration; a geometric-mean solver
is available as an alternative and is flagged in the derivation record.
Cluster networks are handled through the weighted supermatrix limit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import MathError, ValidationError

POWER_TOL = 1e-10
POWER_CAP = 10_000
LIMIT_TOL = 1e-9
LIMIT_CAP = 64
CR_THRESHOLD = 0.10

# Conventional random-index constants for reciprocal matrices of order n.
RANDOM_INDEX = {1: 0.0, 2: 0.0, 3: 0.58, 4: 0.90, 5: 1.12,
                6: 1.24, 7: 1.32, 8: 1.41, 9: 1.45, 10: 1.49}


def random_index(n: int) -> float:
    return RANDOM_INDEX.get(n, RANDOM_INDEX[10])


@dataclass(frozen=True)
class Violation:
    kind: str
    i: int
    j: int
    message: str


@dataclass(frozen=True)
class PairwiseMatrix:
    items: tuple[str, ...]
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        object.__setattr__(self, "entries", entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValidationError(f"pairwise matrix must be square, got shape {entries.shape}")
        if len(self.items) != entries.shape[0]:
            raise ValidationError(
                f"{len(self.items)} items for a {entries.shape[0]}x{entries.shape[1]} matrix")
        if len(set(self.items)) != len(self.items):
            raise ValidationError("pairwise matrix items must be unique")

    @property
    def n(self) -> int:
        return len(self.items)

    @classmethod
    def from_rows(cls, items, rows) -> "PairwiseMatrix":
        return cls(items=tuple(items), entries=np.asarray(rows, dtype=float))


def validate_pairwise(matrix: PairwiseMatrix) -> list[Violation]:
    """Every positivity, diagonal, and reciprocity violation, with indices."""
    a = matrix.entries
    n = matrix.n
    violations = []
    for i in range(n):
        for j in range(n):
            if not a[i, j] > 0:
                violations.append(Violation(
                    "positivity", i, j, f"entry ({i},{j}) = {a[i, j]} is not positive"))
    for i in range(n):
        if a[i, i] > 0 and abs(a[i, i] - 1.0) > 1e-9:
            violations.append(Violation(
                "diagonal", i, i, f"diagonal entry ({i},{i}) = {a[i, i]} != 1"))
    for i in range(n):
        for j in range(i + 1, n):
            if a[i, j] > 0 and a[j, i] > 0:
                expected = 1.0 / a[i, j]
                if abs(a[j, i] - expected) > 1e-9 * max(1.0, abs(expected)):
                    violations.append(Violation(
                        "reciprocity", j, i,
                        f"entry ({j},{i}) = {a[j, i]}, expected 1/{a[i, j]} = {expected}"))
    return violations


def require_valid(matrix: PairwiseMatrix) -> None:
    violations = validate_pairwise(matrix)
    if violations:
        raise ValidationError("; ".join(v.message for v in violations))


@dataclass(frozen=True)
class PriorityVector:
    items: tuple[str, ...]
    weights: tuple[float, ...]
    method: str = "eigenvector"

    def __post_init__(self):
        if len(self.items) != len(self.weights):
            raise ValidationError("items and weights differ in length")
        if any(w < -1e-12 for w in self.weights):
            raise ValidationError("priority weights must be nonnegative")
        total = sum(self.weights)
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(f"priority weights sum to {total}, expected 1")

    def as_map(self) -> dict:
        return dict(zip(self.items, self.weights))

    def to_dict(self) -> dict:
        return {"items": list(self.items), "weights": list(self.weights),
                "method": self.method}


def _normalized(vector: np.ndarray) -> np.ndarray:
    total = float(vector.sum())
    if total <= 0:
        raise MathError("cannot normalize a nonpositive vector")
    return vector / total


def principal_priorities(matrix: PairwiseMatrix, tol: float = POWER_TOL,
                         max_iter: int = POWER_CAP) -> PriorityVector:
    """Principal right-eigenvector by power iteration, normalized to sum 1."""
    require_valid(matrix)
    a = matrix.entries
    w = np.full(matrix.n, 1.0 / matrix.n)
    for _ in range(max_iter):
        w_next = _normalized(a @ w)
        if float(np.max(np.abs(w_next - w))) < tol:
            return PriorityVector(items=matrix.items,
                                  weights=tuple(float(x) for x in w_next),
                                  method="eigenvector")
        w = w_next
    raise MathError(f"power iteration did not converge within {max_iter} iterations")


def geometric_mean_priorities(matrix: PairwiseMatrix) -> PriorityVector:
    """Row geometric means, normalized; reproducible closed form."""
    require_valid(matrix)
    logs = np.log(matrix.entries)
    w = _normalized(np.exp(logs.mean(axis=1)))
    return PriorityVector(items=matrix.items,
                          weights=tuple(float(x) for x in w),
                          method="geometric_mean")


@dataclass(frozen=True)
class ConsistencyReport:
    lambda_max: float
    consistency_index: float
    consistency_ratio: float
    acceptable: bool
    threshold: float = CR_THRESHOLD

    def to_dict(self) -> dict:
        return {"lambda_max": self.lambda_max,
                "consistency_index": self.consistency_index,
                "consistency_ratio": self.consistency_ratio,
                "acceptable": self.acceptable,
                "threshold": self.threshold}


def consistency_ratio(matrix: PairwiseMatrix,
                      threshold: float = CR_THRESHOLD) -> ConsistencyReport:
    require_valid(matrix)
    n = matrix.n
    if n <= 2:
        # Reciprocal matrices of order 1 and 2 are always consistent.
        lam = float(n)
        return ConsistencyReport(lambda_max=lam, consistency_index=0.0,
                                 consistency_ratio=0.0, acceptable=True,
                                 threshold=threshold)
    w = np.array(principal_priorities(matrix).weights)
    lam = float(np.mean((matrix.entries @ w) / w))
    ci = (lam - n) / (n - 1)
    cr = ci / random_index(n)
    return ConsistencyReport(lambda_max=lam, consistency_index=ci,
                             consistency_ratio=cr,
                             acceptable=cr <= threshold, threshold=threshold)


@dataclass(frozen=True)
class Supermatrix:
    clusters: tuple[tuple[str, tuple[str, ...]], ...]
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", matrix)
        n = sum(len(items) for _, items in self.clusters)
        if matrix.shape != (n, n):
            raise ValidationError(
                f"supermatrix shape {matrix.shape} does not match {n} elements")
        ids = self.element_ids()
        if len(set(ids)) != len(ids):
            raise ValidationError("supermatrix element ids must be unique")
        if np.any(matrix < -1e-12):
            raise ValidationError("supermatrix entries must be nonnegative")
        sums = matrix.sum(axis=0)
        bad = [i for i, s in enumerate(sums) if abs(s - 1.0) > 1e-9]
        if bad:
            raise ValidationError(
                f"supermatrix columns {bad} do not sum to 1 (weighted form required)")

    def element_ids(self) -> tuple[str, ...]:
        out: list[str] = []
        for _, items in self.clusters:
            out.extend(items)
        return tuple(out)

    @classmethod
    def from_blocks(cls, clusters, blocks: dict, cluster_weights: dict) -> "Supermatrix":
        """Assemble the weighted supermatrix from per-block local priorities.

        blocks maps (row_cluster, col_cluster) to a column-stochastic
        block; cluster_weights maps col_cluster to {row_cluster: weight}
        with weights summing to 1 over the nonzero blocks of the column.
        """
        clusters = tuple((cid, tuple(items)) for cid, items in clusters)
        sizes = {cid: len(items) for cid, items in clusters}
        offsets = {}
        pos = 0
        for cid, items in clusters:
            offsets[cid] = pos
            pos += len(items)
        n = pos
        matrix = np.zeros((n, n))
        for (rc, cc), block in blocks.items():
            if rc not in sizes or cc not in sizes:
                raise ValidationError(f"block ({rc}, {cc}) references unknown cluster")
            block = np.asarray(block, dtype=float)
            if block.shape != (sizes[rc], sizes[cc]):
                raise ValidationError(
                    f"block ({rc}, {cc}) has shape {block.shape}, "
                    f"expected ({sizes[rc]}, {sizes[cc]})")
            weight = cluster_weights.get(cc, {}).get(rc)
            if weight is None:
                raise ValidationError(f"no cluster weight for block ({rc}, {cc})")
            r0, c0 = offsets[rc], offsets[cc]
            matrix[r0:r0 + sizes[rc], c0:c0 + sizes[cc]] = weight * block
        return cls(clusters=clusters, matrix=matrix)


def limit_supermatrix(s: Supermatrix, tol: float = LIMIT_TOL,
                      max_squarings: int = LIMIT_CAP) -> PriorityVector:
    """Limit priorities of the weighted supermatrix.

    Repeated squaring until stationarity; if the stationary power is not
    a fixed point of the original matrix (cyclic attractor), the Cesaro
    average over the cycle is used. Priorities are the column means of
    the limit, normalized to sum 1.
    """
    w = s.matrix
    power = w.copy()
    for _ in range(max_squarings):
        squared = power @ power
        if float(np.max(np.abs(squared - power))) < tol:
            power = squared
            break
        power = squared
    else:
        raise MathError(f"supermatrix limit did not settle within {max_squarings} squarings")

    if float(np.max(np.abs(power @ w - power))) > tol:
        # Cyclic attractor: average the powers over one full cycle.
        cycle = [power]
        current = power @ w
        for _ in range(max_squarings):
            if float(np.max(np.abs(current - power))) < tol:
                break
            cycle.append(current)
            current = current @ w
        else:
            raise MathError("supermatrix limit cycle did not close")
        power = np.mean(cycle, axis=0)

    weights = _normalized(power.mean(axis=1))
    return PriorityVector(items=s.element_ids(),
                          weights=tuple(float(x) for x in weights),
                          method="supermatrix-limit")


@dataclass(frozen=True)
class WeightDerivation:
    weights: PriorityVector
    path: str
    cluster_reports: dict = field(default_factory=dict)
    cluster_weights: PriorityVector | None = None
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.to_dict(),
            "path": self.path,
            "cluster_reports": {k: v.to_dict() for k, v in self.cluster_reports.items()},
            "cluster_weights": (self.cluster_weights.to_dict()
                                if self.cluster_weights else None),
            "warnings": list(self.warnings),
        }


def _priorities(matrix: PairwiseMatrix, method: str) -> PriorityVector:
    if method == "eigenvector":
        return principal_priorities(matrix)
    if method == "geometric_mean":
        return geometric_mean_priorities(matrix)
    raise ValidationError(f"unknown prioritization method {method!r}")


def derive_metric_weights(cluster_judgements: dict[str, PairwiseMatrix] | None = None,
                          cluster_matrix: PairwiseMatrix | None = None,
                          network: Supermatrix | None = None,
                          cr_threshold: float = CR_THRESHOLD,
                          allow_inconsistent: bool = False,
                          method: str = "eigenvector") -> WeightDerivation:
    """Global metric weights, hierarchical by default, supermatrix if networked.

    Hierarchical path: global weight = cluster weight x local weight.
    Cluster weights come from cluster_matrix when given, else uniform.
    Matrices failing the CR gate reject unless allow_inconsistent, in
    which case a warning is recorded instead.
    """
    warnings: list[str] = []
    reports: dict[str, ConsistencyReport] = {}

    if network is not None:
        vec = limit_supermatrix(network)
        return WeightDerivation(weights=vec, path="network",
                                cluster_reports=reports, warnings=tuple(warnings))

    if not cluster_judgements:
        raise ValidationError("no judgements supplied")

    seen: set[str] = set()
    for cid, matrix in cluster_judgements.items():
        overlap = seen & set(matrix.items)
        if overlap:
            raise ValidationError(
                f"metrics {sorted(overlap)} appear in more than one cluster")
        seen |= set(matrix.items)
        report = consistency_ratio(matrix, threshold=cr_threshold)
        reports[cid] = report
        if not report.acceptable:
            msg = (f"cluster {cid!r} judgements have CR "
                   f"{report.consistency_ratio:.3f} > {cr_threshold}")
            if not allow_inconsistent:
                raise ValidationError(msg + " (set allow_inconsistent to proceed)")
            warnings.append(msg)

    cluster_ids = list(cluster_judgements)
    if cluster_matrix is not None:
        if set(cluster_matrix.items) != set(cluster_ids):
            raise ValidationError("cluster_matrix items must match the judgement clusters")
        report = consistency_ratio(cluster_matrix, threshold=cr_threshold)
        reports["__clusters__"] = report
        if not report.acceptable:
            msg = (f"cluster comparison matrix has CR "
                   f"{report.consistency_ratio:.3f} > {cr_threshold}")
            if not allow_inconsistent:
                raise ValidationError(msg + " (set allow_inconsistent to proceed)")
            warnings.append(msg)
        cluster_vec = _priorities(cluster_matrix, method)
    else:
        cluster_vec = PriorityVector(items=tuple(cluster_ids),
                                     weights=tuple(1.0 / len(cluster_ids)
                                                   for _ in cluster_ids),
                                     method="uniform")
        if len(cluster_ids) > 1:
            warnings.append("no cluster comparison supplied; clusters weighted uniformly")

    cluster_w = cluster_vec.as_map()
    items: list[str] = []
    weights: list[float] = []
    for cid, matrix in cluster_judgements.items():
        local = _priorities(matrix, method)
        for item, w in zip(local.items, local.weights):
            items.append(item)
            weights.append(cluster_w[cid] * w)
    total = sum(weights)
    weights = [w / total for w in weights]
    vec = PriorityVector(items=tuple(items), weights=tuple(weights), method=method)
    return WeightDerivation(weights=vec, path="hierarchical",
                            cluster_reports=reports, cluster_weights=cluster_vec,
                            warnings=tuple(warnings))


def consistent_matrix(items, weights) -> PairwiseMatrix:
    """Build the perfectly consistent matrix entries[i][j] = w_i / w_j."""
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0):
        raise ValidationError("generator weights must be positive")
    return PairwiseMatrix(items=tuple(items), entries=np.outer(w, 1.0 / w))


def _matrix_from_doc(doc, items, path: str) -> PairwiseMatrix:
    try:
        return PairwiseMatrix.from_rows(items, doc)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"malformed matrix: {exc}", path)


def load_judgements(source) -> dict:
    """Parse a judgement document into matrices ready for derivation.

    Document shape: {"clusters": [{"id", "items", "matrix"}],
    "cluster_matrix": optional, "network": optional blocks}.
    """
    if hasattr(source, "read"):
        doc = json.load(source)
    elif isinstance(source, dict):
        doc = source
    else:
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    if not isinstance(doc, dict) or "clusters" not in doc:
        raise ValidationError("judgement document needs a 'clusters' list")
    allowed = {"clusters", "cluster_matrix", "network"}
    if doc.keys() - allowed:
        raise ValidationError(f"unknown fields: {sorted(doc.keys() - allowed)}")

    judgements: dict[str, PairwiseMatrix] = {}
    for i, cluster in enumerate(doc["clusters"]):
        path = f"/clusters/{i}"
        for key in ("id", "items", "matrix"):
            if key not in cluster:
                raise ValidationError(f"cluster entry missing {key!r}", path)
        judgements[cluster["id"]] = _matrix_from_doc(
            cluster["matrix"], cluster["items"], f"{path}/matrix")

    cluster_matrix = None
    if doc.get("cluster_matrix") is not None:
        cluster_matrix = _matrix_from_doc(doc["cluster_matrix"],
                                          list(judgements), "/cluster_matrix")

    network = None
    if doc.get("network") is not None:
        net = doc["network"]
        for key in ("clusters", "blocks", "cluster_weights"):
            if key not in net:
                raise ValidationError(f"network missing {key!r}", "/network")
        clusters = [(c["id"], tuple(c["items"])) for c in net["clusters"]]
        blocks = {(b["row"], b["col"]): b["matrix"] for b in net["blocks"]}
        network = Supermatrix.from_blocks(clusters, blocks, net["cluster_weights"])

    return {"clusters": judgements, "cluster_matrix": cluster_matrix,
            "network": network}
