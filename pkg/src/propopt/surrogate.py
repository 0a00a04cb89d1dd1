"""Inverse-design surrogates: regression tree and bagged random forest.

Both models map a requirement (thrust, speed, rpm) to a six-component
target (diameter, hub_ratio, chord_root, taper_exp, blade_count-as-real,
efficiency).  The tree is grown to purity with variance-reduction splits on
scale-standardized targets; the forest bags such trees over bootstrap
resamples and averages their predictions.

Trees are stored as flat parallel arrays (one row per node) rather than
linked node objects; leaves keep their member record ids so a requirement
can be routed back to the training designs it resembles.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, DesignRecord
from .errors import (
    ModelDataMismatchError,
    ModelFormatError,
    TrainingError,
)
from .solver import BladeGeometry, Requirement
from .space import DesignSpaceConfig, Genome, decode, default_config

MODEL_FORMAT_VERSION = 1
TARGET_NAMES = ("diameter", "hub_ratio", "chord_root", "taper_exp",
                "blade_count", "efficiency")
LEAF = -1  # sentinel in the feature column


@dataclass(frozen=True)
class TreeOptions:
    """Knobs for tree growth.

    output_scales overrides the per-output standardization divisors used by
    the split criterion (the forest passes its corpus-wide scales so every
    member tree scores splits identically).
    """

    output_scales: np.ndarray | None = None


@dataclass
class RegressionTree:
    """Flat-array regression tree.

    Node i is internal when feature[i] >= 0 (route: x[feature] <= threshold
    goes left); for leaves, feature[i] == -1 and left[i] indexes into
    leaf_means / leaf_members.
    """

    feature: np.ndarray          # int16[n_nodes]
    threshold: np.ndarray        # float64[n_nodes]
    left: np.ndarray             # int32[n_nodes]; leaf slot for leaf nodes
    right: np.ndarray           # int32[n_nodes]; -1 for leaf nodes
    leaf_means: np.ndarray       # float64[n_leaves, 6]
    leaf_members: list[np.ndarray]  # record ids into the training dataset
    output_scales: np.ndarray    # float64[6] used for split standardization
    training_fingerprint: str

    @property
    def node_count(self) -> int:
        return self.feature.size

    @property
    def leaf_count(self) -> int:
        return self.leaf_means.shape[0]


@dataclass
class RandomForest:
    """Bagged ensemble of regression trees sharing one standardization."""

    trees: list[RegressionTree]
    bootstrap_seeds: list[int]
    output_scales: np.ndarray
    training_fingerprint: str


@dataclass(frozen=True)
class EvalReport:
    """Held-out efficiency residual summary."""

    residuals: list[float]
    accuracy: float
    mean_residual: float


def dataset_fingerprint(data: Dataset) -> str:
    """Order-sensitive sha256 over the corpus's exact decimal serialization."""
    digest = hashlib.sha256()
    for rec in data.records:
        digest.update(("%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n" % (
            rec.requirement.thrust_req, rec.requirement.ship_speed,
            rec.requirement.rpm, rec.geometry.blade_count,
            rec.geometry.diameter, rec.geometry.hub_diameter,
            rec.geometry.chord_root, rec.geometry.taper_exp,
            rec.geometry.section_drag_coeff, rec.efficiency)).encode())
    return digest.hexdigest()


def features_of(req: Requirement) -> np.ndarray:
    return np.array([req.thrust_req, req.ship_speed, req.rpm])


def target_of(rec: DesignRecord) -> np.ndarray:
    g = rec.geometry
    return np.array([g.diameter, g.hub_ratio, g.chord_root, g.taper_exp,
                     float(g.blade_count), rec.efficiency])


def design_matrices(data: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """(X, Y): features (n,3) and targets (n,6) of a corpus."""
    x = np.empty((len(data.records), 3))
    y = np.empty((len(data.records), 6))
    for i, rec in enumerate(data.records):
        x[i] = features_of(rec.requirement)
        y[i] = target_of(rec)
    return x, y


def decode_target(vector: np.ndarray, cfg: DesignSpaceConfig | None = None
                  ) -> tuple[BladeGeometry, float]:
    """Target vector back to a geometry (genes clamped, Z snapped) and eta."""
    if cfg is None:
        cfg = default_config()
    counts = np.asarray(cfg.blade_counts, dtype=float)
    blade_index = int(np.argmin(np.abs(counts - vector[4])))
    genome = Genome(values=(float(vector[0]), float(vector[1]),
                            float(vector[2]), float(vector[3])),
                    blade_index=blade_index)
    return decode(genome, cfg), float(vector[5])


def _standardization_scales(y: np.ndarray) -> np.ndarray:
    scales = y.std(axis=0)
    scales[scales == 0.0] = 1.0
    return scales


def _best_split(x_node: np.ndarray, y_centered: np.ndarray):
    """Best (gain, feature, threshold) under summed variance reduction.

    y_centered holds standardized targets minus the node mean, so the gain
    sum_k [S_L,k^2/n_L + S_R,k^2/n_R - S_k^2/n] is evaluated on small
    residuals and cannot go negative by cancellation.  Candidate thresholds
    are midpoints between consecutive distinct sorted feature values; ties
    resolve to the lowest feature index, then the lowest threshold.
    """
    n = x_node.shape[0]
    total = y_centered.sum(axis=0)
    baseline = float(total @ total) / n
    best_gain = 0.0
    best_feature = -1
    best_threshold = 0.0
    for f in range(x_node.shape[1]):
        xv = x_node[:, f]
        order = np.argsort(xv, kind="stable")
        xs = xv[order]
        cut = np.nonzero(xs[:-1] < xs[1:])[0]
        if cut.size == 0:
            continue
        prefix = np.cumsum(y_centered[order], axis=0)
        n_left = cut + 1
        sum_left = prefix[cut]
        sum_right = total - sum_left
        gains = ((sum_left * sum_left).sum(axis=1) / n_left
                 + (sum_right * sum_right).sum(axis=1) / (n - n_left)
                 - baseline)
        pick = int(np.argmax(gains))
        gain = float(gains[pick])
        if gain > best_gain:
            i = int(cut[pick])
            mid = 0.5 * (xs[i] + xs[i + 1])
            if mid >= xs[i + 1]:  # adjacent floats: midpoint may round up
                mid = xs[i]
            best_gain = gain
            best_feature = f
            best_threshold = float(mid)
    return best_gain, best_feature, best_threshold


def _grow(x: np.ndarray, y_raw: np.ndarray, y_std: np.ndarray,
          record_ids: np.ndarray):
    """Iterative depth-first growth; returns the flat node arrays."""
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    leaf_means: list[np.ndarray] = []
    leaf_members: list[np.ndarray] = []

    def new_node() -> int:
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        return len(feature) - 1

    stack = [(np.arange(x.shape[0]), new_node())]
    while stack:
        idx, slot = stack.pop()
        rows_x = x[idx]
        rows_y = y_raw[idx]
        pure = bool(np.all(rows_y == rows_y[0]) or np.all(rows_x == rows_x[0]))
        if not pure:
            ys = y_std[idx]
            gain, f, thr = _best_split(rows_x, ys - ys.mean(axis=0))
        if pure or f < 0:
            feature[slot] = LEAF
            left[slot] = len(leaf_means)
            leaf_means.append(rows_y.mean(axis=0))
            leaf_members.append(np.sort(record_ids[idx]))
            continue
        mask = rows_x[:, f] <= thr
        feature[slot] = f
        threshold[slot] = thr
        left_slot = new_node()
        right_slot = new_node()
        left[slot] = left_slot
        right[slot] = right_slot
        stack.append((idx[~mask], right_slot))
        stack.append((idx[mask], left_slot))

    return (np.array(feature, dtype=np.int16),
            np.array(threshold),
            np.array(left, dtype=np.int32),
            np.array(right, dtype=np.int32),
            np.vstack(leaf_means),
            leaf_members)


def fit_tree(data: Dataset, options: TreeOptions = TreeOptions()) -> RegressionTree:
    """Grow one tree to purity on the whole corpus."""
    if not data.records:
        raise TrainingError("cannot fit a tree on an empty dataset")
    x, y = design_matrices(data)
    return _fit_tree_arrays(x, y, np.arange(len(data.records)),
                            dataset_fingerprint(data), options)


def _fit_tree_arrays(x, y, record_ids, fingerprint: str,
                     options: TreeOptions) -> RegressionTree:
    if options.output_scales is not None:
        scales = np.asarray(options.output_scales, dtype=float)
    else:
        scales = _standardization_scales(y)
    y_std = y / scales
    arrays = _grow(x, y, y_std, record_ids)
    return RegressionTree(*arrays, output_scales=scales,
                          training_fingerprint=fingerprint)


def fit_forest(data: Dataset, tree_count: int = 100, seed: int = 0,
               options: TreeOptions = TreeOptions(),
               bootstrap: bool = True) -> RandomForest:
    """Bag tree_count pure trees over with-replacement resamples.

    Every tree shares the corpus-wide output scales and keeps member ids in
    the coordinates of the original corpus.  bootstrap=False (test hook)
    trains every tree on the full corpus unresampled.
    """
    if len(data.records) < 2:
        raise TrainingError("forest training needs at least 2 records")
    if tree_count < 1:
        raise TrainingError(f"tree_count must be >= 1, got {tree_count}")
    x, y = design_matrices(data)
    scales = _standardization_scales(y)
    tree_options = TreeOptions(output_scales=scales)
    fingerprint = dataset_fingerprint(data)
    master = np.random.default_rng(seed)
    seeds = [int(s) for s in master.integers(0, 2 ** 63, size=tree_count)]
    n = x.shape[0]
    trees = []
    for tree_seed in seeds:
        if bootstrap:
            ids = np.random.default_rng(tree_seed).integers(0, n, size=n)
            ids = ids.astype(np.int64)
        else:
            ids = np.arange(n)
        trees.append(_fit_tree_arrays(x[ids], y[ids], ids, fingerprint,
                                      tree_options))
    return RandomForest(trees=trees, bootstrap_seeds=seeds,
                        output_scales=scales,
                        training_fingerprint=fingerprint)


def predict_tree(tree: RegressionTree, req: Requirement) -> np.ndarray:
    """Route the requirement to its leaf and return the leaf mean target."""
    return tree.leaf_means[_route(tree, features_of(req))]


def _route(tree: RegressionTree, x: np.ndarray) -> int:
    node = 0
    feature = tree.feature
    threshold = tree.threshold
    left = tree.left
    right = tree.right
    while feature[node] != LEAF:
        if x[feature[node]] <= threshold[node]:
            node = left[node]
        else:
            node = right[node]
    return left[node]


def predict_forest(model: RandomForest, req: Requirement) -> np.ndarray:
    """Arithmetic mean of the per-tree leaf means."""
    x = features_of(req)
    acc = np.zeros(6)
    for tree in model.trees:
        acc += tree.leaf_means[_route(tree, x)]
    return acc / len(model.trees)


def leaf_records(tree: RegressionTree, req: Requirement,
                 data: Dataset) -> list[DesignRecord]:
    """All training records living on the leaf this requirement routes to."""
    if tree.training_fingerprint != dataset_fingerprint(data):
        raise ModelDataMismatchError(
            "tree was not trained on the given dataset (fingerprint mismatch)")
    members = tree.leaf_members[_route(tree, features_of(req))]
    return [data.records[int(i)] for i in members]


def residual(eta_truth: float, eta_pred: float) -> float:
    """Relative efficiency residual (truth - predicted) / truth."""
    if eta_truth <= 0.0:
        raise ValueError(f"eta_truth must be positive, got {eta_truth}")
    return (eta_truth - eta_pred) / eta_truth


def evaluate_model(model: RandomForest, test: Dataset) -> EvalReport:
    """Efficiency residuals over a test corpus; accuracy = |r| < 0.05 share."""
    if not test.records:
        raise TrainingError("cannot evaluate on an empty test set")
    residuals = []
    for rec in test.records:
        if rec.efficiency <= 0.0:
            continue
        eta_pred = float(predict_forest(model, rec.requirement)[5])
        residuals.append(residual(rec.efficiency, eta_pred))
    if not residuals:
        raise TrainingError("test set has no records with positive efficiency")
    hits = sum(1 for r in residuals if abs(r) < 0.05)
    return EvalReport(residuals=residuals,
                      accuracy=hits / len(residuals),
                      mean_residual=float(np.mean(residuals)))


def _tree_to_nodes(tree: RegressionTree) -> list[dict]:
    nodes = []
    for i in range(tree.node_count):
        if tree.feature[i] == LEAF:
            slot = int(tree.left[i])
            nodes.append({
                "mean_target": [float(v) for v in tree.leaf_means[slot]],
                "member_ids": [int(v) for v in tree.leaf_members[slot]],
            })
        else:
            nodes.append({
                "feature": int(tree.feature[i]),
                "threshold": float(tree.threshold[i]),
                "left": int(tree.left[i]),
                "right": int(tree.right[i]),
            })
    return nodes


def _tree_from_nodes(nodes: list[dict], scales: np.ndarray,
                     fingerprint: str) -> RegressionTree:
    if not nodes:
        raise ModelFormatError("tree has no nodes")
    count = len(nodes)
    feature = np.full(count, LEAF, dtype=np.int16)
    threshold = np.zeros(count)
    left = np.full(count, -1, dtype=np.int32)
    right = np.full(count, -1, dtype=np.int32)
    leaf_means = []
    leaf_members = []
    for i, node in enumerate(nodes):
        if "mean_target" in node:
            mean = node["mean_target"]
            members = node.get("member_ids", [])
            if len(mean) != 6 or not members:
                raise ModelFormatError(f"node {i}: malformed leaf")
            left[i] = len(leaf_means)
            leaf_means.append(np.asarray(mean, dtype=float))
            leaf_members.append(np.asarray(members, dtype=np.int64))
        else:
            try:
                feature[i] = int(node["feature"])
                threshold[i] = float(node["threshold"])
                left[i] = int(node["left"])
                right[i] = int(node["right"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ModelFormatError(f"node {i}: {exc}") from None
            if not (0 <= feature[i] <= 2):
                raise ModelFormatError(f"node {i}: feature index {feature[i]}")
            if not (0 < left[i] < count and 0 < right[i] < count):
                raise ModelFormatError(f"node {i}: child index out of range")
    return RegressionTree(feature, threshold, left, right,
                          np.vstack(leaf_means), leaf_members,
                          output_scales=scales,
                          training_fingerprint=fingerprint)


def save_model(model: RandomForest | RegressionTree, path) -> None:
    """Write a model file (JSON, one nodes array per tree)."""
    if isinstance(model, RandomForest):
        kind = "forest"
        trees = model.trees
        seeds = model.bootstrap_seeds
        scales = model.output_scales
        fingerprint = model.training_fingerprint
    else:
        kind = "tree"
        trees = [model]
        seeds = []
        scales = model.output_scales
        fingerprint = model.training_fingerprint
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "version": MODEL_FORMAT_VERSION,
            "kind": kind,
            "output_scales": [float(v) for v in scales],
            "bootstrap_seeds": seeds,
            "training_fingerprint": fingerprint,
        }
        prefix = json.dumps(header, separators=(",", ":"))
        fh.write(prefix[:-1])  # reopen the header object
        fh.write(',"trees":[')
        for t, tree in enumerate(trees):
            if t:
                fh.write(",")
            json.dump({"nodes": _tree_to_nodes(tree)}, fh,
                      separators=(",", ":"))
        fh.write("]}")


def load_model(path) -> RandomForest | RegressionTree:
    """Read a model file back; inverse of save_model."""
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: not a complete model file ({exc})")
    if not isinstance(payload, dict):
        raise ModelFormatError(f"{path}: expected a JSON object")
    version = payload.get("version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: model format version {version!r}, "
            f"expected {MODEL_FORMAT_VERSION}")
    try:
        kind = payload["kind"]
        scales = np.asarray(payload["output_scales"], dtype=float)
        fingerprint = payload["training_fingerprint"]
        tree_payloads = payload["trees"]
    except KeyError as exc:
        raise ModelFormatError(f"{path}: missing field {exc}") from None
    if scales.shape != (6,):
        raise ModelFormatError(f"{path}: output_scales must have 6 entries")
    if not tree_payloads:
        raise ModelFormatError(f"{path}: model contains no trees")
    trees = [_tree_from_nodes(tp.get("nodes", []), scales, fingerprint)
             for tp in tree_payloads]
    if kind == "tree":
        if len(trees) != 1:
            raise ModelFormatError(f"{path}: single-tree file holds {len(trees)}")
        return trees[0]
    if kind == "forest":
        seeds = [int(s) for s in payload.get("bootstrap_seeds", [])]
        return RandomForest(trees=trees, bootstrap_seeds=seeds,
                            output_scales=scales,
                            training_fingerprint=fingerprint)
    raise ModelFormatError(f"{path}: unknown model kind {kind!r}")
