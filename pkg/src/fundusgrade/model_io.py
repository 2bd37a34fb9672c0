"""Versioned line-oriented text persistence for trained models.

Grammar (documented in the README): the first line is the header
``fundusgrade-model v1 <kind>`` with kind in {rf, nb, svm}; the scaler
section follows, then kind-specific sections, then ``end``. Floats are
written with repr(), which round-trips IEEE doubles exactly, so
save -> load -> save is byte-identical.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .classifiers import (
    GaussianNBModel,
    LinearSvm,
    N_CLASSES,
    RandomForestModel,
    RandomForestParams,
    SvmCascadeModel,
    SvmCascadeParams,
    TreeNode,
)
from .features import ScalerModel

HEADER = "fundusgrade-model v1"


def _fmt(values) -> str:
    return " ".join(repr(float(v)) for v in np.asarray(values, dtype=np.float64).ravel())


def _parse_floats(tokens) -> np.ndarray:
    return np.array([float(t) for t in tokens], dtype=np.float64)


def _write_tree(node: TreeNode, out: list[str]) -> None:
    if node.is_leaf:
        counts = " ".join(str(int(c)) for c in node.class_counts)
        out.append(f"l {counts}")
    else:
        out.append(f"i {node.feature} {float(node.threshold)!r}")
        _write_tree(node.left, out)
        _write_tree(node.right, out)


def _read_tree(lines) -> TreeNode:
    parts = next(lines).split()
    if parts[0] == "l":
        return TreeNode(class_counts=np.array([int(c) for c in parts[1:]], dtype=np.int64))
    if parts[0] == "i":
        feature = int(parts[1])
        threshold = float(parts[2])
        left = _read_tree(lines)
        right = _read_tree(lines)
        return TreeNode(feature=feature, threshold=threshold, left=left, right=right)
    raise ValueError(f"corrupt model file: unexpected tree line {parts[0]!r}")


def model_kind(model) -> str:
    if isinstance(model, RandomForestModel):
        return "rf"
    if isinstance(model, GaussianNBModel):
        return "nb"
    if isinstance(model, SvmCascadeModel):
        return "svm"
    raise ValueError(f"unsupported model type {type(model).__name__}")


def save_model(path, scaler: ScalerModel, model) -> None:
    kind = model_kind(model)
    lines = [f"{HEADER} {kind}"]
    lines.append(f"scaler-dim {scaler.mean.shape[0]}")
    lines.append(f"scaler-mean {_fmt(scaler.mean)}")
    lines.append(f"scaler-std {_fmt(scaler.std)}")

    if kind == "rf":
        p = model.params
        m = p.m_features if p.m_features is not None else -1
        lines.append(f"rf-meta {p.n_trees} {p.max_depth} {m} {model.seed} {model.n_features}")
        for i, tree in enumerate(model.trees):
            lines.append(f"tree {i}")
            _write_tree(tree, lines)
            lines.append("end-tree")
    elif kind == "nb":
        lines.append(f"nb-priors {_fmt(model.priors)}")
        lines.append(f"nb-var-floor {model.var_floor!r}")
        for c in range(N_CLASSES):
            lines.append(f"nb-mean {c} {_fmt(model.means[c])}")
        for c in range(N_CLASSES):
            lines.append(f"nb-var {c} {_fmt(model.variances[c])}")
    else:
        lines.append(f"svm-meta {model.params.lam!r} {model.params.epochs} {model.seed}")
        lines.append(f"svm-stage1 {_fmt(model.healthy_vs_dr.w)} {model.healthy_vs_dr.b!r}")
        lines.append(f"svm-stage2 {_fmt(model.npdr_vs_pdr.w)} {model.npdr_vs_pdr.b!r}")
        for c, svm in zip((1, 2, 3), model.grade_ovr):
            lines.append(f"svm-ovr{c} {_fmt(svm.w)} {svm.b!r}")
    lines.append("end")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def _expect(line: str, prefix: str) -> list[str]:
    parts = line.split()
    if not line.startswith(prefix + " "):
        raise ValueError(f"corrupt model file: expected {prefix!r}, got {line!r}")
    return parts[len(prefix.split()) :]


class _Lines:
    """Line iterator that turns exhaustion into a parse error."""

    def __init__(self, text: str):
        self._it = iter(text.splitlines())

    def __next__(self) -> str:
        line = next(self._it, None)
        if line is None:
            raise ValueError("corrupt model file: unexpected end of file")
        return line

    def next_or_none(self) -> str | None:
        return next(self._it, None)


def load_model(path) -> tuple[ScalerModel, object]:
    text = Path(path).read_text(encoding="ascii")
    lines = _Lines(text)
    header = lines.next_or_none() or ""
    if not header.startswith(HEADER + " "):
        raise ValueError(f"{path}: not a {HEADER} file")
    kind = header.split()[-1]
    if kind not in ("rf", "nb", "svm"):
        raise ValueError(f"{path}: unknown model kind {kind!r}")

    dim = int(_expect(next(lines), "scaler-dim")[0])
    mean = _parse_floats(_expect(next(lines), "scaler-mean"))
    std = _parse_floats(_expect(next(lines), "scaler-std"))
    if mean.shape[0] != dim or std.shape[0] != dim:
        raise ValueError(f"{path}: scaler section does not match declared dimension")
    scaler = ScalerModel(mean=mean, std=std)

    if kind == "rf":
        meta = _expect(next(lines), "rf-meta")
        n_trees, max_depth, m, seed, n_features = (int(v) for v in meta)
        params = RandomForestParams(n_trees, max_depth, None if m < 0 else m)
        trees = []
        for i in range(n_trees):
            _expect(next(lines), "tree")
            trees.append(_read_tree(lines))
            if next(lines) != "end-tree":
                raise ValueError(f"{path}: tree {i} not terminated")
        model = RandomForestModel(tuple(trees), n_features, params, seed)
    elif kind == "nb":
        priors = _parse_floats(_expect(next(lines), "nb-priors"))
        var_floor = float(_expect(next(lines), "nb-var-floor")[0])
        means = np.empty((N_CLASSES, dim))
        variances = np.empty((N_CLASSES, dim))
        for c in range(N_CLASSES):
            tokens = _expect(next(lines), f"nb-mean {c}")
            means[c] = _parse_floats(tokens)
        for c in range(N_CLASSES):
            tokens = _expect(next(lines), f"nb-var {c}")
            variances[c] = _parse_floats(tokens)
        model = GaussianNBModel(priors, means, variances, var_floor)
    else:
        meta = _expect(next(lines), "svm-meta")
        params = SvmCascadeParams(lam=float(meta[0]), epochs=int(meta[1]))
        seed = int(meta[2])

        def read_svm(tag):
            tokens = _parse_floats(_expect(next(lines), tag))
            return LinearSvm(tokens[:-1].copy(), float(tokens[-1]))

        stage1 = read_svm("svm-stage1")
        stage2 = read_svm("svm-stage2")
        ovr = tuple(read_svm(f"svm-ovr{c}") for c in (1, 2, 3))
        model = SvmCascadeModel(stage1, stage2, ovr, params, seed)

    if lines.next_or_none() != "end":
        raise ValueError(f"{path}: missing end marker")
    return scaler, model
