"""Synthetic benchmark generators, label-noise injection, CSV persistence.

Two distributions are provided:

* ``long_servedio`` -- 21 binary (+-1) features drawn from a three-part
  mixture (large-margin examples, pullers, penalizers) that defeats
  convex-potential boosters once labels are noisy.  The majority vote over
  all coordinates classifies the clean data perfectly.
* ``mease_wyner`` -- 20 uniform-[0,1] features; the clean label is +1 iff
  the first five coordinates sum to at least 2.5.

Label noise flips each label independently with probability q; the
pre-flip labels are always retained so error rates against the clean
truth stay computable.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, ParseError

__all__ = [
    "Dataset",
    "DatasetMeta",
    "KIND_LARGE_MARGIN",
    "KIND_PULLER",
    "KIND_PENALIZER",
    "gen_long_servedio",
    "gen_mease_wyner",
    "flip_labels",
    "save_csv",
    "load_csv",
]

# Example-kind codes for the long_servedio mixture (stored per example).
KIND_LARGE_MARGIN = "L"
KIND_PULLER = "U"
KIND_PENALIZER = "P"

_RNG_NAME = "pcg64"  # numpy default_rng; pinned for reproducibility of fixtures


@dataclass(frozen=True)
class DatasetMeta:
    generator: str
    q: float
    seed: int | None
    rng: str = _RNG_NAME
    kinds: np.ndarray | None = field(default=None, repr=False)


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with noisy and clean labels plus provenance."""

    features: np.ndarray      # (n, d) float64
    labels: np.ndarray        # (n,) int64 in {-1, +1}, possibly noisy
    clean_labels: np.ndarray  # (n,) int64 in {-1, +1}
    meta: DatasetMeta

    def __post_init__(self):
        n = self.features.shape[0]
        if self.labels.shape != (n,) or self.clean_labels.shape != (n,):
            raise DomainError("labels and features disagree on the number of rows")
        for name, arr in (("labels", self.labels), ("clean_labels", self.clean_labels)):
            if n and not np.isin(arr, (-1, 1)).all():
                raise DomainError(f"{name} must be +-1 valued")
        if self.meta.kinds is not None and self.meta.kinds.shape != (n,):
            raise DomainError("per-example kinds disagree with the number of rows")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]


def _streams(seed):
    """Two independent child streams: feature/label generation and noise."""
    root = np.random.SeedSequence(seed)
    gen_ss, flip_ss = root.spawn(2)
    return gen_ss, flip_ss


def gen_long_servedio(n: int, q: float, seed: int) -> Dataset:
    """Draw n examples from the noisy long_servedio mixture.

    Per example: the label y is uniform on {-1, +1}; with probability 1/4
    every coordinate equals y (large margin), with probability 1/4 the
    first 11 equal y and the last 10 equal -y (puller), and otherwise 5 of
    the first 11 and 6 of the last 10 are chosen uniformly without
    replacement to equal y with the remaining 10 set to -y (penalizer).
    Labels are then flipped independently with probability q.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    gen_ss, flip_ss = _streams(seed)
    rng = np.random.default_rng(gen_ss)

    y = rng.integers(0, 2, size=n) * 2 - 1
    u = rng.random(n)
    kinds = np.full(n, KIND_PENALIZER, dtype="<U1")
    kinds[u < 0.25] = KIND_LARGE_MARGIN
    kinds[(u >= 0.25) & (u < 0.5)] = KIND_PULLER

    X = np.empty((n, 21), dtype=float)
    X[:] = -y[:, None]
    lm = kinds == KIND_LARGE_MARGIN
    X[lm] = y[lm, None]
    pu = kinds == KIND_PULLER
    X[np.ix_(pu, np.arange(11))] = y[pu, None]
    pe = np.nonzero(kinds == KIND_PENALIZER)[0]
    if pe.size:
        # uniform 5-of-11 / 6-of-10 subsets via ranked iid uniforms
        first = rng.random((pe.size, 11)).argsort(axis=1) < 5
        last = rng.random((pe.size, 10)).argsort(axis=1) < 6
        agree = np.concatenate([first, last], axis=1)
        rows = X[pe]
        rows[agree] = np.broadcast_to(y[pe, None], (pe.size, 21))[agree]
        X[pe] = rows

    clean = Dataset(
        features=X,
        labels=y.astype(np.int64),
        clean_labels=y.astype(np.int64).copy(),
        meta=DatasetMeta("long_servedio", 0.0, seed, kinds=kinds),
    )
    return flip_labels(clean, q, flip_ss)


def gen_mease_wyner(n: int, q: float, seed: int) -> Dataset:
    """Draw n examples with 20 uniform features; label by a 5-coordinate sum.

    The clean label is +1 when x_0 + ... + x_4 >= 2.5 and -1 otherwise
    (the measure-zero tie goes to +1).  Noise as in gen_long_servedio.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    gen_ss, flip_ss = _streams(seed)
    rng = np.random.default_rng(gen_ss)
    X = rng.random((n, 20))
    y = np.where(X[:, :5].sum(axis=1) >= 2.5, 1, -1).astype(np.int64)
    clean = Dataset(
        features=X,
        labels=y,
        clean_labels=y.copy(),
        meta=DatasetMeta("mease_wyner", 0.0, seed),
    )
    return flip_labels(clean, q, flip_ss)


def flip_labels(ds: Dataset, q: float, seed) -> Dataset:
    """Flip each label independently with probability q; keep clean labels.

    The flip mask is a pure function of (seed, n): position i flips iff
    the i-th variate of the seeded stream falls below q.  Requires an
    unflipped dataset (meta.q == 0).
    """
    if not (0.0 <= q < 0.5):
        raise DomainError(f"noise rate must lie in [0, 1/2), got {q}")
    if ds.meta.q != 0.0:
        raise DomainError(f"dataset already carries noise q={ds.meta.q}")
    if not np.array_equal(ds.labels, ds.clean_labels):
        raise DomainError("labels and clean_labels differ; refusing to flip twice")
    rng = np.random.default_rng(seed)
    mask = rng.random(ds.n) < q
    labels = np.where(mask, -ds.labels, ds.labels)
    return replace(ds, labels=labels, meta=replace(ds.meta, q=float(q)))


# ---------------------------------------------------------------------------
# CSV persistence
#
# Line 1:  # generator=<name> q=<rate> seed=<int> n=<int> d=<int>
# Line 2:  f0,...,f<d-1>,label,clean_label[,kind]
# Rows:    features as decimal literals (17 significant digits), labels as
#          -1/1, kind as a single letter (long_servedio only).
# ---------------------------------------------------------------------------


def save_csv(ds: Dataset, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        _write_csv(ds, fh)


def _write_csv(ds: Dataset, fh) -> None:
    seed = "none" if ds.meta.seed is None else repr(ds.meta.seed)
    fh.write(
        f"# generator={ds.meta.generator} q={ds.meta.q!r} seed={seed} "
        f"n={ds.n} d={ds.d}\n"
    )
    cols = [f"f{i}" for i in range(ds.d)] + ["label", "clean_label"]
    has_kind = ds.meta.kinds is not None
    if has_kind:
        cols.append("kind")
    fh.write(",".join(cols) + "\n")
    for i in range(ds.n):
        parts = [format(v, ".17g") for v in ds.features[i]]
        parts.append(str(int(ds.labels[i])))
        parts.append(str(int(ds.clean_labels[i])))
        if has_kind:
            parts.append(ds.meta.kinds[i])
        fh.write(",".join(parts) + "\n")


def load_csv(path) -> Dataset:
    with open(path, "r", encoding="ascii") as fh:
        return _read_csv(fh)


def _read_csv(fh) -> Dataset:
    header = fh.readline()
    if not header.startswith("# "):
        raise ParseError("missing metadata header line", row=1)
    meta_fields = {}
    for token in header[2:].split():
        if "=" not in token:
            raise ParseError(f"malformed metadata token {token!r}", row=1)
        k, v = token.split("=", 1)
        meta_fields[k] = v
    try:
        generator = meta_fields["generator"]
        q = float(meta_fields["q"])
        seed = None if meta_fields["seed"] == "none" else int(meta_fields["seed"])
        n = int(meta_fields["n"])
        d = int(meta_fields["d"])
    except (KeyError, ValueError) as exc:
        raise ParseError(f"bad metadata header: {exc}", row=1) from exc

    colline = fh.readline().rstrip("\n")
    cols = colline.split(",") if colline else []
    expected = [f"f{i}" for i in range(d)] + ["label", "clean_label"]
    has_kind = cols == expected + ["kind"]
    if not has_kind and cols != expected:
        raise ParseError(f"unexpected column header {colline!r}", row=2)

    X = np.empty((n, d), dtype=float)
    labels = np.empty(n, dtype=np.int64)
    clean = np.empty(n, dtype=np.int64)
    kinds = np.empty(n, dtype="<U1") if has_kind else None
    width = d + 2 + (1 if has_kind else 0)
    for i in range(n):
        line = fh.readline()
        if not line:
            raise ParseError(f"expected {n} data rows, file ends at row {i}", row=i + 3)
        parts = line.rstrip("\n").split(",")
        if len(parts) != width:
            raise ParseError(
                f"expected {width} fields, got {len(parts)}", row=i + 3
            )
        try:
            X[i] = [float(p) for p in parts[:d]]
        except ValueError as exc:
            raise ParseError(f"bad feature value: {exc}", row=i + 3) from exc
        for dest, col, raw in ((labels, "label", parts[d]), (clean, "clean_label", parts[d + 1])):
            if raw not in ("-1", "1"):
                raise ParseError(
                    f"label value must be -1 or 1, got {raw!r}", row=i + 3, column=col
                )
            dest[i] = int(raw)
        if has_kind:
            kinds[i] = parts[d + 2]
    return Dataset(
        features=X,
        labels=labels,
        clean_labels=clean,
        meta=DatasetMeta(generator, q, seed, kinds=kinds),
    )


def loads_csv(text: str) -> Dataset:
    """Parse a dataset from an in-memory CSV string (test convenience)."""
    return _read_csv(io.StringIO(text))
