"""Count tables in, matrices and curves out.

Input is the classic tab-delimited OTU table: one header row (an id cell,
then sample ids) followed by one row per OTU with integer counts. Comment
lines starting with ``#`` before the header are skipped. The exception is a
line starting with ``#OTU ID``, which QIIME writes as the header itself.
"""

import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, ParseError
from .estimator import theta_hat_all
from .summaries import Sample, summarize_pair
from .variance import jackknife_total, stderr_at_ny

log = logging.getLogger(__name__)

DEFAULT_MIN_DEPTH = 5000
METRICS = ("theta", "stderr", "dderiv")
_TRAILING_ANNOTATIONS = {"taxonomy", "consensus lineage", "consensuslineage"}


@dataclass
class CountTable:
    """OTU-by-sample count matrix, ``counts[otu, sample]``."""

    sample_ids: list
    otu_ids: list
    counts: np.ndarray
    id_label: str = "OTU ID"

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64).reshape(len(self.otu_ids), len(self.sample_ids))

    @property
    def depths(self):
        return self.counts.sum(axis=0)

    def index(self, sample_id):
        try:
            return self.sample_ids.index(sample_id)
        except ValueError:
            raise InvalidInputError(f"no sample named {sample_id!r}") from None

    def sample(self, sample_id):
        """The column as a :class:`Sample`; colors are OTU row indices."""
        col = self.counts[:, self.index(sample_id)]
        nz = np.flatnonzero(col)
        return Sample({int(r): int(col[r]) for r in nz})

    def select(self, columns):
        columns = list(columns)
        return CountTable(
            sample_ids=[self.sample_ids[c] for c in columns],
            otu_ids=list(self.otu_ids),
            counts=self.counts[:, columns],
            id_label=self.id_label,
        )


def _parse_count(cell, lineno, otu, sample):
    try:
        value = int(cell)
    except ValueError:
        try:
            f = float(cell)
        except ValueError:
            f = math.nan
        if not (math.isfinite(f) and f.is_integer()):
            raise ParseError(f"count {cell!r} for OTU {otu!r}, sample {sample!r} is not an integer", lineno) from None
        value = int(f)
    if value < 0:
        raise ParseError(f"negative count {cell!r} for OTU {otu!r}, sample {sample!r}", lineno)
    return value


def parse_count_table(stream):
    """Read a tab-delimited count table from a text stream."""
    header = None
    header_line = None
    otu_ids, rows = [], []
    drop_last = False
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if header is None:
            if not line.strip():
                continue
            if line.startswith("#") and not line.upper().startswith("#OTU ID"):
                continue
            header = line.split("\t")
            header_line = lineno
            if len(header) < 2:
                raise ParseError("header needs an id cell and at least one sample id", lineno)
            if header[-1].strip().lower() in _TRAILING_ANNOTATIONS:
                drop_last = True
                header = header[:-1]
            continue
        if not line.strip():
            continue
        cells = line.split("\t")
        if drop_last:
            cells = cells[:-1]
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(cells)}", lineno)
        otu = cells[0]
        otu_ids.append(otu)
        rows.append([_parse_count(c, lineno, otu, header[i + 1]) for i, c in enumerate(cells[1:])])

    if header is None:
        raise ParseError("no header row found")
    id_label = header[0].lstrip("#").strip() or "OTU ID"
    sample_ids = header[1:]
    seen = set()
    for sid in sample_ids:
        if sid in seen:
            raise ParseError(f"duplicate sample id {sid!r}", header_line)
        seen.add(sid)
    counts = np.array(rows, dtype=np.int64).reshape(len(otu_ids), len(sample_ids))
    empty = [sid for sid, d in zip(sample_ids, counts.sum(axis=0)) if d == 0]
    if empty:
        raise ParseError(f"sample(s) with no counts: {', '.join(map(repr, empty))}", header_line)
    return CountTable(sample_ids=sample_ids, otu_ids=otu_ids, counts=counts, id_label=id_label)


def read_count_table(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_count_table(fh)


def write_count_table(table, stream):
    stream.write("\t".join([table.id_label, *table.sample_ids]) + "\n")
    for otu, row in zip(table.otu_ids, table.counts):
        stream.write("\t".join([otu, *map(str, row.tolist())]) + "\n")


def filter_min_depth(table, min_n=DEFAULT_MIN_DEPTH, strict=False):
    """Keep samples with at least ``min_n`` draws (more than ``min_n`` if ``strict``)."""
    depths = table.depths
    keep = np.flatnonzero(depths > min_n if strict else depths >= min_n)
    if keep.size == 0:
        log.warning("no sample reaches depth %d; the filtered table is empty", min_n)
    elif keep.size < depths.size:
        log.info("dropped %d of %d samples below depth %d", depths.size - keep.size, depths.size, min_n)
    return table.select(keep)


@dataclass
class PairwiseResult:
    """Square matrix over ordered sample pairs: row = urn x, column = urn y."""

    metric: str
    sample_ids: list
    matrix: np.ndarray

    def to_csv(self, stream):
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["x\\y", *self.sample_ids])
        for sid, row in zip(self.sample_ids, self.matrix):
            w.writerow([sid, *(f"{v:.17g}" for v in row)])


def _pairwise_block(xf, absent, single, depths, rows):
    n_x = depths[rows][:, None]
    n_y = depths[None, :]
    q0 = xf[:, rows].T @ absent
    q1 = xf[:, rows].T @ single
    theta = q0 / n_x
    dderiv = q1 / (n_x * n_y)
    stderr = stderr_at_ny(theta, n_x)
    return rows, theta, stderr, dderiv


def pairwise_matrices(table, workers=1, block=16):
    """Estimate, standard error and discrete derivative at ``k = n_y`` for all ordered pairs.

    Per pair this needs only ``Q(0)`` and ``Q(1)``:
    ``theta_hat(n_y) = Q(0)/n_x`` and
    ``theta_hat(n_y - 1) - theta_hat(n_y) = Q(1) / (n_x n_y)``.
    Both come out of two matrix products over the whole table. Row blocks
    are spread over a thread pool and written into disjoint slices.
    """
    n = len(table.sample_ids)
    if n < 2:
        raise InvalidInputError("pairwise comparison needs at least two samples")
    depths = table.depths.astype(np.float64)
    small = [sid for sid, d in zip(table.sample_ids, depths) if d < 2]
    if small:
        raise InvalidInputError(f"samples with fewer than 2 draws: {', '.join(map(repr, small))}")

    xf = table.counts.astype(np.float64)
    absent = (table.counts == 0).astype(np.float64)
    single = (table.counts == 1).astype(np.float64)
    out = {m: np.zeros((n, n)) for m in METRICS}
    blocks = [np.arange(a, min(a + block, n)) for a in range(0, n, block)]

    def run(rows):
        return _pairwise_block(xf, absent, single, depths, rows)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, blocks))
    else:
        results = [run(b) for b in blocks]
    for rows, theta, stderr, dderiv in results:
        out["theta"][rows] = theta
        out["stderr"][rows] = stderr
        out["dderiv"][rows] = dderiv
    for m in METRICS:
        np.fill_diagonal(out[m], 0.0)
    return {m: PairwiseResult(metric=m, sample_ids=list(table.sample_ids), matrix=out[m]) for m in METRICS}


CURVE_FIELDS = ("k", "theta", "var_x", "var_y", "stderr", "diff")


def curve_records(x, y):
    """Per-k rows for plotting the estimate curve, ``k = 1..n_y``.

    ``diff`` is ``theta_hat(k-1) - theta_hat(k)``; it is NaN at k = 1 because
    the estimate is not defined at k = 0.
    """
    s = summarize_pair(x, y)
    series = theta_hat_all(s)
    var = jackknife_total(s, series)
    diff = np.concatenate([[math.nan], series.theta[:-1] - series.theta[1:]])
    return [
        {
            "k": int(k),
            "theta": float(series.theta[k - 1]),
            "var_x": float(var.var_x[k - 1]),
            "var_y": float(var.var_y[k - 1]),
            "stderr": float(var.stderr[k - 1]),
            "diff": float(diff[k - 1]),
        }
        for k in series.ks
    ]


def write_curve_csv(records, stream):
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CURVE_FIELDS)
    for rec in records:
        w.writerow([rec["k"], *(f"{rec[f]:.17g}" for f in CURVE_FIELDS[1:])])


def curve_export(x, y, stream=None):
    records = curve_records(x, y)
    if stream is not None:
        write_curve_csv(records, stream)
    return records


@dataclass
class Envelope:
    """JSON wrapper carrying provenance next to numeric results."""

    kind: str
    data: object
    metadata: dict = field(default_factory=dict)

    def dump(self, stream):
        from . import __version__

        payload = {"kind": self.kind, "version": __version__, "metadata": self.metadata, "data": self.data}
        json.dump(payload, stream, indent=2, default=_json_default, allow_nan=True)
        stream.write("\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")
