"""File formats: edge lists, Matrix Market Laplacians, right-hand-side
vectors, and the binary factorization container.

Vertex ids are 1-based in every file format and 0-based in memory.

Factorization container (little-endian): magic "LCHO", version u32 = 1,
n u64, perm as n x u64, diag as n x f64, then the columns as concatenated
CSC: col_ptr (n+1) x u64 followed by one (row u64, value f64) pair per
entry.  Round-trips are bitwise.
"""

import json
import struct

import numpy as np

from .factorizer import Factorization
from .multigraph import MultiGraph

__all__ = [
    "GraphFormatError", "FactorizationFormatError",
    "parse_graph", "parse_edgelist", "parse_matrix_market", "emit_edgelist",
    "read_vector", "write_vector",
    "serialize_factorization", "deserialize_factorization",
    "stats_to_dict", "write_stats_json",
]

MAGIC = b"LCHO"
VERSION = 1


class GraphFormatError(ValueError):
    pass


class FactorizationFormatError(ValueError):
    pass


def parse_graph(path, fmt="edgelist"):
    if fmt == "edgelist":
        return parse_edgelist(path)
    if fmt in ("matrix-market", "mm", "mtx"):
        return parse_matrix_market(path)
    raise GraphFormatError(f"unknown graph format {fmt!r}")


def parse_edgelist(path):
    """Lines "u v w" (1-based ids, whitespace-separated, '#' comments);
    duplicate lines become parallel multi-edges."""
    edges = []
    max_id = 0
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise GraphFormatError(
                    f"{path}:{lineno}: expected 'u v w', got {raw.strip()!r}")
            try:
                u = int(parts[0])
                v = int(parts[1])
                w = float(parts[2])
            except ValueError as exc:
                raise GraphFormatError(f"{path}:{lineno}: {exc}") from None
            if u < 1 or v < 1:
                raise GraphFormatError(
                    f"{path}:{lineno}: vertex ids are 1-based")
            if u == v:
                raise GraphFormatError(f"{path}:{lineno}: self-loop")
            if not (w > 0):
                raise GraphFormatError(
                    f"{path}:{lineno}: weight must be positive")
            edges.append((u - 1, v - 1, w))
            max_id = max(max_id, u, v)
    if not edges:
        raise GraphFormatError(f"{path}: no edges")
    return MultiGraph.from_edge_list(max_id, edges)


def parse_matrix_market(path):
    """Symmetric coordinate Matrix Market read as a Laplacian: an
    off-diagonal entry L(i,j) = -w becomes the edge (i,j,w); diagonal
    entries are checked against the off-diagonal sums and dropped.
    Duplicate coordinates become multi-edges."""
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("%%MatrixMarket"):
            raise GraphFormatError(f"{path}: missing MatrixMarket header")
        fields = header.split()
        if len(fields) < 5 or fields[1] != "matrix" or fields[2] != "coordinate":
            raise GraphFormatError(f"{path}: only coordinate matrices supported")
        if fields[4] != "symmetric":
            raise GraphFormatError(
                f"{path}: asymmetric pattern ({fields[4]}); Laplacians are symmetric")
        lineno = 1
        size_line = None
        for raw in fh:
            lineno += 1
            line = raw.strip()
            if line and not line.startswith("%"):
                size_line = line
                break
        if size_line is None:
            raise GraphFormatError(f"{path}: missing size line")
        try:
            nrows, ncols, nnz = (int(x) for x in size_line.split())
        except ValueError:
            raise GraphFormatError(
                f"{path}:{lineno}: bad size line {size_line!r}") from None
        if nrows != ncols:
            raise GraphFormatError(f"{path}: matrix is not square")
        n = nrows
        edges = []
        diag = np.zeros(n)
        offsum = np.zeros(n)
        seen = 0
        for raw in fh:
            lineno += 1
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise GraphFormatError(
                    f"{path}:{lineno}: expected 'i j value'")
            try:
                i = int(parts[0])
                j = int(parts[1])
                val = float(parts[2])
            except ValueError as exc:
                raise GraphFormatError(f"{path}:{lineno}: {exc}") from None
            if not (1 <= i <= n and 1 <= j <= n):
                raise GraphFormatError(f"{path}:{lineno}: index out of range")
            seen += 1
            if i == j:
                diag[i - 1] += val
                continue
            if val > 0:
                raise GraphFormatError(
                    f"{path}:{lineno}: positive off-diagonal entry "
                    "(not a Laplacian)")
            if val == 0:
                continue
            w = -val
            edges.append((i - 1, j - 1, w))
            offsum[i - 1] += w
            offsum[j - 1] += w
        if seen != nnz:
            raise GraphFormatError(
                f"{path}: entry count {seen} does not match header {nnz}")
        scale = max(float(diag.max(initial=0.0)), float(offsum.max(initial=0.0)), 1.0)
        if np.abs(diag - offsum).max() > 1e-6 * scale:
            raise GraphFormatError(
                f"{path}: row sums are not zero (not a Laplacian)")
        if not edges:
            raise GraphFormatError(f"{path}: no off-diagonal entries")
        return MultiGraph.from_edge_list(n, edges)


def emit_edgelist(g, path):
    """Write the live multi-edges as 1-based 'u v w' lines."""
    with open(path, "w") as fh:
        m = g.n_edges
        for e in range(m):
            if g._alive[e]:
                fh.write(f"{int(g._eu[e]) + 1} {int(g._ev[e]) + 1} "
                         f"{float(g._ew[e])!r}\n")


def read_vector(path):
    """One real per line."""
    vals = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                vals.append(float(line))
            except ValueError:
                raise GraphFormatError(
                    f"{path}:{lineno}: not a number: {line!r}") from None
    return np.array(vals, dtype=np.float64)


def write_vector(x, path):
    with open(path, "w") as fh:
        for v in x:
            fh.write(f"{float(v)!r}\n")


def serialize_factorization(f, path):
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", f.n))
        fh.write(f.perm.astype("<u8").tobytes())
        fh.write(f.diag.astype("<f8").tobytes())
        fh.write(f.col_ptr.astype("<u8").tobytes())
        pairs = np.empty(f.nnz, dtype=[("idx", "<u8"), ("val", "<f8")])
        pairs["idx"] = f.col_idx
        pairs["val"] = f.col_val
        fh.write(pairs.tobytes())


def deserialize_factorization(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 16 or data[:4] != MAGIC:
        raise FactorizationFormatError("bad magic (not a factorization file)")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != VERSION:
        raise FactorizationFormatError(
            f"unsupported factorization version {version}")
    (n,) = struct.unpack_from("<Q", data, 8)
    off = 16
    need = n * 8 + n * 8 + (n + 1) * 8
    if len(data) < off + need:
        raise FactorizationFormatError("truncated factorization file")
    perm = np.frombuffer(data, dtype="<u8", count=n, offset=off).astype(np.int64)
    off += n * 8
    diag = np.frombuffer(data, dtype="<f8", count=n, offset=off).copy()
    off += n * 8
    col_ptr = np.frombuffer(data, dtype="<u8", count=n + 1,
                            offset=off).astype(np.int64)
    off += (n + 1) * 8
    nnz = int(col_ptr[-1])
    if len(data) < off + 16 * nnz:
        raise FactorizationFormatError("truncated factorization file")
    pairs = np.frombuffer(data, dtype=[("idx", "<u8"), ("val", "<f8")],
                          count=nnz, offset=off)
    if len(data) != off + 16 * nnz:
        raise FactorizationFormatError("trailing bytes in factorization file")
    return Factorization(n=int(n), perm=perm, col_ptr=col_ptr,
                         col_idx=pairs["idx"].astype(np.int64),
                         col_val=pairs["val"].copy(), diag=diag)


def stats_to_dict(stats, trajectory_points=100):
    """JSON-ready run statistics; the live-edge trajectory is downsampled
    to about trajectory_points entries."""
    n = stats.n
    stride = max(1, n // trajectory_points)
    idx = list(range(0, n, stride))
    if idx[-1] != n - 1:
        idx.append(n - 1)
    d = {
        "schema": 1,
        "n": stats.n,
        "m": stats.m_input,
        "rho": stats.rho,
        "variant": stats.variant,
        "seed": stats.seed,
        "fill": stats.fill,
        "attempts_total": stats.attempts_total,
        "vertex_draws": stats.vertex_draws,
        "live_edge_trajectory": {
            "step": idx,
            "live_edges": [int(stats.live_edges[i]) for i in idx],
        },
        "wall_times": stats.wall_times,
    }
    if stats.diagnostics is not None:
        d["diagnostics"] = [
            {"step": r.step, "lambda_min": r.lambda_min,
             "lambda_max": r.lambda_max, "within_eps": r.within_eps,
             "truncation_ok": r.truncation_ok, "live_edges": r.live_edges}
            for r in stats.diagnostics
        ]
    if stats.diagnostics_skipped:
        d["diagnostics_skipped"] = True
    return d


def write_stats_json(stats, path, extra=None):
    d = stats_to_dict(stats) if not isinstance(stats, dict) else stats
    if extra:
        d.update(extra)
    with open(path, "w") as fh:
        json.dump(d, fh, indent=2, sort_keys=True)
        fh.write("\n")
