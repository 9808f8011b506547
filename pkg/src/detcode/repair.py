"""Helper-independent repair of a single failed node.

A helper multiplies its own content by a public coefficient matrix that
depends only on the failed node's encoder row, compresses the result to at
most beta symbols (the matrix has rank <= beta), and transmits those. The
replacement node decompresses all d helper vectors, undoes the encoding,
and reassembles its missing symbols by signed sums. No helper needs to
know which other nodes are helping.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache

from .code import EncoderMatrix
from .field import Matrix, element_width, vec_mat
from .subsets import position, subsets


class WrongTarget(ValueError):
    """Payload addressed to a different failed node."""


def repair_matrix(f: int, m: int, encoder: EncoderMatrix) -> Matrix:
    """Repair-coefficient matrix for failed node f at mode m.

    Shape alpha x C(d, m-1): rows labeled by m-subsets, columns by
    (m-1)-subsets. The entry at (I, J) is (-1)**position(I, x) times the
    failed node's encoder coefficient for x when I = J + {x}, else zero.
    """
    d = encoder.d
    field = encoder.field
    psi = encoder.row(f)
    row_labels = subsets(d, m)
    col_labels = subsets(d, m - 1)
    data = [[0] * len(col_labels) for _ in range(len(row_labels))]
    for col_idx, j_label in enumerate(col_labels.ordering):
        missing = set(j_label)
        for x in range(1, d + 1):
            if x in missing:
                continue
            i_label = tuple(sorted(j_label + (x,)))
            data[row_labels.rank(i_label)][col_idx] = field.signed(
                psi[x - 1], position(i_label, x)
            )
    return Matrix(field, data, cols=len(col_labels))


@lru_cache(maxsize=512)
def repair_basis(encoder: EncoderMatrix, f: int, m: int):
    """(matrix, pivot columns, expansion) for one failed node; cached per encoder."""
    xi = repair_matrix(f, m, encoder)
    pivots, expansion = xi.pivot_columns()
    return xi, tuple(pivots), expansion


def column_dependency(j_label, f: int, m: int, encoder: EncoderMatrix) -> list[int]:
    """A combination of repair-matrix columns that sums to zero.

    For an (m-2)-subset J, the columns labeled J + {y} over y outside J are
    linearly dependent with coefficients (-1)**position(J + {y}, y) times the
    failed node's coefficient for y. Returned as a full-length vector over
    the C(d, m-1) column space (zeros elsewhere); requires m >= 2. Nonzero
    whenever the failed row has a nonzero coefficient outside J, which MDS
    guarantees for J = the empty set.
    """
    if m < 2:
        raise ValueError("column dependencies exist only for m >= 2")
    d = encoder.d
    field = encoder.field
    psi = encoder.row(f)
    col_labels = subsets(d, m - 1)
    coeffs = [0] * len(col_labels)
    j_members = set(j_label)
    for y in range(1, d + 1):
        if y in j_members:
            continue
        label = tuple(sorted(tuple(j_label) + (y,)))
        coeffs[col_labels.rank(label)] = field.signed(psi[y - 1], position(label, y))
    return coeffs


_PAYLOAD_HEADER = struct.Struct("<HHBB")  # failed id, helper id, mode, symbol count


@dataclass(frozen=True)
class RepairPayload:
    """Compressed repair data one helper sends for one failed node."""

    failed: int
    helper: int
    m: int
    pivot_indices: tuple[int, ...]
    symbols: tuple[int, ...]

    def to_bytes(self, p: int) -> bytes:
        width = element_width(p)
        parts = [_PAYLOAD_HEADER.pack(self.failed, self.helper, self.m, len(self.symbols))]
        parts.extend(struct.pack("<H", i) for i in self.pivot_indices)
        parts.extend(v.to_bytes(width, "little") for v in self.symbols)
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, blob: bytes, p: int) -> "RepairPayload":
        width = element_width(p)
        failed, helper, m, count = _PAYLOAD_HEADER.unpack_from(blob, 0)
        offset = _PAYLOAD_HEADER.size
        pivots = struct.unpack_from(f"<{count}H", blob, offset)
        offset += 2 * count
        symbols = tuple(
            int.from_bytes(blob[offset + i * width : offset + (i + 1) * width], "little")
            for i in range(count)
        )
        if len(blob) != offset + count * width:
            raise ValueError("payload length does not match symbol count")
        if any(v >= p for v in symbols):
            raise ValueError("symbol out of field range")
        return cls(failed, helper, m, pivots, symbols)


def helper_payload(h_content, helper: int, f: int, encoder: EncoderMatrix, m: int) -> RepairPayload:
    """Repair data from one helper: content times the repair matrix, compressed.

    Only the entries at the pivot columns are kept; pivots are a function of
    the (public) repair matrix alone, so sender and receiver agree without
    negotiation and the payload never depends on who else is helping.
    """
    xi, pivots, _ = repair_basis(encoder, f, m)
    full = vec_mat(list(h_content), xi)
    return RepairPayload(
        failed=f,
        helper=helper,
        m=m,
        pivot_indices=pivots,
        symbols=tuple(full[j] for j in pivots),
    )


def decompress_payload(payload: RepairPayload, encoder: EncoderMatrix) -> list[int]:
    """Full-length repair vector, non-pivot entries rebuilt from pivot ones."""
    _, pivots, expansion = repair_basis(encoder, payload.failed, payload.m)
    if tuple(payload.pivot_indices) != pivots:
        raise ValueError("payload pivot set disagrees with the repair matrix")
    p = encoder.field.p
    cols = len(subsets(encoder.d, payload.m - 1))
    full = [0] * cols
    for j, v in zip(pivots, payload.symbols):
        full[j] = v
    for j, coeffs in expansion.items():
        full[j] = sum(c * full[k] for c, k in zip(coeffs, pivots)) % p
    return full


def decode_failed_node(payloads, helper_ids, encoder: EncoderMatrix, f: int) -> list[int]:
    """Exact content of the failed node from d helper payloads.

    Decompresses each payload, stacks the vectors, undoes the helper
    encoding by inverting the d selected encoder rows, and combines the
    resulting rows with alternating signs: the entry at column label I is
    sum over x in I of (-1)**position(I, x) times the entry at
    (row x, column I - {x}).
    """
    helper_ids = list(helper_ids)
    d = encoder.d
    if len(helper_ids) != d or len(set(helper_ids)) != d:
        raise ValueError(f"need exactly {d} distinct helpers, got {helper_ids}")
    if len(payloads) != d:
        raise ValueError(f"need {d} payloads, got {len(payloads)}")
    modes = {payload.m for payload in payloads}
    if len(modes) != 1:
        raise ValueError("payloads disagree on mode")
    m = modes.pop()
    for payload in payloads:
        if payload.failed != f:
            raise WrongTarget(
                f"payload from helper {payload.helper} targets node {payload.failed}, not {f}"
            )
    field = encoder.field
    stacked = Matrix.stack_rows(
        field, [decompress_payload(payload, encoder) for payload in payloads]
    )
    space = encoder.rows_submatrix(helper_ids).inverse() @ stacked
    return combine_repair_space(space, encoder.d, m, field)


def combine_repair_space(space: Matrix, d: int, m: int, field) -> list[int]:
    """Signed-sum readout of a repair-space matrix into node content."""
    col_labels = subsets(d, m - 1)
    out = []
    for label in subsets(d, m).ordering:
        acc = 0
        for x in label:
            rest = tuple(y for y in label if y != x)
            acc += field.signed(space[x - 1, col_labels.rank(rest)], position(label, x))
        out.append(acc % field.p)
    return out
