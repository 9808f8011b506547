"""Repair of several simultaneously failed nodes.

Two mechanisms beat repairing each failure independently:

* joint transmission — the per-failure repair vectors a helper would send
  overlap linearly, so their concatenation compresses to at most
  beta_e = C(d, m) - C(d-e, m) symbols per helper. A certificate matrix in
  the left null space of the concatenation witnesses the rank bound.

* centralized sequencing — a repair center restores the failed nodes one at
  a time and reuses freshly repaired nodes as helpers for the rest; symbol
  exchange among nodes already at the center is free. Averaged over the d
  helpers the download is beta_bar_e = (m/d) * (C(d+1, m+1) - C(d-e+1, m+1))
  per helper, and a d-fold rotation schedule equalizes it exactly.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .code import EncoderMatrix
from .field import Matrix, element_width, vec_mat
from .repair import RepairPayload, combine_repair_space, repair_basis, repair_matrix
from .subsets import binom, position, subsets


class TooManyFailures(ValueError):
    """More simultaneous failures than helpers per repair."""


class OverlapError(ValueError):
    """Helper set intersects the failed set."""


def joint_bandwidth(d: int, m: int, e: int) -> int:
    """Per-helper symbols to jointly repair e failures: C(d,m) - C(d-e,m)."""
    if e < 1:
        raise ValueError(f"need at least one failure, got e={e}")
    return binom(d, m) - binom(d - e, m)


def centralized_bandwidth(d: int, m: int, e: int) -> Fraction:
    """Average per-helper symbols under centralized sequential repair, exact."""
    if e < 1:
        raise ValueError(f"need at least one failure, got e={e}")
    return Fraction(m, d) * (binom(d + 1, m + 1) - binom(d - e + 1, m + 1))


def multi_repair_matrix(failed, m: int, encoder: EncoderMatrix) -> Matrix:
    """Horizontal concatenation of the per-failure repair matrices, in order."""
    failed = list(failed)
    if len(set(failed)) != len(failed):
        raise ValueError(f"failed ids must be distinct, got {failed}")
    return Matrix.hstack([repair_matrix(f, m, encoder) for f in failed])


@lru_cache(maxsize=512)
def joint_basis(encoder: EncoderMatrix, failed: tuple[int, ...], m: int):
    """(matrix, pivots, expansion) for a failure tuple; cached per encoder."""
    xi = multi_repair_matrix(failed, m, encoder)
    pivots, expansion = xi.pivot_columns()
    return xi, tuple(pivots), expansion


@dataclass(frozen=True)
class NullSpaceMatrix:
    """Left-null-space certificate for the concatenated repair matrix.

    Full row rank C(d-e, m) by construction: restricted to columns labeled
    by subsets avoiding the anchor set, the matrix is diagonal with entries
    plus/minus the anchor minor of the failed rows.
    """

    matrix: Matrix
    row_labels: tuple[tuple[int, ...], ...]
    column_labels: tuple[tuple[int, ...], ...]
    anchor: tuple[int, ...]


def null_space_matrix(failed, m: int, encoder: EncoderMatrix) -> NullSpaceMatrix:
    """Certificate matrix annihilating the concatenated repair matrix.

    The anchor is the lexicographically first e-subset of column positions
    on which the failed encoder rows have a nonzero minor (one exists since
    those rows are independent). Rows are labeled by m-subsets avoiding the
    anchor; the entry at (I, L) is a signed e x e minor of the failed rows
    on (I + anchor) - L when L is contained in I + anchor, else zero.
    """
    failed = list(failed)
    d = encoder.d
    e = len(failed)
    if e > d:
        raise TooManyFailures(f"at most d={d} simultaneous failures, got {e}")
    field = encoder.field
    failed_rows = encoder.rows_submatrix(failed)

    anchor = None
    for candidate in subsets(d, e).ordering:
        minor = failed_rows.submatrix(range(e), [x - 1 for x in candidate])
        if minor.det() != 0:
            anchor = candidate
            break
    assert anchor is not None, "failed rows of an MDS encoder are independent"

    outside = [x for x in range(1, d + 1) if x not in anchor]
    if m <= len(outside):
        row_labels = tuple(
            tuple(outside[i - 1] for i in combo)
            for combo in subsets(len(outside), m).ordering
        )
    else:
        row_labels = ()  # certificate is empty once e > d - m
    col_space = subsets(d, m)
    matrix = Matrix.zeros(field, len(row_labels), len(col_space))
    anchor_set = set(anchor)
    for r, i_label in enumerate(row_labels):
        support = tuple(sorted(set(i_label) | anchor_set))
        support_set = set(support)
        for c, l_label in enumerate(col_space.ordering):
            if not set(l_label) <= support_set:
                continue
            sign = sum(position(support, j) for j in l_label)
            keep = [x for x in support if x not in l_label]
            minor = failed_rows.submatrix(range(e), [x - 1 for x in keep]).det()
            matrix.set(r, c, field.signed(minor, sign))
    return NullSpaceMatrix(
        matrix=matrix,
        row_labels=row_labels,
        column_labels=col_space.ordering,
        anchor=anchor,
    )


_JOINT_HEADER_TAIL = struct.Struct("<BH")  # mode, symbol count


@dataclass(frozen=True)
class JointPayload:
    """Compressed repair data one helper sends for a set of failed nodes.

    Pivot indices address the concatenated column space (segment index times
    C(d, m-1) plus the within-segment column).
    """

    failed: tuple[int, ...]
    helper: int
    m: int
    pivot_indices: tuple[int, ...]
    symbols: tuple[int, ...]

    def to_bytes(self, p: int) -> bytes:
        width = element_width(p)
        e = len(self.failed)
        parts = [struct.pack("<B", e)]
        parts.extend(struct.pack("<H", f) for f in self.failed)
        parts.append(_JOINT_HEADER_TAIL.pack(self.m, len(self.symbols)))
        parts.extend(struct.pack("<H", i) for i in self.pivot_indices)
        parts.extend(v.to_bytes(width, "little") for v in self.symbols)
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, blob: bytes, p: int, helper: int = 0) -> "JointPayload":
        width = element_width(p)
        (e,) = struct.unpack_from("<B", blob, 0)
        offset = 1
        failed = struct.unpack_from(f"<{e}H", blob, offset)
        offset += 2 * e
        m, count = _JOINT_HEADER_TAIL.unpack_from(blob, offset)
        offset += _JOINT_HEADER_TAIL.size
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


def joint_helper_payload(h_content, helper: int, failed, encoder: EncoderMatrix, m: int) -> JointPayload:
    """Content times the concatenated repair matrix, kept at pivot columns only."""
    failed = tuple(failed)
    xi, pivots, _ = joint_basis(encoder, failed, m)
    full = vec_mat(list(h_content), xi)
    return JointPayload(
        failed=failed,
        helper=helper,
        m=m,
        pivot_indices=pivots,
        symbols=tuple(full[j] for j in pivots),
    )


def decompress_joint(payload: JointPayload, encoder: EncoderMatrix) -> list[int]:
    """Full concatenated repair vector, non-pivot entries rebuilt exactly."""
    _, pivots, expansion = joint_basis(encoder, payload.failed, payload.m)
    if tuple(payload.pivot_indices) != pivots:
        raise ValueError("payload pivot set disagrees with the repair matrix")
    p = encoder.field.p
    cols = len(payload.failed) * len(subsets(encoder.d, payload.m - 1))
    full = [0] * cols
    for j, v in zip(pivots, payload.symbols):
        full[j] = v
    for j, coeffs in expansion.items():
        full[j] = sum(c * full[k] for c, k in zip(coeffs, pivots)) % p
    return full


def split_segments(vector: list[int], e: int, d: int, m: int) -> list[list[int]]:
    """Per-failure slices of a concatenated repair vector, in failure order."""
    seg = len(subsets(d, m - 1))
    return [vector[i * seg : (i + 1) * seg] for i in range(e)]


def single_payload_from_joint(payload: JointPayload, f: int, encoder: EncoderMatrix) -> RepairPayload:
    """The single-failure payload for f implied by a joint payload containing f."""
    if f not in payload.failed:
        raise ValueError(f"node {f} is not covered by this payload")
    idx = payload.failed.index(f)
    full = decompress_joint(payload, encoder)
    segment = split_segments(full, len(payload.failed), encoder.d, payload.m)[idx]
    _, pivots, _ = repair_basis(encoder, f, payload.m)
    return RepairPayload(
        failed=f,
        helper=payload.helper,
        m=payload.m,
        pivot_indices=pivots,
        symbols=tuple(segment[j] for j in pivots),
    )


def decode_failed_nodes(payloads, helper_ids, encoder: EncoderMatrix, failed) -> dict[int, list[int]]:
    """Exact contents of all failed nodes from d joint payloads.

    One inversion of the selected encoder rows serves every failure: the
    decompressed vectors stack into the helper-encoded repair space, whose
    per-failure segments decode independently by signed sums.
    """
    failed = tuple(failed)
    helper_ids = list(helper_ids)
    d = encoder.d
    if len(helper_ids) != d or len(set(helper_ids)) != d:
        raise ValueError(f"need exactly {d} distinct helpers, got {helper_ids}")
    for payload in payloads:
        if payload.failed != failed:
            raise ValueError("payload covers a different failure set")
    field = encoder.field
    stacked = Matrix.stack_rows(
        field, [decompress_joint(payload, encoder) for payload in payloads]
    )
    space = encoder.rows_submatrix(helper_ids).inverse() @ stacked
    seg = len(subsets(d, payloads[0].m - 1))
    out = {}
    for idx, f in enumerate(failed):
        segment = space.submatrix(range(d), range(idx * seg, (idx + 1) * seg))
        out[f] = combine_repair_space(segment, d, payloads[0].m, field)
    return out


@dataclass(frozen=True)
class CentralRepairPlan:
    """Accounting for centralized sequential repair.

    Helper in slot j (1-based) serves the failed prefix f_1..f_min(j,e) with
    one joint payload of at most joint_bandwidth(d, m, min(j, e)) symbols;
    symbols exchanged among already-repaired nodes at the center are free.
    """

    failed: tuple[int, ...]
    helpers: tuple[int, ...]
    m: int

    def __post_init__(self):
        if set(self.failed) & set(self.helpers):
            raise OverlapError(
                f"helpers {sorted(set(self.failed) & set(self.helpers))} are failed"
            )
        if len(set(self.failed)) != len(self.failed):
            raise ValueError("failed ids must be distinct")
        if len(set(self.helpers)) != len(self.helpers):
            raise ValueError("helper ids must be distinct")

    @property
    def d(self) -> int:
        return len(self.helpers)

    @property
    def e(self) -> int:
        return len(self.failed)

    def served_prefix(self, slot: int) -> tuple[int, ...]:
        """Failed nodes receiving data from the helper in 1-based slot."""
        return self.failed[: min(slot, self.e)]

    @property
    def per_helper_bandwidth(self) -> tuple[int, ...]:
        return tuple(
            joint_bandwidth(self.d, self.m, min(slot, self.e))
            for slot in range(1, self.d + 1)
        )

    @property
    def total_bandwidth(self) -> int:
        return sum(self.per_helper_bandwidth)

    def helper_sequence(self, step: int) -> tuple[int, ...]:
        """d helpers used to repair the failure at 0-based *step*: the
        already-repaired prefix plus the helper slots beyond it."""
        return self.failed[:step] + self.helpers[step:]


def centralized_repair(failed, helpers, contents, encoder: EncoderMatrix, m: int):
    """Sequentially repair all failed nodes; returns (contents, symbol counts).

    *contents* maps node id to its stripe row for every helper. Each helper
    transmits one joint payload covering its served prefix; nodes repaired
    earlier feed later repairs directly at zero transmission cost.
    """
    plan = CentralRepairPlan(tuple(failed), tuple(helpers), m)
    d, e = plan.d, plan.e
    field = encoder.field

    segments: dict[int, dict[int, list[int]]] = {}
    sent: dict[int, int] = {}
    for slot in range(1, d + 1):
        h = plan.helpers[slot - 1]
        prefix = plan.served_prefix(slot)
        payload = joint_helper_payload(contents[h], h, prefix, encoder, m)
        sent[h] = len(payload.symbols)
        full = decompress_joint(payload, encoder)
        per_failure = split_segments(full, len(prefix), d, m)
        segments[h] = dict(zip(prefix, per_failure))

    repaired: dict[int, list[int]] = {}
    for step, f in enumerate(plan.failed):
        helper_ids = plan.helper_sequence(step)
        xi = repair_matrix(f, m, encoder)
        vectors = []
        for h in helper_ids:
            if h in repaired:
                vectors.append(vec_mat(repaired[h], xi))  # center-local, free
            else:
                vectors.append(segments[h][f])
        stacked = Matrix.stack_rows(field, vectors)
        space = encoder.rows_submatrix(helper_ids).inverse() @ stacked
        repaired[f] = combine_repair_space(space, d, m, field)
    return repaired, sent


def supercode_schedule(d: int, e: int) -> tuple[tuple[int, ...], ...]:
    """Role rotation equalizing per-helper cost over d code segments.

    Entry [segment-1][slot-1] is the 1-based plan role the helper in that
    slot plays for that segment: ((slot + segment - 2) mod d) + 1. Across
    all d segments every slot plays every role exactly once.
    """
    if e > d:
        raise TooManyFailures(f"at most d={d} simultaneous failures, got {e}")
    return tuple(
        tuple((slot + segment - 2) % d + 1 for slot in range(1, d + 1))
        for segment in range(1, d + 1)
    )


def supercode_helper_totals(d: int, m: int, e: int) -> list[int]:
    """Per-helper symbols summed over all d segments of the rotation."""
    schedule = supercode_schedule(d, e)
    totals = [0] * d
    for segment_roles in schedule:
        for slot, role in enumerate(segment_roles):
            totals[slot] += joint_bandwidth(d, m, min(role, e))
    return totals
