"""Deterministic in-process storage simulator and shard persistence.

Byte files map one byte per field element (so p >= 257), zero-padded up to
a whole number of stripes with the true length recorded. Shards go to disk
as ``node_<id>.detc`` files; the generator matrix is a pure function of
(n, d, p), so independently written shards stay mutually consistent.
"""

from __future__ import annotations

import random
import struct
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from pathlib import Path

from .code import (
    CodeConfig,
    EncoderMatrix,
    MessageMatrix,
    build_encoder,
    build_message_matrix,
    derive_params,
    encode,
    recover_data,
)
from .field import element_width, next_prime_at_least
from .multirepair import (
    OverlapError,
    centralized_bandwidth,
    centralized_repair,
    decode_failed_nodes,
    joint_bandwidth,
    joint_helper_payload,
)
from .repair import decode_failed_node, helper_payload


class NotEnoughHelpers(ValueError):
    """Fewer alive non-failed nodes than a repair needs."""


class FieldTooSmallForBytes(ValueError):
    """Byte ingestion needs p >= 257."""


class ShardFormatError(ValueError):
    """Shard file is malformed or inconsistent."""


REPAIR_MODES = ("single", "naive", "joint", "centralized")


def ingest_file(data: bytes, config: CodeConfig) -> tuple[list[MessageMatrix], int]:
    """Split bytes into per-stripe message matrices; returns (stripes, true length)."""
    if config.p < 257:
        raise FieldTooSmallForBytes(f"byte ingestion needs p >= 257, got {config.p}")
    per_stripe = config.file_symbols
    padded = list(data)
    if len(padded) % per_stripe:
        padded.extend([0] * (per_stripe - len(padded) % per_stripe))
    stripes = [
        build_message_matrix(padded[i : i + per_stripe], config.d, config.m, config.field)
        for i in range(0, len(padded), per_stripe)
    ]
    return stripes, len(data)


def assemble_file(stripe_symbols: list[list[int]], original_len: int) -> bytes:
    """Concatenate recovered stripe symbols and drop the padding."""
    flat = [v for stripe in stripe_symbols for v in stripe]
    if len(flat) < original_len:
        raise ValueError("fewer symbols than the recorded file length")
    if any(v > 255 for v in flat[:original_len]):
        raise ValueError("recovered symbol exceeds a byte; data is corrupt")
    return bytes(flat[:original_len])


@dataclass
class RepairEvent:
    """Measured symbol traffic for one repair."""

    mode: str
    failed: tuple[int, ...]
    helpers: tuple[int, ...]
    stripes: int
    symbols_by_helper: dict[int, int]

    @property
    def total(self) -> int:
        return sum(self.symbols_by_helper.values())


@dataclass
class BandwidthLedger:
    """Per-event, per-helper symbol accounting."""

    events: list[RepairEvent] = dc_field(default_factory=list)

    def record(self, event: RepairEvent) -> None:
        self.events.append(event)

    @property
    def total(self) -> int:
        return sum(event.total for event in self.events)

    def within_bounds(self, config: CodeConfig) -> bool:
        """True when every event respects its mode's per-stripe bound."""
        for event in self.events:
            e = len(event.failed)
            if event.mode == "single":
                cap = config.beta * event.stripes
                if any(v > cap for v in event.symbols_by_helper.values()):
                    return False
            elif event.mode == "naive":
                cap = e * config.beta * event.stripes
                if any(v > cap for v in event.symbols_by_helper.values()):
                    return False
            elif event.mode == "joint":
                cap = joint_bandwidth(config.d, config.m, e) * event.stripes
                if any(v > cap for v in event.symbols_by_helper.values()):
                    return False
            elif event.mode == "centralized":
                cap = config.d * centralized_bandwidth(config.d, config.m, e) * event.stripes
                if Fraction(event.total) > cap:
                    return False
        return True


class Cluster:
    """n simulated node stores with failure injection and three repair modes."""

    def __init__(
        self,
        config: CodeConfig,
        encoder: EncoderMatrix,
        contents: dict[int, list[list[int]] | None],
        stripe_count: int,
        original_len: int | None = None,
    ):
        self.config = config
        self.encoder = encoder
        self.contents = contents
        self.stripe_count = stripe_count
        self.original_len = original_len
        self.ledger = BandwidthLedger()

    @classmethod
    def build(cls, config: CodeConfig, stripes: list[MessageMatrix], original_len: int | None = None) -> "Cluster":
        encoder = build_encoder(config.n, config.d, config.field)
        contents: dict[int, list[list[int]]] = {i: [] for i in range(1, config.n + 1)}
        for stripe in stripes:
            for node_id, row in enumerate(encode(encoder, stripe), start=1):
                contents[node_id].append(row)
        return cls(config, encoder, contents, len(stripes), original_len)

    @classmethod
    def from_file(cls, data: bytes, config: CodeConfig) -> "Cluster":
        stripes, original_len = ingest_file(data, config)
        return cls.build(config, stripes, original_len)

    def alive(self) -> list[int]:
        return sorted(i for i, c in self.contents.items() if c is not None)

    def failed(self) -> list[int]:
        return sorted(i for i, c in self.contents.items() if c is None)

    def node_content(self, node_id: int) -> list[list[int]]:
        content = self.contents[node_id]
        if content is None:
            raise ValueError(f"node {node_id} is failed")
        return content

    def fail_nodes(self, ids) -> None:
        for i in ids:
            if i not in self.contents:
                raise ValueError(f"no node {i}")
            self.contents[i] = None

    def _pick_helpers(self, excluded: set[int], helpers) -> tuple[int, ...]:
        d = self.config.d
        if helpers is None:
            pool = [i for i in self.alive() if i not in excluded]
            if len(pool) < d:
                raise NotEnoughHelpers(f"need {d} helpers, only {len(pool)} available")
            return tuple(pool[:d])
        helpers = tuple(helpers)
        if len(helpers) != d or len(set(helpers)) != d:
            raise ValueError(f"need exactly {d} distinct helpers, got {list(helpers)}")
        if set(helpers) & excluded:
            raise OverlapError(
                f"helpers {sorted(set(helpers) & excluded)} overlap the failed set"
            )
        unavailable = [h for h in helpers if self.contents.get(h) is None]
        if unavailable:
            raise NotEnoughHelpers(f"helpers {unavailable} are failed")
        return helpers

    def repair(self, mode: str, failed, helpers=None) -> RepairEvent:
        """Restore failed nodes bit-exactly; returns the recorded ledger event."""
        if mode not in REPAIR_MODES:
            raise ValueError(f"mode must be one of {REPAIR_MODES}, got {mode!r}")
        failed = tuple(failed)
        if not failed:
            raise ValueError("nothing to repair")
        if any(self.contents.get(f) is not None for f in failed):
            raise ValueError("refusing to repair a node that is still alive")
        if mode == "single" and len(failed) != 1:
            raise ValueError("single mode repairs exactly one node")
        helper_ids = self._pick_helpers(set(failed), helpers)
        handler = getattr(self, f"_repair_{mode}")
        counts = handler(failed, helper_ids)
        event = RepairEvent(
            mode=mode,
            failed=failed,
            helpers=helper_ids,
            stripes=self.stripe_count,
            symbols_by_helper=counts,
        )
        self.ledger.record(event)
        return event

    def _repair_single(self, failed, helper_ids) -> dict[int, int]:
        (f,) = failed
        counts = dict.fromkeys(helper_ids, 0)
        rebuilt = []
        for s in range(self.stripe_count):
            payloads = []
            for h in helper_ids:
                payload = helper_payload(
                    self.contents[h][s], h, f, self.encoder, self.config.m
                )
                counts[h] += len(payload.symbols)
                payloads.append(payload)
            rebuilt.append(decode_failed_node(payloads, helper_ids, self.encoder, f))
        self.contents[f] = rebuilt
        return counts

    def _repair_naive(self, failed, helper_ids) -> dict[int, int]:
        counts = dict.fromkeys(helper_ids, 0)
        rebuilt = {f: [] for f in failed}
        for s in range(self.stripe_count):
            for f in failed:
                payloads = []
                for h in helper_ids:
                    payload = helper_payload(
                        self.contents[h][s], h, f, self.encoder, self.config.m
                    )
                    counts[h] += len(payload.symbols)
                    payloads.append(payload)
                rebuilt[f].append(decode_failed_node(payloads, helper_ids, self.encoder, f))
        for f in failed:
            self.contents[f] = rebuilt[f]
        return counts

    def _repair_joint(self, failed, helper_ids) -> dict[int, int]:
        counts = dict.fromkeys(helper_ids, 0)
        rebuilt = {f: [] for f in failed}
        for s in range(self.stripe_count):
            payloads = []
            for h in helper_ids:
                payload = joint_helper_payload(
                    self.contents[h][s], h, failed, self.encoder, self.config.m
                )
                counts[h] += len(payload.symbols)
                payloads.append(payload)
            decoded = decode_failed_nodes(payloads, helper_ids, self.encoder, failed)
            for f in failed:
                rebuilt[f].append(decoded[f])
        for f in failed:
            self.contents[f] = rebuilt[f]
        return counts

    def _repair_centralized(self, failed, helper_ids) -> dict[int, int]:
        counts = dict.fromkeys(helper_ids, 0)
        rebuilt = {f: [] for f in failed}
        for s in range(self.stripe_count):
            stripe_contents = {h: self.contents[h][s] for h in helper_ids}
            repaired, sent = centralized_repair(
                failed, helper_ids, stripe_contents, self.encoder, self.config.m
            )
            for h, v in sent.items():
                counts[h] += v
            for f in failed:
                rebuilt[f].append(repaired[f])
        for f in failed:
            self.contents[f] = rebuilt[f]
        return counts

    def recover_stripes(self, node_ids=None) -> list[MessageMatrix]:
        """Message matrices of every stripe, from any d alive nodes."""
        if node_ids is None:
            pool = self.alive()
            if len(pool) < self.config.d:
                raise NotEnoughHelpers(
                    f"need {self.config.d} alive nodes, have {len(pool)}"
                )
            node_ids = pool[: self.config.d]
        node_ids = list(node_ids)
        return [
            recover_data(
                [self.contents[i][s] for i in node_ids],
                node_ids,
                self.encoder,
                self.config.m,
            )
            for s in range(self.stripe_count)
        ]

    def recover_file(self, node_ids=None) -> bytes:
        if self.original_len is None:
            raise ValueError("cluster was not built from a byte file")
        stripes = self.recover_stripes(node_ids)
        return assemble_file([s.extract_symbols() for s in stripes], self.original_len)


# --- shard persistence -------------------------------------------------

SHARD_MAGIC = b"DETC"
SHARD_VERSION = 1  # version 1: canonical direct-then-shared source order, zero padding
_SHARD_HEADER = struct.Struct("<4sBQHHBHQQ")


def shard_path(directory, node_id: int) -> Path:
    return Path(directory) / f"node_{node_id}.detc"


def write_shard(path, config: CodeConfig, node_id: int, stripes: list[list[int]], original_len: int) -> None:
    width = element_width(config.p)
    header = _SHARD_HEADER.pack(
        SHARD_MAGIC,
        SHARD_VERSION,
        config.p,
        config.n,
        config.d,
        config.m,
        node_id,
        len(stripes),
        original_len,
    )
    body = bytearray(header)
    for stripe in stripes:
        for v in stripe:
            body += v.to_bytes(width, "little")
    Path(path).write_bytes(bytes(body))


@dataclass(frozen=True)
class ShardFile:
    config: CodeConfig
    node_id: int
    stripe_count: int
    original_len: int
    stripes: tuple[tuple[int, ...], ...]


def read_shard(path) -> ShardFile:
    blob = Path(path).read_bytes()
    if len(blob) < _SHARD_HEADER.size:
        raise ShardFormatError(f"{path}: truncated header")
    magic, version, p, n, d, m, node_id, stripe_count, original_len = _SHARD_HEADER.unpack_from(blob, 0)
    if magic != SHARD_MAGIC:
        raise ShardFormatError(f"{path}: bad magic {magic!r}")
    if version != SHARD_VERSION:
        raise ShardFormatError(f"{path}: unsupported version {version}")
    try:
        config = CodeConfig(n=n, d=d, m=m, p=p)
    except ValueError as exc:
        raise ShardFormatError(f"{path}: inconsistent header ({exc})") from exc
    if not 1 <= node_id <= n:
        raise ShardFormatError(f"{path}: node id {node_id} out of range")
    width = element_width(p)
    alpha = config.alpha
    expected = _SHARD_HEADER.size + stripe_count * alpha * width
    if len(blob) != expected:
        raise ShardFormatError(f"{path}: payload is {len(blob)} bytes, expected {expected}")
    offset = _SHARD_HEADER.size
    stripes = []
    for _ in range(stripe_count):
        row = []
        for _ in range(alpha):
            v = int.from_bytes(blob[offset : offset + width], "little")
            if v >= p:
                raise ShardFormatError(f"{path}: symbol {v} outside GF({p})")
            row.append(v)
            offset += width
        stripes.append(tuple(row))
    return ShardFile(config, node_id, stripe_count, original_len, tuple(stripes))


def write_all_shards(directory, cluster: Cluster) -> list[Path]:
    paths = []
    for node_id in cluster.alive():
        path = shard_path(directory, node_id)
        write_shard(
            path,
            cluster.config,
            node_id,
            cluster.contents[node_id],
            cluster.original_len or 0,
        )
        paths.append(path)
    return paths


def load_cluster(directory) -> Cluster:
    """Rebuild a cluster from every readable shard in a directory.

    Nodes without a shard file are marked failed. The encoder is
    reconstructed from the (shared, validated) header parameters.
    """
    directory = Path(directory)
    shards = [read_shard(p) for p in sorted(directory.glob("node_*.detc"))]
    if not shards:
        raise ShardFormatError(f"no shard files found in {directory}")
    config = shards[0].config
    stripe_count = shards[0].stripe_count
    original_len = shards[0].original_len
    for shard in shards[1:]:
        if shard.config != config or shard.stripe_count != stripe_count or shard.original_len != original_len:
            raise ShardFormatError("shard headers disagree")
    encoder = build_encoder(config.n, config.d, config.field)
    contents: dict[int, list[list[int]] | None] = {i: None for i in range(1, config.n + 1)}
    for shard in shards:
        contents[shard.node_id] = [list(s) for s in shard.stripes]
    return Cluster(config, encoder, contents, stripe_count, original_len)


# --- reference curves ---------------------------------------------------

def bandwidth_table(d: int, m: int, e_max: int, mode: str = "all"):
    """Rows of (e, mode, per-helper symbols, symbols normalized by alpha).

    Values are exact; normalized entries are Fractions. naive caps at alpha
    (a helper never needs to send more than its whole content).
    """
    alpha, beta, _ = derive_params(d, m)
    modes = ("naive", "joint", "centralized") if mode == "all" else (mode,)
    rows = []
    for e in range(1, e_max + 1):
        for kind in modes:
            if kind == "naive":
                value = min(e * beta, alpha)
            elif kind == "joint":
                value = joint_bandwidth(d, m, e)
            elif kind == "centralized":
                value = centralized_bandwidth(d, m, e)
            else:
                raise ValueError(f"unknown mode {kind!r}")
            rows.append((e, kind, value, Fraction(value) / alpha))
    return rows


def capacity_curve(d: int, m: int, n_values, p: int | None = None, seed: int = 2024):
    """(n, recovered file size) for each n; recovery actually performed.

    One shared prime serves the whole range (>= max(n) + 1). For every n a
    fresh random source is encoded and recovered from a random d-subset of
    nodes; the emitted F is the verified count of recovered symbols.
    """
    n_values = list(n_values)
    if p is None:
        p = next_prime_at_least(max(n_values) + 1)
    rows = []
    for n in n_values:
        config = CodeConfig(n=n, d=d, m=m, p=p)
        rng = random.Random(seed * 1_000_003 + n)
        source = [rng.randrange(p) for _ in range(config.file_symbols)]
        message = build_message_matrix(source, d, m, config.field)
        encoder = build_encoder(n, d, config.field)
        contents = encode(encoder, message)
        ids = sorted(rng.sample(range(1, n + 1), d))
        recovered = recover_data([contents[i - 1] for i in ids], ids, encoder, m)
        symbols = recovered.extract_symbols()
        if symbols != source:
            raise AssertionError(f"recovery mismatch at n={n}")
        rows.append((n, len(symbols)))
    return rows
