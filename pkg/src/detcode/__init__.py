"""Exact-repair regenerating codes over GF(p).

Encode a file into n shards so that any d recover it, repair failed shards
with provably bounded per-helper download, and measure the bandwidth of
single, joint, and centralized multi-failure repair.
"""

from .field import (
    CompositeModulus,
    DimensionMismatch,
    DivideByZero,
    Field,
    Matrix,
    Singular,
    element_width,
    is_prime,
    next_prime_at_least,
    vec_mat,
)
from .subsets import OutOfRange, Subsets, binom, position, subsets
from .code import (
    BadMode,
    CodeConfig,
    EncoderMatrix,
    FieldTooSmall,
    MessageMatrix,
    ParityViolation,
    SymbolLayout,
    WrongLength,
    build_encoder,
    build_message_matrix,
    derive_params,
    encode,
    recover_data,
    symbol_layout,
    tradeoff_bound,
)
from .repair import (
    RepairPayload,
    WrongTarget,
    column_dependency,
    decode_failed_node,
    decompress_payload,
    helper_payload,
    repair_matrix,
)
from .multirepair import (
    CentralRepairPlan,
    JointPayload,
    NullSpaceMatrix,
    OverlapError,
    TooManyFailures,
    centralized_bandwidth,
    centralized_repair,
    decode_failed_nodes,
    decompress_joint,
    joint_bandwidth,
    joint_helper_payload,
    multi_repair_matrix,
    null_space_matrix,
    single_payload_from_joint,
    split_segments,
    supercode_helper_totals,
    supercode_schedule,
)
from .cluster import (
    BandwidthLedger,
    Cluster,
    FieldTooSmallForBytes,
    NotEnoughHelpers,
    RepairEvent,
    ShardFile,
    ShardFormatError,
    assemble_file,
    bandwidth_table,
    capacity_curve,
    ingest_file,
    load_cluster,
    read_shard,
    shard_path,
    write_all_shards,
    write_shard,
)

__version__ = "0.1.0"

__all__ = [
    "BadMode",
    "BandwidthLedger",
    "CentralRepairPlan",
    "Cluster",
    "CodeConfig",
    "CompositeModulus",
    "DimensionMismatch",
    "DivideByZero",
    "EncoderMatrix",
    "Field",
    "FieldTooSmall",
    "FieldTooSmallForBytes",
    "JointPayload",
    "Matrix",
    "MessageMatrix",
    "NotEnoughHelpers",
    "NullSpaceMatrix",
    "OutOfRange",
    "OverlapError",
    "ParityViolation",
    "RepairEvent",
    "RepairPayload",
    "ShardFile",
    "ShardFormatError",
    "Singular",
    "Subsets",
    "SymbolLayout",
    "TooManyFailures",
    "WrongLength",
    "WrongTarget",
    "assemble_file",
    "bandwidth_table",
    "binom",
    "build_encoder",
    "build_message_matrix",
    "capacity_curve",
    "centralized_bandwidth",
    "centralized_repair",
    "column_dependency",
    "decode_failed_node",
    "decode_failed_nodes",
    "decompress_joint",
    "decompress_payload",
    "derive_params",
    "element_width",
    "encode",
    "helper_payload",
    "ingest_file",
    "is_prime",
    "joint_bandwidth",
    "joint_helper_payload",
    "load_cluster",
    "multi_repair_matrix",
    "next_prime_at_least",
    "null_space_matrix",
    "position",
    "read_shard",
    "recover_data",
    "repair_matrix",
    "shard_path",
    "single_payload_from_joint",
    "split_segments",
    "subsets",
    "supercode_helper_totals",
    "supercode_schedule",
    "symbol_layout",
    "tradeoff_bound",
    "vec_mat",
    "write_all_shards",
    "write_shard",
]
