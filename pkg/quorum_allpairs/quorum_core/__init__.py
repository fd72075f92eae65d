"""Cyclic quorum systems for shared-nothing all-pairs computation."""

from .cache import DifferenceSetCache, format_cache_text, parse_cache_text
from .constants import (
    FORMAT_ALIASES,
    FORMAT_BINARY,
    FORMAT_COUNT,
    FORMAT_CSV,
    KERNEL_ALIASES,
    KERNEL_HANDSHAKE,
    KERNEL_PEARSON,
    KERNEL_SUM_ABS_DIFF,
    POLICIES,
    POLICY_BALANCED,
    POLICY_FIRST_WITNESS,
)
from .diffset import (
    DifferenceSet,
    check_structure,
    difference_multiplicities,
    difference_set_from_dict,
    difference_set_to_dict,
    exists_difference_set,
    fallback_consecutive,
    is_perfect,
    is_singer_order,
    minimal_k_lower_bound,
    search_minimal,
    verify_difference_set,
)
from .engine import (
    ReplicationReport,
    RunReport,
    RunResult,
    WorkerStats,
    async_run,
    replication_report,
    run,
)
from .exceptions import (
    AllPairsViolationError,
    BudgetExceededError,
    CacheError,
    ConfigurationError,
    IngestionError,
    InvalidDifferenceSetError,
    InvalidInputError,
    IsolationError,
    KernelError,
    PartitionError,
    QuorumAllPairsError,
    ScheduleError,
    UndefinedCorrelationError,
)
from .kernels import (
    BlockOutput,
    HandshakeKernel,
    Kernel,
    PearsonKernel,
    SumAbsDiffKernel,
    get_kernel,
    pearson,
)
from .partition import (
    ElementTable,
    Partition,
    encode_binary_matrix,
    ingest,
    split,
    write_binary_matrix,
)
from .quorum import (
    AllPairsResult,
    QuorumPropertyReport,
    QuorumSystem,
    dump_quorum_system,
    generate,
    load_quorum_system,
    quorum_system_from_dict,
    quorum_system_to_dict,
    verify_all_pairs,
    verify_quorum_properties,
)
from .schedule import (
    BalanceReport,
    Schedule,
    balance_report,
    build_schedule,
    dump_schedule,
    load_schedule,
    pair_cost,
    schedule_from_dict,
    schedule_to_dict,
    validate_schedule,
)

__all__ = [
    # Constants
    "FORMAT_ALIASES",
    "FORMAT_BINARY",
    "FORMAT_COUNT",
    "FORMAT_CSV",
    "KERNEL_ALIASES",
    "KERNEL_HANDSHAKE",
    "KERNEL_PEARSON",
    "KERNEL_SUM_ABS_DIFF",
    "POLICIES",
    "POLICY_BALANCED",
    "POLICY_FIRST_WITNESS",
    # Exceptions
    "AllPairsViolationError",
    "BudgetExceededError",
    "CacheError",
    "ConfigurationError",
    "IngestionError",
    "InvalidDifferenceSetError",
    "InvalidInputError",
    "IsolationError",
    "KernelError",
    "PartitionError",
    "QuorumAllPairsError",
    "ScheduleError",
    "UndefinedCorrelationError",
    # Difference sets
    "DifferenceSet",
    "DifferenceSetCache",
    "check_structure",
    "difference_multiplicities",
    "difference_set_from_dict",
    "difference_set_to_dict",
    "exists_difference_set",
    "fallback_consecutive",
    "format_cache_text",
    "is_perfect",
    "is_singer_order",
    "minimal_k_lower_bound",
    "parse_cache_text",
    "search_minimal",
    "verify_difference_set",
    # Quorum systems
    "AllPairsResult",
    "QuorumPropertyReport",
    "QuorumSystem",
    "dump_quorum_system",
    "generate",
    "load_quorum_system",
    "quorum_system_from_dict",
    "quorum_system_to_dict",
    "verify_all_pairs",
    "verify_quorum_properties",
    # Partitioning
    "ElementTable",
    "Partition",
    "encode_binary_matrix",
    "ingest",
    "split",
    "write_binary_matrix",
    # Scheduling
    "BalanceReport",
    "Schedule",
    "balance_report",
    "build_schedule",
    "dump_schedule",
    "load_schedule",
    "pair_cost",
    "schedule_from_dict",
    "schedule_to_dict",
    "validate_schedule",
    # Execution
    "BlockOutput",
    "HandshakeKernel",
    "Kernel",
    "PearsonKernel",
    "ReplicationReport",
    "RunReport",
    "RunResult",
    "SumAbsDiffKernel",
    "WorkerStats",
    "async_run",
    "get_kernel",
    "pearson",
    "replication_report",
    "run",
]
