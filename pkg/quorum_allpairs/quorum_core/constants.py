"""Format and kernel constants shared by the core library."""

import numpy as np

# Binary matrix layout: two little-endian uint64 (n, dim), then n*dim little-endian float64, row-major
BINARY_HEADER_DTYPE = np.dtype("<u8")
BINARY_VALUE_DTYPE = np.dtype("<f8")
BINARY_HEADER_BYTES = 2 * BINARY_HEADER_DTYPE.itemsize

# Ingestion formats (CLI spelling → canonical name)
FORMAT_CSV = "csv"
FORMAT_BINARY = "bin"
FORMAT_COUNT = "count"
FORMAT_ALIASES = {
    "csv": FORMAT_CSV,
    "bin": FORMAT_BINARY,
    "binary": FORMAT_BINARY,
    "binary-matrix": FORMAT_BINARY,
    "count": FORMAT_COUNT,
    "index-only": FORMAT_COUNT,
}

# Kernel identities
KERNEL_HANDSHAKE = "handshake-count"
KERNEL_PEARSON = "pearson-correlation"
KERNEL_SUM_ABS_DIFF = "sum-abs-diff"
KERNEL_ALIASES = {
    "handshake": KERNEL_HANDSHAKE,
    "handshake-count": KERNEL_HANDSHAKE,
    "pearson": KERNEL_PEARSON,
    "pearson-correlation": KERNEL_PEARSON,
    "sum-abs-diff": KERNEL_SUM_ABS_DIFF,
    "sad": KERNEL_SUM_ABS_DIFF,
}

# Schedule ownership policies
POLICY_FIRST_WITNESS = "first-witness"
POLICY_BALANCED = "balanced"
POLICIES = (POLICY_FIRST_WITNESS, POLICY_BALANCED)

# Cache file comment marker
CACHE_COMMENT = "#"
