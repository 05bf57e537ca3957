"""Run-wide constants: candidate ranges, budgets, and sampling defaults."""

from __future__ import annotations

# ---------------------------------------------------------------------------
# Candidate ranges
# ---------------------------------------------------------------------------

MIN_CANDIDATES = 3
# One direction bit per pair must fit in 2016 = C(64, 2) edges.
MAX_CANDIDATES = 64

# Brute-force canonicalization walks all l! relabelings.
MAX_CANONICAL_CANDIDATES = 7

# Exhaustive type enumeration walks all 2^(l(l-1)/2) tournaments.
MAX_ENUMERATE_CANDIDATES = 5

# Qualitative coverage histograms: 48 types at l = 3, 46080 at l = 4.
MAX_COVERAGE_CANDIDATES = 4

# ---------------------------------------------------------------------------
# Exact enumeration
# ---------------------------------------------------------------------------

# Upper bound on (l!)^n raw profiles for exact finite-n probabilities.
EXACT_ENUMERATION_BUDGET = 10**8

# Largest ballot-type table (l! rows) built for exact enumeration: l <= 8.
MAX_BALLOT_TYPES = 40_320

# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

DEFAULT_SAMPLES = 1_000_000
DEFAULT_SEED = 42

# Rows per vectorized CLT batch, capped by BATCH_CELLS (rows * edges) for
# large l. Draws are row-major, so seeded output does not depend on it.
BATCH_SIZE = 50_000
BATCH_CELLS = 2_000_000

# Ballots per streamed chunk in the exact per-voter sampler.
VOTER_CHUNK = 4_096

# Margin-matrix cells (rows * l * l) per batch in the voting experiments.
VOTING_BATCH_CELLS = 5_000_000

# Standard errors separating "violated" from "within noise" in the
# linearity-ordering report.
ORDERING_SIGMAS = 4.0

# ---------------------------------------------------------------------------
# Numerics
# ---------------------------------------------------------------------------

FLOAT_TOLERANCE = 1e-10
