"""
Runtime configuration read from the environment
"""

import os

# Logging
LOG_LEVEL = os.getenv("SWARMQ_LOG_LEVEL", "info").upper()

# Group runtime
DEFAULT_GROUP_SIZE = int(os.getenv("SWARMQ_GROUP_SIZE", "128"))
WORKERS = int(os.getenv("SWARMQ_WORKERS", str(os.cpu_count() or 1)))
# Upper bound on live lane threads when run_groups executes one thread per lane
LANE_THREAD_BUDGET = int(os.getenv("SWARMQ_LANE_THREADS", "1024"))
# Yield the interpreter between failed compare-and-swap attempts on the global lock
SPIN_YIELD = os.getenv("SWARMQ_SPIN_YIELD", "true").lower() == "true"

# Benchmark protocol
DEFAULT_REPEAT = int(os.getenv("SWARMQ_REPEAT", "10"))
DESK_ITERS = int(os.getenv("SWARMQ_DESK_ITERS", "1000"))
FULL_SCALE_ITERS = int(os.getenv("SWARMQ_FULL_SCALE_ITERS", "100000"))

# Default coefficients: w = 1, c1 = c2 = 2
DEFAULT_W = 1.0
DEFAULT_C1 = 2.0
DEFAULT_C2 = 2.0
