"""Numerical tolerances shared by every module."""

HERMITICITY_TOL = 1e-10
PSD_TOL = 1e-9
EQUALITY_TOL = 1e-12
TRACE_TOL = 1e-9
ASSEMBLAGE_TRACE_TOL = 1e-8
KRAUS_TOL = 1e-9

# signaling_D at or below this value counts as satisfying no-signaling in time
NSIT_TOL = 1e-7

# interior-point solver
SDP_GAP_TOL = 1e-8
SDP_REPORT_GAP_TOL = 1e-6
SDP_MAX_ITER = 200
SDP_CLAMP_TOL = 1e-7

MAX_STRATEGIES = 10**6
MAX_QUBITS = 8
