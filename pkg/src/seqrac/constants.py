"""Central tolerance table.

Tests and acceptance checks import these names instead of repeating literals.
"""

HERMITIAN_TOL = 1e-10       # max |m - m^dagger| entry
PSD_FLOOR = -1e-10          # smallest eigenvalue still accepted as PSD
TRACE_TOL = 1e-10
POVM_SUM_TOL = 1e-10        # ||sum_b M_b - I||_max
KRAUS_COMPLETENESS_TOL = 1e-9
RECONSTRUCTION_TOL = 1e-10  # eigen-rebuild, Frobenius norm per unit input norm
SQRT_TOL = 1e-9

JACOBI_MAX_SWEEPS = 100
JACOBI_OFF_TOL = 1e-12      # off-diagonal Frobenius norm, relative to ||m||_F

MIN_DIM = 2
MAX_DIM = 6

OUTPUT_HIDING_TOL = 1e-6
AUDIT_VIOLATION_TOL = 1e-9
BOUNDS_CONSISTENCY_TOL = 1e-12  # eta_lower - eta_upper tolerated as rounding
LEMMA1_TOL = 1e-12

TABLE1_TOL = 5e-4           # print precision of the reference table

SEESAW_TOL = 1e-7
SEESAW_MAX_ITERS = 500
SEESAW_RESTARTS = 50
POVM_CERT_TOL = 1e-9        # KKT certificate, relative to max |A_b| entry

FLOAT_DIGITS = 12           # significant digits in CSV/JSON output
