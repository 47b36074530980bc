"""Reference convergence data for the bundled experiment sweeps.

Each table row holds the sweep value, the system dimension, and
(iterations, condition estimate) pairs for the unpreconditioned run and the
three preconditioners, in the order: none, mean-based, block symmetric
Gauss-Seidel, hierarchical Schur.  All runs use relative residual tolerance
1e-8.

Iteration counts of the preconditioned runs are reproducible within the
documented tolerances and are enforced by the table runner on the rows the
acceptance suite covers.  The unpreconditioned column is informational: those
condition numbers reflect a basis/discretization scaling of the original
experiments that a gradient-form stiffness discretization cannot produce (see
README), so diffs on that column are reported but never enforced.
"""
from __future__ import annotations

# sweep value -> (ndof, it_none, k_none, it_mean, k_mean, it_bsgs, k_bsgs, it_hs, k_hs)

# uniform, P=4, CoV=50%, h=1/10, sweep over N
TABLE_T1 = {
    1: (605, 173, 1965.4, 12, 2.0127, 5, 1.0507, 5, 1.0465),
    2: (1815, 531, 5333.3, 15, 2.7340, 6, 1.1279, 6, 1.1236),
    3: (4235, 745, 9876.9, 16, 2.9995, 7, 1.1693, 6, 1.1514),
    4: (8470, 902, 17150.2, 17, 3.3413, 7, 1.2131, 7, 1.2028),
    5: (15246, 1033, 17275.8, 18, 3.5891, 7, 1.2447, 7, 1.2434),
    6: (25410, 1037, 17333.5, 18, 3.6349, 7, 1.2501, 7, 1.2559),
    7: (39930, 1040, 17348.9, 19, 4.0993, 8, 1.3202, 7, 1.3146),
    8: (59895, 1081, 17360.6, 19, 4.0597, 8, 1.3198, 7, 1.3182),
}

# uniform, N=4, CoV=50%, h=1/10, sweep over P
TABLE_T2 = {
    1: (605, 134, 625.6, 9, 1.6391, 5, 1.0626, 5, 1.0624),
    2: (1815, 315, 1903.2, 13, 2.2379, 6, 1.1117, 6, 1.1109),
    3: (4235, 586, 5721.1, 15, 2.8122, 7, 1.1658, 6, 1.1559),
    4: (8470, 902, 17150.2, 17, 3.3413, 7, 1.2131, 7, 1.2028),
    5: (15246, 1402, 29751.0, 18, 3.7824, 7, 1.2538, 7, 1.2426),
    6: (25410, 1943, 49842.4, 19, 4.1534, 8, 1.2921, 7, 1.2798),
    7: (39930, 2568, 83056.6, 20, 4.4708, 8, 1.3219, 7, 1.3125),
    8: (59895, 3267, 136419.0, 20, 4.7371, 8, 1.3472, 7, 1.3398),
}

# uniform, N=P=4, h=1/10, sweep over CoV (percent)
TABLE_T3 = {
    5: (8470, 694, 15556.3, 6, 1.0960, 3, 1.0008, 3, 1.0009),
    15: (8470, 739, 15673.2, 9, 1.3514, 4, 1.0090, 4, 1.0089),
    25: (8470, 804, 15912.5, 11, 1.7021, 5, 1.0314, 5, 1.0304),
    35: (8470, 833, 16286.1, 13, 2.1808, 6, 1.0770, 5, 1.0664),
    45: (8470, 877, 16815.9, 16, 2.8773, 6, 1.1510, 6, 1.1414),
    55: (8470, 926, 17539.6, 19, 3.9523, 8, 1.2948, 7, 1.2830),
}

# uniform, N=P=4, CoV=50%, sweep over 1/h
TABLE_T4 = {
    5: (2520, 404, 4847.5, 16, 3.2484, 7, 1.2022, 6, 1.1790),
    10: (8470, 902, 17150.2, 17, 3.3413, 7, 1.2131, 7, 1.2028),
    15: (17920, 1386, 36716.6, 17, 3.3145, 7, 1.2063, 7, 1.2047),
    20: (30870, 1883, 63535.2, 17, 3.3463, 7, 1.2110, 7, 1.2032),
    25: (47320, 2383, 97605.6, 17, 3.3473, 7, 1.2112, 7, 1.2032),
    30: (67270, 2872, 138929.0, 17, 3.3190, 7, 1.2070, 7, 1.2054),
}

# lognormal, P=4, CoV=100%, h=1/10, sweep over N
TABLE_T5 = {
    1: (605, 585, 51376.4, 48, 28.7589, 15, 3.4192, 15, 3.4000),
    2: (1815, 1396, 58718.8, 61, 37.1593, 17, 3.7490, 16, 3.6244),
    3: (4235, 1770, 69054.8, 62, 38.0715, 17, 3.7380, 16, 3.7632),
    4: (8470, 2016, 70143.6, 66, 43.6525, 19, 4.2935, 16, 4.1669),
}

# lognormal, N=4, CoV=100%, h=1/10, sweep over P
TABLE_T6 = {
    1: (605, 134, 578.2, 15, 3.4954, 8, 1.3910, 7, 1.3856),
    2: (1815, 329, 2027.3, 28, 8.9450, 12, 1.9742, 10, 1.9289),
    3: (4235, 804, 10048.4, 44, 20.0366, 15, 2.8670, 13, 2.7955),
    4: (8470, 2016, 70143.6, 66, 43.6525, 19, 4.2935, 16, 4.1669),
}

# lognormal, N=P=4, h=1/10, sweep over CoV (percent)
TABLE_T7 = {
    25: (8470, 719, 7378.4, 16, 3.2356, 7, 1.1761, 7, 1.1776),
    50: (8470, 1039, 16014.8, 29, 9.3553, 11, 1.7685, 10, 1.7836),
    75: (8470, 1511, 35317.3, 46, 22.2147, 15, 2.8198, 13, 2.8454),
    100: (8470, 2016, 70143.6, 66, 43.6525, 19, 4.2935, 16, 4.1669),
    125: (8470, 2591, 116678.0, 85, 72.7584, 23, 5.9776, 19, 5.5362),
    150: (8470, 3209, 178890.0, 103, 107.0670, 26, 7.7459, 21, 6.8507),
}

# lognormal, N=P=4, CoV=100%, sweep over 1/h
TABLE_T8 = {
    5: (2520, 831, 17695.3, 59, 40.6232, 18, 3.9885, 15, 3.8361),
    10: (8470, 2016, 70143.6, 66, 43.6525, 19, 4.2935, 16, 4.1669),
    15: (17920, 3377, 158334.0, 68, 44.4170, 19, 4.3764, 16, 4.2394),
    20: (30870, 4395, 275686.0, 69, 44.8882, 19, 4.3742, 17, 4.2510),
    25: (47320, 5600, 429551.0, 69, 44.9413, 20, 4.3986, 17, 4.2592),
    30: (67270, 7180, 626475.0, 71, 45.1100, 19, 4.3732, 17, 4.2630),
}

# block counts of the linear-coefficient structure: one of N or P sweeps,
# the other fixed at 4; columns n_b, n_db, n_m, n_ds
WORK_COUNTS = {
    1: (13, 5, 8, 9),
    2: (55, 15, 40, 29),
    3: (155, 35, 120, 69),
    4: (350, 70, 280, 139),
    5: (686, 126, 560, 251),
    6: (1218, 210, 1008, 419),
    7: (2010, 330, 1680, 659),
    8: (3135, 495, 2640, 989),
}

TABLES = {
    "T1": TABLE_T1, "T2": TABLE_T2, "T3": TABLE_T3, "T4": TABLE_T4,
    "T5": TABLE_T5, "T6": TABLE_T6, "T7": TABLE_T7, "T8": TABLE_T8,
}

PRECONDITIONER_ORDER = ("none", "mean", "bsgs", "hs")


def reference_row(table: str, sweep_value) -> dict | None:
    """Reference (iter, kappa) pairs keyed by preconditioner, or None."""
    data = TABLES.get(table)
    if data is None or sweep_value not in data:
        return None
    row = data[sweep_value]
    return {
        "ndof": row[0],
        "none": (row[1], row[2]),
        "mean": (row[3], row[4]),
        "bsgs": (row[5], row[6]),
        "hs": (row[7], row[8]),
    }
