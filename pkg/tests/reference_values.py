"""Reference values reported for the bundled loss dataset B."""

import numpy as np

# Pearson correlations of the raw losses, as printed to two decimals.
_CORR_ROWS = [
    "1.00 0.46 0.03 0.16 0.47 0.20 0.35 0.49 0.41 0.24 0.78 0.64 0.91 0.63 0.85 0.66 0.30 0.67 0.56",
    "0.46 1.00 0.64 0.78 0.67 0.36 0.51 0.76 0.57 0.51 0.58 -0.04 0.59 0.84 0.68 0.58 0.87 0.77 0.90",
    "0.03 0.64 1.00 0.93 0.41 0.26 0.11 0.16 0.33 0.16 0.08 -0.09 0.13 0.64 0.25 0.10 0.74 0.14 0.35",
    "0.16 0.78 0.93 1.00 0.54 0.36 0.16 0.25 0.43 0.19 0.22 -0.10 0.30 0.79 0.36 0.19 0.84 0.32 0.49",
    "0.47 0.67 0.41 0.54 1.00 0.41 0.35 0.51 0.84 0.63 0.59 0.02 0.64 0.67 0.59 0.50 0.58 0.71 0.67",
    "0.20 0.36 0.26 0.36 0.41 1.00 0.07 0.11 0.28 0.19 0.28 0.14 0.31 0.42 0.24 0.27 0.39 0.27 0.40",
    "0.35 0.51 0.11 0.16 0.35 0.07 1.00 0.44 0.27 0.19 0.48 -0.07 0.46 0.35 0.45 0.91 0.64 0.61 0.49",
    "0.49 0.76 0.16 0.25 0.51 0.11 0.44 1.00 0.50 0.75 0.61 -0.03 0.54 0.47 0.71 0.53 0.40 0.75 0.90",
    "0.41 0.57 0.33 0.43 0.84 0.28 0.27 0.50 1.00 0.66 0.68 -0.01 0.52 0.60 0.50 0.41 0.46 0.65 0.63",
    "0.24 0.51 0.16 0.19 0.63 0.19 0.19 0.75 0.66 1.00 0.33 -0.12 0.27 0.28 0.43 0.24 0.23 0.45 0.65",
    "0.78 0.58 0.08 0.22 0.59 0.28 0.48 0.61 0.68 0.33 1.00 0.19 0.79 0.65 0.80 0.73 0.43 0.84 0.74",
    "0.64 -0.04 -0.09 -0.10 0.02 0.14 -0.07 -0.03 -0.01 -0.12 0.19 1.00 0.44 0.21 0.28 0.17 -0.12 0.13 0.03",
    "0.91 0.59 0.13 0.30 0.64 0.31 0.46 0.54 0.52 0.27 0.79 0.44 1.00 0.71 0.86 0.74 0.47 0.76 0.65",
    "0.63 0.84 0.64 0.79 0.67 0.42 0.35 0.47 0.60 0.28 0.65 0.21 0.71 1.00 0.74 0.54 0.79 0.68 0.72",
    "0.85 0.68 0.25 0.36 0.59 0.24 0.45 0.71 0.50 0.43 0.80 0.28 0.86 0.74 1.00 0.69 0.47 0.71 0.75",
    "0.66 0.58 0.10 0.19 0.50 0.27 0.91 0.53 0.41 0.24 0.73 0.17 0.74 0.54 0.69 1.00 0.63 0.77 0.64",
    "0.30 0.87 0.74 0.84 0.58 0.39 0.64 0.40 0.46 0.23 0.43 -0.12 0.47 0.79 0.47 0.63 1.00 0.59 0.64",
    "0.67 0.77 0.14 0.32 0.71 0.27 0.61 0.75 0.65 0.45 0.84 0.13 0.76 0.68 0.71 0.77 0.59 1.00 0.86",
    "0.56 0.90 0.35 0.49 0.67 0.40 0.49 0.90 0.63 0.65 0.74 0.03 0.65 0.72 0.75 0.64 0.64 0.86 1.00",
]
CORRELATIONS_B = np.array([[float(x) for x in row.split()] for row in _CORR_ROWS])
CORRELATIONS_B_TEXT = [row.split() for row in _CORR_ROWS]

VAR_LEVELS = [0.1, 0.05, 0.01, 0.005]

# Aggregate VaR at VAR_LEVELS for each copula (100k simulations).
VAR_REFERENCE = {
    "gaussian": [828.149, 1123.028, 2013.425, 2528.785],
    "rook gamma": [1687.750, 2097.296, 2865.834, 3283.720],
    "t": [785.207, 1126.537, 2345.636, 3127.850],
    "uf gamma": [1530.999, 1980.437, 3271.872, 3950.194],
}
UF_GAMMA_VAR_0005 = 3950.194
