"""
Basic settings. You shouldn't need to touch this.

Tolerances are sized for complex128 arithmetic with k <= 64 and |a_j| <= 10.
"""

import math


# numerics
HERMITIAN_TOL = 1e-10
EIGEN_CLAMP_TOL = 1e-10
EIGEN_REJECT_TOL = 1e-6
RANK_TOL = 1e-8

# lqg solver
DARE_STEP_TOL = 1e-12
DARE_RESIDUAL_TOL = 1e-9
DARE_MAX_ITER = 100000
DALE_STEP_TOL = 1e-13
DALE_MAX_ITER = 1000000
POWER_REL_TOL = 1e-8
UNIT_DIAGONAL_TOL = 1e-12
DISTINCT_MODES_TOL = 1e-9

# analysis
PHI_XTOL = 1e-12

# codes
GRID_MAX_POINTS = 2 ** 24
MIN_TRACK_TRIALS = 100
UNIFORM_VARIANCE = 1.0 / 12.0

# simulator
HORIZON_LOG_LIMIT = 300.0
IDENTITY_TOL = 1e-9

# output
FLOAT_FORMAT = '%.17g'
LN2 = math.log(2.0)

COMMANDS = ('solve', 'simulate', 'phi', 'sweep', 'prelog', 'compare-ol')

# name -> default, as resolved by lqg_feedback.config
CONFIG_VALUES = {
    'command': None,
    'k': None,
    'a': None,
    'modes': None,
    'cov': 'identity',
    'n': 300,
    'trials': 1000,
    'seed': 1,
    'jobs': 1,
    'units': 'nats',
    'out': None,
    'power': 1.0,
    'powers': '0.1,1,10,100',
    'rank': 1,
    'a_grid': '1.5,2,5,10',
    'grid_fraction': None,
    'center': False,
}
