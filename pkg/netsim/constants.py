DEFAULT_GROWTH_FACTOR = 3.0  # time-optimal X

DEFAULT_REPLICATIONS = 100  # graphs per (shape, connectivity) point

DEFAULT_SEED = 0

CONNECTIVITY_SWEEP = (0.0, 0.1, 0.2, 0.3, 0.5, 0.8, 1.0)

BASE_SHAPES = ('string', 'ring', 'binary_tree', 'complete')

DELAY_KINDS = ('unit', 'uniform_random', 'custom')

# CLI spelling of the delay kinds
DELAY_ALIASES = {
    'unit': 'unit',
    'random': 'uniform_random',
    'uniform_random': 'uniform_random',
}

DEFAULT_DELAY_BOUND = 1.0  # one time unit per hop

"""
The event budget only guards against protocol bugs. A PIF costs O(n * degree) deliveries and an
election O(n * degree * lg n); 5 million covers n in the hundreds on dense graphs.
"""
DEFAULT_MAX_EVENTS = 5_000_000

X_SWEEP = (1.5, 2.0, 3.0, 4.0)

RESULTS_CSV = 'results.csv'
SUMMARY_CSV = 'summary.csv'
BOUNDS_CSV = 'bounds.csv'
BOUNDS_VS_X_CSV = 'bounds_vs_x.csv'
WORKBOOK_NAME = 'results.xlsx'
PLOT_SCRIPT_NAME = 'plot_results.py'

CSV_FLOAT_FORMAT = '%.6f'
