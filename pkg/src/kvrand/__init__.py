"""Non-uniform random variates through k-vector function inversion."""
from .cdf import DistributionSpec, build_cdf, excise_plateaus, read_table
from .errors import KvrandError
from .inversion import invert, tabulate
from .kvector import build_kvector, build_sorted_database, range_query
from .lut import AliasTable, LevelPlan, build_sample_table, draw_from_table, shuffle_table
from .optimal import build_optimal_grid, direct_bracket, query_n_e
from .rng import UniformSource
from .sampler import Mode, draw, inverse_at, invert_many, make_sampler

__version__ = "0.1.0"
