"""Exact score laws, the lower-orthant inequality and its decoupling proof steps."""

from rrtourney.exact.convolution import ScorePmf, convolve, marginal_score_pmf, sum_law
from rrtourney.exact.decoupling import (
    Assertion1,
    DecouplingTable,
    assertion1_check,
    chain_is_monotone,
    decoupling_chain,
    hybrid_cdf,
    p_uv_table,
    prefix_q,
    w_closed_form,
    w_table,
)
from rrtourney.exact.enumeration import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    JointCdfReport,
    JointScoreLaw,
    NlodScan,
    joint_cdf_enumerate,
    joint_score_law,
    nlod_scan,
)
from rrtourney.exact.landau import BoundVerdict, subset_score_bound_check
from rrtourney.exact.unique_max import UniqueMaxEstimate, UniqueMaxReport, unique_max, unique_max_mc
