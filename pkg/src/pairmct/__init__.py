"""Multiplication-combination tests for matched pairs with missing values."""

from .data import (DEFAULT_POLICY, InvalidSampleError, MinCountPolicy, PairedSample, Violation,
                   build_sample, from_arrays, validate)
from .mct import (AlphaSplit, Hypothesis, LayoutError, MctOutcome, TestOutcome, run_mct, run_tml,
                  split_alpha)
from .permutation import (PermutationPlan, PermutationResult, exhaustive_sign_flip_p,
                          permutation_p, permutation_test)
from .statistics import Sidedness, StatValue

__version__ = "0.1.0"
