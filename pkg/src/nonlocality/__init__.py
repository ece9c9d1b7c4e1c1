"""Two-photon polarization nonlocality: Hardy's ladder and CHSH tests.

Predicts joint detection probabilities for (non-)maximally entangled
states, evaluates and optimizes the ladder inequality, and simulates and
analyzes coincidence-counting experiments.
"""

__version__ = "0.1.0"

from .states import (  # noqa: E402
    DensityMatrix,
    NoiseKind,
    NoiseModel,
    PureTwoQubit,
    apply_noise,
    gamma_from_pump_angle,
    gamma_of,
    pure_state,
    purity,
    state_from_gamma,
)
from .measurement import AnalyzerSetting, OutcomeProbs, correlation, joint_prob, outcome_probs  # noqa: E402
from .hardy import LadderSpec, LadderResult, Measured, evaluate_ladder, optimize_gamma, pk_ideal  # noqa: E402
from .bell import CHSHSettings, chsh_s, optimal_chsh_settings  # noqa: E402
