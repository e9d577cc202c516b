"""Built-in instances from the reference experiments.

Both experiments measure the data misfit by the mean of squared residuals,
so their lambdas are stated for ``fidelity: mse``.
"""

from __future__ import annotations

from .config import RunConfig

TARGETS = (0.8, -0.1, 0.3, -1.2, 1.0)

FIG1_POINTS = ((0.2, -0.1), (1.0, 0.3), (1.0, 0.0), (-0.4, 0.9), (0.5, 0.5))
FIG4_POINTS = ((0.2, -0.1), (1.0, -2.0), (1.0, 0.2), (-0.4, -0.2), (0.5, 0.5))

FIG1_LAMBDA = 0.03
FIG4_LAMBDA = 0.2

# reference solution of the first experiment: (coefficient, direction)
FIG1_ATOMS = ((1.312, (-0.163, 0.987)), (1.256, (0.287, -0.958)), (-2.577, (-0.708, 0.706)))
FIG4_SINGULAR_VALUES = (2.243, 1.204, 0.472, 0.365)


def fig1_config(**kw) -> RunConfig:
    """Three-atom experiment (also used for the lambda sweep)."""
    return RunConfig(FIG1_POINTS, TARGETS, FIG1_LAMBDA, fidelity="mse", name="fig1", **kw)


def fig4_config(**kw) -> RunConfig:
    """Two-atom interior-recovery experiment (also used for the stability sweep)."""
    return RunConfig(FIG4_POINTS, TARGETS, FIG4_LAMBDA, fidelity="mse", name="fig4", **kw)


BUILTIN = {"fig1": fig1_config, "fig4": fig4_config}
