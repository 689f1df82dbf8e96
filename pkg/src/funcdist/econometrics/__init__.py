"""Fixed-effects OLS, probit, event-study CARs and the regression table suite."""

from .events import combine_car, correlation, market_model_car
from .ols import ols_fe, orthogonalize, residualize
from .probit import average_marginal_effects, probit_fit
from .results import (CollinearityError, ConvergenceError, EstimationError, RegressionResult,
                      RegressionSpec, SeparationError)

__all__ = [
    "CollinearityError", "ConvergenceError", "EstimationError", "RegressionResult",
    "RegressionSpec", "SeparationError", "average_marginal_effects", "combine_car",
    "correlation", "market_model_car", "ols_fe", "orthogonalize", "probit_fit", "residualize",
]
