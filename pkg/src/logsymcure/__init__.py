"""Log-symmetric cure-fraction survival models."""

from .cure import (
    CureModel,
    Incidence,
    IncidenceModel,
    Link,
    WeibullLatency,
    apply_link,
    cure_fraction,
)
from .inference import (
    FitResult,
    ModelSpec,
    cure_fraction_by_profile,
    fit,
    lr_test,
    default_selection_grid,
    select,
)
from .kaplan_meier import KMCurve, kaplan_meier, kaplan_meier_grouped
from .kernels import DensityGenerator, Family, LogSymmetricDist
from .likelihood import LikelihoodEvaluator, ParamVector, SurvivalDataset
from .optim import OptimConfig, OptimResult, default_starts, inverse_transform, maximize, transform
from .simulate import SimConfig, SimSummary, calibrate_censoring, generate_dataset, run_study

__version__ = "0.1.0"
