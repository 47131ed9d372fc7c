"""COSTARR open-set recognition over pre-extracted features, logits and weights."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CostarrError,
    DegenerateError,
    FitError,
    FormatError,
    ShapeError,
    TruncatedFileError,
)
from .tensors import ClassifierHead, LabeledSet, read_csv_matrix, read_tensor, write_tensor  # noqa: E402
from .fit import CostarrModel, GnlBounds, fit_model, gnl, load_model, save_model  # noqa: E402
from .score import (  # noqa: E402
    METHODS,
    ScoreTable,
    costarr_similarity,
    export_sorted_hadamard,
    score,
    score_cosm,
    score_costarr,
    score_features,
    score_hadamard,
    score_magnorm,
    score_maxlogit,
    score_msp,
    score_nologit,
)
from .metrics import BinLabeled, OosaResult, OscrCurve, auroc, oosa, osa, oscr, predict_threshold  # noqa: E402
from .stats import WilcoxonResult, bonferroni, wilcoxon_signed_rank  # noqa: E402
from .synth import SynthConfig, generate  # noqa: E402
from .analyze import WeightStats, weight_stats  # noqa: E402
