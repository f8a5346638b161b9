"""Cross-validated grid search, selection, and external-test evaluation."""

from .grids import clip_pls_grid, default_grid
from .metrics import metric_corr, metric_r2, metric_rmse, score_all
from .plan import CLASS_IDS, REPEATS, CvPlan, split_folds, trial_seed
from .report import (
    mean_std,
    write_pairing_csv,
    write_selection_csv,
    write_trials_csv,
)
from .select import (
    PairingTable,
    PairRow,
    SelectionEntry,
    SelectionReport,
    TestRun,
    TEST_THRESHOLD,
    compare_single_vs_multi,
    evaluate_test,
    select_tuned,
)
from .sweep import RunRecord, TrialResult, run_grid, standardize_split

__all__ = [
    "CLASS_IDS",
    "REPEATS",
    "TEST_THRESHOLD",
    "CvPlan",
    "PairRow",
    "PairingTable",
    "RunRecord",
    "SelectionEntry",
    "SelectionReport",
    "TestRun",
    "TrialResult",
    "clip_pls_grid",
    "compare_single_vs_multi",
    "default_grid",
    "evaluate_test",
    "mean_std",
    "metric_corr",
    "metric_r2",
    "metric_rmse",
    "run_grid",
    "score_all",
    "select_tuned",
    "split_folds",
    "standardize_split",
    "trial_seed",
    "write_pairing_csv",
    "write_selection_csv",
    "write_trials_csv",
]
