"""Two-stage kernel learning over continuously parameterized kernel families.

Stage one greedily builds a nonnegative combination of base kernels by
maximizing centered alignment with the label kernel; stage two trains a
soft-margin SVM on the learned combination.
"""

from .alignment import (
    DegenerateAlignmentError,
    DegenerateTargetError,
    TargetKernel,
    centered_alignment,
    ideal_kernel,
    optimal_step,
    target_alignment,
    target_alignment_grad,
)
from .baselines import KernelGrid, align_weights, best_single, fit_align_discrete, fit_uniform
from .data import (
    Dataset,
    SplitSpec,
    gen_gauss50,
    gen_sine_mixture,
    load_csv,
    relevance_direction,
    save_csv,
    sine_mixture_signal,
    split,
)
from .fsam import (
    FitTrace,
    KernelCombination,
    LearnerConfig,
    accumulate_kernel,
    evaluate_combination,
    fit_greedy_alignment,
)
from .kernels import (
    GramCache,
    GramMatrix,
    KernelFamily,
    KernelParams,
    center,
    center_entries,
    combine,
    cross_gram,
    eval_kernel,
    frob_inner,
    frob_norm,
    gram,
)
from .optimizer import (
    OptimizerFailure,
    RestartSchedule,
    SearchSpace,
    inner_objective,
    local_maximize,
    make_inner_objective,
)
from .svm import (
    SvmModel,
    cv_select_c,
    decision_function,
    default_c_grid,
    dual_objective,
    predict,
    select_c_holdout,
    train_svm,
)

__version__ = "0.1.0"
