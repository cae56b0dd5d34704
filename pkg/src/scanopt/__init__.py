"""Switch-scanning decision trees: priors, layouts, exact optimization,
closed-form performance modeling, and Monte Carlo simulation."""

from .priors import (
    ALPHABET,
    BACKSPACE,
    SPACE,
    CharacterPrior,
    PriorError,
    build_english_prior,
    load_prior,
    save_prior,
)
from .tree import (
    Codeword,
    Layout,
    LayoutFormatError,
    PrefixFreeError,
    TreeError,
    TreeNode,
    TreeValidationError,
    codeword_cost,
    codewords_to_tree,
    eqpd,
    expected_trials,
    parse_layout,
    serialize_layout,
    tree_to_codewords,
    validate_tree,
)
from .layouts import (
    LAYOUT_NAMES,
    GridShape,
    LayoutError,
    build_acat,
    build_block_row_item_alpha,
    build_hexospell,
    build_layout,
    build_row_item_alpha,
    describe_grid,
    optimize_block_row_item,
    optimize_row_item,
)
from .karp import (
    KarpError,
    KarpResult,
    brute_force_optimal,
    karp_optimize,
    karp_optimize_unbounded,
)
from .perf import (
    PerfError,
    TimingParams,
    UserModel,
    accuracy_grid,
    char_accuracy,
    expected_accuracy,
    expected_decision_time,
    grid_to_csv,
    trial_select_prob,
    trial_select_prob_first_pass,
)
from .sim import (
    DecisionRecord,
    QueryEvent,
    SessionSummary,
    SimConfig,
    detect_rollovers,
    sample_targets,
    simulate_decision,
    simulate_session,
)

__version__ = "0.1.0"
