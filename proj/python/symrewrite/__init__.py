"""Symbol-rewriting generalization experiment.

Generate the formal task's datasets, train single-layer seq2seq LSTMs with
bilinear attention from scratch, and measure per-seed generalization on four
test distributions.
"""

from ._core import (  # noqa: F401
    BlockPolicy,
    CompatError,
    ConfigError,
    Dataset,
    DistributionSpec,
    EvalResult,
    FailedSeed,
    Grammar,
    InsufficientDataError,
    ModelConfig,
    ModelParams,
    NumericError,
    ParseError,
    RepeatMode,
    Sample,
    ShapeError,
    SplitRng,
    StopReason,
    TokenError,
    TrainConfig,
    TrainReport,
    accuracy,
    generate_dataset,
    grammar_fingerprint,
    greedy_decode,
    init_params,
    load_checkpoint,
    paper_splits,
    pearson,
    read_dataset,
    results_boxplot_svg,
    results_csv,
    results_table,
    run_seed,
    sample_input,
    save_checkpoint,
    summarize,
    sweep,
    train,
    write_dataset,
    __version__,
)
