"""Hierarchical RL workbench for scripted desktop GUI control tasks."""

from .actions import (
    Action,
    ActionRegistry,
    MacroAction,
    N_ACTIONS,
    all_actions,
    flatten,
    format_action,
    grid_coords,
    mouse_distance,
    parse_action,
    unflatten,
)
from .agents import Agent, AgentConfig, Algorithm, epsilon, evaluate, train
from .curriculum import (
    CurriculumConfig,
    SamplingMode,
    TaskSampler,
    alpha_from_counts,
    expected_hard_fraction,
    p_simple,
)
from .encoder import (
    EncoderConfig,
    Observation,
    ObservationBuilder,
    PcaModel,
    description_embed,
    fit_pca,
    project,
    vision_embed,
)
from .env import EnvState, OracleRollout, StepOutcome, TaskEnv, Termination, is_success, oracle_rollout
from .metrics import (
    AggregateReport,
    EpisodeRecord,
    aggregate,
    export_csv,
    precision_recall_f1,
    score_episode,
)
from .policy import Policy, PolicyConfig, Structure, greedy_action, make_policy, sample_action
from .rewards import (
    RewardBreakdown,
    RewardConfig,
    key_subreward,
    manager_reward,
    mouse_subreward,
    normalized_reward,
    penalty,
    reward_preset,
    subpolicy_reward,
    total_reward,
)
from .tasks import (
    Difficulty,
    Task,
    TaskSuite,
    classify_difficulty,
    generate_synthetic_suite,
    load_suite,
    save_suite,
    validate_task,
)

__version__ = "0.1.0"
