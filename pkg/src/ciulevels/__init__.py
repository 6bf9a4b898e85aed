"""Contextual importance and utility over intermediate concepts, with the
cooperative-game machinery (dividends, levels structures, Shapley values)
used to compare them."""

from .ciu import (
    CiuResult,
    SamplerConfig,
    UtilityMap,
    contextual_importance,
    contextual_influence,
    contextual_utility,
    drilldown,
    estimate_minmax,
    explain_concepts,
    explain_instance,
    linear_joint_importance,
)
from .coalitions import (
    DividendTable,
    Game,
    game_properties,
    harsanyi_dividends,
    in_core,
    is_imputation,
    reconstruct_from_dividends,
    unanimity_game,
)
from .levels import LevelsStructure, immediate_players, induced_game, quotient_levels, validate_levels_structure
from .models import FeatureSchema, LinearModel, RandomForest, load_csv, load_model, train_random_forest
from .report import ExplanationDocument, render_barplot, render_text
from .shapley import exact_shapley_game, linear_shapley, monte_carlo_shapley
from .vocabfile import parse_vocabulary
from .vocabulary import Vocabulary

__version__ = "0.1.0"
