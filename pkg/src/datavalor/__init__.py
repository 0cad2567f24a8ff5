"""datavalor: decision support for buying, selling, and keeping datasets.

The package walks the full path from screening questionnaires through
metric normalization, ANP-derived weights, and domain alignment to an
audited monetary value per dataset candidate.
"""

from .anp import (ConsistencyReport, PairwiseMatrix, PriorityVector,
                  Supermatrix, WeightDerivation, consistency_ratio,
                  consistent_matrix, derive_metric_weights,
                  geometric_mean_priorities, limit_supermatrix,
                  load_judgements, principal_priorities, random_index,
                  validate_pairwise)
from .catalog import (BscPerspective, Correlation, MetricCatalog,
                      MetricDefinition, default_catalog, find_metrics,
                      load_catalog, save_catalog)
from .errors import (DataValorError, MathError, NotFoundError, OrderError,
                     ValidationError)
from .normalization import (BinaryRule, DelimitedRule, LinearRule,
                            MetricObservation, NormalizedMetric,
                            NormalizationRule, SatisfiedWhen, normalize,
                            normalize_binary, normalize_delimited,
                            normalize_linear, rule_from_dict)
from .scenario import (Candidate, ComparisonReport, DomainSpec, MetricEntry,
                       RankedCandidate, Scenario, ScenarioStore, WhatIfReport,
                       compare, load_scenario, packaged_scenario, rank_results,
                       run_valuation, save_scenario, scenario_from_dict,
                       scenario_to_dict, what_if)
from .screening import (Answer, DataPurpose, DecisionTree, DiscrepancyNote,
                        Question, Recommendation, RecommendationEffects,
                        ScreeningOutcome, ScreeningSession, Stage, answer,
                        classify_purpose, default_step1_tree,
                        default_step2_tree, load_tree, merge_effects,
                        recommendations, replay, start_session)
from .valuation import (AlignmentVariant, CapexItem, CostLedger,
                        DomainRelevance, Driver, Duration, GovernanceItem,
                        IndexValue, OpexItem, PotentialInputs, PotentialMode,
                        TemporalCorrection, ValuationComponent,
                        ValuationResult, ValuationWarning, WeightedMetric,
                        aggregate_index, alignment, combine_distributed_costs,
                        combine_distributed_quality, dataset_potential,
                        dataset_value, format_money, relevance,
                        return_on_investment, temporal_correction,
                        total_costs, utility)

__version__ = "0.1.0"
