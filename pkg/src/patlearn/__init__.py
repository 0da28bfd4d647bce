"""Interactive discovery of personally interesting frequent patterns.

A closed-pattern stream (native itemset miner, or ingested sequence/graph
files) is embedded into a metric space, a softmax model of the user's
interestingness is trained from a handful of iterative ratings, and each
round's rating candidates balance expected-gradient-length exploitation with
k-center exploration.
"""

from .core import (
    Dataset,
    Feedback,
    FeatureVector,
    Kind,
    LabeledGraph,
    Pattern,
    Transaction,
    pattern_contains,
    validate_dataset,
)
from .embed import EmbeddingModel, Hyperparams, WalkCorpus, encode_set_pattern, graph_to_walks, infer_pattern_vector, train_embedding
from .learner import SoftmaxModel, TrainingSet, cost, gradient, predict, predict_proba, train, weighted_f_score
from .miner import MiningConfig, PatternBatch, ingest_patterns, mine_closed_itemsets, partition_batches
from .select import SelectionStrategy, Variant, egl, k_center, select_for_feedback
from .session import OracleSpec, SessionConfig, SessionState, oracle_rate, run_session

__version__ = "0.1.0"
