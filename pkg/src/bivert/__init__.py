"""Reference-free machine translation quality estimation.

A source sentence is compared against the back-translation of its machine
translation: token embeddings are aligned with an exact minimum-cost
assignment, the aligned word pairs are classified into seven relation
categories, sense-category pairs are scored on an offline synset graph, and a
trained regressor combines the per-category cost sums into a quality score.
"""

from .assignment import (Assignment, CostMatrix, build_cost_matrix,
                         cosine_similarity, similarity_matrix, solve_lsap)
from .boosting import (FEATURE_NAMES, GBRModel, Hyperparams, LinearModel,
                       feature_importances, load_model, predict, save_model,
                       staged_predictions, train_gbr, train_linear)
from .corpus import (EmbeddingTable, SentencePairRecord, TokenizedSentence, Word,
                     load_dataset, preprocess, write_dataset)
from .errors import (BivertError, DegenerateSentence, DegreeError, ParseError,
                     SchemaError, UndefinedCorrelation, ZeroVector)
from .relations import (LexiconBundle, RelationCategory, RelationRecord,
                        bundled_lexicons, classify_pair, classify_sentence_pair,
                        lemmatize)
from .scoring import (FeatureVector, ScoredRecord, SystemReport, featurize,
                      normalize_labels, pearson, sentence_features,
                      system_level_report)
from .sense_graph import (DEFAULT_RELATION_PARAMS, PathEdge, PathResult,
                          SenseGraphStore, SenseScorer, SenseSearchConfig,
                          SynsetEntry, edge_type_weight, edge_weight,
                          load_sense_graph, path_score, sense_cost, senses_of,
                          shortest_sense_path, write_sense_graph)
from .word_align import WordPairing, align_words

__version__ = "0.1.0"
