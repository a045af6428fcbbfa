"""Two-stage retrieval with relevance-statement re-ranking.

BM25 first-stage retrieval, evidence-based credibility scoring, document
enhancement with natural-language relevance statements, cross-encoder input
construction under six layouts, a weighted-average fusion baseline, and a
TREC-style evaluation harness with significance testing.
"""

from .corpus import (Document, EvidenceArticle, QrelEntry, RunEntry, Topic,
                     load_corpus, load_evidence, load_qrels, load_topics,
                     read_run, write_run)
from .credibility import (CredibilityScore, cosine, make_weights,
                          retrieve_evidence, score_credibility)
from .enhancement import (EnhancedDocument, ScoreRepresentation, enhance,
                          format_score, render_statement)
from .errors import (ParseError, ProtocolError, RelstatError, ScorerError,
                     ScorerUnavailableError, ValidationError)
from .evaluation import (EvalReport, SignificanceResult, TopicMetrics,
                         average_precision, bonferroni, evaluate_run,
                         mrr_at_k, ndcg_at_k, paired_ttest, precision_at_k)
from .fusion import FusionConfig, wam
from .index import (InvertedIndex, RankedList, bm25_score, build_index,
                    load_index, minmax_normalize, retrieve, save_index)
from .rerank import RerankRunConfig, build_input, rerank_topic
from .scorer import ScorerHandle, ScorerInput, score_batch, stub_embed, stub_score
from .tokenization import Tokenizer, tokenize

__version__ = "0.1.0"
