"""File-to-file pipeline stages, declarative config, and the stage manifest.

Each stage reads its inputs from disk and writes its outputs to disk; the CLI
subcommands and the end-to-end pipeline call the same functions, so staged
execution and `pipeline` produce identical artifacts by construction.

The manifest (manifest.json in the output directory) records, per stage, the
parameters plus sha256 checksums of every input and output. A stage is
skipped on re-run when parameters and input checksums are unchanged and its
outputs still match their recorded checksums; every artifact is therefore
reproducible from the manifest alone.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import yaml

from . import credibility as cred_mod
from .corpus import (Document, load_corpus, load_evidence, load_qrels,
                     load_topics, read_run, write_run)
from .enhancement import (TEMPLATE_PLACEHOLDERS, Provenance, ScoreRepresentation,
                          enhance, format_score, render_statement)
from .errors import ValidationError
from .evaluation import EvalReport, compare_reports, evaluate_run
from .fusion import FusionConfig, normalize_cred_values, wam
from .index import (build_index, load_index, minmax_normalize, ranked_lists_to_run,
                    retrieve, run_to_ranked_lists, save_index)
from .rerank import RerankRunConfig, rerank_topic
from .scorer import ScorerClient, ScorerHandle
from .tokenization import Tokenizer


def _sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _load_stopwords(path: str | Path | None) -> frozenset[str]:
    if path is None:
        return frozenset()
    with open(path, "r", encoding="utf-8") as fh:
        return frozenset(word.strip() for word in fh if word.strip())


# ---------------------------------------------------------------------------
# stage functions (file to file)
# ---------------------------------------------------------------------------

def stage_index(corpus_path: str | Path, out_path: str | Path, *,
                evidence: bool = False, lowercase: bool = True,
                stemmer: str = "none",
                stopwords_path: str | Path | None = None) -> None:
    tokenizer = Tokenizer(lowercase=lowercase,
                          stopwords=_load_stopwords(stopwords_path),
                          stemmer=stemmer)
    if evidence:
        docs = [Document(doc_id=a.article_id, text=a.text)
                for a in load_evidence(corpus_path)]
    else:
        docs = load_corpus(corpus_path)
    save_index(build_index(docs, tokenizer), out_path)


def stage_retrieve(index_path: str | Path, topics_path: str | Path,
                   out_path: str | Path, *, n: int = 500, k1: float = 1.2,
                   b: float = 0.75, tag: str = "bm25") -> None:
    index = load_index(index_path)
    topics = load_topics(topics_path)
    lists = [retrieve(index, topic, n=n, k1=k1, b=b) for topic in topics]
    write_run(ranked_lists_to_run([rl for rl in lists if rl.items], tag), out_path)


def stage_cred(evidence_index_path: str | Path, evidence_path: str | Path,
               topics_path: str | Path, run_path: str | Path,
               corpus_path: str | Path, out_path: str | Path, *,
               k: int = 3, schedule: str = "linear_decay",
               scorer: str = "stub:0", embed_dim: int = 64,
               batch_size: int = 4) -> None:
    """Credibility scores for every document of a first-stage run."""
    evidence_index = load_index(evidence_index_path)
    evidence_texts = {a.article_id: a.text for a in load_evidence(evidence_path)}
    topics = {t.topic_id: t for t in load_topics(topics_path)}
    corpus = {d.doc_id: d for d in load_corpus(corpus_path)}
    ranked = run_to_ranked_lists(read_run(run_path))
    client = ScorerClient(ScorerHandle(backend=scorer, batch_size=batch_size))

    all_scores: list[cred_mod.CredibilityScore] = []
    for topic_id in sorted(ranked):
        if topic_id not in topics:
            raise ValidationError(f"run topic {topic_id!r} missing from topics file")
        topic = topics[topic_id]
        doc_ids = ranked[topic_id].doc_ids()
        missing = [d for d in doc_ids if d not in corpus]
        if missing:
            raise ValidationError(f"run doc {missing[0]!r} missing from corpus")
        evidence_ids = cred_mod.retrieve_evidence(evidence_index, topic, k)
        if not evidence_ids:
            all_scores.extend(cred_mod.CredibilityScore(
                topic_id, doc_id, cred_mod.NO_EVIDENCE_SCORE, (), no_evidence=True)
                for doc_id in doc_ids)
            continue
        weights = cred_mod.make_weights(k, schedule)
        if len(evidence_ids) < k:
            weights = cred_mod.renormalize_weights(weights, len(evidence_ids))
        evidence_vecs = client.embed_batch(
            [evidence_texts[eid] for eid in evidence_ids], dim=embed_dim)
        doc_vecs = client.embed_batch(
            [corpus[d].text for d in doc_ids], dim=embed_dim)
        for doc_id, vec in zip(doc_ids, doc_vecs):
            value = cred_mod.score_credibility(vec, evidence_vecs, weights)
            all_scores.append(cred_mod.CredibilityScore(
                topic_id, doc_id, value, tuple(evidence_ids)))
    cred_mod.write_scores(all_scores, out_path)


def stage_enhance(run_path: str | Path, cred_path: str | Path,
                  corpus_path: str | Path, out_path: str | Path, *,
                  template: str = "c2", representation: str = "decimal:4",
                  normalize_cred: bool = False) -> None:
    """Write statement-enhanced documents for every run candidate."""
    repr_ = ScoreRepresentation.parse(representation)
    corpus = {d.doc_id: d for d in load_corpus(corpus_path)}
    ranked = run_to_ranked_lists(read_run(run_path))
    cred_scores = cred_mod.load_scores(cred_path)
    if template not in TEMPLATE_PLACEHOLDERS:
        raise ValidationError(f"unknown statement template {template!r}")
    needs = TEMPLATE_PLACEHOLDERS[template]

    with open(out_path, "w", encoding="utf-8") as fh:
        for topic_id in sorted(ranked):
            normalized = minmax_normalize(ranked[topic_id])
            top_values = dict(normalized.items)
            topic_cred = cred_scores.get(topic_id, {})
            cred_values = {d: s.value for d, s in topic_cred.items()}
            if normalize_cred and cred_values:
                lo, hi = min(cred_values.values()), max(cred_values.values())
                cred_values = {d: 1.0 if hi == lo else (v - lo) / (hi - lo)
                               for d, v in cred_values.items()}
            for doc_id, _ in ranked[topic_id].items:
                if doc_id not in corpus:
                    raise ValidationError(f"run doc {doc_id!r} missing from corpus")
                raw: dict[str, float] = {}
                cred_str = top_str = None
                if "X" in needs:
                    if doc_id not in cred_values:
                        raise ValidationError(
                            f"missing credibility for topic {topic_id!r}, doc {doc_id!r}")
                    raw["credibility"] = cred_values[doc_id]
                    cred_str = format_score(cred_values[doc_id], repr_)
                if "Y" in needs:
                    raw["topicality"] = top_values[doc_id]
                    top_str = format_score(top_values[doc_id], repr_)
                statement = render_statement(template, cred_str=cred_str, top_str=top_str)
                enhanced = enhance(corpus[doc_id], statement, Provenance(
                    representation=repr_.label(), template_id=template, raw_scores=raw))
                fh.write(json.dumps({
                    "doc_id": doc_id,
                    "topic_id": topic_id,
                    "statement": enhanced.statement,
                    "enhanced_text": enhanced.enhanced_text,
                    "provenance": {
                        "representation": repr_.label(),
                        "template": template,
                        "raw_scores": raw,
                    },
                }) + "\n")


def stage_rerank(run_path: str | Path, corpus_path: str | Path,
                 topics_path: str | Path, out_path: str | Path, *,
                 cred_path: str | Path | None = None,
                 variant: str = "plain_ce", template: str | None = None,
                 representation: str = "decimal:4", scorer: str = "stub:0",
                 batch_size: int = 4, first_stage_n: int = 500,
                 tag: str | None = None, normalize_cred: bool = False) -> None:
    config = RerankRunConfig(
        variant=variant,
        representation=ScoreRepresentation.parse(representation),
        template=template,
        first_stage_n=first_stage_n,
        tag=tag or variant,
        normalize_cred=normalize_cred,
    )
    corpus = {d.doc_id: d for d in load_corpus(corpus_path)}
    topics = {t.topic_id: t for t in load_topics(topics_path)}
    ranked = run_to_ranked_lists(read_run(run_path))
    cred_scores = cred_mod.load_scores(cred_path) if cred_path else {}
    handle = ScorerHandle(backend=scorer, batch_size=batch_size)

    lists = []
    for topic_id in sorted(ranked):
        if topic_id not in topics:
            raise ValidationError(f"run topic {topic_id!r} missing from topics file")
        lists.append(rerank_topic(config, topics[topic_id], ranked[topic_id],
                                  corpus, cred_scores.get(topic_id), handle))
    write_run(ranked_lists_to_run(lists, config.tag), out_path)


def stage_fuse(run_path: str | Path, cred_path: str | Path,
               out_path: str | Path, *, w_topicality: float = 0.5,
               w_credibility: float = 0.5, tag: str | None = None) -> None:
    config = FusionConfig(w_topicality=w_topicality, w_credibility=w_credibility)
    if tag is None:
        # the weights are an open calibration choice, so reports carry them
        tag = f"wam-wt{w_topicality:g}-wc{w_credibility:g}"
    ranked = run_to_ranked_lists(read_run(run_path))
    cred_scores = cred_mod.load_scores(cred_path)
    lists = []
    for topic_id in sorted(ranked):
        topic_scores = cred_scores.get(topic_id)
        if topic_scores is None:
            raise ValidationError(f"no credibility scores for topic {topic_id!r}")
        normalized = minmax_normalize(ranked[topic_id])
        lists.append(wam(normalized, normalize_cred_values(topic_scores), config))
    write_run(ranked_lists_to_run(lists, tag), out_path)


def _write_report_csv(report: EvalReport, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["topic_id", "ndcg10", "p10", "mrr10", "map"])
        for t in report.topics:
            writer.writerow([t.topic_id, f"{t.ndcg10:.6f}", f"{t.p10:.6f}",
                             f"{t.mrr10:.6f}", f"{t.map:.6f}"])
        writer.writerow(["MEAN"] + [f"{report.aggregate[m]:.6f}"
                                    for m in ("ndcg10", "p10", "mrr10", "map")])


def stage_eval(run_path: str | Path, qrels_path: str | Path,
               out_path: str | Path, *, permissive_qrels: bool = False,
               figures: bool = True) -> EvalReport:
    """Evaluate one run: JSON report plus CSV and figure alongside."""
    report = evaluate_run(read_run(run_path), load_qrels(qrels_path, permissive_qrels))
    out_path = Path(out_path)
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_report_csv(report, out_path.with_suffix(".csv"))
    if figures:
        from .plotting import render_report_figure
        render_report_figure(report, out_path.with_suffix(".png"))
    return report


def stage_compare(run_paths: Sequence[str | Path], qrels_path: str | Path,
                  out_path: str | Path, *, metrics: Sequence[str] = ("ndcg10",),
                  permissive_qrels: bool = False, figures: bool = True) -> list:
    qrels = load_qrels(qrels_path, permissive_qrels)
    reports = [evaluate_run(read_run(p), qrels) for p in run_paths]
    results = compare_reports(reports, metrics=metrics)
    out_path = Path(out_path)
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump({
            "metrics": list(metrics),
            "n_comparisons": results[0].n_comparisons if results else 0,
            "results": [r.to_dict() for r in results],
        }, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out_path.with_suffix(".csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["system_a", "system_b", "metric", "t_statistic",
                         "p_raw", "p_corrected", "n_comparisons", "significant_at_0.05"])
        for r in results:
            writer.writerow([r.system_a, r.system_b, r.metric,
                             f"{r.t_statistic:.6f}", f"{r.p_raw:.6g}",
                             f"{r.p_corrected:.6g}", r.n_comparisons,
                             r.significant_at_05])
    if figures:
        from .plotting import render_comparison_figure
        render_comparison_figure(reports, out_path.with_suffix(".png"))
    return results


# ---------------------------------------------------------------------------
# pipeline config and manifest
# ---------------------------------------------------------------------------

@dataclass
class PipelineConfig:
    """All paths and stage parameters of one end-to-end run."""

    corpus: str
    evidence: str
    topics: str
    qrels: str
    output_dir: str
    # lexical
    k1: float = 1.2
    b: float = 0.75
    n: int = 500
    lowercase: bool = True
    stemmer: str = "none"
    stopwords: str | None = None
    # credibility
    cred_k: int = 3
    cred_schedule: str = "linear_decay"
    embed_dim: int = 64
    # enhancement / rerank
    variant: str = "rel_stat"
    template: str | None = "c2"
    representation: str = "decimal:4"
    normalize_cred: bool = False
    scorer: str = "stub:0"
    batch_size: int = 4
    tag: str = "relstat"
    # eval
    permissive_qrels: bool = False
    figures: bool = True

    @classmethod
    def from_file(cls, path: str | Path, overrides: dict | None = None) -> "PipelineConfig":
        with open(path, "r", encoding="utf-8") as fh:
            if str(path).endswith((".yaml", ".yml")):
                raw = yaml.safe_load(fh)
            else:
                raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ValidationError(f"{path}: config must be a mapping")
        raw.update(overrides or {})
        known = {f.name for f in cls.__dataclass_fields__.values()}
        unknown = set(raw) - known
        if unknown:
            raise ValidationError(f"{path}: unknown config keys {sorted(unknown)}")
        try:
            return cls(**raw)
        except TypeError as exc:
            raise ValidationError(f"{path}: {exc}") from exc

    def validate(self) -> None:
        for name in ("corpus", "evidence", "topics", "qrels"):
            path = getattr(self, name)
            if not Path(path).is_file():
                raise ValidationError(f"{name} path does not exist: {path}")
        if self.stopwords is not None and not Path(self.stopwords).is_file():
            raise ValidationError(f"stopwords path does not exist: {self.stopwords}")
        # constructing the rerank config validates variant/template compatibility
        RerankRunConfig(variant=self.variant,
                        representation=ScoreRepresentation.parse(self.representation),
                        template=self.template, first_stage_n=self.n, tag=self.tag)


@dataclass
class StageOutcome:
    name: str
    skipped: bool
    outputs: list[str] = field(default_factory=list)


class Manifest:
    """Checksum ledger that makes completed stages skippable."""

    def __init__(self, path: Path):
        self.path = path
        self.stages: dict[str, dict] = {}
        if path.is_file():
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
            self.stages = data.get("stages", {})

    def is_current(self, stage: str, params: dict, inputs: Sequence[Path],
                   outputs: Sequence[Path]) -> bool:
        record = self.stages.get(stage)
        if record is None or record["params"] != params:
            return False
        if record["inputs"] != {str(p): _sha256(p) for p in inputs}:
            return False
        for out, digest in record["outputs"].items():
            if not Path(out).is_file() or _sha256(out) != digest:
                return False
        return set(record["outputs"]) == {str(p) for p in outputs}

    def record(self, stage: str, params: dict, inputs: Sequence[Path],
               outputs: Sequence[Path]) -> None:
        self.stages[stage] = {
            "params": params,
            "inputs": {str(p): _sha256(p) for p in inputs},
            "outputs": {str(p): _sha256(p) for p in outputs},
        }
        with open(self.path, "w", encoding="utf-8") as fh:
            json.dump({"version": 1, "stages": self.stages}, fh, indent=2, sort_keys=True)
            fh.write("\n")


def run_pipeline(config: PipelineConfig,
                 log: Callable[[str], None] = lambda s: None) -> list[StageOutcome]:
    """Execute index -> retrieve -> cred -> enhance -> rerank -> eval.

    Stages whose parameters, inputs, and outputs are unchanged since the last
    run are skipped via the manifest. Returns the outcome per stage.
    """
    config.validate()
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(outdir / "manifest.json")

    index_path = outdir / "corpus.idx"
    evidence_index_path = outdir / "evidence.idx"
    first_stage_path = outdir / "first_stage.run"
    cred_path = outdir / "cred.jsonl"
    enhanced_path = outdir / "enhanced.jsonl"
    reranked_path = outdir / "reranked.run"
    report_path = outdir / "report.json"

    rerank_cfg = RerankRunConfig(
        variant=config.variant,
        representation=ScoreRepresentation.parse(config.representation),
        template=config.template, first_stage_n=config.n, tag=config.tag)
    needs_cred = rerank_cfg.needs_credibility()
    wants_enhance = config.variant in ("rel_score", "rel_stat")

    outcomes: list[StageOutcome] = []

    def run_stage(name: str, params: dict, inputs: list[Path],
                  outputs: list[Path], action: Callable[[], None]) -> None:
        if manifest.is_current(name, params, inputs, outputs):
            log(f"stage {name}: up to date, skipped")
            outcomes.append(StageOutcome(name, True, [str(p) for p in outputs]))
            return
        log(f"stage {name}: running")
        action()
        manifest.record(name, params, inputs, outputs)
        outcomes.append(StageOutcome(name, False, [str(p) for p in outputs]))

    tokenizer_params = {"lowercase": config.lowercase, "stemmer": config.stemmer,
                        "stopwords": config.stopwords}
    run_stage(
        "index", tokenizer_params, [Path(config.corpus)], [index_path],
        lambda: stage_index(config.corpus, index_path, lowercase=config.lowercase,
                            stemmer=config.stemmer, stopwords_path=config.stopwords))
    run_stage(
        "evidence_index", tokenizer_params, [Path(config.evidence)], [evidence_index_path],
        lambda: stage_index(config.evidence, evidence_index_path, evidence=True,
                            lowercase=config.lowercase, stemmer=config.stemmer,
                            stopwords_path=config.stopwords))
    run_stage(
        "retrieve", {"n": config.n, "k1": config.k1, "b": config.b},
        [index_path, Path(config.topics)], [first_stage_path],
        lambda: stage_retrieve(index_path, config.topics, first_stage_path,
                               n=config.n, k1=config.k1, b=config.b))
    if needs_cred:
        run_stage(
            "cred",
            {"k": config.cred_k, "schedule": config.cred_schedule,
             "scorer": config.scorer, "embed_dim": config.embed_dim},
            [evidence_index_path, Path(config.evidence), Path(config.topics),
             first_stage_path, Path(config.corpus)],
            [cred_path],
            lambda: stage_cred(evidence_index_path, config.evidence, config.topics,
                               first_stage_path, config.corpus, cred_path,
                               k=config.cred_k, schedule=config.cred_schedule,
                               scorer=config.scorer, embed_dim=config.embed_dim,
                               batch_size=config.batch_size))
    if wants_enhance:
        template = "score_only" if config.variant == "rel_score" else config.template
        run_stage(
            "enhance",
            {"template": template, "representation": config.representation,
             "normalize_cred": config.normalize_cred},
            [first_stage_path, cred_path, Path(config.corpus)],
            [enhanced_path],
            lambda: stage_enhance(first_stage_path, cred_path, config.corpus,
                                  enhanced_path, template=template,
                                  representation=config.representation,
                                  normalize_cred=config.normalize_cred))
    run_stage(
        "rerank",
        {"variant": config.variant, "template": config.template,
         "representation": config.representation, "scorer": config.scorer,
         "batch_size": config.batch_size, "first_stage_n": config.n,
         "tag": config.tag, "normalize_cred": config.normalize_cred},
        [first_stage_path, Path(config.corpus), Path(config.topics)]
        + ([cred_path] if needs_cred else []),
        [reranked_path],
        lambda: stage_rerank(first_stage_path, config.corpus, config.topics,
                             reranked_path,
                             cred_path=cred_path if needs_cred else None,
                             variant=config.variant, template=config.template,
                             representation=config.representation,
                             scorer=config.scorer, batch_size=config.batch_size,
                             first_stage_n=config.n, tag=config.tag,
                             normalize_cred=config.normalize_cred))
    eval_outputs = [report_path, report_path.with_suffix(".csv")]
    if config.figures:
        eval_outputs.append(report_path.with_suffix(".png"))
    run_stage(
        "eval", {"permissive_qrels": config.permissive_qrels, "figures": config.figures},
        [reranked_path, Path(config.qrels)], eval_outputs,
        lambda: stage_eval(reranked_path, config.qrels, report_path,
                           permissive_qrels=config.permissive_qrels,
                           figures=config.figures))
    return outcomes
