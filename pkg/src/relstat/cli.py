"""Command-line entry point exposing every pipeline stage as a subcommand.

Exit codes: 0 success, 1 validation failure, 2 runtime failure, 3 remote
scorer failure. The RELSTAT_SCORER environment variable overrides any
--scorer flag, so a deployment can repoint every command at one endpoint.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import pipeline as pl
from .enhancement import TEMPLATE_IDS
from .errors import ScorerError, ScorerUnavailableError, ValidationError
from .rerank import VARIANTS

SCORER_ENV_VAR = "RELSTAT_SCORER"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_SCORER = 3


def _scorer_backend(flag_value: str) -> str:
    return os.environ.get(SCORER_ENV_VAR, flag_value)


def _add_scorer_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scorer", default="stub:0",
                        help="scorer backend: stub:<seed> or http://host:port "
                             f"(env {SCORER_ENV_VAR} overrides)")
    parser.add_argument("--batch-size", type=int, default=4)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relstat",
        description="Two-stage retrieval with relevance-statement re-ranking")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build an inverted index from a JSONL corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--evidence", action="store_true",
                   help="treat input as an evidence corpus (article_id records)")
    p.add_argument("--no-lowercase", dest="lowercase", action="store_false")
    p.add_argument("--stemmer", choices=["none", "porter"], default="none")
    p.add_argument("--stopwords", default=None, help="file with one stopword per line")

    p = sub.add_parser("retrieve", help="first-stage BM25 retrieval")
    p.add_argument("--index", required=True)
    p.add_argument("--topics", required=True)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--k1", type=float, default=1.2)
    p.add_argument("--b", type=float, default=0.75)
    p.add_argument("--tag", default="bm25")
    p.add_argument("--out", required=True)

    p = sub.add_parser("cred", help="credibility scores for a first-stage run")
    p.add_argument("--index", required=True, help="evidence index file")
    p.add_argument("--evidence", required=True, help="evidence corpus JSONL")
    p.add_argument("--topics", required=True)
    p.add_argument("--run", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--schedule", choices=["linear_decay", "uniform"],
                   default="linear_decay")
    p.add_argument("--embed-dim", type=int, default=64)
    _add_scorer_args(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("enhance", help="write statement-enhanced documents")
    p.add_argument("--run", required=True)
    p.add_argument("--cred", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--template", choices=list(TEMPLATE_IDS), default="c2")
    p.add_argument("--repr", dest="representation", default="decimal:4",
                   help="decimal:<places>, integer:<multiplier>, or segmented")
    p.add_argument("--normalize-cred", action="store_true")
    p.add_argument("--out", required=True)

    p = sub.add_parser("fuse", help="weighted-average (WAM) fusion baseline")
    p.add_argument("--run", required=True)
    p.add_argument("--cred", required=True)
    p.add_argument("--wt", type=float, default=0.5, help="topicality weight")
    p.add_argument("--wc", type=float, default=0.5, help="credibility weight")
    p.add_argument("--tag", default=None, help="defaults to wam-wt<wt>-wc<wc>")
    p.add_argument("--out", required=True)

    p = sub.add_parser("rerank", help="cross-encoder re-ranking of a run")
    p.add_argument("--variant", choices=list(VARIANTS), default="rel_stat")
    p.add_argument("--template", choices=[t for t in TEMPLATE_IDS if t != "score_only"],
                   default=None)
    p.add_argument("--repr", dest="representation", default="decimal:4")
    p.add_argument("--run", required=True)
    p.add_argument("--cred", default=None)
    p.add_argument("--corpus", required=True)
    p.add_argument("--topics", required=True)
    p.add_argument("--first-stage-n", type=int, default=500)
    p.add_argument("--normalize-cred", action="store_true")
    p.add_argument("--tag", default=None)
    _add_scorer_args(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="evaluate a run against qrels")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--permissive-qrels", action="store_true")
    p.add_argument("--no-figures", dest="figures", action="store_false")
    p.add_argument("--out", required=True)

    p = sub.add_parser("compare", help="pairwise significance tests over runs")
    p.add_argument("--runs", nargs="+", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--metric", dest="metrics", action="append",
                   choices=["ndcg10", "p10", "mrr10", "map"],
                   help="repeatable; default ndcg10")
    p.add_argument("--permissive-qrels", action="store_true")
    p.add_argument("--no-figures", dest="figures", action="store_false")
    p.add_argument("--out", required=True)

    p = sub.add_parser("sweep", help="re-rank under every variant/template/repr combo")
    p.add_argument("--run", required=True)
    p.add_argument("--cred", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--topics", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--variants", default="rel_stat",
                   help="comma-separated input variants")
    p.add_argument("--templates", default="c2",
                   help="comma-separated templates for rel_stat runs")
    p.add_argument("--reprs", default="decimal:4",
                   help="comma-separated score representations")
    p.add_argument("--first-stage-n", type=int, default=500)
    p.add_argument("--normalize-cred", action="store_true")
    _add_scorer_args(p)
    p.add_argument("--no-figures", dest="figures", action="store_false")
    p.add_argument("--outdir", required=True)

    p = sub.add_parser("pipeline", help="run every stage end to end from a config file")
    p.add_argument("--config", required=True, help="YAML or JSON pipeline config")
    p.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="KEY=VALUE", help="override a config key")

    return parser


def _parse_overrides(pairs: list[str]) -> dict:
    out: dict = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise ValidationError(f"override {pair!r} is not KEY=VALUE")
        # leave strings alone unless they parse as a literal
        for cast in (int, float):
            try:
                out[key] = cast(value)
                break
            except ValueError:
                continue
        else:
            if value.lower() in ("true", "false"):
                out[key] = value.lower() == "true"
            elif value.lower() in ("null", "none"):
                out[key] = None
            else:
                out[key] = value
    return out


def _cmd_sweep(args: argparse.Namespace) -> None:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    scorer = _scorer_backend(args.scorer)
    run_paths = []
    for variant in args.variants.split(","):
        templates = args.templates.split(",") if variant == "rel_stat" else [None]
        for template in templates:
            for repr_spec in args.reprs.split(","):
                parts = [variant]
                if template:
                    parts.append(template)
                parts.append(repr_spec.replace(":", ""))
                tag = "-".join(parts)
                out = outdir / f"{tag}.run"
                pl.stage_rerank(
                    args.run, args.corpus, args.topics, out,
                    cred_path=args.cred, variant=variant, template=template,
                    representation=repr_spec, scorer=scorer,
                    batch_size=args.batch_size, first_stage_n=args.first_stage_n,
                    tag=tag, normalize_cred=args.normalize_cred)
                print(f"wrote {out}")
                run_paths.append(out)
    pl.stage_compare(run_paths, args.qrels, outdir / "sweep.json",
                     metrics=("ndcg10", "p10", "mrr10", "map"),
                     figures=args.figures)
    print(f"wrote {outdir / 'sweep.json'}")


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "index":
            pl.stage_index(args.corpus, args.out, evidence=args.evidence,
                           lowercase=args.lowercase, stemmer=args.stemmer,
                           stopwords_path=args.stopwords)
            print(f"wrote {args.out}")
        elif args.command == "retrieve":
            pl.stage_retrieve(args.index, args.topics, args.out, n=args.n,
                              k1=args.k1, b=args.b, tag=args.tag)
            print(f"wrote {args.out}")
        elif args.command == "cred":
            pl.stage_cred(args.index, args.evidence, args.topics, args.run,
                          args.corpus, args.out, k=args.k, schedule=args.schedule,
                          scorer=_scorer_backend(args.scorer),
                          embed_dim=args.embed_dim, batch_size=args.batch_size)
            print(f"wrote {args.out}")
        elif args.command == "enhance":
            pl.stage_enhance(args.run, args.cred, args.corpus, args.out,
                             template=args.template,
                             representation=args.representation,
                             normalize_cred=args.normalize_cred)
            print(f"wrote {args.out}")
        elif args.command == "fuse":
            pl.stage_fuse(args.run, args.cred, args.out, w_topicality=args.wt,
                          w_credibility=args.wc, tag=args.tag)
            print(f"wrote {args.out}")
        elif args.command == "rerank":
            pl.stage_rerank(args.run, args.corpus, args.topics, args.out,
                            cred_path=args.cred, variant=args.variant,
                            template=args.template,
                            representation=args.representation,
                            scorer=_scorer_backend(args.scorer),
                            batch_size=args.batch_size,
                            first_stage_n=args.first_stage_n, tag=args.tag,
                            normalize_cred=args.normalize_cred)
            print(f"wrote {args.out}")
        elif args.command == "eval":
            report = pl.stage_eval(args.run, args.qrels, args.out,
                                   permissive_qrels=args.permissive_qrels,
                                   figures=args.figures)
            for metric in ("ndcg10", "p10", "mrr10", "map"):
                print(f"{metric}: {report.aggregate[metric]:.4f}")
            print(f"wrote {args.out}")
        elif args.command == "compare":
            results = pl.stage_compare(args.runs, args.qrels, args.out,
                                       metrics=tuple(args.metrics or ["ndcg10"]),
                                       permissive_qrels=args.permissive_qrels,
                                       figures=args.figures)
            for r in results:
                marker = "*" if r.significant_at_05 else " "
                print(f"{marker} {r.system_a} vs {r.system_b} [{r.metric}]: "
                      f"t={r.t_statistic:.4f} p={r.p_corrected:.4g}")
            print(f"wrote {args.out}")
        elif args.command == "sweep":
            _cmd_sweep(args)
        elif args.command == "pipeline":
            config = pl.PipelineConfig.from_file(
                args.config, _parse_overrides(args.overrides))
            if SCORER_ENV_VAR in os.environ:
                config.scorer = os.environ[SCORER_ENV_VAR]
            outcomes = pl.run_pipeline(config, log=print)
            for outcome in outcomes:
                status = "skipped" if outcome.skipped else "ran"
                print(f"{outcome.name}: {status}")
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ScorerUnavailableError, ScorerError) as exc:
        print(f"scorer error: {exc}", file=sys.stderr)
        return EXIT_SCORER
    except FileNotFoundError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - boundary: map anything else to exit 2
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
