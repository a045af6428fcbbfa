import json
import os
from pathlib import Path

import pytest
import yaml

from relstat.cli import run as cli_run
from relstat.corpus import read_run
from relstat.pipeline import PipelineConfig, run_pipeline


def _pipeline_config(fixture_paths, outdir, **overrides) -> PipelineConfig:
    params = dict(
        corpus=str(fixture_paths["corpus"]),
        evidence=str(fixture_paths["evidence"]),
        topics=str(fixture_paths["topics"]),
        qrels=str(fixture_paths["qrels"]),
        output_dir=str(outdir),
        scorer="stub:7",
        figures=False,
    )
    params.update(overrides)
    return PipelineConfig(**params)


class TestRunPipeline:
    def test_all_stages_produce_artifacts(self, fixture_paths, tmp_path):
        config = _pipeline_config(fixture_paths, tmp_path / "out")
        outcomes = run_pipeline(config)
        names = [o.name for o in outcomes]
        assert names == ["index", "evidence_index", "retrieve", "cred",
                         "enhance", "rerank", "eval"]
        assert not any(o.skipped for o in outcomes)
        outdir = tmp_path / "out"
        for artifact in ["corpus.idx", "evidence.idx", "first_stage.run",
                         "cred.jsonl", "enhanced.jsonl", "reranked.run",
                         "report.json", "report.csv", "manifest.json"]:
            assert (outdir / artifact).is_file(), artifact

    def test_rerun_skips_everything_and_is_byte_identical(self, fixture_paths, tmp_path):
        config = _pipeline_config(fixture_paths, tmp_path / "out")
        run_pipeline(config)
        outdir = tmp_path / "out"
        before = {p.name: p.read_bytes() for p in outdir.iterdir() if p.is_file()}
        outcomes = run_pipeline(config)
        assert all(o.skipped for o in outcomes)
        after = {p.name: p.read_bytes() for p in outdir.iterdir() if p.is_file()}
        assert before == after

    def test_changed_param_reruns_downstream_stage(self, fixture_paths, tmp_path):
        config = _pipeline_config(fixture_paths, tmp_path / "out")
        run_pipeline(config)
        config2 = _pipeline_config(fixture_paths, tmp_path / "out", tag="other")
        outcomes = {o.name: o.skipped for o in run_pipeline(config2)}
        assert outcomes["index"] is True          # unchanged
        assert outcomes["retrieve"] is True       # unchanged
        assert outcomes["rerank"] is False        # tag feeds the rerank stage
        assert outcomes["eval"] is False          # reranked run changed

    def test_two_fresh_runs_byte_identical(self, fixture_paths, tmp_path):
        config_a = _pipeline_config(fixture_paths, tmp_path / "a")
        config_b = _pipeline_config(fixture_paths, tmp_path / "b")
        run_pipeline(config_a)
        run_pipeline(config_b)
        for name in ["first_stage.run", "cred.jsonl", "enhanced.jsonl",
                     "reranked.run", "report.json", "report.csv"]:
            assert ((tmp_path / "a" / name).read_bytes()
                    == (tmp_path / "b" / name).read_bytes()), name

    def test_plain_ce_skips_cred_and_enhance(self, fixture_paths, tmp_path):
        config = _pipeline_config(fixture_paths, tmp_path / "out",
                                  variant="plain_ce", template=None)
        names = [o.name for o in run_pipeline(config)]
        assert "cred" not in names and "enhance" not in names

    def test_missing_corpus_fails_before_any_work(self, fixture_paths, tmp_path):
        from relstat.errors import ValidationError
        config = _pipeline_config(fixture_paths, tmp_path / "out",
                                  corpus=str(tmp_path / "nope.jsonl"))
        with pytest.raises(ValidationError):
            run_pipeline(config)
        assert not (tmp_path / "out" / "manifest.json").exists()

    def test_config_file_round_trip(self, fixture_paths, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text(yaml.safe_dump({
            "corpus": str(fixture_paths["corpus"]),
            "evidence": str(fixture_paths["evidence"]),
            "topics": str(fixture_paths["topics"]),
            "qrels": str(fixture_paths["qrels"]),
            "output_dir": str(tmp_path / "out"),
            "scorer": "stub:7",
            "figures": False,
        }))
        config = PipelineConfig.from_file(path, {"tag": "fromfile"})
        assert config.tag == "fromfile"
        assert config.scorer == "stub:7"

    def test_unknown_config_key_rejected(self, tmp_path):
        from relstat.errors import ValidationError
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"corpus": "x", "bogus_key": 1}))
        with pytest.raises(ValidationError, match="bogus_key"):
            PipelineConfig.from_file(path)


@pytest.fixture
def staged_dirs(fixture_paths, tmp_path):
    """Run every stage through the CLI and return the artifact directory."""
    out = tmp_path / "cli"
    out.mkdir()
    fx = fixture_paths

    def cli(*args):
        code = cli_run([str(a) for a in args])
        assert code == 0, args
        return code

    cli("index", "--corpus", fx["corpus"], "--out", out / "c.idx")
    cli("index", "--corpus", fx["evidence"], "--evidence", "--out", out / "e.idx")
    cli("retrieve", "--index", out / "c.idx", "--topics", fx["topics"],
        "--n", 500, "--out", out / "fs.run")
    cli("cred", "--index", out / "e.idx", "--evidence", fx["evidence"],
        "--topics", fx["topics"], "--run", out / "fs.run",
        "--corpus", fx["corpus"], "--scorer", "stub:7", "--out", out / "cred.jsonl")
    cli("enhance", "--run", out / "fs.run", "--cred", out / "cred.jsonl",
        "--corpus", fx["corpus"], "--template", "c2", "--repr", "decimal:4",
        "--out", out / "enhanced.jsonl")
    cli("rerank", "--variant", "rel_stat", "--template", "c2",
        "--run", out / "fs.run", "--cred", out / "cred.jsonl",
        "--corpus", fx["corpus"], "--topics", fx["topics"],
        "--scorer", "stub:7", "--tag", "relstat", "--out", out / "reranked.run")
    cli("fuse", "--run", out / "fs.run", "--cred", out / "cred.jsonl",
        "--wt", 0.5, "--wc", 0.5, "--out", out / "wam.run")
    cli("eval", "--run", out / "reranked.run", "--qrels", fx["qrels"],
        "--out", out / "report.json")
    cli("compare", "--runs", out / "fs.run", out / "reranked.run",
        "--qrels", fx["qrels"], "--metric", "ndcg10", "--out", out / "sig.json")
    return out


class TestCli:
    def test_staged_cli_equals_pipeline(self, fixture_paths, tmp_path, staged_dirs):
        config = _pipeline_config(fixture_paths, tmp_path / "pl", tag="relstat")
        run_pipeline(config)
        for staged, piped in [("fs.run", "first_stage.run"),
                              ("cred.jsonl", "cred.jsonl"),
                              ("enhanced.jsonl", "enhanced.jsonl"),
                              ("reranked.run", "reranked.run")]:
            assert ((staged_dirs / staged).read_bytes()
                    == (tmp_path / "pl" / piped).read_bytes()), staged

    def test_eval_writes_csv_and_figures(self, fixture_paths, staged_dirs, tmp_path):
        # default eval renders the figure; staged_dirs ran with figures on
        assert (staged_dirs / "report.csv").is_file()
        assert (staged_dirs / "report.png").is_file()
        assert (staged_dirs / "sig.csv").is_file()
        assert (staged_dirs / "sig.png").is_file()
        report = json.loads((staged_dirs / "report.json").read_text())
        assert set(report["aggregate"]) == {"ndcg10", "p10", "mrr10", "map"}

    def test_enhanced_record_schema(self, staged_dirs):
        line = (staged_dirs / "enhanced.jsonl").read_text().splitlines()[0]
        record = json.loads(line)
        assert set(record) == {"doc_id", "topic_id", "statement",
                               "enhanced_text", "provenance"}
        assert record["enhanced_text"].startswith(record["statement"] + " ")
        assert record["statement"].startswith("Credibility score of the document is ")

    def test_cred_record_schema(self, staged_dirs):
        line = (staged_dirs / "cred.jsonl").read_text().splitlines()[0]
        record = json.loads(line)
        assert set(record) == {"topic_id", "doc_id", "cred", "evidence_ids",
                               "no_evidence_flag"}

    def test_sig_output(self, staged_dirs):
        sig = json.loads((staged_dirs / "sig.json").read_text())
        assert sig["metrics"] == ["ndcg10"]
        assert len(sig["results"]) == 1
        assert {"system_a", "system_b", "p_corrected"} <= set(sig["results"][0])

    def test_missing_file_gives_exit_1(self, tmp_path):
        code = cli_run(["index", "--corpus", str(tmp_path / "missing.jsonl"),
                        "--out", str(tmp_path / "x.idx")])
        assert code == 1

    def test_invalid_params_give_exit_1(self, fixture_paths, tmp_path):
        code = cli_run(["rerank", "--variant", "rel_stat",  # missing template
                        "--run", str(tmp_path / "no.run"),
                        "--corpus", str(fixture_paths["corpus"]),
                        "--topics", str(fixture_paths["topics"]),
                        "--out", str(tmp_path / "o.run")])
        assert code == 1

    def test_dead_scorer_gives_exit_3(self, fixture_paths, staged_dirs, tmp_path):
        code = cli_run(["rerank", "--variant", "plain_ce",
                        "--run", str(staged_dirs / "fs.run"),
                        "--corpus", str(fixture_paths["corpus"]),
                        "--topics", str(fixture_paths["topics"]),
                        "--scorer", "http://127.0.0.1:9",
                        "--out", str(tmp_path / "o.run")])
        assert code == 3

    def test_env_var_overrides_scorer(self, fixture_paths, staged_dirs, tmp_path,
                                      monkeypatch):
        monkeypatch.setenv("RELSTAT_SCORER", "stub:7")
        code = cli_run(["rerank", "--variant", "plain_ce",
                        "--run", str(staged_dirs / "fs.run"),
                        "--corpus", str(fixture_paths["corpus"]),
                        "--topics", str(fixture_paths["topics"]),
                        "--scorer", "http://127.0.0.1:9",  # overridden by env
                        "--tag", "plain",
                        "--out", str(tmp_path / "env.run")])
        assert code == 0
        assert read_run(tmp_path / "env.run")

    def test_pipeline_subcommand(self, fixture_paths, tmp_path):
        config_path = tmp_path / "p.yaml"
        config_path.write_text(yaml.safe_dump({
            "corpus": str(fixture_paths["corpus"]),
            "evidence": str(fixture_paths["evidence"]),
            "topics": str(fixture_paths["topics"]),
            "qrels": str(fixture_paths["qrels"]),
            "output_dir": str(tmp_path / "out"),
            "scorer": "stub:7",
            "figures": False,
        }))
        assert cli_run(["pipeline", "--config", str(config_path)]) == 0
        assert (tmp_path / "out" / "report.json").is_file()
        # overrides via --set
        assert cli_run(["pipeline", "--config", str(config_path),
                        "--set", "tag=swept"]) == 0

    def test_sweep_subcommand(self, fixture_paths, staged_dirs, tmp_path):
        outdir = tmp_path / "sweep"
        code = cli_run([
            "sweep", "--run", str(staged_dirs / "fs.run"),
            "--cred", str(staged_dirs / "cred.jsonl"),
            "--corpus", str(fixture_paths["corpus"]),
            "--topics", str(fixture_paths["topics"]),
            "--qrels", str(fixture_paths["qrels"]),
            "--variants", "plain_ce,rel_stat",
            "--templates", "c1,c2",
            "--reprs", "decimal:4",
            "--scorer", "stub:7",
            "--no-figures",
            "--outdir", str(outdir)])
        assert code == 0
        runs = sorted(p.name for p in outdir.glob("*.run"))
        assert runs == ["plain_ce-decimal4.run", "rel_stat-c1-decimal4.run",
                        "rel_stat-c2-decimal4.run"]
        sweep = json.loads((outdir / "sweep.json").read_text())
        # 3 systems -> 3 pairs, 4 metrics each
        assert sweep["n_comparisons"] == 12
        assert len(sweep["results"]) == 12
