"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. The end-to-end criteria drive the real CLI on a full-size synthetic
corpus (189 sessions) with default hyperparameters.
"""

import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from conftest import finite_difference_gradcheck
from test_lexicon import RPHQ_TABLE, brute_force_word_score
from test_summarize import oracle_mmr

from depsum.cli import main
from depsum.corpus import Document, read_documents
from depsum.embed import HashedBackend
from depsum.lexicon import (
    build_corpus_stats,
    candidate_words,
    coverage,
    default_alerting_lexicon,
    build_lexicon,
    ranked_word_scores,
    rphq,
    word_score,
)
from depsum.model import (
    ConvSpec,
    FeatureExtractorConfig,
    focal_loss,
    init_params,
    report_from_confusion,
)
from depsum.summarize import (
    CandidatePhrase,
    MmrParams,
    chunk_document,
    mmr_select,
    read_summaries,
    summarize_document,
)
from depsum.tokenize import tweet_tokenize

SEED = 42


def _report(criterion: int, ok: bool, elapsed: float, limit: float, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[acceptance] criterion {criterion:2d}: {status} ({elapsed:6.2f}s < {limit:.0f}s) {detail}")
    assert ok, f"criterion {criterion} failed: {detail}"
    assert elapsed < limit, f"criterion {criterion} exceeded {limit}s ({elapsed:.1f}s)"


@dataclass
class PipelineRun:
    root: Path
    elapsed: float


def _run_pipeline(root: Path) -> PipelineRun:
    """synth -> ingest -> summarize -> train with spec defaults, timed."""
    runner = CliRunner()
    t0 = time.time()
    steps = [
        ["synth", "--out", str(root / "corpus"), "--seed", str(SEED), "--sessions", "189"],
        [
            "ingest",
            "--transcripts", str(root / "corpus" / "transcripts"),
            "--labels-train", str(root / "corpus" / "labels_train.csv"),
            "--labels-dev", str(root / "corpus" / "labels_dev.csv"),
            "--labels-test", str(root / "corpus" / "labels_test.csv"),
            "--out", str(root / "documents.jsonl"),
        ],
        ["summarize", "--documents", str(root / "documents.jsonl"),
         "--out", str(root / "summaries.jsonl")],
        ["train", "--documents", str(root / "documents.jsonl"),
         "--summaries", str(root / "summaries.jsonl"), "--out-dir", str(root / "run")],
    ]
    for args in steps:
        result = runner.invoke(main, args)
        assert result.exit_code == 0, f"{args[0]} failed:\n{result.output}"
    return PipelineRun(root=root, elapsed=time.time() - t0)


@pytest.fixture(scope="module")
def e2e(tmp_path_factory) -> PipelineRun:
    return _run_pipeline(tmp_path_factory.mktemp("e2e"))


@pytest.fixture(scope="module")
def e2e_repeat(tmp_path_factory) -> PipelineRun:
    return _run_pipeline(tmp_path_factory.mktemp("e2e_repeat"))


def _read_report(path: Path) -> dict[str, dict[str, float]]:
    rows = {}
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    for line in lines[1:]:
        values = dict(zip(header, line.split(",")))
        rows[values["method"]] = {k: float(values[k]) for k in ("f1", "recall", "precision")}
    return rows


def test_c01_rphq_table_conformance():
    t0 = time.time()
    ok = all(rphq(phq) == expected for phq, expected in RPHQ_TABLE.items() if phq <= 23)
    ok = ok and rphq(24) == -15  # linear extension beyond the published rows
    _report(1, ok, time.time() - t0, 1.0, "24 published rows exact + PHQ 24 extension")


def test_c02_mmr_oracle_equivalence():
    t0 = time.time()
    rng = np.random.default_rng(2024)
    lambdas = [0.0, 0.3, 0.7, 1.0]
    mismatches = 0
    for trial in range(200):
        size = int(rng.integers(1, 13))
        dim = int(rng.integers(2, 9))
        doc = rng.normal(size=dim)
        embs = [rng.normal(size=dim) for _ in range(size)]
        lam = lambdas[trial % 4]
        top_k = int(rng.integers(1, size + 1))
        cands = [
            CandidatePhrase(f"p{i}", 1, np.asarray(e), float(e @ doc))
            for i, e in enumerate(embs)
        ]
        got = [int(c.text[1:]) for c in mmr_select(cands, doc, MmrParams(lam, top_k))]
        if got != oracle_mmr(embs, doc, lam, top_k):
            mismatches += 1
    _report(2, mismatches == 0, time.time() - t0, 10.0,
            f"200 candidate sets, every greedy pick exact ({mismatches} mismatches)")


def test_c03_word_score_oracle():
    t0 = time.time()
    rng = np.random.default_rng(7)
    vocab = [f"w{i}" for i in range(25)]
    worst = 0.0
    signs_ok = True
    for trial in range(50):
        phqs = [int(rng.integers(0, 25)) for _ in range(10)]
        phqs[0] = int(rng.integers(0, 10))   # force a non-depressed doc
        phqs[1] = int(rng.integers(10, 25))  # force a depressed doc
        token_docs = [
            [vocab[int(rng.integers(0, len(vocab)))] for _ in range(int(rng.integers(3, 50)))]
            for _ in range(10)
        ]
        # planted one-class words for the sign property
        for i, p in enumerate(phqs):
            if p >= 10:
                token_docs[i] = token_docs[i] + ["dep-only"]
            else:
                token_docs[i] = token_docs[i] + ["non-only"]
        docs = [Document(i + 1, (" ".join(t),)) for i, t in enumerate(token_docs)]
        stats = build_corpus_stats(list(zip(docs, phqs)), policy=None)
        for word in vocab + ["dep-only", "non-only"]:
            delta = abs(word_score(word, stats) - brute_force_word_score(word, token_docs, phqs))
            worst = max(worst, delta)
        signs_ok = signs_ok and word_score("dep-only", stats) < 0 < word_score("non-only", stats)
    ok = worst <= 1e-9 and signs_ok
    _report(3, ok, time.time() - t0, 10.0,
            f"50 corpora, worst |delta|={worst:.2e}, sign properties {'held' if signs_ok else 'VIOLATED'}")


def test_c04_focal_loss_reductions():
    t0 = time.time()
    rng = np.random.default_rng(11)
    weights = (1.4, 3.3)
    worst = 0.0
    for _ in range(1000):
        logits = rng.normal(size=2) * 5
        label = int(rng.integers(0, 2))
        p = np.exp(logits - np.logaddexp(logits[0], logits[1]))
        expected = -weights[label] * math.log(p[label])
        worst = max(worst, abs(focal_loss(logits, label, 0.0, weights) - expected))
    closed_form = abs(focal_loss(np.zeros(2), 0, 2.0, (1.0, 1.0)) - 0.25 * math.log(2))
    ok = worst <= 1e-12 and closed_form <= 1e-9
    _report(4, ok, time.time() - t0, 5.0,
            f"gamma=0 worst |delta|={worst:.2e}; p_t=0.5 case |delta|={closed_form:.2e}")


def test_c05_gradient_check_all_layer_types():
    t0 = time.time()
    config = FeatureExtractorConfig(
        input_dim=12, fc_dims=(24,), conv1=ConvSpec(3, 3), conv2=ConvSpec(5, 2),
        dropout_p=0.0, head_hidden=5,
    )
    rng = np.random.default_rng(42)
    params = init_params(config, rng)
    x = rng.normal(size=(4, 12))
    y = np.array([0, 1, 1, 0])
    worst, at = finite_difference_gradcheck(params, config, x, y, 2.0, (1.4, 3.3))
    n_coords = sum(t.size for k, t in params.tensors.items() if not k.endswith(("running_mean", "running_var")))
    _report(5, worst <= 1e-4, time.time() - t0, 60.0,
            f"{n_coords} coords over fc/layer-norm/batch-norm/conv1/conv2/gelu/max-pool/avg-pool; "
            f"worst rel err {worst:.2e} at {at}")


def test_c06_budget_safety_fuzz():
    t0 = time.time()
    rng = np.random.default_rng(3)
    backend = HashedBackend(dim=16, seed=0)
    over_budget = 0
    partition_breaks = 0
    for trial in range(500):
        target = int(rng.integers(0, 3001))
        sentences = []
        remaining = target
        while remaining > 0:
            k = min(remaining, int(rng.integers(3, 25)))
            sentences.append(" ".join(f"w{rng.integers(0, 50)}" for _ in range(k)))
            remaining -= k
        n = 6 + trial % 4
        chunks = chunk_document(sentences, 480)
        doc_tokens = [t for s in sentences for t in tweet_tokenize(s)]
        chunk_tokens = [t for c in chunks for t in tweet_tokenize(c)]
        if chunk_tokens != doc_tokens or any(len(tweet_tokenize(c)) > 480 for c in chunks):
            partition_breaks += 1
        summary = summarize_document(sentences, backend, n=n, budget=512)
        if summary.token_count > 512:
            over_budget += 1
    ok = over_budget == 0 and partition_breaks == 0
    _report(6, ok, time.time() - t0, 30.0,
            f"500 docs (0..3000 tokens, n in 6..9): {over_budget} over budget, "
            f"{partition_breaks} partition breaks")


def test_c07_synthetic_end_to_end(e2e):
    rows = _read_report(e2e.root / "run" / "report.csv")
    ours, logistic = rows["ours"]["f1"], rows["logistic"]["f1"]
    ok = ours >= 0.90 and ours >= logistic
    _report(7, ok, e2e.elapsed, 300.0,
            f"dev F1 ours={ours:.3f} (>= 0.90), logistic={logistic:.3f} (ours >= logistic)")


def test_c08_lexicon_coverage_pipeline(e2e):
    t0 = time.time()
    with (e2e.root / "documents.jsonl").open() as fh:
        pairs = read_documents(fh)
    scored = [(doc, meta.phq8_score) for doc, meta in pairs if meta.phq8_score is not None]
    stats = build_corpus_stats(scored)
    manifest = json.loads((e2e.root / "corpus" / "manifest.json").read_text())
    planted = manifest["planted_depressed_words"]

    scores = {e.word: e.ws for e in ranked_word_scores(stats)}
    negative = [w for w in planted if scores.get(w, 0.0) < 0]
    pool = {e.word for e in candidate_words(stats, k=2000)}
    in_pool = [w for w in planted if w in pool]

    backend = HashedBackend(dim=768, seed=0)
    rows = build_lexicon(stats, default_alerting_lexicon(), backend, k=2000)
    row_ws = {r.word: r.ws for r in rows}
    planted_in_rows_negative = all(row_ws[w] < 0 for w in planted if w in row_ws)

    with (e2e.root / "summaries.jsonl").open() as fh:
        summaries = read_summaries(fh)
    cov = coverage(rows, summaries)

    ok = (
        len(negative) == len(planted)
        and len(in_pool) >= 0.9 * len(planted)
        and planted_in_rows_negative
    )
    _report(8, ok, time.time() - t0, 60.0,
            f"planted words: {len(negative)}/{len(planted)} negative WS, "
            f"{len(in_pool)}/{len(planted)} in candidate pool; "
            f"coverage={cov:.3f} (published reference point 0.75, not asserted)")


def test_c09_determinism(e2e, e2e_repeat):
    t0 = time.time()
    same_report = (
        (e2e.root / "run" / "report.csv").read_bytes()
        == (e2e_repeat.root / "run" / "report.csv").read_bytes()
    )
    same_history = (
        (e2e.root / "run" / "history.csv").read_bytes()
        == (e2e_repeat.root / "run" / "history.csv").read_bytes()
    )
    _report(9, same_report and same_history, time.time() - t0, 60.0,
            f"report.csv identical={same_report}, history.csv identical={same_history}")


def test_c10_metric_conformance():
    t0 = time.time()
    report = report_from_confusion(((0, 4), (1, 11)))  # TP=11, FN=1, FP=4
    ok = (
        round(report.recall, 2) == 0.92
        and round(report.precision, 2) == 0.73
        and round(report.f1, 2) == 0.81
    )
    _report(10, ok, time.time() - t0, 1.0,
            f"TP=11 FN=1 FP=4 -> recall={report.recall:.2f} precision={report.precision:.2f} f1={report.f1:.2f}")
