"""Command-line pipeline.

Subcommands: ingest, export-texts, import-vectors, summarize, lexicon,
train, eval, synth, report. Configuration is flat key=value text (see
--config) with CLI flags taking precedence; every effective value is printed
at startup. All randomness flows from the seeds in the config, so reruns are
byte-identical. Module errors exit nonzero with a one-line diagnostic.
"""

from __future__ import annotations

import csv
import dataclasses
import functools
import sys
from dataclasses import dataclass
from pathlib import Path

import click
import numpy as np

from . import corpus, embed, synth
from . import lexicon as lexicon_mod
from . import summarize as summarize_mod
from .errors import DepsumError
from .model import (
    EvalReport,
    FeatureExtractorConfig,
    LabeledSet,
    TrainConfig,
    evaluate,
    evaluate_logistic,
    fit_logistic,
    load_params,
    save_params,
    train as train_model,
    write_history_csv,
)


@dataclass
class PipelineConfig:
    n: int = 7
    lam: float = 0.7
    budget: int = 512
    backend: str = "hashed"
    dim: int = 768
    embed_seed: int = 0
    vectors: str = ""
    k: int = 2000
    gamma: float = 2.0
    class_weight_neg: float = 1.4
    class_weight_pos: float = 3.3
    learning_rate: float = 1e-3
    weight_decay: float = 1e-2
    epochs: int = 100
    batch_size: int = 16
    seed: int = 0
    l2_strength: float = 1e-3
    allow_any_n: bool = False


_CONFIG_ALIASES = {"lambda": "lam"}


def _coerce(field_type: type, raw: str):
    if field_type is bool:
        return raw.strip().lower() in ("1", "true", "yes", "on")
    return field_type(raw.strip())


def load_config_file(path: str | Path) -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise click.UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        entries[key.strip()] = value
    return entries


def resolve_config(config_path: str | None, overrides: dict) -> PipelineConfig:
    """Defaults, then config-file entries, then explicitly set CLI flags."""
    values = dataclasses.asdict(PipelineConfig())
    types = {f.name: type(getattr(PipelineConfig(), f.name)) for f in dataclasses.fields(PipelineConfig)}
    if config_path:
        for key, raw in load_config_file(config_path).items():
            name = _CONFIG_ALIASES.get(key, key)
            if name not in values:
                raise click.UsageError(f"unknown config key {key!r}")
            values[name] = _coerce(types[name], raw)
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    cfg = PipelineConfig(**values)
    if not cfg.allow_any_n and not (summarize_mod.N_RANGE[0] <= cfg.n <= summarize_mod.N_RANGE[1]):
        raise click.UsageError(
            f"n={cfg.n} outside {summarize_mod.N_RANGE}; pass --allow-any-n to override"
        )
    if not 0.0 <= cfg.lam <= 1.0:
        raise click.UsageError(f"lambda must be in [0, 1], got {cfg.lam}")
    if cfg.budget < cfg.n:
        raise click.UsageError(f"budget {cfg.budget} smaller than n {cfg.n}")
    return cfg


def echo_config(cfg: PipelineConfig) -> None:
    pairs = " ".join(f"{k}={v}" for k, v in dataclasses.asdict(cfg).items())
    click.echo(f"[config] {pairs}")


def make_backend(cfg: PipelineConfig) -> embed.EmbeddingBackend:
    if cfg.backend == "hashed":
        return embed.HashedBackend(dim=cfg.dim, seed=cfg.embed_seed)
    if cfg.backend == "file":
        if not cfg.vectors:
            raise click.UsageError("backend=file needs --vectors")
        with open(cfg.vectors, encoding="utf-8") as fh:
            vectors = embed.load_vectors(fh)
        return embed.FileBackend(vectors, name=f"file:{cfg.vectors}")
    raise click.UsageError(f"unknown backend {cfg.backend!r} (expected hashed or file)")


def pipeline_command(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DepsumError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


def _config_options(fn):
    fn = click.option("--config", "config_path", type=click.Path(exists=True), default=None,
                      help="key=value config file")(fn)
    fn = click.option("--n", type=int, default=None)(fn)
    fn = click.option("--lambda", "lam", type=float, default=None)(fn)
    fn = click.option("--budget", type=int, default=None)(fn)
    fn = click.option("--backend", type=str, default=None)(fn)
    fn = click.option("--dim", type=int, default=None)(fn)
    fn = click.option("--embed-seed", type=int, default=None)(fn)
    fn = click.option("--vectors", type=str, default=None)(fn)
    fn = click.option("--k", type=int, default=None)(fn)
    fn = click.option("--seed", type=int, default=None)(fn)
    fn = click.option("--allow-any-n", is_flag=True, default=None)(fn)
    return fn


def _train_options(fn):
    fn = click.option("--gamma", type=float, default=None)(fn)
    fn = click.option("--class-weight-neg", type=float, default=None)(fn)
    fn = click.option("--class-weight-pos", type=float, default=None)(fn)
    fn = click.option("--learning-rate", type=float, default=None)(fn)
    fn = click.option("--weight-decay", type=float, default=None)(fn)
    fn = click.option("--epochs", type=int, default=None)(fn)
    fn = click.option("--batch-size", type=int, default=None)(fn)
    fn = click.option("--l2-strength", type=float, default=None)(fn)
    return fn


@click.group()
def main() -> None:
    """Depression screening pipeline: summarize transcripts, build the lexicon, train."""


# ------------------------------------------------------------------ synth

@main.command("synth")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--sessions", type=int, default=189, show_default=True)
@click.option("--depressed-ratio", type=float, default=0.30, show_default=True)
@pipeline_command
def cmd_synth(out_dir: str, seed: int, sessions: int, depressed_ratio: float) -> None:
    """Generate a synthetic transcript corpus with a ground-truth manifest."""
    manifest = synth.generate_corpus(out_dir, seed, sessions, depressed_ratio)
    for split, counts in manifest["counts"].items():
        click.echo(f"{split}: depressed={counts['depressed']} not_depressed={counts['not_depressed']}")
    click.echo(f"wrote {manifest['n_sessions']} sessions to {out_dir}")


# ----------------------------------------------------------------- ingest

def _discover_transcripts(transcripts_dir: Path) -> dict[int, Path]:
    found: dict[int, Path] = {}
    for path in sorted(transcripts_dir.glob("*_TRANSCRIPT.*")):
        if path.suffix.lower() not in (".tsv", ".csv"):
            continue
        try:
            session_id = int(path.name.split("_", 1)[0])
        except ValueError:
            click.echo(f"warning: cannot parse session id from {path.name}", err=True)
            continue
        found[session_id] = path
    return found


@main.command("ingest")
@click.option("--transcripts", "transcripts_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--labels-train", type=click.Path(exists=True), default=None)
@click.option("--labels-dev", type=click.Path(exists=True), default=None)
@click.option("--labels-test", type=click.Path(exists=True), default=None)
@click.option("--out", "out_path", type=click.Path(), required=True)
@pipeline_command
def cmd_ingest(transcripts_dir: str, labels_train: str | None, labels_dev: str | None,
               labels_test: str | None, out_path: str) -> None:
    """Merge participant turns into documents and tag them with split + PHQ-8."""
    label_paths = {
        corpus.Split.TRAIN: labels_train,
        corpus.Split.DEV: labels_dev,
        corpus.Split.TEST: labels_test,
    }
    if all(p is None for p in label_paths.values()):
        raise click.UsageError("at least one labels file is required")

    meta: dict[int, corpus.SessionMeta] = {}
    for split, path in label_paths.items():
        if path is None:
            continue
        with open(path, encoding="utf-8", newline="") as fh:
            loaded = corpus.load_labels(fh, split)
        for session_id, m in loaded.items():
            if session_id in meta:
                raise DepsumError(f"session {session_id} appears in multiple label files")
            meta[session_id] = m

    transcript_paths = _discover_transcripts(Path(transcripts_dir))
    if not transcript_paths:
        click.echo("warning: no transcripts found; writing empty documents file", err=True)

    documents: list[corpus.Document] = []
    for session_id in sorted(meta):
        path = transcript_paths.get(session_id)
        if path is None:
            click.echo(f"warning: no transcript for labeled session {session_id}; skipped", err=True)
            continue
        with path.open(encoding="utf-8") as fh:
            turns = corpus.parse_transcript(fh)
        documents.append(corpus.build_document(session_id, turns))
    for session_id in sorted(set(transcript_paths) - set(meta)):
        click.echo(f"warning: transcript {session_id} has no label; skipped", err=True)

    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        count = corpus.write_documents(fh, documents, meta)

    kept = {d.session_id for d in documents}
    distribution = corpus.class_distribution([m for sid, m in meta.items() if sid in kept])
    for split in corpus.Split:
        c = distribution[split]
        ratio = f"{c.depressed_ratio:.3f}" if c.total else "n/a"
        click.echo(
            f"{split.value}: total={c.total} depressed={c.depressed} "
            f"not_depressed={c.not_depressed} depressed_ratio={ratio}"
        )
    click.echo(f"wrote {count} documents to {out_path}")


# ----------------------------------------------------------- embed exchange

@main.command("export-texts")
@click.option("--documents", "documents_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--scope", type=click.Choice(["all", "summarize", "lexicon"]), default="all",
              show_default=True)
@_config_options
@pipeline_command
def cmd_export_texts(documents_path: str, out_path: str, scope: str, config_path, **overrides) -> None:
    """Emit every text the pipeline would embed, for an external encoder."""
    cfg = resolve_config(config_path, overrides)
    echo_config(cfg)
    with open(documents_path, encoding="utf-8") as fh:
        pairs = corpus.read_documents(fh)
    texts: set[str] = set()
    if scope in ("all", "summarize"):
        for doc, _ in pairs:
            texts.update(summarize_mod.texts_for_document(doc, cfg.n))
    if scope in ("all", "lexicon"):
        scored = [(doc, meta.phq8_score) for doc, meta in pairs if meta.phq8_score is not None]
        if scored:
            stats = lexicon_mod.build_corpus_stats(scored)
            texts.update(stats.vocabulary)
        alerting = lexicon_mod.default_alerting_lexicon()
        for cat in lexicon_mod.SCORED_CATEGORIES:
            texts.update(alerting.categories[cat])
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        count = embed.write_texts(fh, texts)
    click.echo(f"wrote {count} texts to {out_path}")


@main.command("import-vectors")
@click.option("--vectors", "vectors_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--dim", type=int, default=None, help="expected dimensionality")
@pipeline_command
def cmd_import_vectors(vectors_path: str, out_path: str, dim: int | None) -> None:
    """Validate an external vectors file and write the normalized sorted copy."""
    with open(vectors_path, encoding="utf-8") as fh:
        vectors = embed.load_vectors(fh)
    if vectors and dim is not None:
        actual = next(iter(vectors.values())).shape[0]
        if actual != dim:
            raise DepsumError(f"vectors have dim {actual}, expected {dim}")
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        count = embed.save_vectors(fh, vectors)
    actual_dim = next(iter(vectors.values())).shape[0] if vectors else 0
    click.echo(f"imported {count} vectors (dim={actual_dim}) to {out_path}")


# -------------------------------------------------------------- summarize

@main.command("summarize")
@click.option("--documents", "documents_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@_config_options
@pipeline_command
def cmd_summarize(documents_path: str, out_path: str, config_path, **overrides) -> None:
    """Summarize every document under the token budget."""
    cfg = resolve_config(config_path, overrides)
    echo_config(cfg)
    backend = make_backend(cfg)
    with open(documents_path, encoding="utf-8") as fh:
        pairs = corpus.read_documents(fh)
    summaries = [
        summarize_mod.summarize_document(doc, backend, n=cfg.n, lam=cfg.lam, budget=cfg.budget)
        for doc, _ in pairs
    ]
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        count = summarize_mod.write_summaries(fh, summaries)
    max_tokens = max((s.token_count for s in summaries), default=0)
    click.echo(f"wrote {count} summaries to {out_path} (max token_count {max_tokens} <= {cfg.budget})")


# ----------------------------------------------------------------- lexicon

@main.command("lexicon")
@click.option("--documents", "documents_path", type=click.Path(exists=True), required=True)
@click.option("--summaries", "summaries_path", type=click.Path(exists=True), required=True)
@click.option("--out-dir", type=click.Path(), required=True)
@click.option("--aggregate", type=click.Choice(["mean", "sum"]), default="mean", show_default=True)
@_config_options
@pipeline_command
def cmd_lexicon(documents_path: str, summaries_path: str, out_dir: str, aggregate: str,
                config_path, **overrides) -> None:
    """Build the depression lexicon and word-score report; print summary coverage."""
    cfg = resolve_config(config_path, overrides)
    echo_config(cfg)
    backend = make_backend(cfg)
    with open(documents_path, encoding="utf-8") as fh:
        pairs = corpus.read_documents(fh)
    scored = [(doc, meta.phq8_score) for doc, meta in pairs if meta.phq8_score is not None]
    if not scored:
        raise DepsumError("lexicon needs at least one document with a PHQ-8 score")
    with open(summaries_path, encoding="utf-8") as fh:
        summaries = summarize_mod.read_summaries(fh)

    stats = lexicon_mod.build_corpus_stats(scored)
    rows = lexicon_mod.build_lexicon(
        stats, lexicon_mod.default_alerting_lexicon(), backend, k=cfg.k, aggregate=aggregate
    )
    ranked = lexicon_mod.ranked_word_scores(stats)
    cov = lexicon_mod.coverage(rows, summaries)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "lexicon.csv").open("w", encoding="utf-8", newline="\n") as fh:
        lexicon_mod.write_lexicon_csv(fh, rows)
    with (out / "wordscores.csv").open("w", encoding="utf-8", newline="\n") as fh:
        lexicon_mod.write_wordscores_csv(fh, ranked)
    click.echo(f"lexicon rows: {len(rows)} (pool k={cfg.k}, vocabulary {len(ranked)})")
    click.echo(f"coverage={cov:.4f} (desk-scale value; published reference point 0.75)")


# ------------------------------------------------------------- train / eval

def build_labeled_sets(
    pairs: list[tuple[corpus.Document, corpus.SessionMeta]],
    summaries: list[summarize_mod.Summary],
    backend: embed.EmbeddingBackend,
) -> dict[corpus.Split, LabeledSet]:
    """Embed each session's summary text; sessions without a PHQ-8 score are skipped."""
    summary_by_id = {s.source_session: s for s in summaries}
    grouped: dict[corpus.Split, list[tuple[np.ndarray, int]]] = {s: [] for s in corpus.Split}
    skipped = 0
    for doc, meta in sorted(pairs, key=lambda p: p[0].session_id):
        if meta.phq8_score is None:
            skipped += 1
            continue
        summary = summary_by_id.get(doc.session_id)
        if summary is None:
            raise DepsumError(f"no summary for session {doc.session_id}")
        vec = backend.embed(" ".join(summary.phrases))
        grouped[meta.split].append((vec, meta.binary_label.value))
    if skipped:
        click.echo(f"notice: {skipped} sessions without PHQ-8 score skipped", err=True)
    sets: dict[corpus.Split, LabeledSet] = {}
    for split, items in grouped.items():
        if items:
            x = np.stack([vec for vec, _ in items])
            y = np.array([label for _, label in items], dtype=np.int64)
        else:
            x = np.zeros((0, backend.dim), dtype=np.float64)
            y = np.zeros((0,), dtype=np.int64)
        sets[split] = LabeledSet(x, y)
    return sets


def _write_report(path: Path, n: int, rows: list[tuple[str, EvalReport]]) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["ngram", "method", "f1", "recall", "precision"])
        for method, report in rows:
            writer.writerow([n, method, repr(report.f1), repr(report.recall), repr(report.precision)])


def _echo_report(title: str, rows: list[tuple[str, EvalReport]]) -> None:
    for method, r in rows:
        click.echo(
            f"{title} {method}: f1={r.f1:.2f} recall={r.recall:.2f} precision={r.precision:.2f} "
            f"confusion=[[{r.tn},{r.fp}],[{r.fn},{r.tp}]]"
        )


@main.command("train")
@click.option("--documents", "documents_path", type=click.Path(exists=True), required=True)
@click.option("--summaries", "summaries_path", type=click.Path(exists=True), required=True)
@click.option("--out-dir", type=click.Path(), required=True)
@_config_options
@_train_options
@pipeline_command
def cmd_train(documents_path: str, summaries_path: str, out_dir: str, config_path, **overrides) -> None:
    """Train the classifier, pick the best dev-F1 checkpoint, report vs the baseline."""
    cfg = resolve_config(config_path, overrides)
    echo_config(cfg)
    backend = make_backend(cfg)
    with open(documents_path, encoding="utf-8") as fh:
        pairs = corpus.read_documents(fh)
    with open(summaries_path, encoding="utf-8") as fh:
        summaries = summarize_mod.read_summaries(fh)
    sets = build_labeled_sets(pairs, summaries, backend)
    train_set = sets[corpus.Split.TRAIN]
    dev_set = sets[corpus.Split.DEV]

    model_config = FeatureExtractorConfig(input_dim=cfg.dim)
    train_config = TrainConfig(
        gamma=cfg.gamma,
        class_weights=(cfg.class_weight_neg, cfg.class_weight_pos),
        learning_rate=cfg.learning_rate,
        weight_decay=cfg.weight_decay,
        epochs=cfg.epochs,
        batch_size=cfg.batch_size,
        seed=cfg.seed,
    )
    params, history = train_model(train_set, dev_set, model_config, train_config)
    baseline = fit_logistic(train_set, cfg.l2_strength)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_params(out / "params.npz", params, model_config)
    with (out / "history.csv").open("w", encoding="utf-8", newline="\n") as fh:
        write_history_csv(fh, history)

    dev_rows = [
        ("ours", evaluate(params, model_config, dev_set)),
        ("logistic", evaluate_logistic(baseline, dev_set)),
    ]
    _write_report(out / "report.csv", cfg.n, dev_rows)
    _echo_report("dev", dev_rows)

    test_set = sets[corpus.Split.TEST]
    if len(test_set) > 0:
        test_rows = [
            ("ours", evaluate(params, model_config, test_set)),
            ("logistic", evaluate_logistic(baseline, test_set)),
        ]
        _write_report(out / "test_report.csv", cfg.n, test_rows)
        _echo_report("test", test_rows)
    else:
        click.echo("notice: test metrics omitted (no labeled test sessions)")
    click.echo(f"artifacts in {out}")


@main.command("eval")
@click.option("--params", "params_path", type=click.Path(exists=True), required=True)
@click.option("--documents", "documents_path", type=click.Path(exists=True), required=True)
@click.option("--summaries", "summaries_path", type=click.Path(exists=True), required=True)
@click.option("--split", type=click.Choice(["train", "dev", "test"]), default="dev", show_default=True)
@_config_options
@pipeline_command
def cmd_eval(params_path: str, documents_path: str, summaries_path: str, split: str,
             config_path, **overrides) -> None:
    """Evaluate a saved params file on one split."""
    cfg = resolve_config(config_path, overrides)
    echo_config(cfg)
    backend = make_backend(cfg)
    params, model_config = load_params(params_path)
    if model_config.input_dim != backend.dim:
        raise DepsumError(
            f"params expect dim {model_config.input_dim}, backend provides {backend.dim}"
        )
    with open(documents_path, encoding="utf-8") as fh:
        pairs = corpus.read_documents(fh)
    with open(summaries_path, encoding="utf-8") as fh:
        summaries = summarize_mod.read_summaries(fh)
    sets = build_labeled_sets(pairs, summaries, backend)
    dataset = sets[corpus.Split(split)]
    if len(dataset) == 0:
        raise DepsumError(f"no labeled sessions in split {split!r}")
    _echo_report(split, [("ours", evaluate(params, model_config, dataset))])


@main.command("report")
@click.option("--run-dir", type=click.Path(exists=True, file_okay=False), required=True)
@pipeline_command
def cmd_report(run_dir: str) -> None:
    """Pretty-print the report CSVs from a training run."""
    printed = False
    for name, title in (("report.csv", "dev"), ("test_report.csv", "test")):
        path = Path(run_dir) / name
        if not path.exists():
            continue
        printed = True
        with path.open(encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            click.echo(f"-- {title} --")
            click.echo(f"{'ngram':>5} {'method':<10} {'f1':>5} {'recall':>6} {'precision':>9}")
            for row in reader:
                click.echo(
                    f"{row['ngram']:>5} {row['method']:<10} {float(row['f1']):>5.2f} "
                    f"{float(row['recall']):>6.2f} {float(row['precision']):>9.2f}"
                )
    if not printed:
        raise DepsumError(f"no report.csv found under {run_dir}")


if __name__ == "__main__":
    main()
