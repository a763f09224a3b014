"""Command-line interface: corpus validation, motif/classifier training,
batch scoring, the HTTP service, and report emission."""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from . import __version__
from .analysis import distribution_diff, motif_trend, pearson
from .classifier import LabeledExample, TrainConfig, load_model, save_model, train
from .config import Settings, load_settings
from .distinctive import aggregate, compute_distinctive, load_motif_set, save_motif_set
from .documents import AuthorLabel, iter_documents, parse_document
from .errors import EngineError
from .evaluator import EvaluatorClient, EvaluatorClientConfig
from .motifs import document_motif_counts
from .rewards import RewardEngine
from .service import ScoreDocument, score_one_document, run_server


def _engine_from_settings(settings: Settings) -> RewardEngine:
    motif_set = load_motif_set(settings.motifs) if settings.motifs else None
    model = load_model(settings.model) if settings.model else None
    client = None
    if settings.endpoint:
        client = EvaluatorClient(
            EvaluatorClientConfig(
                endpoint=settings.endpoint,
                model=settings.evaluator_model,
                timeout=settings.timeout,
                max_retries=settings.max_retries,
                max_in_flight=settings.max_in_flight,
                temperature=settings.temperature,
            )
        )
    return RewardEngine(
        motif_set=motif_set,
        model=model,
        evaluator_client=client,
        alpha=settings.alpha,
        dense_denominator=settings.dense_denominator,
        blend_weight=settings.blend_weight,
    )


_shared_options = [
    click.option("--config", "config_path", type=click.Path(exists=True), default=None, help="Key-value config file; flags win."),
    click.option("--mode", type=click.Choice(["surface", "graph", "blended"]), default=None),
    click.option("--model", type=click.Path(), default=None, help="Classifier model file."),
    click.option("--motifs", type=click.Path(), default=None, help="Distinctive motif set file."),
    click.option("--desired-length", type=int, default=None),
    click.option("--alpha", type=float, default=None, help="Length penalty factor."),
    click.option("--endpoint", type=str, default=None, help="Evaluator endpoint URL."),
    click.option("--port", type=int, default=None),
    click.option("--k", type=int, default=None, help="Motif size."),
]


def shared_options(fn):
    for option in reversed(_shared_options):
        fn = option(fn)
    return fn


@click.group()
@click.version_option(version=__version__)
def main() -> None:
    """Discourse-structure reward engine."""


@main.command()
@click.argument("corpus", type=click.Path(exists=True))
@click.option("--no-band", is_flag=True, help="Skip the 400-512 token band check on non-final segments.")
def validate(corpus: str, no_band: bool) -> None:
    """Schema-check a line-delimited corpus file."""
    band = None if no_band else (400, 512)
    ok = 0
    failed = 0
    with open(corpus, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                parse_document(line, token_band=band)
                ok += 1
            except EngineError as exc:
                failed += 1
                click.echo(f"line {lineno}: {type(exc).__name__}: {exc}", err=True)
    click.echo(f"{ok} valid, {failed} invalid")
    if failed:
        sys.exit(1)


@main.command()
@click.argument("corpus", type=click.Path(exists=True))
@click.option("-o", "--output", type=click.Path(), required=True, help="Motif set file to write.")
@click.option("--k", type=int, default=3, show_default=True)
def distinctive(corpus: str, output: str, k: int) -> None:
    """Select human-distinctive motifs from a labeled corpus."""
    human, machine = [], []
    with open(corpus, "r", encoding="utf-8") as fh:
        for doc in iter_documents(fh, token_band=None):
            counts = document_motif_counts(doc, k)
            if doc.author_label == AuthorLabel.HUMAN:
                human.append(counts)
            elif doc.author_label == AuthorLabel.MACHINE:
                machine.append(counts)
    dset = compute_distinctive(human, machine, k)
    save_motif_set(dset, output)
    click.echo(
        f"vocabulary {len(dset.vocabulary)}, distinctive {len(dset.distinctive)}, "
        f"threshold {dset.threshold:.6g} -> {output}"
    )


@main.command(name="train")
@click.argument("corpus", type=click.Path(exists=True))
@click.option("--motifs", type=click.Path(exists=True), required=True)
@click.option("-o", "--output", type=click.Path(), required=True, help="Model file to write.")
@click.option("--epochs", type=int, default=500, show_default=True)
@click.option("--learning-rate", type=float, default=0.5, show_default=True)
@click.option("--l2", type=float, default=1e-4, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def train_cmd(corpus: str, motifs: str, output: str, epochs: int, learning_rate: float, l2: float, seed: int) -> None:
    """Train the authorship classifier on a labeled corpus."""
    dset = load_motif_set(motifs)
    examples = []
    with open(corpus, "r", encoding="utf-8") as fh:
        for doc in iter_documents(fh, token_band=None):
            if doc.author_label == AuthorLabel.UNKNOWN:
                continue
            vector = aggregate([document_motif_counts(doc, dset.k)], dset)
            examples.append(
                LabeledExample(vector=vector, label=1 if doc.author_label == AuthorLabel.HUMAN else 0)
            )
    config = TrainConfig(epochs=epochs, learning_rate=learning_rate, l2=l2, seed=seed)
    model = train(examples, config)
    save_model(model, output)
    click.echo(f"trained on {len(examples)} docs, final loss {model.final_loss:.6f} -> {output}")


@main.command()
@click.argument("input_file", type=click.Path(exists=True))
@click.option("-o", "--output", type=click.Path(), default="-", help="Output JSONL ('-' = stdout).")
@shared_options
def score(input_file: str, output: str, config_path, mode, model, motifs, desired_length, alpha, endpoint, port, k) -> None:
    """Score a corpus file; one reward record per input document."""
    settings = load_settings(
        config_path,
        mode=mode,
        model=model,
        motifs=motifs,
        desired_length=desired_length,
        alpha=alpha,
        endpoint=endpoint,
        port=port,
        k=k,
    )
    engine = _engine_from_settings(settings)
    out = sys.stdout if output == "-" else open(output, "w", encoding="utf-8")
    try:
        with open(input_file, "r", encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                record = json.loads(line)
                entry = ScoreDocument(**record)
                result = score_one_document(engine, settings, entry, settings.mode, None)
                out.write(json.dumps(result, ensure_ascii=False))
                out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()


@main.command()
@shared_options
def serve(config_path, mode, model, motifs, desired_length, alpha, endpoint, port, k) -> None:
    """Run the batch scoring HTTP service."""
    settings = load_settings(
        config_path,
        mode=mode,
        model=model,
        motifs=motifs,
        desired_length=desired_length,
        alpha=alpha,
        endpoint=endpoint,
        port=port,
        k=k,
    )
    engine = _engine_from_settings(settings)
    click.echo(f"serving on {settings.host}:{settings.port} (mode={settings.mode})")
    run_server(engine, settings)


@main.group()
def report() -> None:
    """Emit CSV reports."""


@report.command()
@click.argument("corpus", type=click.Path(exists=True))
@click.option("--motifs", type=click.Path(exists=True), required=True)
@click.option("--batch-size", type=int, default=8, show_default=True)
@click.option("-o", "--output", type=click.Path(), default="-")
def trend(corpus: str, motifs: str, batch_size: int, output: str) -> None:
    """Distinctive-motif proportion per batch of consecutive documents."""
    dset = load_motif_set(motifs)
    batches: list[list] = []
    with open(corpus, "r", encoding="utf-8") as fh:
        for i, doc in enumerate(iter_documents(fh, token_band=None)):
            if i % batch_size == 0:
                batches.append([])
            batches[-1].append(document_motif_counts(doc, dset.k))
    series = motif_trend(batches, dset)
    out = sys.stdout if output == "-" else open(output, "w", newline="", encoding="utf-8")
    try:
        writer = csv.writer(out)
        writer.writerow(["batch_index", "distinctive_proportion", "empty"])
        for point in series.points:
            writer.writerow([point.batch_index, repr(point.proportion), int(point.empty)])
    finally:
        if out is not sys.stdout:
            out.close()


@report.command()
@click.argument("before", type=click.Path(exists=True))
@click.argument("after", type=click.Path(exists=True))
@click.option("--motifs", type=click.Path(exists=True), required=True)
@click.option("-o", "--output", type=click.Path(), default="-")
def diff(before: str, after: str, motifs: str, output: str) -> None:
    """Motif distribution difference between two corpora."""
    dset = load_motif_set(motifs)

    def corpus_vector(path: str):
        with open(path, "r", encoding="utf-8") as fh:
            counts = [document_motif_counts(d, dset.k) for d in iter_documents(fh, token_band=None)]
        return aggregate(counts, dset)

    rows = distribution_diff(corpus_vector(before), corpus_vector(after), dset)
    out = sys.stdout if output == "-" else open(output, "w", newline="", encoding="utf-8")
    try:
        writer = csv.writer(out)
        writer.writerow(["motif", "before", "after", "delta"])
        for row in rows:
            writer.writerow([row.key, repr(row.before), repr(row.after), repr(row.delta)])
    finally:
        if out is not sys.stdout:
            out.close()


@main.command()
@click.argument("pairs_file", type=click.Path(exists=True))
def corr(pairs_file: str) -> None:
    """Pearson correlation of a two-column (comma or whitespace) file."""
    xs, ys = [], []
    with open(pairs_file, "r", encoding="utf-8") as fh:
        for line in fh:
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.replace(",", " ").split()
            if len(parts) != 2:
                raise click.ClickException(f"expected two columns, got {stripped!r}")
            xs.append(float(parts[0]))
            ys.append(float(parts[1]))
    click.echo(f"pearson r = {pearson(xs, ys)!r}")


if __name__ == "__main__":
    main()
