"""CLI for the toy alignment loop."""

from __future__ import annotations

import json

import click

from . import __version__
from .loop import PpoUpdateConfig, run_toy_alignment


@click.command()
@click.version_option(version=__version__)
@click.option("--service-url", required=True, help="Base URL of the scoring service.")
@click.option("--templates", "templates_path", type=click.Path(exists=True), required=True,
              help="JSONL file of score-request document payloads, one arm per line.")
@click.option("--steps", type=int, default=500, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--mode", type=click.Choice(["surface", "graph", "blended"]), default="graph", show_default=True)
@click.option("--epsilon", type=float, default=0.2, show_default=True)
@click.option("--gamma", type=float, default=1.0, show_default=True)
@click.option("--learning-rate", type=float, default=0.3, show_default=True)
@click.option("--batch-size", type=int, default=10, show_default=True)
@click.option("--early-stop", type=float, default=None, help="Stop once arm 0 exceeds this probability.")
@click.option("--log", "log_path", type=click.Path(), default="trajectory.csv", show_default=True)
@click.option("--responses", "responses_path", type=click.Path(), default=None,
              help="Optional JSONL dump of raw service responses keyed by SHA-256.")
def main(service_url, templates_path, steps, seed, mode, epsilon, gamma, learning_rate,
         batch_size, early_stop, log_path, responses_path) -> None:
    """Align a softmax bandit over fixed essay templates against a live service."""
    with open(templates_path, "r", encoding="utf-8") as fh:
        templates = [json.loads(line) for line in fh if line.strip()]
    cfg = PpoUpdateConfig(epsilon=epsilon, gamma=gamma, learning_rate=learning_rate)
    log = run_toy_alignment(
        service_url,
        templates,
        steps=steps,
        cfg=cfg,
        seed=seed,
        mode=mode,
        batch_size=batch_size,
        early_stop_probability=early_stop,
    )
    log.write_csv(log_path)
    if responses_path:
        log.write_responses(responses_path)
    probs = ", ".join(f"{p:.4f}" for p in log.final_probabilities)
    click.echo(f"{len(log.rows)} steps, final arm probabilities [{probs}] -> {log_path}")
    if log.non_convergence:
        click.echo("warning: early-stop threshold never reached", err=True)
        raise SystemExit(2)


if __name__ == "__main__":
    main()
