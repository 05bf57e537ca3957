"""Regenerate every result table into ``scripts/data/``.

Usage::

    # Run all tables
    python scripts/reproduce_tables.py

    # Only the tournament type tables, with fewer draws
    python scripts/reproduce_tables.py --table types --samples 100000

    # Custom data directory
    python scripts/reproduce_tables.py --data-dir /path/to/data
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click
from loguru import logger

from marginsim.cli import run
from marginsim.models import Command, RunConfig

DATA_DIR = Path(__file__).resolve().parent / "data"

# Candidate counts for the winning-set size tables.
WINNING_SET_CANDIDATES = (3, 4, 5, 6, 7, 8, 9, 10, 20)


def _emit(config: RunConfig, data_dir: Path, name: str) -> None:
    target = data_dir / name
    run(config.model_copy(update={"output_path": str(target)}))


@click.command()
@click.option(
    "--table",
    type=click.Choice(["types", "exact", "winning", "coverage", "condorcet", "all"]),
    default="all",
    help="Which table to regenerate.",
)
@click.option("--samples", type=click.IntRange(min=1), default=1_000_000)
@click.option("--seed", type=int, default=42)
@click.option("--shards", type=click.IntRange(min=1), default=None)
@click.option(
    "--data-dir",
    type=click.Path(path_type=Path),
    default=None,
    help="Override the output directory.",
)
def main(
    table: str, samples: int, seed: int, shards: int | None, data_dir: Path | None
) -> None:
    """Regenerate the result tables."""
    logger.remove()
    logger.add(
        sys.stderr, level="INFO", format="{time:HH:mm:ss} | {level:<7} | {message}"
    )
    out = data_dir or DATA_DIR
    out.mkdir(parents=True, exist_ok=True)
    common = {"samples": samples, "seed": seed, "shards": shards or os.cpu_count() or 1}

    if table in ("types", "all"):
        logger.info("=" * 60)
        logger.info("Tournament type probabilities")
        logger.info("=" * 60)
        _emit(RunConfig(command=Command.EXACT_ORTHANT3), out, "orthant3.csv")
        for ell in (3, 4, 5):
            config = RunConfig(command=Command.TYPE_PROBS, ell=ell, **common)
            _emit(config, out, f"type_probs_{ell}.csv")

    if table in ("exact", "all"):
        logger.info("=" * 60)
        logger.info("Exact finite-voter probabilities")
        logger.info("=" * 60)
        for ell in (3, 4, 5):
            config = RunConfig(command=Command.EXACT_TABLE1, ell=ell)
            _emit(config, out, f"exact_{ell}.csv")

    if table in ("winning", "all"):
        logger.info("=" * 60)
        logger.info("Winning-set sizes")
        logger.info("=" * 60)
        for ell in WINNING_SET_CANDIDATES:
            config = RunConfig(command=Command.WINNING_SETS, ell=ell, **common)
            _emit(config, out, f"winning_sets_{ell}.csv")

    if table in ("coverage", "all"):
        logger.info("=" * 60)
        logger.info("Qualitative margin graph coverage")
        logger.info("=" * 60)
        for ell in (3, 4):
            config = RunConfig(command=Command.QUALITATIVE_COVERAGE, ell=ell, **common)
            _emit(config, out, f"coverage_{ell}.csv")

    if table in ("condorcet", "all"):
        logger.info("=" * 60)
        logger.info("Condorcet winner probabilities")
        logger.info("=" * 60)
        for ell in (3, 4, 5, 6, 7):
            config = RunConfig(command=Command.CONDORCET_PROB, ell=ell, **common)
            _emit(config, out, f"condorcet_{ell}.csv")

    logger.info("All tables written.")


if __name__ == "__main__":
    main()
