"""Command-line interface for marginsim.

Every command is a seeded batch job that writes CSV or JSON (JSONL for
``sample-margins``) with its provenance embedded:

- ``marginsim covariance``: Sigma and Gamma, exact and as floats
- ``marginsim eigen``: eigenvalues and dimensions of the cycle/cut split
- ``marginsim sample-margins``: CLT or exact-ballot margin vectors
- ``marginsim type-probs``: probability of every tournament type
- ``marginsim exact-orthant3``: closed-form 3-candidate probabilities
- ``marginsim exact-table1``: exact finite-voter Condorcet probabilities
- ``marginsim winning-sets``: winning-set sizes of Minimax / Split Cycle
- ``marginsim qualitative-coverage``: qualitative margin graphs observed
- ``marginsim levelset``: points on the ellipsoid ``x^T Gamma x = 1``
- ``marginsim condorcet-prob``: Condorcet winner / transitive majority odds

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import os
import sys
from collections.abc import Callable, Iterator, Sequence
from typing import Any

import click
from loguru import logger
from pydantic import ValidationError

from marginsim._export import (
    HISTOGRAM_COLUMNS,
    TYPE_TABLE_COLUMNS,
    histogram_rows,
    type_table_rows,
    write_csv,
    write_json,
    write_jsonl,
)
from marginsim.config import (
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    EXACT_ENUMERATION_BUDGET,
    MAX_BALLOT_TYPES,
    MAX_CANDIDATES,
    MIN_CANDIDATES,
)
from marginsim.models import (
    Command,
    MarginsimError,
    OutputFormat,
    RunConfig,
    UnsupportedSizeError,
    VotingMethod,
)

EXIT_USAGE = 1
EXIT_RUNTIME = 2


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Enable debug logging.")
def cli(verbose: bool) -> None:
    """Impartial Culture margin graph simulations."""
    level = "DEBUG" if verbose else "INFO"
    logger.remove()
    logger.add(
        sys.stderr,
        level=level,
        format="{time:HH:mm:ss} | {level:<7} | {message}",
    )


# ---------------------------------------------------------------------------
# Shared options
# ---------------------------------------------------------------------------


def _odd_voters(
    ctx: click.Context, param: click.Parameter, value: int | None
) -> int | None:
    if value is not None and (value < 1 or value % 2 == 0):
        msg = f"voters must be a positive odd number, got {value}"
        raise click.BadParameter(msg, ctx=ctx, param=param)
    return value


_OPTIONS: dict[str, Callable[[Callable[..., Any]], Callable[..., Any]]] = {
    "ell": click.option(
        "--candidates",
        "-c",
        "ell",
        default=3,
        show_default=True,
        type=click.IntRange(MIN_CANDIDATES, MAX_CANDIDATES),
        help="Number of candidates.",
    ),
    "samples": click.option(
        "--samples",
        "-n",
        default=DEFAULT_SAMPLES,
        show_default=True,
        type=click.IntRange(min=1),
        help="Monte Carlo draws (points for levelset).",
    ),
    "seed": click.option(
        "--seed",
        default=DEFAULT_SEED,
        show_default=True,
        type=click.IntRange(0, 2**64 - 1),
        help="Master seed.",
    ),
    "shards": click.option(
        "--shards",
        default=None,
        type=click.IntRange(min=1),
        help="Independent RNG streams.  [default: CPU count]",
    ),
    "voters": click.option(
        "--voters",
        default=None,
        type=int,
        callback=_odd_voters,
        help="Odd number of voters for exact sampling or enumeration.",
    ),
    "method": click.option(
        "--method",
        "-m",
        default=None,
        type=click.Choice([m.value for m in VotingMethod.all()]),
        help="Voting method (default: all).",
    ),
}

_OUTPUT_OPTION = click.option(
    "--output",
    "-o",
    "output_path",
    default=None,
    type=click.Path(dir_okay=False),
    help="Output file (default: stdout).",
)

_FORMAT_OPTION = click.option(
    "--format",
    "-f",
    "fmt",
    default=OutputFormat.CSV.value,
    show_default=True,
    type=click.Choice([f.value for f in OutputFormat]),
    help="Output format.",
)


def _job(
    command: Command, *names: str, formats: bool = True
) -> Callable[[Callable[..., Any]], click.Command]:
    """Register a batch command taking the named shared options plus output ones.

    ``formats=False`` drops ``--format`` for commands with a single output format.
    """

    def decorator(f: Callable[..., Any]) -> click.Command:
        if formats:
            f = _FORMAT_OPTION(f)
        f = _OUTPUT_OPTION(f)
        for name in reversed(names):
            f = _OPTIONS[name](f)
        return cli.command(name=command.value, help=f.__doc__)(f)

    return decorator


def build_config(command: Command, params: dict[str, Any]) -> RunConfig:
    """Turn parsed click parameters into a :class:`RunConfig`."""
    shards = params.get("shards")
    if shards is None:
        # Commands without --shards run on a single stream.
        shards = (os.cpu_count() or 1) if "shards" in params else 1
    method = params.get("method")
    return RunConfig(
        command=command,
        ell=params.get("ell", 3),
        samples=params.get("samples", DEFAULT_SAMPLES),
        seed=params.get("seed", DEFAULT_SEED),
        shards=shards,
        voters=params.get("voters"),
        method=VotingMethod(method) if method else None,
        output_path=params.get("output_path"),
        format=OutputFormat(params.get("fmt", OutputFormat.CSV.value)),
    )


def parse_args(argv: Sequence[str]) -> RunConfig:
    """Parse ``[command, *options]`` into a validated config without running it.

    Raises:
        click.UsageError: On an unknown command or invalid option.
    """
    args = list(argv)
    if not args:
        msg = "Missing command."
        raise click.UsageError(msg)
    ctx = click.Context(cli, info_name="marginsim")
    command = cli.get_command(ctx, args[0])
    if command is None:
        msg = f"No such command {args[0]!r}."
        raise click.UsageError(msg, ctx=ctx)
    sub = command.make_context(args[0], args[1:], parent=ctx)
    return build_config(Command(args[0]), sub.params)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


@_job(Command.COVARIANCE, "ell")
def covariance(**params: Any) -> None:
    """Emit Sigma and its inverse Gamma with exact rational entries."""
    run(build_config(Command.COVARIANCE, params))


@_job(Command.EIGEN, "ell")
def eigen(**params: Any) -> None:
    """Emit the two eigenvalues of Sigma and their eigenspace dimensions."""
    run(build_config(Command.EIGEN, params))


@_job(Command.SAMPLE_MARGINS, "ell", "samples", "seed", "voters", formats=False)
def sample_margins(**params: Any) -> None:
    """Emit sampled margin vectors as JSON lines (exact ballots with --voters)."""
    run(build_config(Command.SAMPLE_MARGINS, params))


@_job(Command.TYPE_PROBS, "ell", "samples", "seed", "shards")
def type_probs(**params: Any) -> None:
    """Estimate the probability of every tournament type (up to 5 candidates)."""
    run(build_config(Command.TYPE_PROBS, params))


@_job(Command.EXACT_ORTHANT3)
def exact_orthant3(**params: Any) -> None:
    """Emit the exact limiting probability of all 8 three-candidate tournaments."""
    run(build_config(Command.EXACT_ORTHANT3, params))


@_job(Command.EXACT_TABLE1, "ell", "voters")
def exact_table1(**params: Any) -> None:
    """Exact finite-voter probabilities by enumeration (default: all feasible odd n)."""
    run(build_config(Command.EXACT_TABLE1, params))


@_job(Command.WINNING_SETS, "ell", "samples", "seed", "shards", "method")
def winning_sets(**params: Any) -> None:
    """Histogram of winning-set sizes under Minimax and/or Split Cycle."""
    run(build_config(Command.WINNING_SETS, params))


@_job(Command.QUALITATIVE_COVERAGE, "ell", "samples", "seed", "shards")
def qualitative_coverage(**params: Any) -> None:
    """Count the qualitative margin graphs observed (3 or 4 candidates)."""
    run(build_config(Command.QUALITATIVE_COVERAGE, params))


@_job(Command.LEVELSET, "ell", "samples", "seed")
def levelset(**params: Any) -> None:
    """Emit points on the density level set x^T Gamma x = 1."""
    run(build_config(Command.LEVELSET, params))


@_job(Command.CONDORCET_PROB, "ell", "samples", "seed", "shards")
def condorcet_prob(**params: Any) -> None:
    """Estimate the chance of a Condorcet winner and of a transitive majority."""
    run(build_config(Command.CONDORCET_PROB, params))


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


class _Result:
    """Columns and rows of a command's output, plus an optional JSON shape."""

    def __init__(
        self,
        columns: Sequence[str],
        rows: list[dict[str, Any]],
        json_payload: dict[str, Any] | None = None,
        extra: dict[str, Any] | None = None,
    ) -> None:
        self.columns = columns
        self.rows = rows
        self.json_payload = json_payload if json_payload is not None else {"rows": rows}
        self.extra = extra or {}


def _covariance(config: RunConfig) -> _Result:
    from marginsim.edge_space import edge_pairs
    from marginsim.ic_model import precision_fractions, sigma_fractions

    pairs = [f"{i}-{j}" for i, j in edge_pairs(config.ell)]
    sigma = sigma_fractions(config.ell)
    gamma = precision_fractions(config.ell)
    rows = [
        {
            "row": pairs[a],
            "col": pairs[b],
            "sigma_exact": sigma[a][b],
            "sigma": float(sigma[a][b]),
            "gamma_exact": gamma[a][b],
            "gamma": float(gamma[a][b]),
        }
        for a in range(len(pairs))
        for b in range(len(pairs))
    ]
    payload = {
        "edges": pairs,
        "sigma": [[float(v) for v in row] for row in sigma],
        "sigma_exact": [[str(v) for v in row] for row in sigma],
        "gamma": [[float(v) for v in row] for row in gamma],
        "gamma_exact": [[str(v) for v in row] for row in gamma],
    }
    columns = ("row", "col", "sigma_exact", "sigma", "gamma_exact", "gamma")
    return _Result(columns, rows, payload)


def _eigen(config: RunConfig) -> _Result:
    from marginsim.ic_model import covariance, verify_eigenstructure

    model = covariance(config.ell)
    verified = verify_eigenstructure(config.ell)
    rows = [
        {
            "space": "cycle",
            "eigenvalue": model.lambda_cycle,
            "dimension": model.dim_cycle,
            "verified": verified,
        },
        {
            "space": "cut",
            "eigenvalue": model.lambda_cut,
            "dimension": model.dim_cut,
            "verified": verified,
        },
    ]
    extra = {"log_det_sigma": model.log_det_sigma}
    return _Result(("space", "eigenvalue", "dimension", "verified"), rows, extra=extra)


def _type_probs(config: RunConfig) -> _Result:
    from marginsim.ic_model import covariance
    from marginsim.probability import condorcet_share, estimate_type_table
    from marginsim.sampling import RngStream

    table = estimate_type_table(
        covariance(config.ell),
        config.samples,
        RngStream(config.seed),
        shards=config.shards,
    )
    click.echo(table.summary(), err=True)
    return _Result(
        TYPE_TABLE_COLUMNS,
        type_table_rows(table),
        extra={"condorcet_share": condorcet_share(table)},
    )


def _exact_orthant3(config: RunConfig) -> _Result:
    from marginsim.models import Tournament
    from marginsim.probability import tournament_prob_exact_3
    from marginsim.tournaments import is_transitive, score_sequence

    rows = []
    for bits in range(8):
        t = Tournament(ell=3, bits=bits)
        rows.append(
            {
                "tournament": t.to_bit_string(),
                "score_sequence": score_sequence(t),
                "kind": "linear" if is_transitive(t) else "cycle",
                "probability": tournament_prob_exact_3(t),
                "std_err": 0.0,
            }
        )
    columns = ("tournament", "score_sequence", "kind", "probability", "std_err")
    return _Result(columns, rows)


def _exact_table1(config: RunConfig) -> _Result:
    import math

    from marginsim.probability import (
        exact_finite_prob,
        has_condorcet_winner,
        has_transitive_majority,
    )

    if config.voters is not None:
        voter_counts = [config.voters]
    else:
        orders = math.factorial(config.ell)
        voter_counts = [
            n
            for n in range(1, 64, 2)
            if orders <= MAX_BALLOT_TYPES and orders**n <= EXACT_ENUMERATION_BUDGET
        ]
        if not voter_counts:
            msg = f"No voter count is within the exact budget for ell={config.ell}"
            raise UnsupportedSizeError(msg)
    rows = []
    for n in voter_counts:
        for name, event in (
            ("condorcet_winner", has_condorcet_winner),
            ("transitive", has_transitive_majority),
        ):
            p = exact_finite_prob(config.ell, n, event)
            logger.info(f"ell={config.ell} n={n} {name}: {p} ({float(p):.5f})")
            rows.append(
                {
                    "ell": config.ell,
                    "voters": n,
                    "event": name,
                    "exact": p,
                    "probability": float(p),
                    "std_err": 0.0,
                }
            )
    columns = ("ell", "voters", "event", "exact", "probability", "std_err")
    return _Result(columns, rows)


def _winning_sets(config: RunConfig) -> _Result:
    from marginsim.ic_model import covariance
    from marginsim.sampling import RngStream
    from marginsim.voting import winning_set_distribution

    methods = [config.method] if config.method else VotingMethod.all()
    model = covariance(config.ell)
    rows: list[dict[str, Any]] = []
    for method in methods:
        hist = winning_set_distribution(
            method, model, config.samples, RngStream(config.seed), shards=config.shards
        )
        click.echo(hist.summary(), err=True)
        rows.extend(histogram_rows(hist))
    return _Result(HISTOGRAM_COLUMNS, rows)


def _qualitative_coverage(config: RunConfig) -> _Result:
    import math

    from marginsim.ic_model import covariance
    from marginsim.probability import qualitative_coverage, qualitative_type_count
    from marginsim.sampling import RngStream

    counts = qualitative_coverage(
        covariance(config.ell),
        config.samples,
        RngStream(config.seed),
        shards=config.shards,
    )
    rows = []
    for q, count in counts.items():
        p = count / config.samples
        rows.append(
            {
                "tournament": q.tournament.to_bit_string(),
                "edge_rank": q.edge_rank,
                "count": count,
                "fraction": p,
                "std_err": math.sqrt(p * (1.0 - p) / config.samples),
            }
        )
    extra = {
        "observed_types": len(counts),
        "possible_types": qualitative_type_count(config.ell),
    }
    columns = ("tournament", "edge_rank", "count", "fraction", "std_err")
    return _Result(columns, rows, extra=extra)


def _levelset(config: RunConfig) -> _Result:
    from marginsim.edge_space import edge_pairs
    from marginsim.ic_model import covariance, levelset_points
    from marginsim.sampling import RngStream

    model = covariance(config.ell)
    points = levelset_points(model, config.samples, RngStream(config.seed))
    names = [f"x_{i}_{j}" for i, j in edge_pairs(config.ell)]
    rows = [
        {"index": idx, **dict(zip(names, point.tolist()))}
        for idx, point in enumerate(points)
    ]
    return _Result(("index", *names), rows)


def _condorcet_prob(config: RunConfig) -> _Result:
    from marginsim.ic_model import covariance
    from marginsim.models import Tournament
    from marginsim.probability import (
        condorcet_winner_event,
        condorcet_winner_prob_exact,
        estimate_event,
        tournament_prob_exact_3,
        transitive_event,
    )
    from marginsim.sampling import RngStream

    model = covariance(config.ell)
    exact: dict[str, float | None] = {"condorcet_winner": None, "transitive": None}
    if config.ell in (3, 4):
        exact["condorcet_winner"] = condorcet_winner_prob_exact(config.ell)
    if config.ell == 3:
        exact["transitive"] = 6 * tournament_prob_exact_3(Tournament(ell=3, bits=0b111))
    rows = []
    for name, event in (
        ("condorcet_winner", condorcet_winner_event),
        ("transitive", transitive_event),
    ):
        est = estimate_event(
            model, config.samples, RngStream(config.seed), event, shards=config.shards
        )
        rows.append(
            {
                "event": name,
                "p_hat": est.p_hat,
                "std_err": est.std_err,
                "exact": exact[name],
            }
        )
    return _Result(("event", "p_hat", "std_err", "exact"), rows)


def _margin_records(config: RunConfig) -> Iterator[dict[str, Any]]:
    from marginsim.ic_model import covariance
    from marginsim.sampling import RngStream, iter_clt_batches, sample_margin_exact

    rng = RngStream(config.seed)
    if config.voters is not None:
        for _ in range(config.samples):
            g = sample_margin_exact(rng, config.voters, config.ell)
            yield {"ell": config.ell, "coords": list(g.margins), "voters": g.voters}
        return
    for batch in iter_clt_batches(rng, covariance(config.ell), config.samples):
        for row in batch.tolist():
            yield {"ell": config.ell, "coords": row, "voters": None}


_HANDLERS: dict[Command, Callable[[RunConfig], _Result]] = {
    Command.COVARIANCE: _covariance,
    Command.EIGEN: _eigen,
    Command.TYPE_PROBS: _type_probs,
    Command.EXACT_ORTHANT3: _exact_orthant3,
    Command.EXACT_TABLE1: _exact_table1,
    Command.WINNING_SETS: _winning_sets,
    Command.QUALITATIVE_COVERAGE: _qualitative_coverage,
    Command.LEVELSET: _levelset,
    Command.CONDORCET_PROB: _condorcet_prob,
}


def run(config: RunConfig) -> None:
    """Execute one batch job and write its output.

    Raises:
        MarginsimError: On a precondition or budget failure.
        OSError: If the output cannot be written.
    """
    logger.info(
        f"Running {config.command.value} (ell={config.ell}, seed={config.seed})"
    )
    metadata = config.provenance()
    target = config.output_path or "-"
    if config.command is Command.SAMPLE_MARGINS:
        with click.open_file(target, "w", encoding="utf-8") as stream:
            count = write_jsonl(stream, _margin_records(config), metadata)
        logger.info(f"Wrote {count} margin vectors")
        return

    result = _HANDLERS[config.command](config)
    metadata.update(result.extra)
    with click.open_file(target, "w", encoding="utf-8") as stream:
        if config.format is OutputFormat.JSON:
            write_json(stream, result.json_payload, metadata)
        else:
            write_csv(stream, result.columns, result.rows, metadata)
    if config.output_path:
        logger.info(f"Results saved to {config.output_path}")


def main(argv: Sequence[str] | None = None) -> None:
    """Console entry point mapping failures to exit codes 1 (usage) and 2 (runtime)."""
    try:
        cli.main(
            args=list(argv) if argv is not None else None,
            prog_name="marginsim",
            standalone_mode=False,
        )
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_USAGE)
    except click.Abort:
        click.echo("Aborted!", err=True)
        sys.exit(EXIT_USAGE)
    except ValidationError as exc:
        click.echo(f"Error: invalid configuration: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    except (MarginsimError, OSError) as exc:
        click.echo(f"Error: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
