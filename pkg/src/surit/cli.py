"""Command line interface for surit."""

import functools
import io
from collections.abc import Callable
from pathlib import Path
from typing import Annotated, Any

import click
import pandas as pd
import typer
from rich.console import Console
from rich.table import Table

from surit.config import ExperimentConfig, SweepRegime, dump_config, load_config, parse_overrides, settings
from surit.data import generate_dataset, load_dataset, save_dataset
from surit.decode import write_events
from surit.errors import MissingFileError, SuritError, VerificationFailedError
from surit.logging_config import get_logger, setup_logging
from surit.metrics import summary_csv
from surit.model import evaluate, run_sweep, sweep_cells, train
from surit.neural import check_compatible, load_checkpoint, save_checkpoint
from surit.utils.io import atomic_write_text
from surit.verification import VerifyBounds, run_verification
from surit.visualization import write_sweep_html

app = typer.Typer(help="SURIT experiment driver", no_args_is_help=True, pretty_exceptions_enable=False)
console = Console(stderr=True)
logger = get_logger("surit.cli")

RESOLVED_CONFIG = "config.resolved.ini"

ConfigOption = Annotated[
    Path | None, typer.Option("--config", "-c", help="Experiment config ([section] / key = value)")
]
SetOption = Annotated[
    list[str] | None, typer.Option("--set", help="Override a config value, e.g. training.lr=0.001")
]
OutOption = Annotated[Path, typer.Option("--out", "-o", help="Output directory")]


def handle_errors(command: Callable[..., Any]) -> Callable[..., Any]:
    """Report SuritError with its diagnostic and exit with the mapped code."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return command(*args, **kwargs)
        except SuritError as exc:
            logger.error("Command failed", command=command.__name__, error=str(exc), error_type=type(exc).__name__)
            console.print(f"[bold red]error:[/bold red] {exc}")
            checkpoint = getattr(exc, "checkpoint", None)
            if checkpoint is not None:
                console.print(f"last good checkpoint: {checkpoint}")
            raise typer.Exit(exc.exit_code) from exc

    return wrapper


def resolve_config(config_path: Path | None, overrides: list[str] | None) -> ExperimentConfig:
    return load_config(config_path, parse_overrides(overrides or []))


def echo_config(config: ExperimentConfig, out_dir: Path) -> None:
    atomic_write_text(out_dir / RESOLVED_CONFIG, dump_config(config))


def _frame_csv(frame: pd.DataFrame) -> str:
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False)
    return buffer.getvalue()


def _config_beside(checkpoint: Path, config_path: Path | None) -> Path | None:
    if config_path is not None:
        return config_path
    candidate = checkpoint.parent / RESOLVED_CONFIG
    return candidate if candidate.exists() else None


@app.callback()
def main_options(
    log_level: Annotated[str | None, typer.Option(help="Log level (DEBUG, INFO, ...)")] = None,
):
    """Synthetic two-talker recognition and speaker identification experiments."""
    setup_logging(log_level)


@app.command()
@handle_errors
def generate(config_path: ConfigOption = None, overrides: SetOption = None, out: OutOption = Path("data")):
    """Generate the synthetic corpus and write manifests plus feature blocks."""
    config = resolve_config(config_path, overrides)
    dataset = generate_dataset(config)
    save_dataset(dataset, out)
    echo_config(config, out)
    console.print(f"wrote {len(dataset.train)} train / {len(dataset.eval)} eval mixtures to {out}")


@app.command("train")
@handle_errors
def train_command(
    data: Annotated[Path, typer.Option("--data", "-d", help="Dataset directory from `generate`")],
    config_path: ConfigOption = None,
    overrides: SetOption = None,
    out: OutOption = settings.output_root / "train",
):
    """Train a model (joint or stepwise) and write the checkpoint and training logs."""
    config = resolve_config(config_path, overrides)
    dataset = load_dataset(data)
    if dataset.corpus.data != config.data:
        logger.info("Using the dataset's data section", dataset=str(data))
        config = config.model_copy(update={"data": dataset.corpus.data})

    out.mkdir(parents=True, exist_ok=True)
    echo_config(config, out)
    result = train(config, dataset.train, out_dir=out)
    save_checkpoint(result.params, out / "model.ckpt")
    atomic_write_text(out / "train_log.csv", _frame_csv(result.steps))
    atomic_write_text(out / "epochs.csv", _frame_csv(result.epochs))
    console.print(f"checkpoint written to {out / 'model.ckpt'}")


@app.command("eval")
@handle_errors
def eval_command(
    checkpoint: Annotated[Path, typer.Option("--checkpoint", help="Model checkpoint")],
    data: Annotated[Path, typer.Option("--data", "-d", help="Dataset directory")],
    config_path: ConfigOption = None,
    overrides: SetOption = None,
    out: OutOption = settings.output_root / "eval",
    system: Annotated[str, typer.Option(help="System name in the summary row")] = "surit",
):
    """Decode the eval split and report WER, SER and emission latency."""
    config = resolve_config(_config_beside(checkpoint, config_path), overrides)
    params = load_checkpoint(checkpoint)
    check_compatible(params, config)
    dataset = load_dataset(data)

    events: list[dict] = []
    report = evaluate(params, config, dataset.eval, system=system, events=events)
    out.mkdir(parents=True, exist_ok=True)
    echo_config(config, out)
    atomic_write_text(out / "eval_report.json", report.model_dump_json(indent=2) + "\n")
    atomic_write_text(out / "summary.csv", summary_csv([report]))
    write_events(out / "events.jsonl", events)

    table = Table(title=f"Evaluation: {system}")
    for column in ("WER", "WER (fixed order)", "SER", "t_e", "t_e/T"):
        table.add_column(column, justify="right")
    table.add_row(
        f"{report.wer:.3f}",
        f"{report.wer_fixed_order:.3f}",
        f"{report.ser:.3f}",
        f"{report.latency.mean_t_e:.2f}",
        f"{report.latency.mean_t_e_over_T:.3f}",
    )
    console.print(table)


@app.command()
@handle_errors
def verify(
    n_lattices: Annotated[int, typer.Option(help="Random lattices for the enumeration oracle")] = 1000,
    seed: Annotated[int, typer.Option(help="Seed of the random instances")] = 0,
    out: Annotated[Path | None, typer.Option("--out", "-o", help="Write verify_report.json here")] = None,
):
    """Run the oracle suite; exits with code 2 if any check fails."""
    report = run_verification(VerifyBounds(n_lattices=n_lattices, seed=seed))
    if out is not None:
        atomic_write_text(out / "verify_report.json", report.model_dump_json(indent=2) + "\n")

    table = Table(title="Oracle checks")
    table.add_column("check")
    table.add_column("n", justify="right")
    table.add_column("max error", justify="right")
    table.add_column("result")
    for check in report.checks:
        status = "[green]pass[/green]" if check.passed else f"[red]FAIL[/red] {check.detail}"
        table.add_row(check.name, str(check.n), f"{check.max_error:.2e}", status)
    console.print(table)

    if not report.passed:
        failed = [c.name for c in report.checks if not c.passed]
        raise VerificationFailedError(f"oracle checks failed: {', '.join(failed)}")


@app.command("sweep-latency")
@handle_errors
def sweep_latency(
    checkpoint: Annotated[Path, typer.Option("--checkpoint", help="Trained base checkpoint")],
    data: Annotated[Path, typer.Option("--data", "-d", help="Dataset directory")],
    alpha: Annotated[list[float] | None, typer.Option("--alpha", help="Blank-gradient scale (repeatable)")] = None,
    beta: Annotated[list[float] | None, typer.Option("--beta", help="Penalty slope (repeatable)")] = None,
    preset: Annotated[SweepRegime | None, typer.Option(help="Use the preset grid of a regime")] = None,
    config_path: ConfigOption = None,
    overrides: SetOption = None,
    out: OutOption = settings.output_root / "sweep",
):
    """Fine-tune the base model per (alpha, beta) cell; write sweep.csv (system, alpha, beta, SER, t_e, t_e/T)."""
    config = resolve_config(_config_beside(checkpoint, config_path), overrides)
    if preset is not None:
        config = config.with_overrides({"sweep.regime": preset.value})
        cells = sweep_cells(preset)
    else:
        cells = sweep_cells(config.sweep.regime, alpha or None, beta or None)
    params = load_checkpoint(checkpoint)
    check_compatible(params, config)
    dataset = load_dataset(data)

    out.mkdir(parents=True, exist_ok=True)
    echo_config(config, out)
    frame = run_sweep(config, params, dataset.train, dataset.eval, cells)
    atomic_write_text(out / "sweep.csv", _frame_csv(frame))
    console.print(frame.to_string(index=False))


@app.command("plot-sweep")
@handle_errors
def plot_sweep(
    csv: Annotated[Path, typer.Argument(help="sweep.csv written by sweep-latency")],
    out: Annotated[Path, typer.Option("--out", "-o", help="HTML file to write")] = Path("sweep.html"),
):
    """Render a sweep table as an interactive chart."""
    if not csv.exists():
        raise MissingFileError(f"sweep table not found: {csv}")
    write_sweep_html(pd.read_csv(csv), out)
    console.print(f"chart written to {out}")


def main(argv: list[str] | None = None) -> int:
    """Console entry point; usage errors exit with 1."""
    try:
        code = app(args=argv, standalone_mode=False)
    except click.exceptions.UsageError as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        return 1
    return code if isinstance(code, int) else 0


if __name__ == "__main__":
    raise SystemExit(main())
