"""Command line entry points.

gen-dataset, train, eval and feedback-exp reproduce the experiment
pipeline; chat runs the refinement loop interactively; compile turns a
Nile file into deployment commands offline; serve starts the HTTP
service.

Exit codes: 0 success, 1 usage or parse error, 2 runtime error,
3 compile succeeded but conflicts are present.
"""

from __future__ import annotations

import csv
import math
import sys
from pathlib import Path

import click

from . import datagen
from .anonymize import UnboundToken
from .deploy import NetworkModel, UnresolvedId, compile_intent, default_network, render_commands
from .extract import EmptyExtraction
from .lang import ParseError, parse_nile
from .pipeline import RefinementEngine, score_translation
from .service import ServiceConfig
from .service import run as run_service
from .translate import (
    DivergenceError,
    MaxLengthExceeded,
    TrainConfig,
    TrainingExample,
    incorporate_feedback,
    load_model,
    read_dataset,
    save_model,
    write_dataset,
)

# Fixed seed for drawing feedback-exp cases, so every base model is
# measured against the same case set.
DEFAULT_CASE_SEED = 104729


class ConflictsPresent(Exception):
    """Compile finished but the report carries error-level conflicts."""


@click.group()
def cli():
    """Natural-language network intents: dataset tools, training,
    evaluation, chat and deployment."""


@cli.command("gen-dataset")
@click.option("--size", type=int, required=True, help="Number of examples.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--flow", type=float, default=0.0, show_default=True,
              help="Probability of five-tuple flow targets.")
def gen_dataset(size: int, seed: int, out: str, flow: float):
    """Generate a synthetic training dataset (JSON lines)."""
    examples = datagen.generate(datagen.GenSpec(size=size, seed=seed, flow=flow))
    write_dataset(out, examples)
    click.echo(f"wrote {len(examples)} examples to {out}")


@cli.command("train")
@click.option("--dataset", "dataset_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--epochs", type=int, default=70, show_default=True)
@click.option("--batch", type=int, default=64, show_default=True)
@click.option("--val-split", type=float, default=0.2, show_default=True)
@click.option("--learning-rate", type=float, default=TrainConfig.learning_rate, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "weights", type=click.Path(dir_okay=False), required=True)
def train_cmd(dataset_path, epochs, batch, val_split, learning_rate, seed, weights):
    """Train translation weights on a dataset."""
    from .translate import train

    dataset = read_dataset(dataset_path)
    config = TrainConfig(
        epochs=epochs, batch_size=batch, validation_split=val_split,
        learning_rate=learning_rate, seed=seed,
    )

    def progress(epoch, train_loss, val_loss):
        click.echo(f"epoch {epoch + 1:3d}/{epochs}  train {train_loss:.4f}  val {val_loss:.4f}")

    model, report = train(dataset, config, progress=progress)
    save_model(weights, model)
    click.echo(f"trained on {len(dataset)} examples in {report.total_seconds:.1f}s; "
               f"weights at {weights}")


def _check_vocabulary(model, dataset) -> None:
    known = model.vocab.index
    for i, ex in enumerate(dataset):
        for tok in (*ex.entities, *ex.nile):
            if tok not in known:
                raise click.ClickException(
                    f"example {i}: token {tok!r} is not in the model vocabulary"
                )


def _ci_half_width(values: list[float]) -> float:
    """Half-width of the normal-approximation 95% interval."""
    n = len(values)
    if n < 2:
        return 0.0
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return 1.96 * math.sqrt(var / n)


@cli.command("eval")
@click.option("--weights", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--test", "test_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--report", "report_path", type=click.Path(dir_okay=False), required=True)
def eval_cmd(weights, test_path, report_path):
    """Score a model on a test set; write per-case R² to CSV."""
    model = load_model(weights)
    test = read_dataset(test_path)
    if not test:
        raise click.ClickException(f"test file {test_path} has no examples")
    _check_vocabulary(model, test)

    rows = []
    for i, ex in enumerate(test):
        r2, exact = score_translation(model, ex)
        rows.append((i, r2, exact))

    r2s = [r for _, r, _ in rows]
    mean = sum(r2s) / len(r2s)
    half = _ci_half_width(r2s)
    with open(report_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["case_id", "r2", "exact_match"])
        for i, r2, exact in rows:
            writer.writerow([i, f"{r2:.6f}", int(exact)])
        writer.writerow(["summary", f"{mean:.6f}", f"{half:.6f}"])
    exact_rate = sum(1 for _, _, e in rows if e) / len(rows)
    click.echo(f"cases {len(rows)}  mean R² {mean:.4f} ± {half:.4f} (95% CI)  "
               f"exact {exact_rate:.3f}")


def _parse_checkpoints(raw: str, cases: int) -> list[int]:
    try:
        points = sorted({int(p) for p in raw.split(",") if p.strip() != ""})
    except ValueError:
        raise click.BadParameter(f"checkpoints must be integers: {raw!r}")
    if not points or points[0] != 0:
        points = [0] + points
    return [p for p in points if p <= cases]


@cli.command("feedback-exp")
@click.option("--weights", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--dataset", "dataset_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--cases", type=int, default=30, show_default=True)
@click.option("--checkpoints", default="0,10,20,30", show_default=True)
@click.option("--report", "report_path", type=click.Path(dir_okay=False), required=True)
@click.option("--case-seed", type=int, default=DEFAULT_CASE_SEED, show_default=True,
              help="Seed for generating the feedback cases.")
@click.option("--full-retrain", is_flag=True, default=False,
              help="Retrain from scratch after each feedback instead of fine-tuning.")
def feedback_exp(weights, dataset_path, cases, checkpoints, report_path, case_seed, full_retrain):
    """Replay the operator-feedback experiment.

    Draw fresh cases, then for each one: record the model's R²,
    append the expected pair, run one fine-tune epoch.  Mean R² over
    the whole case set is reported at every checkpoint.
    """
    model = load_model(weights)
    dataset = read_dataset(dataset_path)
    points = _parse_checkpoints(checkpoints, cases)
    case_set = (
        datagen.generate(datagen.GenSpec(size=cases, seed=case_seed))
        if cases else []
    )

    def case_mean() -> float:
        if not case_set:
            return float("nan")
        return sum(score_translation(model, ex)[0] for ex in case_set) / len(case_set)

    rows: list[tuple] = []
    marks: dict[int, float] = {}
    if 0 in points:
        marks[0] = case_mean()
    for i, ex in enumerate(case_set, start=1):
        r2_before, exact_before = score_translation(model, ex)
        rows.append(("case", i, f"{r2_before:.6f}", int(exact_before)))
        model, dataset = incorporate_feedback(model, dataset, ex, full_retrain=full_retrain)
        if i in points:
            marks[i] = case_mean()

    with open(report_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "id", "r2", "exact_match"])
        writer.writerows(rows)
        for point in sorted(marks):
            writer.writerow(["checkpoint", point, f"{marks[point]:.6f}", ""])
    for point in sorted(marks):
        click.echo(f"checkpoint {point:3d}: mean R² {marks[point]:.4f}")


def _read_program(first_line: str) -> str:
    """Collect an edited program typed across several lines."""
    lines = [first_line]
    while True:
        try:
            line = input("...> ")
        except EOFError:
            break
        if not line.strip():
            break
        lines.append(line)
    return "\n".join(lines)


@cli.command("chat")
@click.option("--weights", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--dataset", "dataset_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--network", "network_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--train/--no-train", "train_flag", default=True, show_default=True,
              help="Fine-tune on confirmed intents.")
def chat(weights, dataset_path, network_path, train_flag):
    """Interactive refinement loop on the terminal."""
    model = load_model(weights)
    dataset = read_dataset(dataset_path) if dataset_path else []
    engine = RefinementEngine(model, dataset)
    net = NetworkModel.load(network_path) if network_path else default_network()

    click.echo("Type a network intent in plain language; 'quit' leaves.")
    while True:
        try:
            utterance = input("intent> ").strip()
        except EOFError:
            break
        if not utterance:
            continue
        if utterance.lower() in ("quit", "exit"):
            break

        try:
            refinement = engine.refine(utterance)
        except EmptyExtraction:
            click.echo("I could not find any network entities in that. "
                       "Try mentioning a middlebox, endpoint or traffic kind.")
            continue
        except (UnboundToken, MaxLengthExceeded) as err:
            click.echo(f"translation failed: {err}")
            continue

        click.echo("entities: " + ", ".join(
            f"{e.kind.value}={e.value!r}" for e in refinement.entities))
        click.echo(refinement.nile_text)
        for note in refinement.warnings:
            click.echo(f"warning: {note}")

        try:
            answer = input("confirm? [yes/no/edited program] ").strip()
        except EOFError:
            break
        if not answer or answer.lower() == "no":
            click.echo("discarded; rephrase the intent.")
            continue

        corrected = None
        if answer.lower() != "yes":
            program = _read_program(answer)
            try:
                parse_nile(program)
            except ParseError as err:
                click.echo(f"that does not parse: {err}")
                continue
            corrected = program

        example, status = engine.feedback_example(refinement, corrected)
        if train_flag:
            click.echo("fine-tuning on the confirmed pair...")
            engine.incorporate(example)
        else:
            engine.record_feedback(example)
        click.echo(f"{status}; dataset now {engine.dataset_size} examples.")

        try:
            action = input("action> [deploy/enter] ").strip().lower()
        except EOFError:
            break
        if action == "deploy":
            program = corrected or refinement.nile_text
            try:
                commands, report = compile_intent(parse_nile(program), net)
            except UnresolvedId as err:
                click.echo(f"cannot compile: {err}")
                continue
            click.echo(render_commands(commands), nl=False)
            for c in report.conflicts:
                click.echo(f"{c.severity}: {c.message} ({c.clause})")
            click.echo("deployable" if report.deployable
                       else "blocked: resolve error conflicts first")


@cli.command("compile")
@click.option("--nile", "nile_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--net", "network_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False))
def compile_cmd(nile_path, network_path, out_path):
    """Compile a Nile program file into deployment commands."""
    source = Path(nile_path).read_text(encoding="utf-8")
    intent = parse_nile(source)
    net = NetworkModel.load(network_path) if network_path else default_network()
    commands, report = compile_intent(intent, net)
    text = render_commands(commands)
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
        click.echo(f"wrote {len(commands)} commands to {out_path}")
    else:
        click.echo(text, nl=False)
    for c in report.conflicts:
        click.echo(f"{c.severity}: {c.message} ({c.clause})")
    if not report.deployable:
        raise ConflictsPresent()


@cli.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--weights", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--dataset", "dataset_path", type=click.Path(dir_okay=False))
@click.option("--network", "network_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--session-log", "session_log_path", type=click.Path(dir_okay=False))
@click.option("--train/--no-train", "train_flag", default=True, show_default=True)
@click.option("--ui", "ui_dir", type=click.Path(exists=True, file_okay=False),
              help="Directory of built chat UI assets to serve at /.")
def serve(host, port, weights, dataset_path, network_path, session_log_path,
          train_flag, ui_dir):
    """Start the refinement HTTP service."""
    run_service(ServiceConfig(
        host=host, port=port, weights_path=weights, dataset_path=dataset_path,
        network_path=network_path, session_log_path=session_log_path,
        train_on_feedback=train_flag, static_dir=ui_dir,
    ))


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as err:
        return err.exit_code
    except click.ClickException as err:
        err.show()
        return 1
    except ParseError as err:
        click.echo(f"parse error: {err}", err=True)
        return 1
    except ConflictsPresent:
        click.echo("conflicts present; deployment blocked", err=True)
        return 3
    except (click.Abort, KeyboardInterrupt):
        click.echo("aborted", err=True)
        return 1
    except Exception as err:  # runtime failures: I/O, divergence, bad files
        click.echo(f"error: {err}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
