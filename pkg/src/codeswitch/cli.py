"""Command-line front end: emit, run, decode, analyze, ftcheck.

Exit codes: 0 success, 1 usage error, 2 data error, 3 property violation.
Every option can also come from a flat ``key=value`` file passed with
``--config``; flags given on the command line win.
"""

from __future__ import annotations

import csv
import io
import os
import sys
from pathlib import Path

import click

from codeswitch.circuit import ABLATIONS, EXPERIMENTS, CircuitError, build_experiment
from codeswitch.decoder import Mode, decode_all
from codeswitch.qasm import emit_qasm
from codeswitch.shotfile import (
    ShotFileError,
    decoded_file_text,
    read_decoded_file,
    read_shot_file,
    shot_file_text,
)
from codeswitch.sim.engine import run_batch_bits
from codeswitch.sim.noise import DEFAULTS, NoiseModel
from codeswitch.stats import StatsError, paren_format, summarize

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_VIOLATION = 0, 1, 2, 3

KINDS = [k.lower() for k in EXPERIMENTS]


class DataError(click.ClickException):
    exit_code = EXIT_DATA


def read_config(path: str | Path) -> dict[str, str]:
    """Flat ``key=value`` lines; ``#`` starts a comment; dashes in keys become underscores."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.BadParameter(f"{path}:{lineno}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def _load_config(ctx: click.Context, _param, value):
    if value is None:
        return value
    try:
        cfg = read_config(value)
    except OSError as exc:
        raise click.BadParameter(str(exc)) from exc
    known = {p.name for p in ctx.command.params}
    unknown = set(cfg) - known
    if unknown:
        raise click.BadParameter(f"unknown config key(s): {', '.join(sorted(unknown))}")
    ctx.default_map = {**(ctx.default_map or {}), **cfg}
    return value


config_option = click.option(
    "--config", type=click.Path(exists=True, dir_okay=False), callback=_load_config,
    is_eager=True, expose_value=False, help="Flat key=value file; flags override its keys.")

kind_argument = click.argument("kind", type=click.Choice(KINDS, case_sensitive=False))


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        click.echo(text, nl=False)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror or exc}") from exc


@click.group()
@click.version_option(package_name="artifact")
def cli():
    """Simulate, decode and certify code-switched magic-state preparation."""


@cli.command()
@config_option
@kind_argument
@click.option("--reuse/--no-reuse", default=False, show_default=True, help="Reuse round ancillas.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None, help="QASM path (default stdout).")
def emit(kind, reuse, output):
    """Write the OPENQASM 2.0 circuit of KIND."""
    _write(output, emit_qasm(build_experiment(kind, reuse=reuse)))


def _noise_options(f):
    for name in reversed(list(DEFAULTS)):
        f = click.option(f"--{name.replace('_', '-')}", name, type=click.FloatRange(0.0, 1.0),
                         default=DEFAULTS[name], show_default=True)(f)
    return f


@cli.command()
@config_option
@kind_argument
@click.option("--shots", type=click.IntRange(min=1), default=10_000, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--reuse/--no-reuse", default=False, show_default=True)
@click.option("--noise", type=click.Choice(["on", "off"]), default="on", show_default=True)
@_noise_options
@click.option("--crosstalk/--no-crosstalk", default=False, show_default=True,
              help="Enable the spectator channel at every measurement.")
@click.option("--workers", type=click.IntRange(min=1), default=None,
              help="Parallel processes (default: CPU count).")
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None, help="Shot file (default stdout).")
def run(kind, shots, seed, reuse, noise, p1, p2, p_meas1, p_meas0, p_idle, p_crosstalk, crosstalk,
        workers, output):
    """Simulate SHOTS trajectories of KIND and write a shot file."""
    circuit = build_experiment(kind, reuse=reuse)
    if noise == "off":
        model = NoiseModel.noiseless()
    else:
        model = NoiseModel(p1, p2, p_meas1, p_meas0, p_idle, p_crosstalk).with_channels(crosstalk=crosstalk)
    bits = run_batch_bits(circuit, model, shots, base_seed=seed, workers=workers or os.cpu_count() or 1)
    meta = {"experiment": circuit.name, "seed": seed, "reuse": reuse, "noise": noise, **model.as_dict()}
    _write(output, shot_file_text(bits, meta))


@cli.command()
@config_option
@click.argument("shot_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["EC", "PS"], case_sensitive=False), default="EC", show_default=True)
@click.option("--experiment", type=click.Choice(KINDS, case_sensitive=False), default=None,
              help="Override the experiment named in the file header.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None, help="Decoded file (default stdout).")
def decode(shot_file, mode, experiment, output):
    """Decode a shot file into per-shot dispositions and the acceptance rate."""
    try:
        sf = read_shot_file(shot_file, experiment)
        ds = decode_all(sf.records(), sf.experiment.lower(), Mode(mode.upper()))
    except (ShotFileError, ValueError) as exc:
        raise DataError(f"{shot_file}: {exc}") from exc
    meta = {"source": Path(shot_file).name}
    _write(output, decoded_file_text(ds, meta))
    click.echo(f"{ds.experiment} {ds.mode.value}: accepted {ds.n_post}/{ds.n_shots} "
               f"({ds.acceptance_rate:.4f})", err=True)


def render_report(report, decimals: int = 5) -> str:
    rows = report.rows()
    lines = [f"mode={report.mode}"]
    for r in rows:
        if r.quantity == "F_direct":
            lines.append(f"{r.quantity:<11} {r.value:.{decimals}f}")
            continue
        val = paren_format(r.value, r.sem, decimals)
        if r.quantity in ("epsilon", "delta_term"):
            val = f"{r.value:.3e} (sem {r.sem:.2e})"
        acc = f"  acceptance={100 * r.acceptance_rate:.2f}%" if r.acceptance_rate is not None else ""
        lines.append(f"{r.quantity:<11} {val}{acc}")
    return "\n".join(lines) + "\n"


def report_csv(report) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("quantity", "value", "sem", "acceptance_rate"))
    for r in report.rows():
        w.writerow((r.quantity, repr(r.value), "" if r.sem != r.sem else repr(r.sem),
                    "" if r.acceptance_rate is None else repr(r.acceptance_rate)))
    return out.getvalue()


@cli.command()
@config_option
@click.option("--x", "x_file", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--y", "y_file", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--z", "z_file", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--two-copy", "two_copy_file", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--mode", type=click.Choice(["EC", "PS"], case_sensitive=False), default=None,
              help="Expected decode mode of all inputs (default: taken from the inputs).")
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None, help="Text report (default stdout).")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None, help="CSV report path.")
def analyze(x_file, y_file, z_file, two_copy_file, mode, output, csv_path):
    """Certify the magic state from three single-copy and one two-copy decoded file."""
    files = {"X": x_file, "Y": y_file, "Z": z_file, "two-copy": two_copy_file}
    sets = {}
    for key, path in files.items():
        try:
            ds = read_decoded_file(path)
        except (ShotFileError, ValueError) as exc:
            raise DataError(f"{path}: {exc}") from exc
        want = "two-copy" if key == "two-copy" else f"single-copy-{key.lower()}"
        if ds.experiment.lower() != want:
            raise DataError(f"{path}: expected a {want} decode, found {ds.experiment}")
        sets[key] = ds
    modes = {ds.mode for ds in sets.values()}
    if len(modes) != 1:
        raise DataError(f"inputs mix decode modes: {sorted(m.value for m in modes)}")
    found = modes.pop()
    if mode is not None and Mode(mode.upper()) is not found:
        raise DataError(f"inputs were decoded in {found.value} mode, not {mode.upper()}")
    try:
        report = summarize({b: sets[b] for b in "XYZ"}, sets["two-copy"], found.value)
    except StatsError as exc:
        raise DataError(str(exc)) from exc
    _write(output, render_report(report))
    if csv_path is not None:
        _write(csv_path, report_csv(report))


@cli.command()
@config_option
@click.option("--ablate", type=click.Choice(list(ABLATIONS)), default=None,
              help="Remove a protocol component to show the check can fail.")
@click.option("--reuse/--no-reuse", default=False, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--repetitions", type=click.IntRange(min=1), default=2, show_default=True,
              help="Minimum branch samples per fault.")
@click.option("--max-repetitions", type=click.IntRange(min=1), default=24, show_default=True)
@click.option("--tolerance", type=click.FloatRange(0.0, 1.0), default=1e-9, show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None, help="Report path (default stdout).")
def ftcheck(ablate, reuse, seed, repetitions, max_repetitions, tolerance, output):
    """Inject every single fault into magic-prep; exit 3 if any accepted branch is wrong."""
    from codeswitch.sim.faults import ft_check

    circuit = build_experiment("magic-prep", reuse=reuse, ablate=ablate)
    rep = ft_check("magic-prep", repetitions=repetitions, max_repetitions=max(repetitions, max_repetitions),
                   ablate=ablate, reuse=reuse, seed=seed, tolerance=tolerance)
    _write(output, "\n".join(rep.lines(circuit)) + "\n")
    if not rep.ok:
        click.echo(f"fault-tolerance violated: {len(rep.violations)} fault(s) accepted with a wrong state",
                   err=True)
        sys.exit(EXIT_VIOLATION)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="codeswitch", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except CircuitError as exc:
        click.echo(f"Error: {exc}", err=True)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
