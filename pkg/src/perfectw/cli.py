"""Command-line front end.

Every subcommand writes a table (CSV or JSON) to ``--output`` or stdout.
Exit status is 0 on success, 2 for usage or validation errors and 3 when a
numerical routine fails.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from perfectw import design as dsg
from perfectw import io as pio
from perfectw import loss as lss
from perfectw import nonlocality as nl
from perfectw.errors import NumericError, ValidationError
from perfectw.lattice import ModeState, evolution_operators, lattice

EXIT_USAGE = 2
EXIT_NUMERIC = 3
DEFAULT_K = 0.37


class NumericFailure(click.ClickException):
    exit_code = EXIT_NUMERIC


def _load_config(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise click.BadParameter(f"cannot read config: {exc}", param_hint="--config") from None
    if not isinstance(data, dict) or any(isinstance(v, (dict, list)) for v in data.values()):
        raise click.BadParameter("config must be a flat JSON object", param_hint="--config")
    return {str(k).replace("-", "_"): v for k, v in data.items()}


def _emit(ctx: click.Context, columns, rows, params) -> None:
    opts = ctx.find_root().obj
    text = pio.render_table(columns, rows, params, opts["format"])
    if opts["output"] in (None, "-"):
        click.echo(text, nl=False)
    else:
        with open(opts["output"], "w", newline="\n") as fh:
            fh.write(text)


def _run(fn):
    """Translate library errors into CLI exit statuses."""
    try:
        return fn()
    except ValidationError as exc:
        raise click.BadParameter(str(exc), param_hint=f"--{exc.field.replace('_', '-')}") from None
    except NumericError as exc:
        raise NumericFailure(str(exc)) from None


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None, help="Output file (default: stdout).")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Flat JSON object of flag defaults; explicit flags win.")
@click.pass_context
def cli(ctx, output, fmt, config):
    """Perfect W-state generation in coupled waveguides: design, propagation, loss, nonlocality."""
    conf = _load_config(config) if config else {}
    src = click.core.ParameterSource.DEFAULT
    if ctx.get_parameter_source("output") == src and "output" in conf:
        output = conf["output"]
    if ctx.get_parameter_source("fmt") == src and "format" in conf:
        fmt = conf["format"]
        if fmt not in ("csv", "json"):
            raise click.BadParameter(f"unknown format {fmt!r}", param_hint="--format")
    ctx.obj = {"output": output, "format": fmt}
    ctx.default_map = {
        name: {k: v for k, v in conf.items() if k in {p.name for p in cmd.params}}
        for name, cmd in cli.commands.items()
    }


def _positive(name):
    def check(ctx, param, value):
        if value is not None and not (math.isfinite(value) and value > 0):
            raise click.BadParameter(f"must be positive, got {value}", param_hint=f"--{name}")
        return value
    return check


s_option = click.option("--s", "s", type=float, default=1.0, show_default=True,
                        callback=_positive("s"), help="Asymmetry parameter of the target state.")
k_option = click.option("--k", "k", type=float, default=DEFAULT_K, show_default=True,
                        callback=_positive("k"), help="Characteristic coupling strength (cm^-1).")


@cli.command("design")
@s_option
@k_option
@click.option("--d0", type=float, default=None, callback=_positive("d0"),
              help="Fabrication fit parameter: gap decay length of the coupling.")
@click.option("--d1", type=float, default=None, callback=_positive("d1"),
              help="Fabrication fit parameter: gap giving coupling k.")
@click.option("--recurrences", type=click.IntRange(min=1), default=4, show_default=True)
@click.pass_context
def cmd_design(ctx, s, k, d0, d1, recurrences):
    """Lattice and length that generate the perfect W-state for S."""
    sol = _run(lambda: dsg.solve_design(s, k, d0, d1, recurrences))
    target = dsg.target_state(dsg.WTarget(s)).amplitudes
    rows = [
        ("gamma_1", 1.0),
        ("gamma_2", sol.gamma),
        ("kz_star", sol.kz_star),
        ("z_star_cm", sol.z_star_cm),
    ]
    for i, (kz, z) in enumerate(zip(sol.recurrence, sol.recurrence_cm), start=1):
        rows += [(f"recurrence_kz_{i}", kz), (f"recurrence_z_cm_{i}", z)]
    if sol.separations is not None:
        rows += [(f"separation_d{j}", d) for j, d in enumerate(sol.separations, start=1)]
    for j, c in enumerate(target, start=1):
        rows += [(f"target_re_{j}", c.real), (f"target_im_{j}", c.imag)]
    _emit(ctx, ("quantity", "value"), rows, {"command": "design", "s": s, "k": k, "d0": d0, "d1": d1})


@cli.command("evolve")
@s_option
@k_option
@click.option("--z-max", type=float, default=None, callback=_positive("z-max"),
              help="Last propagation distance in cm (default: the generation length).")
@click.option("--points", type=click.IntRange(min=2), default=None,
              help="Grid points including both ends [default: 201, or 1001 with --contour].")
@click.option("--contour", is_flag=True, help="Long format (z_cm, kz, guide, probability) for raster plots.")
@click.option("--state-out", type=click.Path(dir_okay=False), default=None,
              help="Also write the state at z-max in state-file format.")
@click.option("--compensate/--no-compensate", default=False,
              help="Apply the compensating phase shifters to the exported state.")
@click.pass_context
def cmd_evolve(ctx, s, k, z_max, points, contour, state_out, compensate):
    """Guide populations versus distance for centre injection."""
    def work():
        z_end = z_max if z_max is not None else dsg.physical_length(dsg.kz_for(s), k)
        n = points if points is not None else (1001 if contour else 201)
        zs = np.linspace(0.0, z_end, n)
        M = lattice(dsg.bond_weights(s), k)
        psi = evolution_operators(M, zs)[:, :, dsg.CENTER]
        return zs, psi

    zs, psi = _run(work)
    probs = np.abs(psi) ** 2
    if contour:
        columns = ("z_cm", "kz", "guide", "probability")
        rows = [(z, k * z, g + 1, p[g]) for z, p in zip(zs, probs) for g in range(p.size)]
    else:
        columns = ("z_cm", "kz", "p1", "p2", "p3")
        rows = [(z, k * z, *p) for z, p in zip(zs, probs)]
    _emit(ctx, columns, rows, {"command": "evolve", "s": s, "k": k, "z_max_cm": float(zs[-1]),
                               "points": len(zs), "contour": contour})
    if state_out:
        state = ModeState(psi[-1])
        if compensate:
            state = dsg.compensate(state, dsg.WTarget(s))
        with open(state_out, "w", newline="\n") as fh:
            pio.write_state(state.amplitudes, fh)


def _parse_ratios(ctx, param, value):
    if value is None:
        return list(lss.DEFAULT_RATIOS)
    if isinstance(value, (int, float)):
        value = str(value)
    try:
        ratios = [float(x) for x in str(value).split(",") if x.strip()]
    except ValueError:
        raise click.BadParameter("expected comma-separated numbers", param_hint="--ratios") from None
    if not ratios or any(not math.isfinite(r) or r < 0 for r in ratios):
        raise click.BadParameter("ratios must be nonnegative numbers", param_hint="--ratios")
    return ratios


@cli.command("loss-sweep")
@s_option
@k_option
@click.option("--ratios", default=None, callback=_parse_ratios,
              help="Comma-separated beta/k values [default: 0,0.01,...,0.1].")
@click.option("--steps", type=click.IntRange(min=1), default=None,
              help="RK4 steps per integration (default: normalized step <= 1e-3).")
@click.pass_context
def cmd_loss_sweep(ctx, s, k, ratios, steps):
    """Generation fidelity at the design length versus photon loss rate."""
    rows = _run(lambda: lss.sweep_fidelity_vs_loss(s, ratios, k, steps))
    kz = dsg.kz_for(s)
    _emit(ctx, ("beta_over_k", "fidelity"), rows,
          {"command": "loss-sweep", "s": s, "k": k, "kz_star": kz, "z_star_cm": kz / k, "steps": steps})


@cli.command("nonlocality")
@click.option("--s", "s", type=float, default=None, callback=_positive("s"),
              help="Use the built-in perfect W-state for this S.")
@click.option("--state-file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Read three mode amplitudes from a state file instead.")
@click.option("--alpha", type=float, default=None, help="K-basis angle in radians [default: Hardy angle].")
@click.pass_context
def cmd_nonlocality(ctx, s, state_file, alpha):
    """Bell-CH certificate and Hardy ladder for a three-mode state."""
    if (s is None) == (state_file is None):
        raise click.UsageError("give exactly one of --s or --state-file")
    if state_file is not None:
        amps = _run(lambda: pio.parse_state(Path(state_file).read_text(), state_file))
        if amps.size != nl.N_SITES:
            raise click.BadParameter(f"need {nl.N_SITES} modes, got {amps.size}", param_hint="--state-file")
        source = state_file
    else:
        amps = dsg.target_state(dsg.WTarget(s)).amplitudes
        source = f"perfect W (s={s:g})"
    alpha = nl.alpha_star() if alpha is None else alpha
    cert = _run(lambda: nl.hardy_certificate(amps, alpha))
    ladder = _run(lambda: nl.hardy_ladder_report(amps, alpha))
    rows = [
        ("alpha", cert.alpha, ""),
        ("p_hardy", cert.p_hardy, ""),
        ("p_veto1", cert.p_veto1, ""),
        ("p_veto2", cert.p_veto2, ""),
        ("p_veto3", cert.p_veto3, ""),
        ("ch_lhs", cert.ch_lhs, ""),
        ("violated", cert.violated, ""),
        ("vetoes_vanish", cert.vetoes_vanish, ""),
    ]
    rows += [(f"ladder_{r.name}", r.value, r.status) for r in ladder.rungs]
    _emit(ctx, ("quantity", "value", "status"), rows,
          {"command": "nonlocality", "source": source, "alpha": alpha})


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="perfectw", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Exit as exc:
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
