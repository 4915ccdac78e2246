"""Command-line entry point: ``pbnn simulate|canon|analyze|search|dist|emit-hdl``.

Exit codes: 0 success, 1 usage or validation error, 2 runtime refusal
(e.g. the exhaustive-analysis bound).
"""

from __future__ import annotations

import csv
import json
import logging
import secrets
import sys
from pathlib import Path

import click

from pbnn.attractor import DEFAULT_MAX_N, ExhaustiveBoundError, analyze, best_orbit
from pbnn.canonical import Permutation, PermutationError, cpid
from pbnn.core import BinaryState, Pbnn, StateError, trajectory
from pbnn.evolve import RNG_NAME, SearchConfig, audit, search
from pbnn.hdlgen import emit
from pbnn.manifest import RunManifest
from pbnn.report import (
    SchemaError,
    cumulative_distribution,
    export_distribution_csv,
    load_ep,
    raster,
    raster_pbm,
)

log = logging.getLogger("pbnn")


class PermType(click.ParamType):
    name = "PERM"

    def convert(self, value, param, ctx):
        if isinstance(value, Permutation):
            return value
        try:
            return Permutation.parse(str(value))
        except PermutationError as e:
            self.fail(str(e), param, ctx)


PERM = PermType()


def read_config(path: str) -> dict[str, str]:
    """``key=value`` lines; ``#`` comments and blank lines ignored."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.BadParameter(f"{path}:{lineno}: expected key=value", param_hint="--config")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _net(n, cn, perm: Permutation) -> Pbnn:
    if n is not None and n != perm.n:
        raise click.BadParameter(f"permutation has {perm.n} entries but --n is {n}", param_hint="--perm")
    return Pbnn(perm.n, cn, perm)


def _write_json(doc, out) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if out in (None, "-"):
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text)


def net_options(f):
    f = click.option("--perm", type=PERM, required=True, help="1-based identifier sequence, e.g. '1 5 2 6 3 7 4'.")(f)
    f = click.option("--cn", type=click.IntRange(0, 7), default=1, show_default=True, help="Connection number.")(f)
    f = click.option("--n", "n", type=int, default=None, help="Dimension (defaults to the permutation length).")(f)
    return f


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="key=value file whose keys mirror the command flags.")
@click.option("-v", "--verbose", is_flag=True)
@click.pass_context
def cli(ctx, config_path, verbose):
    """Permutation binary neural networks."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if config_path:
        values = read_config(config_path)
        ctx.default_map = {name: values for name in ctx.command.commands}


@cli.command()
@net_options
@click.option("--x0", default=None, help="Initial state as +/- string or hex; default: min state of the best orbit.")
@click.option("--steps", type=click.IntRange(min=0), default=50, show_default=True)
@click.option("--outdir", type=click.Path(file_okay=False), default=".", show_default=True)
@click.option("--max-n", type=int, default=DEFAULT_MAX_N, show_default=True)
def simulate(n, cn, perm, x0, steps, outdir, max_n):
    """Iterate F and write a raster (PBM) and a trajectory CSV."""
    net = _net(n, cn, perm)
    if x0 is None:
        start = BinaryState(net.n, best_orbit(analyze(net, max_n=max_n)).min_state)
    else:
        try:
            start = BinaryState.parse(x0, net.n)
        except StateError as e:
            raise click.BadParameter(str(e), param_hint="--x0") from None
    traj = trajectory(start, net, steps)
    manifest = RunManifest("simulate", {"n": net.n, "cn": cn, "perm": str(perm), "x0": start.to_hex(), "steps": steps})
    d = Path(outdir)
    d.mkdir(parents=True, exist_ok=True)
    (d / "raster.pbm").write_text(raster_pbm(traj, manifest.header()))
    with open(d / "trajectory.csv", "w", newline="") as fh:
        for k, v in manifest.header().items():
            fh.write(f"# {k}: {v}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "state", "hex"])
        for t, x in enumerate(traj):
            w.writerow([t, x.to_pm(), x.to_hex()])
    for row in raster(traj):
        click.echo(row)


@cli.command()
@click.argument("perm", type=PERM, required=False)
@click.option("--perm", "perm_opt", type=PERM, default=None)
def canon(perm, perm_opt):
    """Print the canonical permutation identifier (CPID)."""
    p = perm or perm_opt
    if p is None:
        raise click.UsageError("a permutation is required")
    click.echo(str(cpid(p)))


@cli.command(name="analyze")
@net_options
@click.option("--max-n", type=int, default=DEFAULT_MAX_N, show_default=True)
@click.option("--out", default="-", help="Output JSON path ('-' for stdout).")
def analyze_cmd(n, cn, perm, max_n, out):
    """Exhaustive attractor report as JSON."""
    net = _net(n, cn, perm)
    report = analyze(net, max_n=max_n)
    doc = report.to_dict()
    doc["manifest"] = RunManifest("analyze", {"n": net.n, "cn": cn, "perm": str(perm), "max_n": max_n}).to_dict()
    _write_json(doc, out)


@cli.command(name="search")
@click.option("--n", "n", type=int, default=17, show_default=True)
@click.option("--cn", type=click.IntRange(0, 7), default=1, show_default=True)
@click.option("--m", type=click.IntRange(min=1), default=50, show_default=True, help="Population size M.")
@click.option("--gm1", type=click.IntRange(min=0), default=1000, show_default=True, help="Part 1 generation cap.")
@click.option("--me", type=click.IntRange(min=1), default=50, show_default=True, help="EP sample size M_e.")
@click.option("--gmax", type=click.IntRange(min=0), default=1000, show_default=True, help="Part 2 generations.")
@click.option("--seed", type=int, default=None, help="RNG seed; generated and printed when omitted.")
@click.option("--threads", type=click.IntRange(min=1), default=1, envvar="PBNN_THREADS", show_default=True)
@click.option("--max-n", type=int, default=DEFAULT_MAX_N, show_default=True)
@click.option("--outdir", type=click.Path(file_okay=False), default=".", show_default=True)
@click.option("--no-audit", is_flag=True, help="Skip re-analysis of every archived CPID.")
def search_cmd(n, cn, m, gm1, me, gmax, seed, threads, max_n, outdir, no_audit):
    """Two-part evolutionary search; writes ep.json and generations.csv."""
    if seed is None:
        seed = secrets.randbits(32)
        click.echo(f"seed: {seed}", err=True)
    config = SearchConfig(n=n, cn=cn, m=m, g_m1=gm1, m_e=me, g_max=gmax, seed=seed, max_n=max_n)
    manifest = RunManifest(
        "search",
        {"n": n, "cn": cn, "m": m, "gm1": gm1, "me": me, "gmax": gmax, "max_n": max_n, "rng": RNG_NAME},
        seed,
    )
    d = Path(outdir)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "generations.csv", "w", newline="") as fh:
        for k, v in manifest.header().items():
            fh.write(f"# {k}: {v}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["part", "generation", "best_f1_num", "ep_size", "cache_hits"])
        result = search(
            config, threads=threads,
            on_generation=lambda r: w.writerow([r.part, r.generation, r.best_f1_num, r.ep_size, r.cache_hits]),
        )
    if not no_audit:
        problems = audit(result.ep, n, cn, max_n)
        if problems:
            raise RuntimeError("EP audit failed: " + "; ".join(problems))
    doc = {"manifest": manifest.to_dict(), "entries": result.ep.to_list()}
    _write_json(doc, d / "ep.json")
    status = "found" if result.found_in_part1 else "exhausted"
    click.echo(
        f"part 1 {status} at generation {result.part1_generation}; "
        f"EP size {len(result.ep)}; evaluations {result.evaluations}; cache hits {result.cache_hits}"
    )


@cli.command()
@click.argument("ep_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", default="-", help="Output CSV path ('-' for stdout).")
@click.option("--distinct-periods", is_flag=True, help="Count each period once instead of once per CPID.")
def dist(ep_file, out, distinct_periods):
    """Cumulative period distribution of an EP dump as CSV."""
    entries = load_ep(ep_file)
    d = cumulative_distribution((e["period"] for e in entries), distinct_periods=distinct_periods)
    manifest = RunManifest("dist", {"ep_file": str(ep_file), "distinct_periods": distinct_periods})
    meta = manifest.header() | {"p_max": str(d.p_max)}
    if out == "-":
        lines = [f"# {k}: {v}" for k, v in meta.items()] + ["period,cumulative_count"]
        click.echo("\n".join(lines + [f"{p},{c}" for p, c in d.points]))
    else:
        export_distribution_csv(d, out, meta)


@cli.command(name="emit-hdl")
@net_options
@click.option("--outdir", type=click.Path(file_okay=False), required=True)
def emit_hdl(n, cn, perm, outdir):
    """Write HL.sv, OL.sv and a metadata sidecar."""
    net = _net(n, cn, perm)
    manifest = RunManifest("emit-hdl", {"n": net.n, "cn": cn, "perm": str(perm)})
    for path in emit(net, manifest.header()).write(outdir):
        click.echo(str(path))


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="pbnn", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as e:
        e.show()
        return 1
    except ExhaustiveBoundError as e:
        click.echo(f"refused: {e}", err=True)
        return 2
    except (SchemaError, PermutationError, StateError, ValueError) as e:
        click.echo(f"error: {e}", err=True)
        return 1
    except (RuntimeError, OSError) as e:
        click.echo(f"failed: {e}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
