import math

import click
from rich.console import Console
from rich.panel import Panel

from lamlen import __version__
from lamlen.closedform import ClosedFormDistribution, moment_P
from lamlen.config import Config
from lamlen.errors import STATISTICAL_FAILURE_EXIT, LamlenError
from lamlen.experiments import run_experiment
from lamlen.farey import TerminationReason, closed_geodesic_from_word, periodic_trace, trace as trace_geodesic
from lamlen.hypcore import Geodesic
from lamlen.ideal_triangle import (
    INSCRIBED_DISK_DIAMETER,
    STANDARD_TRIANGLE,
    IdealTriangle,
    chord_endpoints_oracle,
    chord_length,
)
from lamlen.logs import setup_logging
from lamlen.models import EXPERIMENTS, ExperimentConfig
from lamlen.presets import PresetManager
from lamlen.render import Render
from lamlen.report import ReportWriter
from lamlen.sampling import WINDOW_SCHEMES

console = Console()
config = Config()
render = Render()


def _fail(ctx: click.Context, error: LamlenError) -> None:
    console.print(f"[red]✗[/] {error}")
    ctx.exit(error.exit_code)


def build_config(experiment: str, options: dict, **overrides) -> ExperimentConfig:
    """Experiment parameters: CLI flags over preset values over the user configuration"""
    params = {
        "seed": config.get("seed"),
        "output_dir": config.get("output_dir"),
        "jobs": config.get("jobs"),
        "chunk_size": config.get("chunk_size"),
        "step_budget": config.get("step_budget"),
        "quad_tolerance": config.get("quad_tolerance"),
        "scheme": config.get("window_scheme"),
        "thresholds": config.thresholds,
    }
    if options.get("preset"):
        params.update(PresetManager().parameters(options["preset"], experiment))

    flags = {
        "seed": options.get("seed"),
        "output_dir": options.get("out"),
        "samples": options.get("samples"),
        "window": options.get("window"),
        "bins": options.get("bins"),
        "jobs": options.get("jobs"),
        **overrides,
    }
    params.update({key: value for key, value in flags.items() if value is not None})
    return ExperimentConfig.from_dict({"experiment": experiment, **params})


@click.group(invoke_without_command=True)
@click.option("--seed", type=int, help="Master seed of all random streams")
@click.option("--out", type=click.Path(file_okay=False), help="Output directory (default: $LAMLEN_OUT or config)")
@click.option("--samples", type=int, help="Sample count (E1, E4)")
@click.option("--range", "window", type=float, nargs=2, help="Window a b (histogram, sampling or restriction range)")
@click.option("--bins", type=int, help="Histogram bin count (at least 10)")
@click.option("--jobs", type=int, help="Worker processes")
@click.option("--preset", help="Named parameter preset (see 'lamlen presets')")
@click.option("--verbose", "-v", is_flag=True, help="Debug logging")
@click.version_option(version=__version__, prog_name="lamlen")
@click.pass_context
def main(ctx, seed, out, samples, window, bins, jobs, preset, verbose):
    """lamlen - intersection lengths of random geodesics with laminations

    Run an experiment, evaluate the closed-form measures M, M_T and P, or trace
    geodesics through the Farey tessellation.
    """
    setup_logging(verbose)
    ctx.ensure_object(dict)
    ctx.obj.update(seed=seed, out=out, samples=samples, window=window, bins=bins, jobs=jobs, preset=preset)
    if ctx.invoked_subcommand is None:
        console.print(ctx.get_help())


@main.command()
@click.argument("experiment_id", type=click.Choice(list(EXPERIMENTS), case_sensitive=False))
@click.option("--raw", is_flag=True, help="Also write the raw samples as CSV")
@click.option("--budget", type=float, help="Length budget of each flow geodesic (E2)")
@click.option("--geodesics", type=int, help="Number of flow geodesics (E2)")
@click.option("--scheme", type=click.Choice(WINDOW_SCHEMES), help="Window sampler (E4)")
@click.option("--proposals", type=int, help="Proposals per sector for the mass estimates (E4)")
@click.option("--words", type=int, help="Number of random words (E5)")
@click.option("--word-length", type=int, help="Length of each random word (E5)")
@click.option("--yaml", "yaml_report", is_flag=True, help="Also write the summary as YAML")
@click.pass_context
def experiment(ctx, experiment_id, raw, budget, geodesics, scheme, proposals, words, word_length, yaml_report):
    """Run experiment E1..E5 and write its CSV and JSON files

    \b
      E1  chord lengths of random tangent vectors in an ideal triangle vs P
      E2  one long Farey trace: length-weighted vs P, count-weighted vs M
      E3  moment, antiderivative and polylog identities by quadrature
      E4  Liouville geodesics with chord length in a window, six sectors
      E5  periodic traces of random closed geodesics vs M
    """
    experiment_id = experiment_id.upper()
    try:
        cfg = build_config(
            experiment_id,
            ctx.obj,
            raw=raw or None,
            length_budget=budget,
            geodesics=geodesics,
            scheme=scheme,
            proposals=proposals,
            words=words,
            word_length=word_length,
        )
        writer = ReportWriter(cfg.output_dir, cfg.experiment)
        with console.status(f"[cyan]Running {cfg.experiment} ({cfg.name})...[/]"):
            report = run_experiment(cfg, writer, yaml_report)
    except LamlenError as e:
        _fail(ctx, e)
        return

    console.print(render.criteria_table(report))
    if report.moments:
        console.print(render.moments_table(report.moments))
    if report.extras:
        console.print(render.extras_table(report.extras))
    for path in writer.written:
        console.print(f"[dim]  wrote {path}[/]")

    if report.passed:
        console.print(f"[green]✔[/] {cfg.experiment} passed in {report.runtime:.2f} s")
    else:
        failed = ", ".join(c.name for c in report.criteria if not c.passed)
        console.print(f"[red]✗[/] {cfg.experiment} failed ({failed}) in {report.runtime:.2f} s")
        ctx.exit(STATISTICAL_FAILURE_EXIT)


@main.command()
@click.argument("kind", type=click.Choice(["M", "P", "MT"], case_sensitive=False))
@click.option("--at", "points", type=float, multiple=True, required=True, help="Evaluation point (repeatable)")
@click.pass_context
def density(ctx, kind, points):
    """Density and tail mass of M, P or M_T"""
    try:
        table = render.density_table(ClosedFormDistribution.of(kind.upper()), points)
    except LamlenError as e:
        _fail(ctx, e)
        return
    console.print(table)


@main.command()
@click.option("--n", "order", type=int, required=True, help="Moment order")
@click.option("--kind", type=click.Choice(["M", "P", "MT"], case_sensitive=False), default="P", show_default=True)
@click.pass_context
def moment(ctx, order, kind):
    """Closed-form moment ∫ x^n d(kind)"""
    try:
        value = ClosedFormDistribution.of(kind.upper()).moment(order)
    except LamlenError as e:
        _fail(ctx, e)
        return

    console.print(f"[bold cyan]∫ x^{order} d{kind.upper()}[/] = {value!r}")
    if kind.upper() == "P" and order == 1:
        gap = INSCRIBED_DISK_DIAMETER - moment_P(1)
        console.print(f"[dim]ln 3 (inscribed disk diameter) exceeds the mean chord by {gap:.6f}[/]")


@main.command()
@click.option("--u", type=float, required=True, help="Backward endpoint (inf allowed)")
@click.option("--v", type=float, required=True, help="Forward endpoint (inf allowed)")
@click.option("--triangle", type=float, nargs=3, help="Vertices of the triangle (default 0 1 inf)")
@click.pass_context
def chord(ctx, u, v, triangle):
    """Length of the chord cut from a geodesic by an ideal triangle"""
    try:
        target = IdealTriangle.of(*triangle) if triangle else STANDARD_TRIANGLE
        g = Geodesic.of(u, v)
        length = chord_length(g, target, config.get("vertex_tolerance"))
        oracle = chord_endpoints_oracle(g, target, config.get("vertex_tolerance"))
    except LamlenError as e:
        _fail(ctx, e)
        return

    console.print(f"[bold cyan]L(g)[/] = {length!r}")
    if oracle.length is not None:
        console.print(f"[dim]direct intersection: {oracle.length!r}[/]")
    elif math.isinf(length):
        console.print("[yellow]⚠[/] The geodesic runs into a cusp of the triangle")


@main.command()
@click.option("--u", type=float, required=True, help="Backward endpoint")
@click.option("--v", type=float, required=True, help="Forward endpoint")
@click.option("--budget", type=float, default=100.0, show_default=True, help="Length budget")
@click.option("--segments", "limit", type=int, default=20, show_default=True, help="Chords to list")
@click.option("--triangles", is_flag=True, help="List the crossed Farey triangles")
@click.pass_context
def trace(ctx, u, v, budget, limit, triangles):
    """Trace a geodesic through the Farey tessellation"""
    try:
        result = trace_geodesic(
            Geodesic.of(u, v), budget, step_budget=config.get("step_budget"), record_triangles=triangles
        )
    except LamlenError as e:
        _fail(ctx, e)
        return

    summary = (
        f"[yellow]Segments:[/] {len(result.lengths)}\n"
        f"[yellow]Sum of chords:[/] {result.length_sum!r}\n"
        f"[yellow]Arclength between first and last edge:[/] {result.total_param_length!r}\n"
        f"[yellow]Relative additivity error:[/] {result.additivity_error:.3g}\n"
        f"[yellow]Stopped by:[/] {result.terminated_reason.value}"
    )
    console.print(Panel.fit(summary, title=f"trace ({u!r}, {v!r})", border_style="cyan"))
    if result.lengths:
        console.print(render.segments_table(result.lengths, result.triangles, limit))
    if result.terminated_reason is TerminationReason.STEP_BUDGET:
        steps = config.get("step_budget")
        console.print(f"[yellow]⚠[/] Step budget of {steps} triangles reached before the length budget")


@main.command(name="closed-geodesic")
@click.option("--word", required=True, help="Word in L = [[1,0],[1,1]] and R = [[1,1],[0,1]], e.g. LRLL")
@click.option("--segments", "limit", type=int, default=20, show_default=True, help="Chords to list")
@click.pass_context
def closed_geodesic(ctx, word, limit):
    """Chords of one period of the closed geodesic of a word"""
    try:
        spec = closed_geodesic_from_word(word)
        current = periodic_trace(spec, step_budget=config.get("step_budget"))
    except LamlenError as e:
        _fail(ctx, e)
        return

    a, b, c, d = spec.matrix
    summary = (
        f"[yellow]Matrix:[/] [[{a}, {b}], [{c}, {d}]]  (trace {spec.trace})\n"
        f"[yellow]Length l(α):[/] {spec.length!r}\n"
        f"[yellow]Segments per period:[/] {len(current.lengths)}\n"
        f"[yellow]Relative additivity error:[/] {current.additivity_error:.3g}\n"
        f"[yellow]Start triangle:[/] {', '.join(current.start.fractions())}"
    )
    console.print(Panel.fit(summary, title=f"closed geodesic {word.upper()}", border_style="cyan"))
    console.print(render.segments_table(current.lengths, limit=limit))


@main.command()
def presets():
    """List experiment presets"""
    available = PresetManager().list_presets()
    if not available:
        console.print("[yellow]No presets found.[/]")
        return
    console.print(render.presets_table(available))
    console.print("\n[dim]💡 Use 'lamlen --preset <name> experiment <E1..E5>' to run with a preset[/]")


@main.group(name="config")
def config_group():
    """Show or change the stored defaults"""
    pass


@config_group.command()
def show():
    """Show the effective configuration"""
    effective = dict(config.config)
    effective["output_dir"] = config.get("output_dir")
    console.print(render.config_table(effective))
    console.print(f"[dim]Stored in {config.config_path}[/]")


@config_group.command(name="set")
@click.argument("key")
@click.argument("value")
@click.pass_context
def set_value(ctx, key, value):
    """Set KEY to VALUE (thresholds as thresholds.<name>)"""
    try:
        config.set(key, value)
    except LamlenError as e:
        _fail(ctx, e)
        return
    console.print(f"[green]✔[/] {key} = {config.get(key)!r}")


if __name__ == "__main__":
    main()
