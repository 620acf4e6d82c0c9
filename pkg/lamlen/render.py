from typing import Any, Dict, Iterable, List, Optional, Sequence

from rich import box
from rich.table import Table
from rich.text import Text

from lamlen.closedform import ClosedFormDistribution
from lamlen.farey import FareyTriangle
from lamlen.models import SummaryReport
from lamlen.presets import Preset
from lamlen.stats import MomentEstimate


def _fmt(x: Optional[float], digits: int = 10) -> str:
    if x is None:
        return "-"
    return f"{x:.{digits}g}"


class Render:
    def _status(self, passed: bool) -> Text:
        return Text("✔ pass", style="bold green") if passed else Text("✗ fail", style="bold red")

    def criteria_table(self, report: SummaryReport) -> Table:
        """One row per pass/fail criterion of a report"""
        table = Table(
            title=f"{report.experiment} criteria", show_header=True, header_style="bold magenta", box=box.ROUNDED
        )
        table.add_column("Criterion", style="cyan")
        table.add_column("Value", justify="right")
        table.add_column("Target", justify="right")
        table.add_column("Threshold", justify="right")
        table.add_column("Status", justify="center")
        for c in report.criteria:
            table.add_row(c.name, _fmt(c.value), _fmt(c.target), _fmt(c.threshold, 3), self._status(c.passed))
        return table

    def moments_table(self, moments: Sequence[MomentEstimate]) -> Table:
        table = Table(title="Moments", show_header=True, header_style="bold magenta", box=box.ROUNDED)
        table.add_column("n", justify="right", style="cyan")
        table.add_column("Estimate", justify="right")
        table.add_column("Std. error", justify="right")
        table.add_column("Closed form", justify="right")
        table.add_column("Deviation (σ)", justify="right")
        for m in moments:
            deviation = m.deviation
            table.add_row(
                str(m.order),
                _fmt(m.estimate),
                _fmt(m.stderr, 3),
                _fmt(m.target),
                "-" if deviation is None else f"{deviation:.2f}",
            )
        return table

    def extras_table(self, extras: Dict[str, float]) -> Table:
        table = Table(show_header=False, box=box.SIMPLE)
        table.add_column("Quantity", style="yellow")
        table.add_column("Value", justify="right")
        for name, value in extras.items():
            table.add_row(name, _fmt(value))
        return table

    def density_table(self, dist: ClosedFormDistribution, xs: Iterable[float]) -> Table:
        table = Table(
            title=f"{dist.kind.value}: {dist.scale:.6g} x^{dist.power} / sinh²x",
            show_header=True,
            header_style="bold magenta",
            box=box.ROUNDED,
        )
        table.add_column("x", justify="right", style="cyan")
        table.add_column("density", justify="right")
        table.add_column("mass of [x, ∞)", justify="right")
        if dist.is_probability:
            table.add_column("cdf", justify="right")
        for x in xs:
            row = [_fmt(x), _fmt(float(dist.density(x)), 15), _fmt(float(dist.survival(x)), 15)]
            if dist.is_probability:
                row.append(_fmt(float(dist.cdf(x)), 15))
            table.add_row(*row)
        return table

    def segments_table(
        self, lengths: Sequence[float], triangles: Optional[Sequence[FareyTriangle]] = None, limit: int = 20
    ) -> Table:
        """The first `limit` chords of a trace"""
        table = Table(show_header=True, header_style="bold magenta", box=box.ROUNDED)
        table.add_column("#", justify="right", style="dim")
        table.add_column("Chord length", justify="right")
        if triangles is not None:
            table.add_column("Triangle", style="cyan")
        for k, length in enumerate(lengths[:limit]):
            row = [str(k + 1), _fmt(length, 15)]
            if triangles is not None:
                row.append(", ".join(triangles[k].fractions()))
            table.add_row(*row)
        return table

    def presets_table(self, presets: List[Preset]) -> Table:
        table = Table(show_header=True, header_style="bold magenta")
        table.add_column("Name", style="cyan", width=10)
        table.add_column("Category", style="yellow", width=12)
        table.add_column("Description", style="white")
        table.add_column("Experiments", style="green")
        for preset in presets:
            table.add_row(preset.name, preset.category, preset.description, ", ".join(sorted(preset.experiments)))
        return table

    def config_table(self, config: Dict[str, Any]) -> Table:
        table = Table(show_header=True, header_style="bold magenta", box=box.ROUNDED)
        table.add_column("Key", style="cyan")
        table.add_column("Value")
        for key, value in config.items():
            if isinstance(value, dict):
                for name, inner in value.items():
                    table.add_row(f"{key}.{name}", str(inner))
            else:
                table.add_row(key, str(value))
        return table
