"""census-synth command line: generate, validate, report, inspect."""
import time
from pathlib import Path
from typing import Callable, List, Mapping, Optional, Tuple

import pandas as pd
import typer

from app.config import CliInvocation, FidelityTolerances, Subcommand, make_invocation
from app.errors import CensusSynthError, DescriptorError, IoFailure, UnknownGenerator
from app.logic.catalog import PERSON_CENSUS, AttributeGenerator, GeneratorKind, NamePart, catalog_for
from app.logic.engine import generate_dataset
from app.logic.fixture_set import FixtureSet
from app.logic.plan import GenerationPlan, build_plan
from app.logic.schema import DescriptorModel, parse_descriptor
from app.services.export import CsvLayout, export_csv
from app.services.fixtures import load_fixtures, load_plan_fixtures, resolve_fixture_dir, summarize_tables
from app.services.report import (
    column_fields,
    default_report_prefix,
    default_specs,
    fidelity_report,
    format_table,
    parse_attribute_option,
    read_dataset,
    write_report,
)
from app.utils.format import fmt_count, fmt_share
from app.utils.log import configure_logging, get_logger

logger = get_logger("census_synth")

app = typer.Typer(add_completion=False, no_args_is_help=True, help="Schema-driven synthetic census microdata.")

EXIT_REPORT_FAILED = 4


# ---------- loading ----------
def load_descriptor(path: Path) -> DescriptorModel:
    try:
        data = Path(path).read_bytes()
    except FileNotFoundError:
        raise DescriptorError("descriptor not found", source=str(path)) from None
    except OSError as e:
        raise IoFailure(f"cannot read descriptor: {e.strerror or e}", source=str(path)) from e
    return parse_descriptor(data, source=str(path))


def _region(model: Optional[DescriptorModel]) -> str:
    if model is None:
        return ""
    for var in model.variables:
        if var.dataset_region:
            return var.dataset_region
    return model.dataset_region


def _catalog(model: Optional[DescriptorModel]) -> Mapping[str, AttributeGenerator]:
    if model is None or not model.variables:
        return PERSON_CENSUS
    generator_id = model.variables[0].generator_id
    found = catalog_for(generator_id)
    if found is None:
        raise UnknownGenerator(f"no generator named {generator_id!r}")
    return found


def output_path(inv: CliInvocation, model: Optional[DescriptorModel]) -> Path:
    """--output, else the consumer uri relative to the descriptor's directory."""
    if inv.output_override is not None:
        return inv.output_override
    uri = Path(model.consumer.uri)
    return uri if uri.is_absolute() else inv.descriptor_path.parent / uri


def _prepare(inv: CliInvocation) -> Tuple[DescriptorModel, GenerationPlan, FixtureSet, CsvLayout]:
    model = load_descriptor(inv.descriptor_path)
    plan = build_plan(model)
    fixtures = load_plan_fixtures(resolve_fixture_dir(inv.fixtures_dir, _region(model)), plan)
    layout = CsvLayout.bind(output_path(inv, model), model.consumer.columns, plan.attribute_names)
    return model, plan, fixtures, layout


def _fixture_summary(gen: AttributeGenerator, fixtures: FixtureSet) -> str:
    if gen.kind in (GeneratorKind.INDEPENDENT, GeneratorKind.DERIVED):
        dist = fixtures.distribution_for(gen)
        return f"{len(dist.categories)} categories, total {fmt_count(dist.total_weight)}"
    if gen.kind is GeneratorKind.NAME_PART:
        tables = fixtures.given_names if gen.part is NamePart.GIVEN else fixtures.family_names
        return f"{len(tables)} name tables"
    grouped = fixtures.grouped_for(gen)
    return f"{len(grouped.groups)} groups, {len(grouped.domain)} categories"


# ---------- commands ----------
def cmd_generate(inv: CliInvocation) -> int:
    model, plan, fixtures, layout = _prepare(inv)
    count = inv.count_override or model.count
    started = time.perf_counter()
    records = generate_dataset(plan, count, inv.seed, fixtures, threads=inv.threads)
    summary = export_csv(records, layout)
    logger.info(
        "generated records=%d elapsed=%.2fs seed=%d output=%s",
        summary.rows, time.perf_counter() - started, inv.seed, summary.path,
    )
    return 0


def cmd_validate(inv: CliInvocation) -> int:
    model, plan, fixtures, layout = _prepare(inv)
    typer.echo(f"entity {plan.entity_type}: {fmt_count(model.count)} records -> {layout.path}")
    typer.echo("plan order:")
    for i, gen in enumerate(plan.generators, start=1):
        deps = ", ".join(sorted(gen.depends_on)) or "-"
        node = f"{gen.node_id} (hidden)" if gen.node_id in plan.hidden else gen.node_id
        typer.echo(f"  {i:2d}. {node:<28} {gen.kind.value:<17} after: {deps:<22} {_fixture_summary(gen, fixtures)}")
    typer.echo("attributes: " + ", ".join(plan.attribute_order()))
    return 0


def cmd_report(inv: CliInvocation) -> int:
    model = load_descriptor(inv.descriptor_path) if inv.descriptor_path else None
    dataset = output_path(inv, model)
    catalog = _catalog(model)

    df = read_dataset(dataset)
    col_fields = column_fields(list(df.columns), catalog, model)
    specs = [parse_attribute_option(a, col_fields) for a in inv.attributes] or default_specs(col_fields)
    root = resolve_fixture_dir(inv.fixtures_dir, _region(model))
    fixtures = load_fixtures(root, [s.field for s in specs] + [catalog["age"], catalog["gender"]])

    report = fidelity_report(df, fixtures, specs, catalog, FidelityTolerances(), source=str(dataset))
    tsv, txt = write_report(report, inv.report_out or default_report_prefix(dataset))
    typer.echo(format_table(report), nl=False)

    failed = sum(e.status == "fail" for e in report.entries)
    logger.info("report entries=%d failed=%d written=%s,%s", len(report.entries), failed, tsv, txt)
    return 0 if report.passed else EXIT_REPORT_FAILED


def cmd_inspect(inv: CliInvocation) -> int:
    rows = []
    for s in summarize_tables(inv.fixtures_dir):
        top = ", ".join(f"{c} ({fmt_share(w, s.total_weight)})" for c, w in s.top)
        rows.append({
            "table": s.name,
            "categories": s.categories,
            "zero": s.zero_weight,
            "total": fmt_count(s.total_weight),
            "top": top,
        })
    typer.echo(pd.DataFrame(rows).to_string(index=False))
    return 0


def _run(cmd: Callable[[CliInvocation], int], verbose: bool, **fields) -> None:
    configure_logging("DEBUG" if verbose else "INFO")
    try:
        code = cmd(make_invocation(**fields))
    except CensusSynthError as e:
        logger.error("%s", e)
        raise typer.Exit(e.exit_code) from None
    raise typer.Exit(code)


# ---------- typer wiring ----------
_DESCRIPTOR = typer.Option(None, "-d", "--descriptor", help="Descriptor XML.")
_FIXTURES = typer.Option(None, "-f", "--fixtures", help="Fixture root; <root>/<dataset> is used when present.")
_SEED = typer.Option("0", "--seed", help="Master seed, decimal or 0x-hex.")
_OUTPUT = typer.Option(None, "-o", "--output", help="CSV path, overriding the consumer uri.")
_VERBOSE = typer.Option(False, "-v", "--verbose", help="Debug logging.")


@app.command()
def generate(
    descriptor: Optional[Path] = _DESCRIPTOR,
    fixtures: Optional[Path] = _FIXTURES,
    seed: str = _SEED,
    count: Optional[int] = typer.Option(None, "--count", help="Record count, overriding the descriptor."),
    output: Optional[Path] = _OUTPUT,
    threads: int = typer.Option(1, "--threads", help="Worker threads; output is identical for any value."),
    verbose: bool = _VERBOSE,
) -> None:
    """Generate a dataset."""
    _run(
        cmd_generate, verbose,
        subcommand=Subcommand.GENERATE, descriptor_path=descriptor, fixtures_dir=fixtures,
        seed=seed, count_override=count, output_override=output, threads=threads,
    )


@app.command()
def validate(
    descriptor: Optional[Path] = _DESCRIPTOR,
    fixtures: Optional[Path] = _FIXTURES,
    verbose: bool = _VERBOSE,
) -> None:
    """Check descriptor, fixtures and plan without generating."""
    _run(cmd_validate, verbose, subcommand=Subcommand.VALIDATE, descriptor_path=descriptor, fixtures_dir=fixtures)


@app.command()
def report(
    descriptor: Optional[Path] = _DESCRIPTOR,
    fixtures: Optional[Path] = _FIXTURES,
    output: Optional[Path] = typer.Option(None, "-o", "--output", help="Dataset to check, overriding the consumer uri."),
    report_out: Optional[Path] = typer.Option(None, "--report-out", help="Writes PREFIX.tsv and PREFIX.txt."),
    attribute: Optional[List[str]] = typer.Option(None, "--attribute", help="COLUMN[:none|age|age_gender], repeatable."),
    verbose: bool = _VERBOSE,
) -> None:
    """Compare a dataset with its fixture distributions. Exits 4 when an entry fails."""
    _run(
        cmd_report, verbose,
        subcommand=Subcommand.REPORT, descriptor_path=descriptor, fixtures_dir=fixtures,
        output_override=output, report_out=report_out, attributes=tuple(attribute or ()),
    )


@app.command()
def inspect(
    fixtures: Optional[Path] = _FIXTURES,
    verbose: bool = _VERBOSE,
) -> None:
    """Summarize every weight table in a fixture directory."""
    _run(cmd_inspect, verbose, subcommand=Subcommand.INSPECT, fixtures_dir=fixtures)


def main() -> None:
    app()


if __name__ == "__main__":
    main()
