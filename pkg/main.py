"""
Main Module - Command-line orchestration and the cross-check workflow

Loads a root datum and a problem file, dispatches to the engine modules and
prints a deterministic report. The cross-check runs the exact solver and the
lattice oracle as a small graph: exact -> oracle -> compare.
"""

import json
import logging
import random
import sys
from functools import wraps
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Type

import click
from joblib import Memory
from langgraph.graph import StateGraph
from pydantic import BaseModel

import config
import schemas
from building import ConvexSubset, centre_in_apartment, simplex_cone, verify_centre, zeta
from cones import with_assumptions
from errors import CrossCheckDisagreement, InputError, KempfError
from instability import destab_cone, instability_pairs, optimal_instability, scan_vectors
from optimize import (
    DISAGREE,
    ORACLE_BOUND_ONLY,
    OptimalClass,
    compare_with_oracle,
    family_max,
    family_pairs,
    functoriality_holds,
    oracle_family_max,
)
from rootdatum import RootDatum, element_from_word, validate_datum, weyl_group

logger = logging.getLogger(__name__)

# Oracle scans are cached on disk only when KEMPF_CACHE_DIR is set
memory = Memory(config.CACHE_DIR, verbose=0)


@memory.cache
def cached_oracle(pairs, gram, radius: int, budget: int):
    """Oracle scan over a family of pairs, cached by joblib."""
    return oracle_family_max(pairs, gram, radius, budget)


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def read_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise InputError(f"invalid JSON ({e.msg} at line {e.lineno})", field=Path(path).name)
    except OSError as e:
        raise InputError(str(e), field=Path(path).name)


def load_datum(path: str, check: bool = True) -> RootDatum:
    datum = schemas.load_model(schemas.DatumModel, read_json(path)).to_datum()
    if check:
        violations = validate_datum(datum)
        if violations:
            raise InputError(violations[0].message, field=violations[0].field)
    return datum


def load_subset(model: schemas.SubsetModel, datum: RootDatum) -> ConvexSubset:
    cone = model.cone.to_cone()
    if cone.dim != datum.rank:
        raise InputError(f"cone has dimension {cone.dim}, datum has rank {datum.rank}", field="cone.dim")
    cone = with_assumptions(cone, model.saturated, model.finite_type)
    stabilizer = tuple(element_from_word(datum, w.weyl_word) for w in model.stabilizer)
    return ConvexSubset(cone, stabilizer, model.saturated, model.finite_type)


def problem_pairs(model: schemas.ProblemModel, datum: RootDatum) -> Tuple[list, list, list]:
    """(pairs, identifications, gram) from explicit pairs or from a (xi, upsilon) family."""
    gram = model.gram if model.gram is not None else [list(row) for row in datum.gram]
    equations = [schemas.parse_vector(e) for e in model.equations]
    if model.pairs is not None:
        ordered = sorted(model.pairs, key=lambda p: p.index)
        if [p.index for p in ordered] != list(range(len(ordered))):
            raise InputError("pair indices must be 0..k-1", field="pairs")
        pairs = []
        for p in ordered:
            a = [schemas.parse_vector(x) for x in p.A]
            a += equations + [tuple(-c for c in e) for e in equations]
            pairs.append((a, [schemas.parse_vector(x) for x in p.B]))
        identifications = None
        if model.identifications is not None:
            identifications = [element_from_word(datum, w.weyl_word) for w in model.identifications]
        return pairs, identifications, gram
    if model.xi is None or model.upsilon is None:
        raise InputError("give pairs, or both xi and upsilon", field="pairs")
    pairs, identifications = family_pairs(model.xi.to_family(datum), model.upsilon.to_family(datum))
    pairs = [
        (list(a) + equations + [tuple(-c for c in e) for e in equations], list(b))
        for a, b in pairs
    ]
    return pairs, identifications, gram


def instability_inputs(model: schemas.InstabilityModel, datum: RootDatum) -> Dict[str, Any]:
    rep = model.representation.to_representation()
    upsilon = None
    if model.mode == "state":
        if model.upsilon is None:
            raise InputError("state mode needs an upsilon", field="upsilon")
        upsilon = model.upsilon.to_family(datum)
    return {
        "rep": rep,
        "vectors": model.vectors_for(rep),
        "d": datum,
        "upsilon": upsilon,
        "transforms": model.transforms_for(rep, datum),
        "equations": [schemas.parse_vector(e) for e in model.equations],
    }


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def render_text(payload: Any, indent: int = 0) -> List[str]:
    pad = "  " * indent
    lines = []
    if isinstance(payload, dict):
        for key in sorted(payload):
            value = payload[key]
            if isinstance(value, (dict, list)) and value:
                lines.append(f"{pad}{key}:")
                lines.extend(render_text(value, indent + 1))
            else:
                lines.append(f"{pad}{key}: {json.dumps(value)}")
    elif isinstance(payload, list):
        for item in payload:
            if isinstance(item, dict):
                lines.append(f"{pad}-")
                lines.extend(render_text(item, indent + 1))
            else:
                lines.append(f"{pad}- {json.dumps(item)}")
    else:
        lines.append(f"{pad}{json.dumps(payload)}")
    return lines


def emit(model: Type[BaseModel], payload: dict, fmt: str) -> None:
    """Check the report against its schema, then print it."""
    model.model_validate(payload)
    if fmt == "text":
        click.echo("\n".join(render_text(payload)))
    else:
        click.echo(json.dumps(payload, sort_keys=True, indent=2))


def handle_errors(func):
    """Map engine errors onto exit codes."""
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except KempfError as e:
            logger.error("%s failed: %s", func.__name__, e)
            click.echo(f"error: {e}", err=True)
            sys.exit(e.exit_code)
    return wrapper


# ---------------------------------------------------------------------------
# Cross-check workflow
# ---------------------------------------------------------------------------

def exact_node(state):
    """Solve exactly and record the pairs the oracle will scan."""
    datum = state["datum"]
    if state["task"] == "instability":
        model = schemas.load_model(schemas.InstabilityModel, state["payload"])
        inputs = instability_inputs(model, datum)
        pairs, identifications = instability_pairs(**inputs)
        gram = [list(row) for row in datum.gram]
    else:
        model = schemas.load_model(schemas.ProblemModel, state["payload"])
        pairs, identifications, gram = problem_pairs(model, datum)
    state["pairs"] = pairs
    state["gram"] = gram
    state["identifications"] = identifications
    state["exact"] = family_max(pairs, gram, datum if gram_matches(gram, datum) else None, identifications)
    return state


def oracle_node(state):
    """Scan the lattice ball for every pair."""
    state["oracle"] = cached_oracle(state["pairs"], state["gram"], state["radius"], state["budget"])
    return state


def compare_node(state):
    """Compare the two optima and, with a seed, spot-check functoriality."""
    exact: OptimalClass = state["exact"]
    oracle = state["oracle"]
    verdict = compare_with_oracle(exact, oracle, state["gram"], state["radius"])
    exact_text = str(exact.m_squared) if exact.m_squared is not None else exact.kind
    oracle_text = str(oracle.ratio_squared) if oracle.ratio_squared is not None else oracle.kind
    if verdict == ORACLE_BOUND_ONLY:
        message = f"oracle bound only: {oracle_text} <= {exact_text}, optimal ray lies outside radius {state['radius']}"
    else:
        message = f"{exact_text} vs {oracle_text}"
    state["verdict"] = verdict
    state["message"] = message

    state["functoriality"] = None
    if state.get("seed") is not None and gram_matches(state["gram"], state["datum"]):
        rng = random.Random(state["seed"])
        group = weyl_group(state["datum"])
        w = rng.choice(group)
        state["functoriality"] = all(
            functoriality_holds(a, b, state["gram"], w) for a, b in state["pairs"]
        )
    return state


def gram_matches(gram, datum: RootDatum) -> bool:
    return [list(row) for row in gram] == [list(row) for row in datum.gram]


workflow = StateGraph(dict)
workflow.add_node("exact", exact_node)
workflow.add_node("oracle", oracle_node)
workflow.add_node("compare", compare_node)
workflow.add_edge("exact", "oracle")
workflow.add_edge("oracle", "compare")
workflow.set_entry_point("exact")
workflow.set_finish_point("compare")
app = workflow.compile()


def run_cross_check(
    datum: RootDatum,
    payload: Any,
    task: str = "optimize",
    radius: int = config.DEFAULT_RADIUS,
    budget: int = config.POINT_BUDGET,
    seed: Optional[int] = None,
) -> dict:
    """Run exact -> oracle -> compare and return the final state."""
    if task not in ("optimize", "instability"):
        raise InputError(f"cannot cross-check task {task!r}", field="task")
    result = app.invoke({
        "task": task,
        "datum": datum,
        "payload": payload,
        "radius": radius,
        "budget": budget,
        "seed": seed,
    })
    if not isinstance(result, dict):
        raise KempfError(f"workflow returned unexpected type: {type(result)}")
    return result


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def datum_option(func):
    return click.option("--datum", "datum_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Root datum JSON file")(func)


def problem_option(func):
    return click.option("--problem", "problem_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Task payload JSON file")(func)


def format_option(func):
    return click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json", show_default=True)(func)


def radius_option(func):
    return click.option("--radius", type=click.IntRange(min=1), default=config.DEFAULT_RADIUS, show_default=True, help="Lattice ball radius")(func)


def budget_option(func):
    return click.option("--budget", type=click.IntRange(min=1), default=config.POINT_BUDGET, show_default=True, help="Maximum lattice points scanned")(func)


@click.group()
def cli():
    """Exact optimal destabilizing cocharacters, cones and apartment centres."""


@cli.command()
@datum_option
@format_option
@handle_errors
def validate(datum_path, fmt):
    """Report every violated root datum invariant."""
    datum = load_datum(datum_path, check=False)
    violations = validate_datum(datum)
    order = None
    if not violations:
        order = len(weyl_group(datum))
    payload = {
        "valid": not violations,
        "violations": [v.to_dict() for v in violations],
        "weyl_group_order": order,
    }
    emit(schemas.ValidateOut, payload, fmt)
    if violations:
        for v in violations:
            click.echo(str(v), err=True)
        sys.exit(InputError.exit_code)


@cli.command()
@datum_option
@problem_option
@format_option
@handle_errors
def optimize(datum_path, problem_path, fmt):
    """Optimal class of a family of (A, B) pairs."""
    datum = load_datum(datum_path)
    model = schemas.load_model(schemas.ProblemModel, read_json(problem_path))
    pairs, identifications, gram = problem_pairs(model, datum)
    result = family_max(pairs, gram, datum if gram_matches(gram, datum) else None, identifications)
    emit(schemas.OptimalClassOut, result.to_dict(), fmt)


@cli.command()
@datum_option
@problem_option
@radius_option
@budget_option
@click.option("--scan/--no-scan", default=False, show_default=True, help="Also search the lattice ball for destabilizing cocharacters")
@format_option
@handle_errors
def instability(datum_path, problem_path, radius, budget, scan, fmt):
    """Optimal (uniform) instability of vectors in a representation."""
    datum = load_datum(datum_path)
    model = schemas.load_model(schemas.InstabilityModel, read_json(problem_path))
    inputs = instability_inputs(model, datum)
    result = optimal_instability(**inputs, certified_exact=model.certified_exact)
    scans = []
    if scan:
        scans = [r.to_dict() for r in scan_vectors(inputs["rep"], inputs["vectors"], datum, radius, inputs["equations"], budget)]
    payload = {
        "optimal_class": result.to_dict(),
        "destab_cone": destab_cone(inputs["rep"], inputs["vectors"]).to_dict(),
        "transforms": len(result.per_index),
        "mode": model.mode,
        "hilbert_mumford": scans,
    }
    emit(schemas.InstabilityOut, payload, fmt)


@cli.command()
@datum_option
@problem_option
@format_option
@handle_errors
def centre(datum_path, problem_path, fmt):
    """Apartment-level centre of a convex subset."""
    datum = load_datum(datum_path)
    model = schemas.load_model(schemas.SubsetModel, read_json(problem_path))
    report = centre_in_apartment(load_subset(model, datum), datum)
    emit(schemas.CentreOut, report.to_dict(), fmt)


@cli.command("verify-centre")
@datum_option
@problem_option
@format_option
@handle_errors
def verify_centre_command(datum_path, problem_path, fmt):
    """Check a proposed centre against the parabolic state it defines."""
    datum = load_datum(datum_path)
    model = schemas.load_model(schemas.VerifyCentreModel, read_json(problem_path))
    subset = load_subset(model, datum)
    report = verify_centre(subset, zeta(model.centre), datum)
    emit(schemas.VerificationOut, report.to_dict(), fmt)


@cli.command()
@datum_option
@problem_option
@radius_option
@budget_option
@format_option
@handle_errors
def oracle(datum_path, problem_path, radius, budget, fmt):
    """Brute-force lattice maximum of every pair."""
    datum = load_datum(datum_path)
    model = schemas.load_model(schemas.ProblemModel, read_json(problem_path))
    pairs, _, gram = problem_pairs(model, datum)
    result = cached_oracle(pairs, gram, radius, budget)
    emit(schemas.OracleOut, result.to_dict(), fmt)


@cli.command()
@datum_option
@problem_option
@format_option
@handle_errors
def parabolic(datum_path, problem_path, fmt):
    """Parabolic type and simplex cone of a cocharacter."""
    datum = load_datum(datum_path)
    model = schemas.load_model(schemas.ParabolicModel, read_json(problem_path))
    lam = schemas.parse_vector(model.cocharacter)
    p = datum.parabolic_type(lam)
    payload = {
        "cocharacter": [str(c) for c in lam],
        "parabolic": p.to_dict(),
        "simplex_cone": simplex_cone(datum, p).to_dict(),
    }
    emit(schemas.ParabolicReportOut, payload, fmt)


@cli.command("cross-check")
@datum_option
@problem_option
@click.option("--task", type=click.Choice(["optimize", "instability"]), default="optimize", show_default=True)
@radius_option
@budget_option
@click.option("--seed", type=int, default=None, help="Seed for the functoriality spot check")
@format_option
@handle_errors
def cross_check(datum_path, problem_path, task, radius, budget, seed, fmt):
    """Exact solver against the lattice oracle; DISAGREE exits with status 4."""
    datum = load_datum(datum_path)
    state = run_cross_check(datum, read_json(problem_path), task, radius, budget, seed)
    payload = {
        "verdict": state["verdict"],
        "message": state["message"],
        "exact": state["exact"].to_dict(),
        "oracle": state["oracle"].to_dict(),
        "radius": radius,
        "seed": seed,
        "functoriality": state["functoriality"],
    }
    emit(schemas.CrossCheckOut, payload, fmt)
    if state["verdict"] == DISAGREE:
        raise CrossCheckDisagreement(state["message"])
    if state["functoriality"] is False:
        raise CrossCheckDisagreement("optimum is not carried along by the sampled Weyl element")


if __name__ == "__main__":
    logging.basicConfig(
        filename=config.LOG_FILE,
        level=getattr(logging, config.LOG_LEVEL, logging.WARNING),
        format="%(asctime)s - %(levelname)s - %(message)s",
    )
    cli()
