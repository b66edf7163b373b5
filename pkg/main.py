"""
Complex Hyperbolic Triangle Group Toolkit
Command-line frontend: classification queries, intersection and foliation tables,
Ford-cell complexes, discreteness certificates and margin sweeps
"""
import csv
import functools
import io
import json
import logging
import math
import sys
from fractions import Fraction
from typing import Any, Callable, Iterable, List, Optional, Sequence

import click
import numpy as np

from config import settings
from core.audit import AuditLogger, InputValidator
from core.exceptions import GeometryToolkitError, validation_error
from models.geometry import BALL, SIEGEL, HoroPoint, ProjectivePoint
from models.schemas import IsometryKind, OutputFormat, RunConfig, Verdict
from services.cproj import ProjectiveGeometryService
from services.fordcell import fordcell_service
from services.heis import HeisenbergService
from services.isect import IntersectionService, psi_from_cot
from services.trigroup import TriangleGroupService, threshold

# Configure logging; standard output carries data only
logging.basicConfig(
    level=getattr(logging, settings.log_level),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    stream=sys.stderr,
)
logger = logging.getLogger(__name__)
AuditLogger.enabled = settings.audit_enabled

FOLIATION_HEADER = ["theta3", "eps", "tau", "sigma", "psi1", "psi2", "X", "Y", "W", "Q"]
EXIT_CODES = {Verdict.CERTIFIED: 0, Verdict.FAILED: 2, Verdict.BOUNDARY: 3}


# Formatting helpers

def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _emit_csv(config: RunConfig, header: Sequence[str], rows: Iterable[Sequence[Any]]):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    _write(config, buffer.getvalue())


def _emit_json(config: RunConfig, payload: Any):
    _write(config, json.dumps(payload, indent=2) + "\n")


def _write(config: RunConfig, text: str):
    if config.out:
        with open(config.out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        click.echo(text, nl=False)


def _complex_pair(z: complex) -> List[float]:
    return [float(np.real(z)), float(np.imag(z))]


# Argument parsing

def _angle(text: str, config: RunConfig) -> float:
    """Radians, or p/q read as (p/q) pi under --frac-pi"""
    try:
        if config.frac_pi:
            return float(Fraction(text)) * math.pi
        return float(text)
    except (ValueError, ZeroDivisionError):
        raise validation_error(f"Cannot read angle {text!r}", {"frac_pi": config.frac_pi})


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise validation_error(f"Cannot read complex number {text!r}")


def _matrix(entries: Sequence[str]) -> np.ndarray:
    if len(entries) != 9:
        raise validation_error(f"Expected 9 matrix entries, got {len(entries)}")
    m = np.array([_complex(e) for e in entries]).reshape(3, 3)
    ok, message = InputValidator.validate_matrix(m)
    if not ok:
        raise validation_error(message)
    return m


def _form(name: str):
    return BALL if name == "ball" else SIEGEL


# Shared options

def run_options(default_format: OutputFormat = OutputFormat.CSV):
    """--tol, --grid, --format, --out and --frac-pi, folded into a RunConfig"""
    def decorator(command: Callable) -> Callable:
        @click.option("--frac-pi", "frac_pi", is_flag=True,
                      help="Read angles as rational multiples of pi, written p/q.")
        @click.option("--out", "out", type=click.Path(dir_okay=False), default=None,
                      help="Output file; standard output when omitted.")
        @click.option("--format", "fmt", type=click.Choice([f.value for f in OutputFormat]),
                      default=default_format.value, show_default=True)
        @click.option("--grid", type=int, default=settings.default_grid, show_default=True,
                      help="Sampling grid size.")
        @click.option("--tol", type=float, default=settings.tol, show_default=True,
                      help="Numerical tolerance.")
        @functools.wraps(command)
        def wrapper(*args, tol, grid, fmt, out, frac_pi, **kwargs):
            config = _run_config(tol=tol, grid=grid, format=fmt, out=out, frac_pi=frac_pi)
            return command(*args, config=config, **kwargs)
        return wrapper
    return decorator


def _run_config(**values) -> RunConfig:
    try:
        return RunConfig(**values)
    except ValueError as e:
        raise validation_error("Invalid run configuration", {"errors": str(e)})


def handle_errors(command: Callable) -> Callable:
    """Report toolkit errors on stderr and exit 1"""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except GeometryToolkitError as e:
            logger.error("%s failed: %s", command.__name__, e.message)
            click.echo(json.dumps(e.to_dict(), default=str), err=True)
            click.get_current_context().exit(1)
    return wrapper


@click.group()
@click.version_option(settings.app_version, prog_name=settings.app_name)
def cli():
    """Complex hyperbolic geometry and (n, inf, inf) triangle group toolkit."""


# Classification queries

@cli.command()
@click.argument("entries", nargs=-1, required=True)
@click.option("--form", type=click.Choice(["ball", "siegel"]), default="siegel", show_default=True)
@run_options()
@handle_errors
def classify(entries, form, config: RunConfig):
    """Classify a 3x3 matrix given row by row as 9 complex entries."""
    service = ProjectiveGeometryService(tol=config.tol)
    g = service.make_isometry(_matrix(entries), _form(form))
    result = service.classify_isometry(g)
    eigenvalues = sorted(np.linalg.eigvals(g.matrix), key=lambda z: (np.angle(z), abs(z)))
    report = {
        "kind": result.kind.value,
        "refined": result.refined.value if result.refined else None,
        "f_value": result.f_value,
        "trace": list(result.trace),
        "eigenvalues": [_complex_pair(z) for z in eigenvalues],
    }
    if result.kind == IsometryKind.REGULAR_ELLIPTIC:
        fixed = service.fixed_point(g).standard_lift()
        report["fixed_point"] = [_complex_pair(z) for z in fixed]
    if config.format == OutputFormat.JSON:
        _emit_json(config, report)
        return
    rows = [("kind", report["kind"]), ("refined", report["refined"] or ""),
            ("f_value", report["f_value"]), ("trace_re", report["trace"][0]),
            ("trace_im", report["trace"][1])]
    for i, (re, im) in enumerate(report["eigenvalues"], start=1):
        rows += [(f"eigenvalue{i}_re", re), (f"eigenvalue{i}_im", im)]
    for i, (re, im) in enumerate(report.get("fixed_point", []), start=1):
        rows += [(f"fixed{i}_re", re), (f"fixed{i}_im", im)]
    _emit_csv(config, ["field", "value"], rows)


@cli.command()
@click.argument("entries", nargs=-1, required=True)
@click.option("--form", type=click.Choice(["ball", "siegel"]), default="siegel", show_default=True)
@run_options()
@handle_errors
def cartan(entries, form, config: RunConfig):
    """Cartan invariant of three boundary points given as 9 complex coordinates."""
    if len(entries) != 9:
        raise validation_error(f"Expected 9 coordinates, got {len(entries)}")
    service = ProjectiveGeometryService(tol=config.tol)
    coords = [_complex(e) for e in entries]
    points = [ProjectivePoint(np.array(coords[3 * i:3 * i + 3]), _form(form)) for i in range(3)]
    value = service.cartan_invariant(*points)
    if config.format == OutputFormat.JSON:
        _emit_json(config, {"cartan": value})
    else:
        _emit_csv(config, ["cartan"], [(value,)])


@cli.command()
@click.argument("z1")
@click.argument("t1", type=float)
@click.argument("z2")
@click.argument("t2", type=float)
@click.option("--u1", type=float, default=0.0, help="Height of the first point.")
@click.option("--u2", type=float, default=0.0, help="Height of the second point.")
@run_options()
@handle_errors
def cygan(z1, t1, z2, t2, u1, u2, config: RunConfig):
    """Extended Cygan distance between [z1, t1, u1] and [z2, t2, u2]."""
    if u1 < 0 or u2 < 0:
        raise validation_error("Horospherical heights must be non-negative", {"u1": u1, "u2": u2})
    service = HeisenbergService(tol=config.tol)
    d = service.cygan_distance(HoroPoint(_complex(z1), t1, u1), HoroPoint(_complex(z2), t2, u2))
    if config.format == OutputFormat.JSON:
        _emit_json(config, {"cygan": d})
    else:
        _emit_csv(config, ["cygan"], [(d,)])


@cli.command()
@click.argument("entries", nargs=-1, required=True)
@run_options()
@handle_errors
def sphere(entries, config: RunConfig):
    """Isometric sphere of a Siegel-model isometry given as 9 complex entries."""
    g = ProjectiveGeometryService(tol=config.tol).make_isometry(_matrix(entries), SIEGEL)
    s = HeisenbergService(tol=config.tol).isometric_sphere(g)
    row = (s.center.z.real, s.center.z.imag, s.center.t, s.radius)
    if config.format == OutputFormat.JSON:
        _emit_json(config, {"center": {"z": _complex_pair(s.center.z), "t": s.center.t},
                            "radius": s.radius})
    else:
        _emit_csv(config, ["z_re", "z_im", "t", "radius"], [row])


# Intersections

@cli.command()
@click.argument("theta1")
@click.argument("theta2")
@run_options()
@handle_errors
def intersect2(theta1, theta2, config: RunConfig):
    """Coefficients of W for I(theta1) cap I(theta2), plus the singular angles."""
    service = IntersectionService(tol=config.tol)
    t1, t2 = _angle(theta1, config), _angle(theta2, config)
    wc = service.w_coefficients(t1, t2)
    singular = service.singular_angles(t1, t2)
    coefficients = [wc.c22, wc.c20, wc.c02, wc.c11, wc.c00]
    if config.format == OutputFormat.JSON:
        _emit_json(config, {"theta1": t1, "theta2": t2,
                            "coefficients": dict(zip(["c22", "c20", "c02", "c11", "c00"], coefficients)),
                            "singular_angles": singular})
    else:
        _emit_csv(config, ["theta1", "theta2", "c22", "c20", "c02", "c11", "c00"],
                  [(t1, t2, *coefficients)])


@cli.command()
@click.argument("theta1")
@click.argument("theta2")
@click.argument("theta3")
@run_options()
@handle_errors
def intersect3(theta1, theta2, theta3, config: RunConfig):
    """Endpoints of the crossing I(theta1) cap I(theta2) cap I(theta3)."""
    service = IntersectionService(tol=config.tol)
    t1, t2, t3 = (_angle(a, config) for a in (theta1, theta2, theta3))
    crossing = service.crossing_points(t1, t2, t3)
    wc = service.w_coefficients(t1, t2)
    rows = []
    for arc in crossing.arcs:
        x, y = float(arc.X[-1]), float(arc.Y[-1])
        rows.append((arc.eps, arc.tau, arc.sigma, x, y,
                     float(psi_from_cot(x)), float(psi_from_cot(y)), float(wc(x, y))))
    header = ["eps", "tau", "sigma", "X", "Y", "psi1", "psi2", "W"]
    if config.format == OutputFormat.JSON:
        _emit_json(config, {"theta1": t1, "theta2": t2, "theta3": crossing.theta3,
                            "endpoints": [dict(zip(header, r)) for r in rows]})
    else:
        _emit_csv(config, header, rows)


@cli.command()
@click.argument("theta1")
@click.argument("theta2")
@run_options()
@handle_errors
def foliation(theta1, theta2, config: RunConfig):
    """Sampled crossings for theta3 over [0, 2pi); singular leaves are flagged."""
    service = IntersectionService(tol=config.tol)
    t1, t2 = _angle(theta1, config), _angle(theta2, config)
    leaves = service.foliation_leaves(t1, t2, config.grid)
    wc = service.w_coefficients(t1, t2)
    rows, documents = [], []
    for leaf in leaves:
        qc = service.q_coefficients(t1, t2, leaf.theta3)
        leaf_rows = []
        for arc in leaf.crossing.arcs:
            for x, y in zip(arc.X, arc.Y):
                x, y = float(x), float(y)
                leaf_rows.append((leaf.theta3, arc.eps, arc.tau, arc.sigma,
                                  float(psi_from_cot(x)), float(psi_from_cot(y)),
                                  x, y, float(wc(x, y)), float(qc(x, y))))
        rows.extend(leaf_rows)
        documents.append({"theta3": leaf.theta3, "singular": leaf.singular,
                          "rows": [dict(zip(FOLIATION_HEADER, r)) for r in leaf_rows]})
    if config.format == OutputFormat.JSON:
        _emit_json(config, {"theta1": t1, "theta2": t2, "grid": config.grid, "leaves": documents})
        return
    singular = [_cell(leaf.theta3) for leaf in leaves if leaf.singular]
    click.echo(f"singular theta3: {', '.join(singular)}", err=True)
    _emit_csv(config, FOLIATION_HEADER, rows)


# Ford cells

@cli.command()
@click.argument("n", type=int)
@click.option("--probe", is_flag=True, help="Confirm the complex by sampling the spheres.")
@click.option("--samples", type=int, default=None, help="Probe samples per sphere.")
@run_options(default_format=OutputFormat.JSON)
@handle_errors
def ford(n, probe, samples, config: RunConfig):
    """Ideal boundary complex of the Ford domain for order n."""
    complex2 = fordcell_service.build_ideal_boundary_complex(n)
    document = fordcell_service.to_json(complex2)
    report = fordcell_service.numeric_cell_probe(n, samples) if probe else None
    if config.format == OutputFormat.JSON:
        payload = document.model_dump(mode="json")
        if report is not None:
            payload["probe"] = {**report.model_dump(mode="json"), "agrees": report.agrees}
        _emit_json(config, payload)
        return
    rows = [("face", f.label, " ".join(f.edges)) for f in document.faces]
    rows += [("edge", e.label, " ".join(e.faces)) for e in document.edges]
    rows += [("vertex", v.label, " ".join(v.edges)) for v in document.vertices]
    click.echo(f"euler characteristic: {document.euler}", err=True)
    if report is not None:
        click.echo(f"probe agrees: {str(report.agrees).lower()}", err=True)
    _emit_csv(config, ["cell", "label", "incidences"], rows)


# Triangle groups

@cli.command()
@click.argument("n", type=int)
@click.option("--t", "t", type=float, default=None, help="Parameter t = tan(A/2).")
@click.option("--A", "angular", default=None, help="Angular invariant A in (0, pi).")
@run_options(default_format=OutputFormat.JSON)
@handle_errors
def certify(n, t, angular, config: RunConfig):
    """Discreteness certificate; exit 0 Certified, 2 Failed, 3 Boundary."""
    if (t is None) == (angular is None):
        raise validation_error("Give exactly one of --t and --A")
    service = TriangleGroupService(tol=config.tol)
    if t is not None:
        p = service.params_from_t(n, t)
    else:
        p = service.params_from_angular(n, _angle(angular, config))
    certificate = service.certify(p)
    if config.format == OutputFormat.JSON:
        _emit_json(config, certificate.model_dump(mode="json"))
    else:
        _emit_csv(config, ["jprime", "j", "k", "rho"],
                  [(e.jprime, e.j, e.k, e.rho) for e in certificate.entries])
        click.echo(f"verdict: {certificate.verdict.value}", err=True)
    click.get_current_context().exit(EXIT_CODES[certificate.verdict])


@cli.command()
@click.argument("n", type=int)
@click.option("--t-min", type=float, default=0.05, show_default=True)
@click.option("--t-max", type=float, default=3.0, show_default=True)
@run_options()
@handle_errors
def sweep(n, t_min, t_max, config: RunConfig):
    """Every certificate margin over an evenly spaced t-grid."""
    if not 0.0 < t_min < t_max:
        raise validation_error("Sweep needs 0 < t-min < t-max", {"t_min": t_min, "t_max": t_max})
    table = TriangleGroupService(tol=config.tol).certify_sweep(
        n, np.linspace(t_min, t_max, config.grid))
    if config.format == OutputFormat.JSON:
        _emit_json(config, table.model_dump(mode="json"))
        return
    click.echo(f"threshold: {_cell(threshold(n))}", err=True)
    for c in table.crossings:
        click.echo(f"sign change rho({c.jprime},{c.j},{c.k}) at t={_cell(c.t)}", err=True)
    _emit_csv(config, ["n", "t", "jprime", "j", "k", "rho"],
              [(r.n, r.t, r.jprime, r.j, r.k, r.rho) for r in table.rows])


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Console entry point mapping usage errors to exit 1"""
    try:
        code = cli.main(args=argv, prog_name="htg", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return 1
    except click.Abort:
        return 1
    return code if isinstance(code, int) else 0


if __name__ == "__main__":
    sys.exit(main())
