"""
Chest, waist and pelvis circumferences from body meshes.

    bodygirth measure body.obj body.skeleton.json [--signature sig.csv]
    bodygirth batch corpus/ --output annotations.csv --format csv --jobs 4
    bodygirth fixture humanoid_proxy --output-dir corpus/ --id body_000
    bodygirth signature body.obj --step 0.001 --output sig.csv

Exit codes: 0 ok, 1 input or parse error, 2 geometric failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .formats import ParseError, parse_obj, parse_skeleton, write_annotation, write_obj, write_signature_csv
from .measure import DEFAULT_STEP, PipelineError, run_pipeline
from .mesh import AxisMap, lsa_align, validate
from .segmentation import DEFAULT_KNN
from .slicing import UP, mesh_signature, unit
from .synthetic import KINDS, FixtureSpec, generate

log = logging.getLogger("bodygirth")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_GEOMETRY = 2

SKELETON_SUFFIX = ".skeleton.json"


class InputError(Exception):
    """Bad file, flag or parse; exit code 1."""


@dataclass(frozen=True)
class RunConfig:
    step: float = DEFAULT_STEP
    knn: int = DEFAULT_KNN
    normal: tuple[float, float, float] = UP
    axis_map: AxisMap = field(default_factory=AxisMap)
    joint_map: dict = field(default_factory=dict)
    jobs: int = 1
    format: str = "json"

    def __post_init__(self):
        if not self.step > 0:
            raise InputError("step must be positive")
        if self.knn < 1:
            raise InputError("knn must be at least 1")
        if self.jobs < 1:
            raise InputError("jobs must be at least 1")


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _normal(text: str):
    try:
        parts = [float(p) for p in text.split(",")]
        return unit(parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y,z with nonzero length, got {text!r}") from None


def _axis_map(text: str) -> AxisMap:
    try:
        return AxisMap.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--step", type=float, default=DEFAULT_STEP, help="slice spacing in meters (default 0.001)")
    common.add_argument("--axis-map", type=_axis_map, default=AxisMap(), help="signed axis permutation to LSA, e.g. x,-z,y")
    common.add_argument("--output", type=Path, help="output file (default stdout)")

    body = _Parser(add_help=False)
    body.add_argument("--knn", type=int, default=DEFAULT_KNN, help="neighbors searched for the axilla (default 80)")
    body.add_argument("--joint-map", type=Path, help='JSON {"R_Shoulder": "<name in file>", ...}')
    body.add_argument("--format", choices=("json", "csv"), default="json")
    body.add_argument("--normal", type=_normal, default=UP, help="slicing normal; must be 0,1,0 when measuring")

    parser = _Parser(prog="bodygirth", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("measure", parents=[common, body], help="measure one mesh")
    p.add_argument("mesh", type=Path)
    p.add_argument("skeleton", type=Path)
    p.add_argument("--id", dest="mesh_id", help="mesh id in the record (default: file stem)")
    p.add_argument("--signature", type=Path, help="also write the signature CSV here")
    p.add_argument("--debug", action="store_true", help="print axilla and region bounds to stderr")

    p = sub.add_parser("batch", parents=[common, body], help="annotate a corpus of <id>.obj + <id>.skeleton.json")
    p.add_argument("corpus", type=Path)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("signature", parents=[common], help="write the signature CSV of one mesh")
    p.add_argument("mesh", type=Path)
    p.add_argument("--normal", type=_normal, default=UP)

    p = sub.add_parser("fixture", help="write a synthetic body: OBJ, skeleton and oracle JSON")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--output-dir", type=Path, default=Path("."))
    p.add_argument("--id", dest="fixture_id", help="file stem (default: kind)")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--rings", type=int, default=41)
    p.add_argument("--height", type=float, default=1.0)
    p.add_argument("--radius", type=float, default=0.5)
    p.add_argument("--waist-radius", type=float)
    p.add_argument("--waist-y", type=float)
    p.add_argument("--arm-n", type=int, default=16)
    p.add_argument("--arm-rings", type=int, default=4)
    return parser


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def _load_joint_map(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        table = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed joint map: {exc.msg}") from None
    if not isinstance(table, dict) or not all(isinstance(v, str) for v in table.values()):
        raise InputError(f"{path}: joint map must be an object of strings")
    return table


def _config(args) -> RunConfig:
    normal = getattr(args, "normal", UP)
    return RunConfig(
        step=args.step,
        knn=getattr(args, "knn", DEFAULT_KNN),
        normal=normal,
        axis_map=args.axis_map,
        joint_map=_load_joint_map(getattr(args, "joint_map", None)),
        jobs=getattr(args, "jobs", 1),
        format=getattr(args, "format", "json"),
    )


def _load_mesh(path: Path):
    mesh = parse_obj(_read_text(path), source=str(path))
    report = validate(mesh)
    if not report.ok:
        raise InputError(f"{path}: invalid mesh: " + "; ".join(report.findings))
    for warning in report.warnings:
        log.warning("%s: %s", path, warning)
    return mesh


def measure_files(mesh_path: Path, skeleton_path: Path, config: RunConfig):
    """Parse, validate and run the pipeline. Raises InputError or PipelineError."""
    try:
        mesh = _load_mesh(mesh_path)
        skeleton = parse_skeleton(_read_text(skeleton_path), config.joint_map, source=str(skeleton_path))
    except ParseError as exc:
        raise InputError(str(exc)) from None
    return run_pipeline(mesh, skeleton, config.step, config.knn, config.axis_map)


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text, encoding="utf-8")


def _require_up(config: RunConfig) -> None:
    if config.normal != UP:
        raise InputError("measuring slices along +y; align the mesh with --axis-map instead of --normal")


def cmd_measure(args) -> int:
    config = _config(args)
    _require_up(config)
    result = measure_files(args.mesh, args.skeleton, config)
    mesh_id = args.mesh_id or args.mesh.stem
    _emit(write_annotation([result.measurements.record(mesh_id)], config.format), args.output)
    if args.signature is not None:
        args.signature.write_text(write_signature_csv(result.signature), encoding="utf-8")
    if args.debug:
        ax, reg = result.axilla, result.regions
        print(f"axilla ray {ax.origin} -> {ax.target}", file=sys.stderr)
        print(f"axilla hit {ax.hit} (triangle {ax.hit_triangle})", file=sys.stderr)
        print(f"axilla point {ax.point} (vertex {ax.point_index}, k={ax.neighbors})", file=sys.stderr)
        for name in reg.NAMES:
            lo, hi = reg.band(name)
            print(f"{name} region [{lo:.6f}, {hi:.6f})", file=sys.stderr)
    return EXIT_OK


def _annotate_one(job):
    """Worker: ``(mesh_id, record | None, error | None)``."""
    mesh_id, mesh_path, skeleton_path, config = job
    try:
        if not skeleton_path.exists():
            raise InputError(f"missing skeleton {skeleton_path}")
        result = measure_files(mesh_path, skeleton_path, config)
    except InputError as exc:
        return mesh_id, None, {"mesh_id": mesh_id, "stage": "input", "error": str(exc)}
    except PipelineError as exc:
        return mesh_id, None, {"mesh_id": mesh_id, "stage": exc.stage, "error": str(exc.error)}
    return mesh_id, result.measurements.record(mesh_id), None


def corpus_jobs(corpus: Path, config: RunConfig) -> list:
    if not corpus.is_dir():
        raise InputError(f"corpus {corpus} is not a directory")
    meshes = sorted(corpus.glob("*.obj"), key=lambda p: p.stem)
    return [(p.stem, p, corpus / (p.stem + SKELETON_SUFFIX), config) for p in meshes]


def run_batch(corpus: Path, config: RunConfig):
    """Annotate every mesh in ``corpus``. Returns (records, errors), both sorted by mesh id."""
    jobs = corpus_jobs(corpus, config)
    if not jobs:
        raise InputError(f"no .obj meshes in {corpus}")
    if config.jobs == 1:
        results = [_annotate_one(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_annotate_one, jobs, chunksize=max(1, len(jobs) // (4 * config.jobs))))
    results.sort(key=lambda r: r[0])
    records = [r for _, r, _ in results if r is not None]
    errors = [e for _, _, e in results if e is not None]
    return records, errors


def cmd_batch(args) -> int:
    config = _config(args)
    _require_up(config)
    records, errors = run_batch(args.corpus, config)
    _emit(write_annotation(records, config.format), args.output)
    report = json.dumps({"errors": errors}, indent=2, sort_keys=True) + "\n"
    if args.output is not None:
        Path(str(args.output) + ".errors.json").write_text(report, encoding="utf-8")
    for error in errors:
        log.error("%s failed at %s: %s", error["mesh_id"], error["stage"], error["error"])
    if not errors:
        return EXIT_OK
    if any(e["stage"] == "input" for e in errors):
        return EXIT_INPUT
    return EXIT_GEOMETRY


def cmd_signature(args) -> int:
    config = _config(args)
    try:
        mesh = _load_mesh(args.mesh)
    except ParseError as exc:
        raise InputError(str(exc)) from None
    mesh = lsa_align(mesh, config.axis_map)
    _emit(write_signature_csv(mesh_signature(mesh, config.normal, config.step)), args.output)
    return EXIT_OK


def cmd_fixture(args) -> int:
    try:
        spec = FixtureSpec(
            kind=args.kind,
            n=args.n,
            rings=args.rings,
            height=args.height,
            radius=args.radius,
            waist_radius=args.waist_radius,
            waist_y=args.waist_y,
            arm_n=args.arm_n,
            arm_rings=args.arm_rings,
        )
    except ValueError as exc:
        raise InputError(f"invalid fixture: {exc}") from None
    fixture = generate(spec)
    stem = args.fixture_id or args.kind
    out = args.output_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{stem}.obj").write_text(write_obj(fixture.mesh), encoding="utf-8")
    (out / f"{stem}{SKELETON_SUFFIX}").write_text(fixture.skeleton.to_json(), encoding="utf-8")
    (out / f"{stem}.oracle.json").write_text(fixture.oracle.to_json(), encoding="utf-8")
    return EXIT_OK


COMMANDS = {
    "measure": cmd_measure,
    "batch": cmd_batch,
    "signature": cmd_signature,
    "fixture": cmd_fixture,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PipelineError as exc:
        print(f"error: geometric failure at {exc.stage}: {exc.error}", file=sys.stderr)
        return EXIT_GEOMETRY


if __name__ == "__main__":
    sys.exit(main())
