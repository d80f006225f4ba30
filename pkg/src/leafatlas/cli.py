"""Command-line front end: atlas generation, numerical verification, catalog
validation, JSON and markdown report serialization.

Exit codes: 0 success, 1 usage error, 2 domain or validation failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .atlas import AtlasReport, atlas, catalog_text_hash, twisted_involutions, orbit_class
from .rootsys import DEFAULT_WEYL_CAP, WeylCapError
from .satake import (
    CatalogParseError,
    SatakeDiagram,
    SatakeError,
    builtin_catalog,
    load_catalog,
    real_form_data,
    render_catalog,
    validate,
)
from . import matrixlie as ml

SCHEMA_VERSION = 1
ENV_CATALOG = "LEAFATLAS_CATALOG"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2


@dataclass
class RunConfig:
    command: str
    form: str | None = None
    inline: SatakeDiagram | None = None
    output_format: str = "json"
    tolerances: dict[str, float] = field(default_factory=dict)
    samples: int = 100
    seed: int = 0
    weyl_cap: int = DEFAULT_WEYL_CAP
    catalog_path: str | None = None
    out_path: str | None = None


def default_tolerances(rf: ml.MatrixRealForm | None = None) -> dict[str, float]:
    tol = {
        "iwasawa": 1e-12,
        "action": 1e-10,
        "multiplicativity": 1e-8,
        "t_invariance": 1e-10,
        "jacobi": 1e-5,
        "annihilator": 1e-12,
        "cartan": 1e-12,
        "borel": 1e-10,
        "formula": 1e-8,
        "hermitian": 1e-8,
        "tangency": 1e-8,
        "rank_threshold": 1e-8,
    }
    if rf is not None and rf.dim_ip0 <= 2:
        tol["jacobi"] = 1e-6
    return tol


# ---------------------------------------------------------------------------
# catalog resolution

def _resolve_catalog(cfg: RunConfig) -> tuple[tuple[SatakeDiagram, ...], str]:
    path = cfg.catalog_path or os.environ.get(ENV_CATALOG)
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
        return load_catalog(text), catalog_text_hash(text)
    entries = builtin_catalog()
    return entries, catalog_text_hash(render_catalog(entries))


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out_path:
        directory = os.path.dirname(os.path.abspath(cfg.out_path))
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(text)
            os.replace(tmp, cfg.out_path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _json_dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# atlas command

def _form_doc(report: AtlasReport) -> dict:
    rf = report.form
    sd = rf.diagram
    return {
        "label": sd.label,
        "family": sd.family,
        "rank": sd.rank,
        "black": sorted(sd.black),
        "arrows": [list(p) for p in sorted(sd.arrows)],
        "dim_g": rf.dim_g,
        "dim_k0": rf.dim_k0,
        "dim_p0": rf.dim_p0,
        "dim_x": rf.dim_x,
        "real_rank": rf.real_rank,
        "positive_restricted_count": sum(rf.positive_restricted().values()),
    }


def atlas_document(report: AtlasReport, seed: int) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": report.tool_version,
        "command": "atlas",
        "seed": seed,
        "catalog_hash": report.catalog_hash,
        "form": _form_doc(report),
        "w0_word": list(report.w0_word),
        "wb_word": list(report.wb_word),
        "classes": [
            {
                "psi_word": list(c.psi_word),
                "codim_Y": c.codim_Y,
                "a": c.a,
                "t": c.t,
                "leaf_dim": c.leaf_dim,
                "leaf_codim": c.leaf_codim,
                "family_dim": c.family_dim,
                "is_open": c.is_open,
                "is_closed_class": c.is_closed_class,
                "parity_ok": c.parity_ok,
                "dims_in_range": c.dims_in_range,
            }
            for c in report.classes
        ],
        "flags": {"has_open_leaves": report.has_open_leaves},
        "largest_leaf_class": report.largest_leaf_class,
        "open_class_count_note": report.open_class_count_note,
        "notes": list(report.notes),
    }


def atlas_markdown(report: AtlasReport) -> str:
    rf = report.form
    lines = [
        f"# Leaf atlas: {report.label}",
        "",
        f"- type: {rf.diagram.family}{rf.diagram.rank}, black={sorted(rf.diagram.black)}, "
        f"arrows={sorted(rf.diagram.arrows)}",
        f"- dim g = {rf.dim_g}, dim k0 = {rf.dim_k0}, dim X = {rf.dim_x}, "
        f"real rank = {rf.real_rank}",
        f"- open leaves: {'yes' if report.has_open_leaves else 'no'}",
        "",
        "| psi word | codim_Y | a | t | leaf dim | leaf codim | family dim | open | closed | ok |",
        "|---|---|---|---|---|---|---|---|---|---|",
    ]
    for c in report.classes:
        word = "s" + " s".join(str(i) for i in c.psi_word) if c.psi_word else "e"
        ok = "yes" if c.realizable_candidate else "FLAGGED"
        lines.append(
            f"| {word} | {c.codim_Y} | {c.a} | {c.t} | {c.leaf_dim} | {c.leaf_codim} "
            f"| {c.family_dim} | {'*' if c.is_open else ''} | "
            f"{'*' if c.is_closed_class else ''} | {ok} |"
        )
    lines.append("")
    for note in report.notes:
        lines.append(f"> {note}")
    return "\n".join(lines) + "\n"


def cmd_atlas(cfg: RunConfig) -> int:
    entries, cat_hash = _resolve_catalog(cfg)
    if cfg.inline is not None:
        sd = cfg.inline
    else:
        by_label = {e.label: e for e in entries}
        if cfg.form not in by_label:
            sys.stderr.write(
                f"unknown form {cfg.form!r}; available: "
                + ", ".join(sorted(by_label)) + "\n"
            )
            return EXIT_USAGE
        sd = by_label[cfg.form]

    report_v = validate(sd)
    if not report_v.passed:
        sys.stderr.write(f"form {sd.label} failed validation:\n")
        for c in report_v.failures():
            sys.stderr.write(f"  {c.name}: {c.detail}\n")
        return EXIT_DOMAIN
    try:
        report = atlas(sd, weyl_cap=cfg.weyl_cap, catalog_hash=cat_hash)
    except WeylCapError as exc:
        sys.stderr.write(f"{exc} (partial count {exc.partial_count})\n")
        return EXIT_DOMAIN
    if cfg.output_format == "md":
        _emit(cfg, atlas_markdown(report))
    else:
        _emit(cfg, _json_dumps(atlas_document(report, cfg.seed)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify command

def _check(name: str, value: float, tolerance: float, info: str = "") -> dict:
    return {
        "name": name,
        "value": value,
        "tolerance": tolerance,
        "passed": bool(value <= tolerance),
        "info": info,
    }


def _check_exact(name: str, ok: bool, info: str = "") -> dict:
    return {"name": name, "value": 0.0 if ok else 1.0, "tolerance": 0.0,
            "passed": bool(ok), "info": info}


def run_verify_battery(sd: SatakeDiagram, cfg: RunConfig) -> dict:
    """The full numerical check battery for one realized form."""
    rf = ml.realization(sd.label)
    tol = default_tolerances(rf)
    tol.update(cfg.tolerances)
    rs = sd.root_system()
    rfe = real_form_data(sd)
    report = atlas(sd, weyl_cap=cfg.weyl_cap)
    seed = cfg.seed
    samples = cfg.samples
    checks: list[dict] = []

    cart = ml.cartan_consistency(rf, seed=seed)
    for key in ("tau_sq", "theta_sq", "commute", "h_stable"):
        checks.append(_check(f"cartan_{key}", cart[key], tol["cartan"]))
    checks.append(_check("iwasawa_borel", cart["iwasawa_borel"], tol["borel"]))
    checks.append(_check_exact(
        "tau_root_compatibility",
        ml.tau_root_action(rf) == rfe.tau_star,
        "concrete conjugation induces the catalog involution",
    ))
    checks.append(_check_exact(
        "triangular_fixed_dim",
        ml.fixed_triangular_dim(rf) == rfe.dim_p0,
        f"dim (a+n)^tau = {ml.fixed_triangular_dim(rf)} vs dim_p0 = {rfe.dim_p0}",
    ))

    ann = ml.annihilator_check(rf)
    checks.append(_check("annihilator_distance", ann.distance, tol["annihilator"],
                         f"dims {ann.dim_annihilator}/{ann.dim_fixed_points}"))
    checks.append(_check_exact("annihilator_dims",
                               ann.dim_annihilator == rfe.dim_p0
                               and ann.dim_fixed_points == rfe.dim_p0))

    rng = np.random.default_rng(seed)
    worst_iw = 0.0
    for _ in range(samples):
        m = rng.normal(size=(rf.n, rf.n)) + 1j * rng.normal(size=(rf.n, rf.n))
        m = m / np.linalg.det(m) ** (1.0 / rf.n)
        b, u1 = ml.iwasawa(m)
        worst_iw = max(worst_iw, float(np.abs(b @ u1 - m).max()))
    checks.append(_check("iwasawa_roundtrip", worst_iw, tol["iwasawa"]))

    worst_act = 0.0
    for child in np.random.SeedSequence(seed + 1).spawn(max(samples // 2, 10)):
        crng = np.random.default_rng(child)
        u = ml.sample_unitary(crng, rf.n)
        g = _sample_group(crng, rf.n)
        h = _sample_group(crng, rf.n)
        lhs = ml.g_act(ml.g_act(u, g), h)
        rhs = ml.g_act(u, g @ h)
        worst_act = max(worst_act, float(np.abs(lhs - rhs).max()))
    checks.append(_check("action_axiom", worst_act, tol["action"]))

    checks.append(_check(
        "multiplicativity",
        ml.multiplicativity_residual(rf, n_pairs=samples, seed=seed + 2),
        tol["multiplicativity"],
    ))
    checks.append(_check(
        "t_invariance",
        ml.t_invariance_residual(rf, n_samples=max(samples // 2, 10), seed=seed + 3),
        tol["t_invariance"],
    ))

    jac_points = 20 if rf.dim_ip0 <= 2 else 10
    checks.append(_check(
        "jacobi", ml.jacobi_check(rf, n_points=jac_points, seed=seed + 4),
        tol["jacobi"],
    ))

    max_rank = ml.max_sampled_rank(rf, n_samples=max(samples, 50), seed=seed + 5,
                                   threshold=tol["rank_threshold"])
    expected_rank = rfe.dim_p0 - report.min_leaf_codim()
    checks.append(_check_exact(
        "rank_vs_atlas", max_rank == expected_rank,
        f"max sampled rank {max_rank}, atlas ceiling {expected_rank}",
    ))

    worst_tang = 0.0
    tang_ok = True
    for child in np.random.SeedSequence(seed + 6).spawn(5):
        crng = np.random.default_rng(child)
        u = ml.sample_unitary(crng, rf.n)
        res = ml.leaf_tangency_check(rf, u)
        tang_ok = tang_ok and res.dim_bivector_image == res.dim_orbit_projection
        worst_tang = max(worst_tang, res.residual)
    checks.append(_check("leaf_tangency", worst_tang if tang_ok else float("inf"),
                         tol["tangency"]))

    if rf.kind == "sl_real" and rf.n == 2:
        worst_f = 0.0
        for child in np.random.SeedSequence(seed + 7).spawn(samples):
            crng = np.random.default_rng(child)
            w = _sample_chart_point(crng)
            u = ml.chart_su2_section(w)
            _, coeff = ml.su2_transported_coefficient(rf, u)
            expected = ml.SU2_AMPLITUDE * (1 - abs(w) ** 4)
            worst_f = max(worst_f, abs(coeff - expected) / abs(expected))
        checks.append(_check("example_formula", worst_f, tol["formula"],
                             "relative to the derived 1/8 amplitude"))

    if rf.kind == "su_pq":
        fit1 = ml.hermitian_fit(rf, n_samples=samples, seed=seed + 8)
        fit2 = ml.hermitian_fit(rf, n_samples=samples, seed=seed + 9)
        checks.append(_check("hermitian_fit_residual", fit1.max_residual,
                             tol["hermitian"], f"b = {fit1.b!r}"))
        checks.append(_check("hermitian_fit_stability", abs(fit1.b - fit2.b),
                             tol["hermitian"]))

    found, matched, total = 0, 0, 0
    for psi in twisted_involutions(rfe, rs, cap=cfg.weyl_cap):
        total += 1
        cls = orbit_class(rfe, rs, psi)
        u = ml.representative_for(rf, psi, max_candidates=4000)
        if u is None:
            continue
        found += 1
        ok = (
            ml.stabilizer_dim(rf, u) == cls.a + cls.codim_Y
            and ml.stabilizer_dim(rf, u, include_torus=True)
            == cls.t + cls.a + cls.codim_Y
        )
        matched += int(ok)
    checks.append(_check_exact(
        "stabilizer_dims", matched == found,
        f"{matched}/{found} matched of {total} classes ({total - found} inconclusive)",
    ))

    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": "verify",
        "seed": seed,
        "samples": samples,
        "form": _form_doc(report),
        "tolerances": {k: tol[k] for k in sorted(tol)},
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
    }


def _sample_group(rng: np.random.Generator, n: int) -> np.ndarray:
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    x -= np.trace(x) / n * np.eye(n)
    import scipy.linalg

    return scipy.linalg.expm(0.4 * x)


def _sample_chart_point(rng: np.random.Generator) -> complex:
    while True:
        w = rng.uniform(-1.4, 1.4) + 1j * rng.uniform(-1.4, 1.4)
        if 0.15 < abs(abs(w) - 1.0) and abs(w) > 0.05:
            return w


def verify_markdown(doc: dict) -> str:
    lines = [
        f"# Verification: {doc['form']['label']}",
        "",
        f"- seed {doc['seed']}, {doc['samples']} samples",
        f"- overall: {'PASS' if doc['passed'] else 'FAIL'}",
        "",
        "| check | value | tolerance | result |",
        "|---|---|---|---|",
    ]
    for c in doc["checks"]:
        lines.append(
            f"| {c['name']} | {c['value']:.3e} | {c['tolerance']:.1e} | "
            f"{'pass' if c['passed'] else 'FAIL'} |"
        )
    return "\n".join(lines) + "\n"


def cmd_verify(cfg: RunConfig) -> int:
    entries, _ = _resolve_catalog(cfg)
    by_label = {e.label: e for e in entries}
    if cfg.form not in by_label:
        sys.stderr.write(
            f"unknown form {cfg.form!r}; available: " + ", ".join(sorted(by_label)) + "\n"
        )
        return EXIT_USAGE
    sd = by_label[cfg.form]
    try:
        ml.realization(sd.label)
    except ml.RealizationError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_DOMAIN
    doc = run_verify_battery(sd, cfg)
    if cfg.output_format == "md":
        _emit(cfg, verify_markdown(doc))
    else:
        _emit(cfg, _json_dumps(doc))
    return EXIT_OK if doc["passed"] else EXIT_DOMAIN


# ---------------------------------------------------------------------------
# catalog command

def cmd_catalog(cfg: RunConfig) -> int:
    try:
        entries, cat_hash = _resolve_catalog(cfg)
    except (OSError, CatalogParseError) as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_DOMAIN
    if not entries:
        sys.stderr.write("warning: catalog is empty\n")
        _emit(cfg, _json_dumps({
            "schema_version": SCHEMA_VERSION,
            "tool_version": __version__,
            "command": "catalog",
            "seed": cfg.seed,
            "catalog_hash": cat_hash,
            "entries": [],
            "passed": True,
        }))
        return EXIT_OK

    rows = []
    for sd in entries:
        rep = validate(sd)
        rows.append({
            "label": sd.label,
            "type": f"{sd.family}{sd.rank}",
            "passed": rep.passed,
            "failed_checks": [c.name for c in rep.failures()],
        })
    all_ok = all(r["passed"] for r in rows)
    if cfg.output_format == "md":
        lines = ["| label | type | result | failures |", "|---|---|---|---|"]
        for r in rows:
            lines.append(
                f"| {r['label']} | {r['type']} | {'pass' if r['passed'] else 'FAIL'} | "
                f"{', '.join(r['failed_checks'])} |"
            )
        _emit(cfg, "\n".join(lines) + "\n")
    else:
        _emit(cfg, _json_dumps({
            "schema_version": SCHEMA_VERSION,
            "tool_version": __version__,
            "command": "catalog",
            "seed": cfg.seed,
            "catalog_hash": cat_hash,
            "entries": rows,
            "passed": all_ok,
        }))
    return EXIT_OK if all_ok else EXIT_DOMAIN


# ---------------------------------------------------------------------------
# argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits 2 by default; we use 1
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _parse_tol(items: Sequence[str]) -> dict[str, float]:
    out = {}
    for item in items:
        if "=" not in item:
            raise ValueError(f"expected NAME=VALUE, got {item!r}")
        name, _, value = item.partition("=")
        out[name.strip()] = float(value)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="leafatlas", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "md"), default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--weyl-cap", type=int, default=DEFAULT_WEYL_CAP)
    common.add_argument("--catalog", help=f"catalog file (or ${ENV_CATALOG})")
    common.add_argument("--out", help="write the report to this path atomically")

    pa = sub.add_parser("atlas", parents=[common], help="leaf stratification report")
    pa.add_argument("--form", help="catalog label, e.g. sl(2,R)")
    pa.add_argument("--type", dest="cartan_type", help="inline diagram type, e.g. A2")
    pa.add_argument("--rank", type=int)
    pa.add_argument("--black", default="{}")
    pa.add_argument("--arrows", default="{}")
    pa.add_argument("--label", default=None, help="label for an inline diagram")

    pv = sub.add_parser("verify", parents=[common], help="numerical verification")
    pv.add_argument("--form", required=True)
    pv.add_argument("--samples", type=int, default=100)
    pv.add_argument("--tol", action="append", default=[],
                    metavar="NAME=VALUE", help="tolerance override, repeatable")

    sub.add_parser("catalog", parents=[common], help="validate the catalog")
    return parser


def _inline_diagram(args: argparse.Namespace) -> SatakeDiagram | None:
    if not args.cartan_type:
        return None
    from .satake import _TYPE_RE, _parse_arrow_set, _parse_node_set

    m = _TYPE_RE.match(args.cartan_type)
    if m is None:
        raise CatalogParseError(f"bad type {args.cartan_type!r}")
    family = m.group(1).upper()
    if m.group(2):
        rank = int(m.group(2))
    elif args.rank:
        rank = args.rank
    else:
        raise CatalogParseError("inline diagram needs a rank (type=A2 or --rank)")
    black = _parse_node_set(args.black, 0)
    arrows = _parse_arrow_set(args.arrows, 0)
    label = args.label or f"custom({family}{rank})"
    return SatakeDiagram(label=label, family=family, rank=rank,
                         black=black, arrows=arrows)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        tolerances = _parse_tol(getattr(args, "tol", []))
    except ValueError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE

    cfg = RunConfig(
        command=args.command,
        form=getattr(args, "form", None),
        output_format=args.format,
        tolerances=tolerances,
        samples=getattr(args, "samples", 100),
        seed=args.seed,
        weyl_cap=args.weyl_cap,
        catalog_path=args.catalog,
        out_path=args.out,
    )

    try:
        if args.command == "atlas":
            try:
                cfg.inline = _inline_diagram(args)
            except CatalogParseError as exc:
                sys.stderr.write(f"{exc}\n")
                return EXIT_USAGE
            if cfg.inline is None and not cfg.form:
                sys.stderr.write("atlas needs --form or an inline --type diagram\n")
                return EXIT_USAGE
            return cmd_atlas(cfg)
        if args.command == "verify":
            return cmd_verify(cfg)
        if args.command == "catalog":
            return cmd_catalog(cfg)
    except CatalogParseError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_DOMAIN
    except SatakeError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_DOMAIN
    except OSError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_DOMAIN
    return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
