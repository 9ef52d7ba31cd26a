"""Command-line entry point.

Exit codes: 0 when every selected check passes, 1 when at least one fails,
2 for malformed input or configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import Operator
from .category import (
    TripleMorphism,
    build_p_form,
    check_even_flag,
    check_fluctuation_compat,
    check_morphism,
    check_p_form_intertwining,
    check_real_flag,
    image_terms,
    random_terms,
)
from .errors import InputError, NCTriplesError, RadiusOverflow
from .functor import (
    WeightedGroup,
    check_functor_laws,
    check_linearization_bound,
    functor_morphism,
    isometry_matrix,
    left_exactness_witness,
    relator_morphisms,
)
from .groups import build_group, build_homomorphism, classify_hom, enumerate_ball, full_ball, identity_hom
from .triple import (
    assemble_triple,
    double_triple,
    grading_obstruction,
    heat_trace,
    ko_signature,
    regularity_estimates,
    verify_axioms,
    verify_real_structure,
)
from .weights import build_weight

VERIFY_CHECKS = ("axioms", "grading", "heat", "ko", "real", "regularity")
MORPHISM_CHECKS = ("base", "even", "fluctuation", "pforms", "real")
TRIPLE_FIELDS = {"group", "weight", "radius", "gens", "double"}


# serialization


def jsonable(v):
    """Plain-JSON form: complex as [re, im], tuples and sets as lists."""
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, (set, frozenset)):
        return sorted(jsonable(x) for x in v)
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, np.ndarray):
        return jsonable(v.tolist())
    if v is None or isinstance(v, str):
        return v
    return repr(v)


def _status(v) -> str:
    return "pass" if v is True else "fail" if v is False else "unknown"


class Collector:
    def __init__(self):
        self.records = []

    def add(self, name, status, witnesses=None, values=None, safe_core=None):
        self.records.append(
            {
                "name": name,
                "status": status if isinstance(status, str) else _status(status),
                "witnesses": jsonable(witnesses or {}),
                "values": jsonable(values or {}),
                "safe_core": jsonable(safe_core),
            }
        )

    def add_report(self, name, report, extra=None):
        values = dict(report.values)
        if extra:
            values.update(extra)
        values["status"] = {k: _status(v) for k, v in report.status.items()}
        self.add(name, report.passed, report.witnesses, values, report.safe_core or None)

    def add_error(self, name, exc):
        self.add(name, False, {"error": f"{type(exc).__name__}: {exc}"})

    @property
    def all_pass(self) -> bool:
        return all(r["status"] == "pass" for r in self.records)


# input parsing


def load_json(arg: str):
    """A JSON file path or an inline JSON document."""
    text = arg.strip()
    if text[:1] in "{[":
        source = "inline argument"
    else:
        path = Path(arg)
        try:
            text = path.read_text()
        except OSError as exc:
            raise InputError(f"cannot read {arg}: {exc.strerror}") from exc
        source = str(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def parse_gens(group, gens):
    if gens is None:
        return None
    if isinstance(gens, str):
        text = gens.strip()
        if text.startswith("["):
            try:
                items = json.loads(text)
            except json.JSONDecodeError as exc:
                raise InputError(f"cannot parse generator list: {exc.msg}") from exc
        else:
            items = []
            for tok in text.split(","):
                tok = tok.strip()
                try:
                    items.append(json.loads(tok))
                except json.JSONDecodeError:
                    items.append(tok)
    else:
        items = list(gens)
    return [group.element_from_json(g) for g in items]


def triple_from_spec(spec: dict):
    if not isinstance(spec, dict) or "group" not in spec or "weight" not in spec:
        raise InputError("triple spec needs 'group' and 'weight'")
    extra = set(spec) - TRIPLE_FIELDS
    if extra:
        raise InputError(f"unknown triple fields: {sorted(extra)}")
    group = build_group(spec["group"])
    gens = parse_gens(group, spec.get("gens"))
    weight = build_weight(spec["weight"], group)
    radius = spec.get("radius")
    if radius is None:
        if not group.is_finite:
            raise InputError("infinite groups need a radius")
        ball = full_ball(group, gens)
    else:
        if not isinstance(radius, int) or isinstance(radius, bool) or radius < 0:
            raise InputError(f"radius must be a nonnegative integer, got {radius!r}")
        ball = enumerate_ball(group, gens, radius)
    T = assemble_triple(group, weight, ball=ball)
    if spec.get("double"):
        T = double_triple(T)
    return T


def _load_triple(arg):
    return triple_from_spec(load_json(arg))


def _group_of(spec):
    """Group from either a triple spec or a bare group spec."""
    if isinstance(spec, dict) and "group" in spec:
        return build_group(spec["group"])
    return build_group(spec)


CHECK_ALIASES = {"heat_trace": "heat", "real_structure": "real", "p_forms": "pforms"}


def _checks(arg: str, known) -> list:
    if arg in (None, "all"):
        return list(known)
    text = arg.strip()
    if text.startswith("["):
        try:
            chosen = [str(c) for c in json.loads(text)]
        except json.JSONDecodeError as exc:
            raise InputError(f"cannot parse check list: {exc.msg}") from exc
    else:
        chosen = [c.strip() for c in text.split(",") if c.strip()]
    if "all" in chosen:
        return list(known)
    chosen = [CHECK_ALIASES.get(c, c) for c in chosen]
    bad = [c for c in chosen if c not in known]
    if bad:
        raise InputError(f"unknown checks {bad}; known: {', '.join(known)}")
    return sorted(set(chosen))


# commands


def cmd_build_triple(args, out: Collector) -> dict:
    group = build_group(load_json(args.group))
    weight_spec = load_json(args.weight)
    spec = {"group": group.to_spec(), "weight": weight_spec, "radius": args.radius}
    if args.gens:
        spec["gens"] = [group.element_to_json(g) for g in parse_gens(group, args.gens)]
    T = triple_from_spec(spec)
    summary = T.summary()
    witness = None if T.spectral else {"proper": T.proper.proper, "dirac_weight": T.dirac_report.status.get("dirac"),
                                          "reason": T.proper.reason}
    out.add("spectral", T.spectral, witness, values={"proper": T.proper.proper, "proper_reason": T.proper.reason,
                                             "dirac_weight": T.dirac_report.status.get("dirac")})
    out.add_report("axioms", verify_axioms(T))
    if args.out:
        Path(args.out).write_text(json.dumps(jsonable(spec), indent=2) + "\n")
    return {"triple": jsonable(summary)}


def cmd_verify(args, out: Collector) -> dict:
    T = _load_triple(args.triple)
    checks = _checks(args.checks, VERIFY_CHECKS)
    for name in checks:
        try:
            if name == "axioms":
                out.add_report("axioms", verify_axioms(T))
            elif name == "real":
                rs = verify_real_structure(T.base or T, seed=args.seed)
                rec_values = dict(rs.values)
                rec_values["status"] = {k: _status(v) for k, v in rs.status.items()}
                ok = rs.values["valid"] and rs.status["zeroth_order"] and rs.status["agrees_with_decomposition"]
                out.add("real", ok, rs.witnesses, rec_values, rs.safe_core)
            elif name == "ko":
                sig = ko_signature(T)
                out.add("ko", True, values=sig.to_json())
            elif name == "regularity":
                x = T.ball.generators[0] if args.x is None else parse_gens(T.group, f"[{args.x}]")[0]
                rows = regularity_estimates(T, x, args.depth)
                bad = [r["depth"] for r in rows if not r["ok"]]
                out.add("regularity", not bad, {"depth": bad[0]} if bad else None,
                        {"probe": T.group.element_to_json(x), "estimates": rows},
                        rows[0]["safe_core_margin"] if rows else None)
            elif name == "heat":
                ht = heat_trace(T, args.t)
                out.add("heat_trace", True, values={**ht, "t": args.t})
            elif name == "grading":
                diag = grading_obstruction(T, seed=args.seed)
                ok = diag.get("validated", True)
                out.add("grading", ok, diag.get("checks", {}).get("witness"), diag)
        except InputError:
            raise
        except NCTriplesError as exc:
            out.add_error("heat_trace" if name == "heat" else name, exc)
    return {}


def _load_phi(arg, T1, T2):
    data = load_json(arg)
    if isinstance(data, dict) and set(data) == {"scale"}:
        lam = data["scale"]
        lam = complex(*lam) if isinstance(lam, list) else complex(lam)
        if T1.dimension != T2.dimension:
            raise InputError("a scaled identity needs equal dimensions")
        return Operator(T1.space, T2.space, lam * np.eye(T1.dimension))
    rows = data.get("matrix") if isinstance(data, dict) else data
    try:
        M = np.array([[complex(*e) if isinstance(e, list) else complex(e) for e in row] for row in rows])
    except (TypeError, ValueError) as exc:
        raise InputError("phi matrix entries must be numbers or [re, im] pairs") from exc
    return Operator(T1.space, T2.space, M)


def cmd_morphism(args, out: Collector) -> dict:
    T1 = _load_triple(args.source)
    T2 = _load_triple(args.target)
    if args.hom is None and args.phi is None:
        raise InputError("give --hom, --phi or both")
    hom = build_homomorphism(load_json(args.hom), T1.group, T2.group) if args.hom else None
    if args.phi:
        Phi = _load_phi(args.phi, T1, T2)
    else:
        Phi = Operator(T1.space, T2.space, isometry_matrix(hom, T1, T2))
    checks = _checks(args.checks, MORPHISM_CHECKS)
    if args.checks == "all" and (T1.grading is None or T2.grading is None):
        checks.remove("even")  # "all" means every check that applies
    M = Phi.matrix
    hom_shape = bool(np.all(np.isin(M, (0, 1))) and np.all((M == 1).sum(axis=0) == 1))
    base = check_morphism(T1, T2, hom, Phi, override=args.override, seed=args.seed)
    m = base.morphism or TripleMorphism(T1, T2, hom if hom is not None else identity_hom(T1.group), Phi)
    if "base" in checks:
        out.add_report("base", base, {"phi_hom_induced_shape": hom_shape, "is_isometry": m.is_isometry})
    rng = np.random.default_rng(args.seed)
    for name in checks:
        try:
            if name == "real":
                check_real_flag(m)
                out.add_report("real", m.flag_reports["real"])
            elif name == "even":
                check_even_flag(m)
                out.add_report("even", m.flag_reports["even"])
            elif name == "pforms":
                worst, witness, ok = 0.0, None, True
                for p in (0, 1, 2):
                    for _ in range(args.samples):
                        r = check_p_form_intertwining(m, random_terms(T1, p, 2, rng))
                        worst = max(worst, r.values["p_form_intertwining"]["max_residual"])
                        if not r.passed and witness is None:
                            ok, witness = False, {"degree": p, **r.witnesses["p_form_intertwining"]}
                out.add("pforms", ok, witness, {"max_residual": worst, "samples_per_degree": args.samples})
            elif name == "fluctuation":
                terms = random_terms(T1, 1, 2, rng)
                A1 = build_p_form(m.source, terms)
                A2 = build_p_form(m.target, image_terms(m, terms))
                out.add_report("fluctuation", check_fluctuation_compat(m, A1, A2, seed=args.seed))
        except InputError:
            raise
        except NCTriplesError as exc:
            out.add_error(name, exc)
    return {}


def _hom_file(data):
    if not isinstance(data, dict) or "source" not in data or "target" not in data:
        raise InputError("hom file needs 'source' and 'target'")
    extra = set(data) - {"source", "target", "images", "map"}
    if extra:
        raise InputError(f"unknown hom fields: {sorted(extra)}")
    src, dst = data["source"], data["target"]
    G, H = _group_of(src), _group_of(dst)
    spec = {k: data[k] for k in ("images", "map") if k in data}
    hom = build_homomorphism(spec, G, H)
    return src, dst, hom


def _weighted(spec, group):
    if isinstance(spec, dict) and "weight" in spec:
        return WeightedGroup(group, build_weight(spec["weight"], group)), spec.get("radius")
    return None, None


def cmd_functor(args, out: Collector) -> dict:
    links = [_hom_file(load_json(p)) for p in args.chain.split(",") if p.strip()]
    if not links:
        raise InputError("empty chain")
    summary = []
    for k, (src, dst, hom) in enumerate(links):
        wG, rG = _weighted(src, hom.source)
        wH, rH = _weighted(dst, hom.target)
        cls = classify_hom(hom)
        entry = {"index": k, "mono": cls.mono, "epi": cls.epi}
        name = f"link{k}"
        try:
            if cls.mono and wG and wH:
                rep = left_exactness_witness(hom, wG, wH, (rG, rH))
                out.add_report(f"{name}.functor_morphism", rep)
            if cls.epi and hom.source.is_finite and hom.target.is_finite:
                if wG is None:
                    raise InputError("relator needs a source weight")
                pair = relator_morphisms(hom, wG)
                entry["splittings"] = len(pair.splittings)
                out.add(
                    f"{name}.relator",
                    all(pair.weighted),
                    values={
                        "splittings": [s.to_spec() for s in pair.splittings],
                        "pairs": sum(m is not None for m in pair.morphisms),
                        "weighted": pair.weighted,
                    },
                )
                out.add_report(f"{name}.linearization_bound", check_linearization_bound(hom, seed=args.seed))
        except InputError:
            raise
        except NCTriplesError as exc:
            out.add_error(name, exc)
        summary.append(entry)
    for k in range(len(links) - 1):
        (s1, d1, phi), (s2, d2, psi) = links[k], links[k + 1]
        wG, rG = _weighted(s1, phi.source)
        wH, rH = _weighted(d1, phi.target)
        wK, rK = _weighted(d2, psi.target)
        name = f"laws{k}"
        try:
            if not (wG and wH and wK):
                raise InputError("functor laws need weights on every group")
            out.add_report(name, check_functor_laws(phi, psi, wG, wH, wK, (rG, rH, rK)))
        except InputError:
            raise
        except NCTriplesError as exc:
            out.add_error(name, exc)
    return {"chain": summary}


def cmd_relator(args, out: Collector) -> dict:
    src, dst, epi = _hom_file(load_json(args.epi))
    files = [w for w in args.weights.split(",") if w.strip()]
    if not files or len(files) > 2:
        raise InputError("--weights takes WG.json or WG.json,WH.json")
    wG = WeightedGroup(epi.source, build_weight(load_json(files[0]), epi.source))
    wH = WeightedGroup(epi.target, build_weight(load_json(files[1]), epi.target)) if len(files) == 2 else None
    try:
        pair = relator_morphisms(epi, wG, wH)
    except InputError:
        raise
    except NCTriplesError as exc:
        out.add_error("relator", exc)
        return {}
    for k, (psi, m, ok) in enumerate(zip(pair.splittings, pair.morphisms, pair.weighted)):
        values = {"splitting": psi.to_spec(), "weighted": ok}
        if m is not None:
            values["real_flag"] = m.real_checked
        out.add(f"pair{k}", ok, None if ok else {"splitting": psi.to_spec()}, values)
    out.add("splittings", True, values={"count": len(pair.splittings), "unique": len(pair.splittings) == 1})
    return {}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nctriples", description="Spectral triples of weighted groups.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--format", choices=("json", "text"), default="json")
        sp.add_argument("--report", help="write the report here instead of stdout")

    b = sub.add_parser("build-triple", help="assemble a triple and check its axioms")
    b.add_argument("--group", required=True)
    b.add_argument("--weight", required=True)
    b.add_argument("--radius", type=int)
    b.add_argument("--gens")
    b.add_argument("--out")
    common(b)

    v = sub.add_parser("verify", help="run verification suites on a triple")
    v.add_argument("--triple", required=True)
    v.add_argument("--checks", default="all")
    v.add_argument("--t", type=float, default=1.0)
    v.add_argument("--x", help="probe element for regularity (JSON)")
    v.add_argument("--depth", type=int, default=3)
    common(v)

    m = sub.add_parser("morphism", help="check a morphism of triples")
    m.add_argument("--source", required=True)
    m.add_argument("--target", required=True)
    m.add_argument("--hom")
    m.add_argument("--phi")
    m.add_argument("--checks", default="base")
    m.add_argument("--samples", type=int, default=20)
    m.add_argument("--override", action="store_true", help="allow non-spectral triples")
    common(m)

    f = sub.add_parser("functor", help="functor laws, splittings and relator pairs along a chain")
    f.add_argument("--chain", required=True)
    common(f)

    r = sub.add_parser("relator", help="relator morphisms of a split epimorphism")
    r.add_argument("--epi", required=True)
    r.add_argument("--weights", required=True)
    common(r)
    return p


COMMANDS = {
    "build-triple": cmd_build_triple,
    "verify": cmd_verify,
    "morphism": cmd_morphism,
    "functor": cmd_functor,
    "relator": cmd_relator,
}


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("format", "report")}


def render_text(report: dict) -> str:
    lines = [f"nctriples {report['version']} {report['config']['command']}"]
    for rec in report["checks"]:
        lines.append(f"{rec['status']:>7}  {rec['name']}")
        for k, v in rec["witnesses"].items():
            lines.append(f"         witness {k}: {json.dumps(v)}")
    for k, v in report.items():
        if k not in ("version", "config", "checks", "elapsed_ms"):
            lines.append(f"{k}: {json.dumps(v)}")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    t0 = time.perf_counter()
    out = Collector()
    try:
        extra = COMMANDS[args.command](args, out)
    except (InputError, RadiusOverflow) as exc:
        print(f"nctriples: error: {exc}", file=sys.stderr)
        return 2
    out.records.sort(key=lambda r: r["name"])
    report = {"version": __version__, "config": jsonable(_config(args)), "checks": out.records}
    report.update(extra or {})
    report["elapsed_ms"] = round((time.perf_counter() - t0) * 1000, 3)
    text = json.dumps(report, indent=2) + "\n" if args.format == "json" else render_text(report)
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if out.all_pass else 1


if __name__ == "__main__":
    sys.exit(main())
