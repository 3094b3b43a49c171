"""Command line front end: ``audit``, ``cohomology``, ``examples``.

Exit codes: 0 success, 1 mathematical failure, 2 usage or parse error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import herr, homalg, iwasawa as iw, pgmod
from .checks import CheckResult
from .errors import InvalidParams, PhiGammaError

log = logging.getLogger("phigamma")

EXIT_OK, EXIT_MATH, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    grid: list[iw.GroupLevelParams] = field(default_factory=list)
    modules: list[str] = field(default_factory=list)
    out: str | None = None
    format: str = "json"
    seed: int = 0
    max_strand_degree: int = 6
    with_phi: bool = False
    family: str | None = None


def parse_grid(text: str) -> list[iw.GroupLevelParams]:
    """``"p,n,m,N,l;p,n,m,N,l"`` -> validated parameters, in order."""
    points = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 5:
            raise UsageError(f"grid entry {chunk!r} must have five fields p,n,m,N,l")
        try:
            values = [int(x) for x in parts]
        except ValueError:
            raise UsageError(f"grid entry {chunk!r} has a non-integer field") from None
        try:
            points.append(iw.validate_params(*values))
        except InvalidParams as exc:
            raise UsageError(f"grid entry {chunk!r}: {exc}") from None
    if not points:
        raise UsageError("empty grid")
    return points


def _params_dict(gp: iw.GroupLevelParams) -> dict:
    return dict(zip(("p", "n", "m", "N", "l"), gp.astuple()))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_audit(cfg: RunConfig) -> tuple[int, dict]:
    entries = []
    ok = True
    for gp in cfg.grid:
        checks: list[CheckResult] = []
        checks += iw.check_relations(gp, raise_on_failure=False)
        checks += herr.audit_d_squared(herr.build_c_lambda(gp), raise_on_failure=False)
        for k in range(1, max(gp.n, 1) + 1):
            for res in homalg.graded_strand_audit(gp.p, gp.N, k, cfg.max_strand_degree,
                                                  raise_on_failure=False):
                checks.append(CheckResult(
                    f"koszul strand k={k} degree={res.degree} over Z/{gp.p}^{gp.N}", res.passed,
                    None if res.passed else "H = " + ", ".join(str(h) for h in res.homology)))
        if gp.n <= 1:
            checks += herr.compare_fixtures(gp, raise_on_failure=False)
        entries.append({"params": _params_dict(gp), "checks": [c.as_dict() for c in checks]})
        ok = ok and all(c.passed for c in checks)
    report = {"command": "audit", "status": "pass" if ok else "fail", "grid": entries}
    return (EXIT_OK if ok else EXIT_MATH), report


def _cohomology_entries(name: str, H) -> list[dict]:
    return [{"complex": name, "degree": i, "invariant_factors": list(h.invariant_factors)}
            for i, h in enumerate(H)]


def analyse_module(spec: pgmod.TorsionPhiGammaModuleSpec, with_phi: bool) -> dict:
    """Run both constructions (and the closed form when it applies) on one module."""
    gp = spec.gp
    checks: list[CheckResult] = []
    actions = herr._Actions(spec)
    Hd = homalg.cohomology(herr.build_c_gamma(gp, spec, actions))
    Hf = homalg.cohomology(herr.build_c_gamma_via_fiber(gp, spec, actions))
    agree = [h.invariant_factors for h in Hd] == [h.invariant_factors for h in Hf]
    checks.append(CheckResult("C_gamma: direct = iterated-fiber", agree))
    if spec.beta_trivial:
        Hc = herr.closed_form_beta_trivial(gp, spec)
        same = [h.invariant_factors for h in Hd] == [h.invariant_factors for h in Hc]
        checks.append(CheckResult("C_gamma: direct = closed-form", same))
        agree = agree and same
    chi = homalg.euler_characteristic(Hd)
    checks.append(CheckResult("C_gamma: euler characteristic = 0", chi == 0, None if chi == 0 else str(chi)))
    cohom = _cohomology_entries("C_gamma", Hd)
    euler = {"C_gamma": chi}
    etale = None
    warnings = []
    if spec.phi is not None:
        etale = pgmod.is_etale(spec)
        if not etale:
            warnings.append("phi is not etale")
            log.warning("module is not etale; computing anyway")
        Pd = homalg.cohomology(herr.build_c_phi_gamma(gp, spec, "direct", actions))
        Pf = homalg.cohomology(herr.build_c_phi_gamma(gp, spec, "iterated-fiber", actions))
        same = [h.invariant_factors for h in Pd] == [h.invariant_factors for h in Pf]
        checks.append(CheckResult("C_phi_gamma: direct = iterated-fiber", same))
        agree = agree and same
        checks += herr.rho_length_identity(gp, spec, actions)
        cohom += _cohomology_entries("C_phi_gamma", Pd)
        euler["C_phi_gamma"] = homalg.euler_characteristic(Pd)
    elif with_phi:
        raise pgmod.PhiMissing("--with-phi given but the module has no phi")
    return {
        "params": _params_dict(gp),
        "etale": etale,
        "warnings": warnings,
        "checks": [c.as_dict() for c in checks],
        "cohomology": cohom,
        "euler_characteristic": euler,
        "constructions_agree": agree,
        "status": "pass" if all(c.passed for c in checks) else "fail",
    }


def cmd_cohomology(cfg: RunConfig) -> tuple[int, dict]:
    if not cfg.modules:
        raise UsageError("cohomology needs at least one --module")
    reports = []
    math_fail = parse_fail = False
    for path in cfg.modules:
        entry: dict = {"module": path}
        try:
            spec = pgmod.parse_spec(Path(path).read_text(encoding="utf-8"))
            entry.update(analyse_module(spec, cfg.with_phi))
            math_fail = math_fail or entry["status"] == "fail"
        except (OSError, PhiGammaError) as exc:
            entry.update({"status": "error", "error": f"{type(exc).__name__}: {exc}"})
            parse_fail = True
        reports.append(entry)
    status = "fail" if math_fail else ("error" if parse_fail else "pass")
    code = EXIT_MATH if math_fail else (EXIT_USAGE if parse_fail else EXIT_OK)
    return code, {"command": "cohomology", "status": status, "reports": reports}


def cmd_examples(cfg: RunConfig) -> tuple[int, dict | None]:
    if not cfg.family:
        raise UsageError("examples needs --family")
    try:
        specs = [(gp, pgmod.builtin_family(gp, cfg.family, cfg.seed)) for gp in cfg.grid]
    except PhiGammaError as exc:
        raise UsageError(str(exc)) from None
    fam = cfg.family.split("(")[0].split(":")[0]
    if cfg.out is None:
        if len(specs) != 1:
            raise UsageError("several grid points need --out DIRECTORY")
        sys.stdout.write(pgmod.serialize_spec(specs[0][1]))
        return EXIT_OK, None
    out = Path(cfg.out)
    if len(specs) == 1 and not cfg.out.endswith("/") and not out.is_dir():
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(pgmod.serialize_spec(specs[0][1]), encoding="utf-8")
        written = [str(out)]
    else:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for gp, spec in specs:
            p, n, m, N, l = gp.astuple()
            f = out / f"{fam}_p{p}_n{n}_m{m}_N{N}_l{l}.json"
            f.write_text(pgmod.serialize_spec(spec), encoding="utf-8")
            written.append(str(f))
    return EXIT_OK, {"command": "examples", "status": "pass", "written": written}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def render_table(report: dict) -> str:
    lines = [f"{report['command']}: {report['status']}"]
    if report["command"] == "audit":
        for entry in report["grid"]:
            lines.append("params " + ",".join(str(v) for v in entry["params"].values()))
            for c in entry["checks"]:
                extra = f"  [{c['witness']}]" if "witness" in c else ""
                lines.append(f"  {c['status']:4}  {c['name']}{extra}")
    elif report["command"] == "cohomology":
        for r in report["reports"]:
            lines.append(f"module {r['module']}: {r['status']}")
            if "error" in r:
                lines.append(f"  error: {r['error']}")
                continue
            for h in r["cohomology"]:
                factors = h["invariant_factors"]
                grp = " + ".join(f"Z/{r['params']['p']}^{e}" for e in factors) or "0"
                lines.append(f"  {h['complex']:12} H^{h['degree']} = {grp}")
            for c in r["checks"]:
                lines.append(f"  {c['status']:4}  {c['name']}")
            lines.append(f"  etale: {r['etale']}  euler: {r['euler_characteristic']}")
    else:
        lines += [f"  wrote {w}" for w in report.get("written", [])]
    return "\n".join(lines) + "\n"


def emit(report: dict, cfg: RunConfig):
    text = json.dumps(report, indent=2) + "\n" if cfg.format == "json" else render_table(report)
    if cfg.out and cfg.command != "examples":
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phigamma", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", help="p,n,m,N,l[;p,n,m,N,l...]")
    common.add_argument("--out", help="output file (examples: file or directory)")
    common.add_argument("--format", choices=("json", "table"), default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    a = sub.add_parser("audit", parents=[common], help="relations, d^2 = 0, Koszul strands, fixtures")
    a.add_argument("--max-strand-degree", type=int, default=6)
    c = sub.add_parser("cohomology", parents=[common], help="cohomology of module files")
    c.add_argument("--module", action="append", default=[], help="module file (repeatable)")
    c.add_argument("--with-phi", action="store_true", help="require phi and report C_phi_gamma")
    e = sub.add_parser("examples", parents=[common], help="write built-in example modules")
    e.add_argument("--family", required=True,
                   help="trivial | gamma_character(k) | beta_unipotent | regular | cyclic_quotient")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(message)s")
    try:
        cfg = RunConfig(
            command=args.command,
            out=args.out,
            format=args.format,
            seed=args.seed,
            max_strand_degree=getattr(args, "max_strand_degree", 6),
            with_phi=getattr(args, "with_phi", False),
            modules=getattr(args, "module", []),
            family=getattr(args, "family", None),
        )
        if args.grid is not None:
            cfg.grid = parse_grid(args.grid)
        elif cfg.command in ("audit", "examples"):
            raise UsageError(f"{cfg.command} needs --grid")
        if cfg.max_strand_degree < 0:
            raise UsageError("--max-strand-degree must be >= 0")
        runner = {"audit": cmd_audit, "cohomology": cmd_cohomology, "examples": cmd_examples}[cfg.command]
        code, report = runner(cfg)
    except UsageError as exc:
        print(f"phigamma: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if report is not None:
        emit(report, cfg)
    return code


if __name__ == "__main__":
    sys.exit(main())
