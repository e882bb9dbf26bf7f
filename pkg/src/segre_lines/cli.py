"""Command-line front end: JSON in, JSON out.

Exit codes: 0 ok, 1 malformed input, 2 degenerate or wall input,
3 incomplete enumeration, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import IncompleteEnumeration, InvalidInput, SegreLinesError
from .exactalg import format_rational
from .jet import Hypersurface, JetCurve, det_AC, extract_jet
from .secants import SolverConfig

COMMANDS = ("index", "secants", "segre", "welschinger", "nodes", "lines", "wallcross", "generate", "verify-all")


@dataclass
class RunConfig:
    command: str
    input_path: Optional[str] = None
    output_path: Optional[str] = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    seed: int = 42
    n: Optional[int] = None
    from_path: Optional[str] = None
    to_path: Optional[str] = None
    steps: int = 0
    pairs: int = 0
    pretty: bool = False


# ---------------------------------------------------------------------------
# input
# ---------------------------------------------------------------------------


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InvalidInput(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _curve_from_obj(obj) -> JetCurve:
    if not isinstance(obj, dict):
        raise InvalidInput("expected a JSON object")
    if "curve" in obj and isinstance(obj["curve"], dict):
        obj = obj["curve"]
    if "terms" in obj:
        return extract_jet(Hypersurface.from_json(obj))
    if "p" in obj:
        p = obj["p"]
        if isinstance(p, list) and p and isinstance(p[0], list):
            # bare coefficient rows
            p = [{"degree": len(r) - 1, "coeffs": r} for r in p]
        return JetCurve.from_json({"n": obj.get("n", len(p)), "p": p})
    raise InvalidInput("input is neither a jet curve ('p') nor a hypersurface ('terms')")


def load_curve(path: str) -> JetCurve:
    return _curve_from_obj(_read_json(path))


def load_hypersurface(path: str) -> Hypersurface:
    obj = _read_json(path)
    if not isinstance(obj, dict) or "terms" not in obj:
        raise InvalidInput(f"{path}: expected a hypersurface with 'terms'")
    return Hypersurface.from_json(obj)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _det(C: JetCurve) -> str:
    return format_rational(det_AC(C))


def _cmd_index(cfg: RunConfig) -> dict:
    from .jet import euler_index

    from .errors import Degenerate

    C = load_curve(cfg.input_path)
    out = {"curve": C.to_json(), "det": _det(C)}
    if out["det"] == "0":
        exc = Degenerate("det A_C = 0: the curve lies on the discriminant")
        exc.report = out
        raise exc
    out["euler"] = euler_index(C)
    return out


def _cmd_secants(cfg: RunConfig) -> dict:
    from .secants import secants_numeric

    C = load_curve(cfg.input_path)
    rep = secants_numeric(C, cfg.solver, raise_on_fail=False)
    out = {"curve": C.to_json(), "det": _det(C), "secants": rep.to_json()}
    if not rep.certificate_ok:
        raise IncompleteEnumeration("secant count below the Castelnuovo total", out)
    return out


def _cmd_nodes(cfg: RunConfig) -> dict:
    from .secants import nodes_exact_n3
    from .segre import chord_diagram

    C = load_curve(cfg.input_path)
    if C.n != 3:
        raise InvalidInput("nodes needs n = 3")
    rep = nodes_exact_n3(C, seed=cfg.seed)
    return {"curve": C.to_json(), "det": _det(C), "nodes": rep.to_json(), "chord_diagram": chord_diagram(C, rep)}


def _cmd_segre(cfg: RunConfig) -> dict:
    from .segre import default_report, segre_details, segre_index

    C = load_curve(cfg.input_path)
    out = {"curve": C.to_json(), "det": _det(C)}
    if C.n == 2:
        out["segre"] = segre_index(C)
        return out
    rep = default_report(C, cfg.solver)
    out["secants"] = rep.to_json()
    if not rep.certificate_ok:
        raise IncompleteEnumeration("secant count below the Castelnuovo total", out)
    out["segre"] = segre_index(C, rep)
    out["details"] = segre_details(C, rep)
    return out


def _cmd_welschinger(cfg: RunConfig) -> dict:
    from .welsch import splitting_sections, welschinger_weight

    C = load_curve(cfg.input_path)
    S = splitting_sections(C)
    info: dict = {}
    w = welschinger_weight(C, S, details=info)
    return {"curve": C.to_json(), "det": _det(C), "sections": S.to_json(), "loop": info, "welschinger": w}


def _cmd_verify_all(cfg: RunConfig) -> dict:
    from .jet import euler_index
    from .segre import default_report, segre_index
    from .welsch import welschinger_weight

    C = load_curve(cfg.input_path)
    out = {"curve": C.to_json(), "det": _det(C), "euler": euler_index(C)}
    if C.n > 2:
        rep = default_report(C, cfg.solver)
        out["castelnuovo"] = {"total": rep.total_with_multiplicity, "certificate_ok": rep.certificate_ok}
        if not rep.certificate_ok:
            raise IncompleteEnumeration("secant count below the Castelnuovo total", out)
        out["segre"] = segre_index(C, rep)
    else:
        out["segre"] = segre_index(C)
    if C.n <= 3:
        out["welschinger"] = welschinger_weight(C)
    vals = {out[k] for k in ("euler", "segre", "welschinger") if k in out}
    out["agreement"] = len(vals) == 1
    return out


def _cmd_lines(cfg: RunConfig) -> dict:
    from .lines import double_factorial, find_real_lines, line_indices

    X = load_hypersurface(cfg.input_path)
    search = find_real_lines(X, cfg.solver, raise_on_fail=False)
    rows = []
    total = 0
    for L in search.lines:
        row = L.to_json()
        row.update(line_indices(X, L, cfg.solver))
        total += row["euler"]
        rows.append(row)
    expected = double_factorial(2 * X.n - 1)
    out = {
        "hypersurface": X.to_json(),
        "lines": rows,
        "real_lines": len(rows),
        "stable": search.stable,
        "rounds": search.rounds,
        "counts": search.counts,
        "signed_count": total,
        "expected": expected,
        "agreement": all(len({r["euler"], r["segre"], r.get("welschinger", r["euler"])}) == 1 for r in rows),
        "warnings": search.warnings,
    }
    if X.n == 2 and len(rows) not in (3, 7, 15, 27):
        out["warnings"].append(f"{len(rows)} real lines is not a possible count for a smooth cubic surface")
        raise IncompleteEnumeration("impossible real line count", out)
    if not search.stable:
        raise IncompleteEnumeration("line count did not stabilize", out)
    if total != expected:
        raise IncompleteEnumeration(f"signed count {total} != {expected}", out)
    return out


def _cmd_wallcross(cfg: RunConfig) -> dict:
    from .generators import wallcross_path

    if not (cfg.from_path and cfg.to_path):
        raise InvalidInput("wallcross needs --from and --to")
    C0 = load_curve(cfg.from_path)
    C1 = load_curve(cfg.to_path)
    rep = wallcross_path(C0, C1, steps=cfg.steps, cfg=cfg.solver)
    return {"from": C0.to_json(), "to": C1.to_json(), "det_from": _det(C0), "det_to": _det(C1), **rep.to_json()}


def _cmd_generate(cfg: RunConfig) -> dict:
    from .generators import PlaneConfig, cremona_generate, int_BQ, random_plane_config

    if cfg.input_path:
        pc = PlaneConfig.from_json(_read_json(cfg.input_path))
        n = cfg.n
        if n is None:
            # |B| = C(n, 2)
            n = next((k for k in range(2, 20) if k * (k - 1) // 2 == pc.size), None)
            if n is None:
                raise InvalidInput(f"{pc.size} base points is not a binomial C(n, 2); pass --n")
    else:
        n = cfg.n or 3
        pc = random_plane_config(n, np.random.default_rng(cfg.seed), pairs=cfg.pairs)
    C, truth = cremona_generate(pc, n)
    return {
        "config": pc.to_json(),
        "curve": C.to_json(),
        "det": _det(C),
        "int_BQ": int_BQ(pc),
        "segre_ground_truth": truth,
    }


_DISPATCH = {
    "index": _cmd_index,
    "secants": _cmd_secants,
    "segre": _cmd_segre,
    "welschinger": _cmd_welschinger,
    "nodes": _cmd_nodes,
    "lines": _cmd_lines,
    "wallcross": _cmd_wallcross,
    "generate": _cmd_generate,
    "verify-all": _cmd_verify_all,
}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _dumps(obj, pretty: bool) -> str:
    if pretty:
        return json.dumps(obj, indent=2, sort_keys=True) + "\n"
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def write_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".segre-lines-", dir=d)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(cfg: RunConfig, report: dict) -> None:
    text = _dumps(report, cfg.pretty)
    if cfg.output_path:
        write_atomic(cfg.output_path, text)
    else:
        sys.stdout.write(text)


def run(cfg: RunConfig) -> int:
    head = {"command": cfg.command, "seed": cfg.seed, "solver": cfg.solver.to_json()}
    try:
        if cfg.command not in _DISPATCH:
            raise InvalidInput(f"unknown command {cfg.command!r}")
        if cfg.command not in ("wallcross", "generate") and not cfg.input_path:
            raise InvalidInput(f"{cfg.command} needs --input")
        body = _DISPATCH[cfg.command](cfg)
    except SegreLinesError as exc:
        report = dict(head, status="error", error={"type": type(exc).__name__, "message": str(exc)})
        partial = getattr(exc, "report", None)
        if isinstance(partial, dict):
            report.update(partial)
        elif partial is not None and hasattr(partial, "to_json"):
            report["partial"] = partial.to_json()
        print(f"segre-lines: {type(exc).__name__}: {exc}", file=sys.stderr)
        if exc.exit_code != 1:
            _emit(cfg, report)
        return exc.exit_code
    _emit(cfg, dict(head, status="ok", **body))
    return 0


def _parse_charts(text: str) -> tuple:
    out = []
    for part in text.split(","):
        try:
            a, b = (int(x) - 1 for x in part.split("-"))
        except ValueError as exc:
            raise InvalidInput(f"bad chart {part!r}; expected e.g. 1-2,3-4") from exc
        out.append((min(a, b), max(a, b)))
    return tuple(out)


class _Parser(argparse.ArgumentParser):
    # usage errors count as malformed input (exit 1, not argparse's 2)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--input")
    common.add_argument("--output")
    common.add_argument("--n", type=int)
    common.add_argument("--starts", type=int, default=500)
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--charts", help="pivot column pairs, 1-based, e.g. 1-2,1-3")
    common.add_argument("--stability-rounds", type=int, default=2)
    common.add_argument("--max-rounds", type=int, default=4)
    common.add_argument("--threads", type=int, help="worker pool size (default: SEGRE_LINES_THREADS or CPU count)")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="pretty", action="store_false", help="compact JSON (default)")
    fmt.add_argument("--pretty", dest="pretty", action="store_true")
    common.set_defaults(pretty=False)

    p = _Parser(prog="segre-lines", description="Euler, Segre and Welschinger indices of real lines.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common], description=f"segre-lines {name}")
        if name == "wallcross":
            sp.add_argument("--from", dest="from_path")
            sp.add_argument("--to", dest="to_path")
            sp.add_argument("--steps", type=int, default=0)
        if name == "generate":
            sp.add_argument("--pairs", type=int, default=0, help="conjugate pairs among the random base points")
    return p


def config_from_args(ns) -> RunConfig:
    solver = SolverConfig(
        starts=ns.starts,
        max_rounds=ns.max_rounds,
        tol=ns.tol,
        seed=ns.seed,
        stability_rounds=ns.stability_rounds,
        threads=ns.threads,
        charts=_parse_charts(ns.charts) if ns.charts else None,
    )
    return RunConfig(
        command=ns.command,
        input_path=ns.input,
        output_path=ns.output,
        solver=solver,
        seed=ns.seed,
        n=ns.n,
        from_path=getattr(ns, "from_path", None),
        to_path=getattr(ns, "to_path", None),
        steps=getattr(ns, "steps", 0),
        pairs=getattr(ns, "pairs", 0),
        pretty=ns.pretty,
    )


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except InvalidInput as exc:
        print(f"segre-lines: {exc}", file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
