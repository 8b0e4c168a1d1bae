"""Command-line interface.

Exit codes: 0 success, 1 a check failed, 2 usage or input-format error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

from . import audit, capgeom, explorer, fixtures, protocol, tabulated
from .hilbert import BlochVector, PureState, state_from_bloch

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: dict
    seed: int
    threads: int
    fmt: str
    out: str | None


def fmt_real(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    return f"{float(x):.17g}"


def render(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        payload = rows[0] if len(rows) == 1 else rows
        return json.dumps(payload, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(rows[0]))
    for row in rows:
        writer.writerow([fmt_real(v) if not isinstance(v, str) else v for v in row.values()])
    return buf.getvalue()


def emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def parse_state(spec: str) -> PureState:
    """Qubit or qudit state from a label, ``bloch:THETA,PHI`` or amplitudes.

    Labels: ``0 1 + - +i -i``. Amplitudes are comma-separated Python
    complex literals (``1,1j``) and are normalized.
    """
    spec = spec.strip()
    try:
        return fixtures.pure_state(spec)
    except KeyError:
        pass
    try:
        if spec.startswith("bloch:"):
            theta, phi = (float(v) for v in spec[6:].split(","))
            b = [math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)]
            return state_from_bloch(BlochVector(*b))
        amps = [complex(v.strip().replace(" ", "")) for v in spec.split(",")]
        return PureState.normalized(amps)
    except ValueError as exc:
        raise UsageError(f"malformed state spec {spec!r}: {exc}") from None


def cmd_bounds(cfg: RunConfig) -> int:
    p = cfg.params
    rows = []
    for r in capgeom.bounds_table(p["n_max"], p["epsilon"]):
        rows.append(
            {
                "n": r.n,
                "N": r.N,
                "log2_VN": r.log2_VN,
                "real_bound_bits": r.real_bound_bits,
                "complex_bound_bits": r.complex_bound_bits,
                "theorem2_bits": r.theorem2_bits,
                "entanglement_bits": r.entanglement_bits,
                "fw_log2": r.fw_log2,
                "raig_log2": r.raig_log2,
                "ref_2_pow_n_over_3": r.ref_2_pow_n_over_3,
            }
        )
    emit(render(rows, cfg.fmt), cfg.out)
    return EXIT_OK


def cmd_cap_volume(cfg: RunConfig) -> int:
    p = cfg.params
    kind, dim, method = p["kind"], p["dim"], p["method"]
    stderr = None
    if method == "montecarlo":
        est = capgeom.monte_carlo_cap_volume(kind, dim, p["trials"], cfg.seed, cfg.threads)
        value, stderr = est.estimate, est.stderr
    elif kind == "real":
        if method == "quadrature":
            value = capgeom.real_cap_volume(dim)
        elif method == "closed":
            value = capgeom.real_cap_volume_beta(dim)
        else:
            raise UsageError("method 'decomposed' applies to kind 'complex' only")
    else:
        value = {
            "quadrature": capgeom.complex_cap_volume,
            "closed": capgeom.complex_cap_volume_closed,
            "decomposed": capgeom.complex_cap_volume_decomposed,
        }[method](dim)
    row = {"kind": kind, "dim": dim, "method": method, "value": value, "stderr": stderr}
    emit(render([row], cfg.fmt), cfg.out)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    p = cfg.params
    psi, phi = parse_state(p["psi"]), parse_state(p["phi"])
    if psi.dimension != 2 or phi.dimension != 2:
        raise UsageError("the two-bit protocol simulates qubits only (dimension 2)")
    res = protocol.tb_simulate(psi, phi, p["trials"], cfg.seed, cfg.threads)
    row = {
        "trials": res.trials,
        "frequency": res.frequency,
        "born": res.born,
        "deviation": res.deviation,
        "stderr": res.stderr,
        "within_6_sigma": res.within(),
    }
    emit(render([row], cfg.fmt), cfg.out)
    return EXIT_OK if res.within() else EXIT_FAIL


def cmd_check_protocol(cfg: RunConfig) -> int:
    p = cfg.params
    try:
        tp = tabulated.load(p["path"])
    except OSError as exc:
        raise UsageError(f"cannot read {p['path']}: {exc.strerror}") from None
    except tabulated.ProtocolValidationError as exc:
        raise UsageError(f"invalid protocol at {exc.path}: {exc.message}") from None
    report = audit.audit_protocol(
        tp,
        tol_orth=p["tol_orth"],
        eps_supp=p["eps_supp"],
        equivalence_tol=p["equivalence_tol"],
        coverage_tol=p["coverage_tol"],
    )
    if cfg.fmt == "json":
        text = json.dumps(report.as_dict(), indent=2) + "\n"
    else:
        rows = [{"check": c.name, "status": c.status, "detail": c.detail} for c in report.checks]
        text = render(rows, "csv")
    emit(text, cfg.out)
    return EXIT_FAIL if report.failed else EXIT_OK


def cmd_explore(cfg: RunConfig) -> int:
    p = cfg.params
    if not 0 < p["delta_deg"] < 45:
        raise UsageError("--delta-deg must be in (0, 45)")
    report = explorer.explore(
        p["kind"],
        p["dim"],
        p["M"],
        math.radians(p["delta_deg"]),
        budget=p["budget"],
        seed=cfg.seed,
        threads=cfg.threads,
        cloud=p["cloud"],
    )
    row = report.to_dict(timing=p["timing"])
    if cfg.fmt == "json":
        text = json.dumps(row, indent=2) + "\n"
    else:
        text = render([row], "csv")
    emit(text, cfg.out)
    return EXIT_OK if report.feasible else EXIT_FAIL


COMMANDS = {
    "bounds": cmd_bounds,
    "cap-volume": cmd_cap_volume,
    "simulate": cmd_simulate,
    "check-protocol": cmd_check_protocol,
    "explore": cmd_explore,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, default=0, help="64-bit RNG seed (default 0)")
    common.add_argument("--threads", type=_positive_int, default=1, help="worker cap (default 1)")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="write output here instead of stdout")

    parser = argparse.ArgumentParser(
        prog="doublecap",
        description="Double-cap volumes, communication lower bounds, protocol simulation and audits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", parents=[common], help="lower-bound table for n = 1..n_max")
    p.add_argument("--n-max", type=_positive_int, required=True)
    p.add_argument("--epsilon", type=float, default=capgeom.DEFAULT_EPSILON)

    p = sub.add_parser("cap-volume", parents=[common], help="double-cap volume")
    p.add_argument("--kind", choices=("real", "complex"), required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--method", choices=("quadrature", "closed", "decomposed", "montecarlo"), default="quadrature")
    p.add_argument("--trials", type=_positive_int, default=1_000_000)

    p = sub.add_parser("simulate", parents=[common], help="run the two-bit qubit protocol")
    p.add_argument("--psi", required=True, help="state: 0 1 + - +i -i, bloch:THETA,PHI, or amplitudes a,b")
    p.add_argument("--phi", required=True, help="measured state, same syntax")
    p.add_argument("--trials", type=_positive_int, default=100_000)

    p = sub.add_parser("check-protocol", parents=[common], help="audit a tabulated protocol JSON file")
    p.add_argument("path")
    p.add_argument("--tol-orth", type=float, default=audit.ORTHOGONALITY_TOL)
    p.add_argument("--eps-supp", type=float, default=audit.SUPPORT_EPS)
    p.add_argument("--equivalence-tol", type=float, default=1e-9)
    p.add_argument("--coverage-tol", type=float, default=audit.COVERAGE_TOL)

    p = sub.add_parser("explore", parents=[common], help="search for large orthogonality-avoiding sets")
    p.add_argument("--kind", choices=("real", "complex"), required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--M", type=_positive_int, default=4000)
    p.add_argument("--delta-deg", type=float, default=2.0)
    p.add_argument("--budget", type=_positive_int, default=explorer.DEFAULT_BUDGET)
    p.add_argument("--cloud", choices=("auto", "random", "lattice"), default="auto")
    p.add_argument("--timing", action="store_true", help="record wall time (output is then not reproducible)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    params = {k: v for k, v in vars(args).items() if k not in ("command", "seed", "threads", "fmt", "out")}
    cfg = RunConfig(args.command, params, args.seed, args.threads, args.fmt, args.out)
    try:
        return COMMANDS[cfg.command](cfg)
    except (UsageError, ValueError) as exc:
        print(f"doublecap {cfg.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
