"""Structural checks on tabulated protocols.

A protocol that reproduces the Born rule exactly can never send the same
message, for the same shared value, on two orthogonal input states: Bob
would have to answer "yes" with certainty to both measurements while also
answering "no" with certainty to each. The checks here audit supports for
that, test that supports cover all states, and test the message count
against the double-cap volume bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import capgeom
from .hilbert import ORTHOGONALITY_TOL
from .protocol import verify_equivalence
from .tabulated import TabulatedProtocol

SUPPORT_EPS = 1e-12
COVERAGE_TOL = 1e-9
BOUND_SLACK = 1e-12

PASS, FAIL, WARNING = "pass", "fail", "warning"


@dataclass(frozen=True)
class SupportSet:
    message: int
    shared_index: int
    shared_label: str
    members: tuple[int, ...]


def support_sets(tp: TabulatedProtocol, eps_supp: float = SUPPORT_EPS) -> list[SupportSet]:
    """States sent with message ``k`` at shared value ``X`` with probability above ``eps_supp``.

    Ordered by shared value, then message.
    """
    out = []
    for x in range(tp.num_shared):
        active = tp.encoder[x] > eps_supp
        for k in range(tp.message_count):
            members = tuple(int(i) for i in np.flatnonzero(active[:, k]))
            out.append(SupportSet(k, x, tp.shared_labels[x], members))
    return out


@dataclass(frozen=True)
class Violation:
    message: int
    shared_label: str
    state_a: int
    state_b: int
    overlap: float


@dataclass(frozen=True)
class SupportScanResult:
    violations: tuple[Violation, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def lemma1_check(
    tp: TabulatedProtocol,
    tol_orth: float = ORTHOGONALITY_TOL,
    eps_supp: float = SUPPORT_EPS,
) -> SupportScanResult:
    """Find every pair of (near-)orthogonal states sharing a support.

    Every listed shared value is checked, including ones with zero weight.
    """
    overlaps = np.abs(tp.states.conj() @ tp.states.T)
    found = []
    for s in support_sets(tp, eps_supp):
        if len(s.members) < 2:
            continue
        idx = np.array(s.members)
        sub = overlaps[np.ix_(idx, idx)]
        for a, b in zip(*np.nonzero(np.triu(sub <= tol_orth, k=1))):
            found.append(Violation(s.message, s.shared_label, int(idx[a]), int(idx[b]), float(sub[a, b])))
    return SupportScanResult(tuple(found))


@dataclass(frozen=True)
class CoverageResult:
    status: str
    sums: dict[str, float] = field(default_factory=dict)
    message: str = ""


def coverage_check(
    tp: TabulatedProtocol,
    tolerance: float = COVERAGE_TOL,
    eps_supp: float = SUPPORT_EPS,
) -> CoverageResult:
    """Sum the declared volumes of all supports per shared value; pass iff each is ``>= 1``.

    A support's volume is the sum of the ``support_weights`` of its members.
    Without declared weights the check is skipped with a warning status.
    """
    if tp.support_weights is None:
        return CoverageResult(WARNING, {}, "no support_weights declared; coverage not checked")
    w = tp.support_weights
    sums: dict[str, float] = {}
    for x in range(tp.num_shared):
        total = 0.0
        for s in support_sets(tp, eps_supp):
            if s.shared_index == x:
                total = math.fsum([total, *w[list(s.members)]])
        sums[tp.shared_labels[x]] = total
    short = [label for label, v in sums.items() if v < 1 - tolerance]
    if short:
        return CoverageResult(FAIL, sums, f"supports cover less than the whole state space at {short}")
    return CoverageResult(PASS, sums)


@dataclass(frozen=True)
class MessageBoundResult:
    R: int
    N: int
    kind: str
    volume: float
    log2_volume: float

    @property
    def product(self) -> float:
        return self.R * self.volume

    @property
    def log2_R(self) -> float:
        return math.log2(self.R)

    @property
    def bound_bits(self) -> float:
        return -self.log2_volume

    @property
    def passed(self) -> bool:
        return self.log2_R + self.log2_volume >= -BOUND_SLACK


def message_bound_check(R: int, N: int, kind: str = "complex") -> MessageBoundResult:
    """Test ``R * V >= 1`` with ``V`` the real (``V_N``) or complex (``U_N``) double-cap volume."""
    if R < 1:
        raise ValueError("R must be >= 1")
    if kind == "real":
        log2_v = capgeom.log2_real_cap_volume(N)
    elif kind == "complex":
        capgeom._check_dim(N, 2, "N")
        log2_v = float(1 - N)
    else:
        raise ValueError(f"kind must be 'real' or 'complex', got {kind!r}")
    return MessageBoundResult(R, N, kind, 2.0**log2_v, log2_v)


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str
    detail: str
    data: dict = field(default_factory=dict)


@dataclass(frozen=True)
class AuditReport:
    checks: tuple[CheckResult, ...]

    @property
    def failed(self) -> bool:
        return any(c.status == FAIL for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "checks": [
                {"name": c.name, "status": c.status, "detail": c.detail, **({"data": c.data} if c.data else {})}
                for c in self.checks
            ],
            "result": FAIL if self.failed else PASS,
        }


def audit_protocol(
    tp: TabulatedProtocol,
    tol_orth: float = ORTHOGONALITY_TOL,
    eps_supp: float = SUPPORT_EPS,
    equivalence_tol: float = 1e-9,
    coverage_tol: float = COVERAGE_TOL,
) -> AuditReport:
    """Run every check on an already-validated protocol.

    The probability constraints themselves are enforced on construction,
    so reaching this function means they hold and that check passes.
    """
    checks = [CheckResult("constraints", PASS, "probability tables well-formed")]

    eq = verify_equivalence(tp, tolerance=equivalence_tol)
    bad = eq.flagged
    detail = f"max deviation {eq.max_deviation:.17g}"
    data = {}
    if bad:
        detail += f"; {len(bad)} pair(s) beyond {equivalence_tol:g}"
        data["pairs"] = [[p.state, p.measurement] for p in bad[:20]]
    checks.append(CheckResult("equivalence", FAIL if bad else PASS, detail, data))

    lem = lemma1_check(tp, tol_orth, eps_supp)
    if lem.passed:
        checks.append(CheckResult("lemma1", PASS, "no support contains an orthogonal pair"))
    else:
        first = lem.violations[0]
        checks.append(
            CheckResult(
                "lemma1",
                FAIL,
                f"{len(lem.violations)} orthogonal pair(s); first: message {first.message}, "
                f"shared {first.shared_label!r}, states {first.state_a} and {first.state_b}",
                {"violations": [[v.message, v.shared_label, v.state_a, v.state_b] for v in lem.violations[:50]]},
            )
        )

    cov = coverage_check(tp, coverage_tol, eps_supp)
    checks.append(CheckResult("coverage", cov.status, cov.message or "every shared value covers volume >= 1", {"sums": cov.sums} if cov.sums else {}))

    mb = message_bound_check(tp.message_count, tp.dimension, "complex")
    checks.append(
        CheckResult(
            "message_bound",
            PASS if mb.passed else FAIL,
            f"R*U_N = {mb.R} * {mb.volume:.17g} = {mb.product:.17g}; log2 R = {mb.log2_R:.17g} vs bound {mb.bound_bits:.17g} bits",
        )
    )
    return AuditReport(tuple(checks))
