"""Two-branch quasiextreme decomposition of single-qubit channels.

A quasiextreme channel distorts the Bloch ball by
``T = diag(cos nu, cos mu, cos nu cos mu)`` with displacement
``t = (0, 0, sin nu sin mu)`` and is generated by exactly two Kraus
operators::

    K0 = diag(cos beta, cos alpha)      K1 = [[0, sin alpha], [sin beta, 0]]

with ``alpha = (mu + nu) / 2`` and ``beta = (mu - nu) / 2``.  An arbitrary
channel is a convex mix ``p E_a + (1 - p) E_b`` of two such branches, each
dressed by unitaries: ``M_i = U K_i U'``.  This module provides the closed
forms for the five named channels, a numerical fitter for everything else,
and the reconstruction of a channel from a plan.

The ancilla rotation angles obey ``gamma1 = pi/2 - alpha + beta`` and
``gamma2 = alpha + beta - pi/2`` (modulo 2 pi); the circuit-versus-Kraus
equivalence tests pin this relation down.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .channels import (
    AffineRep,
    ChannelKind,
    KrausChannel,
    ZERO_OP_TOL,
    to_affine,
    to_choi,
    validate_channel,
)
from .matops import ID2, as_cmat, frob_dist, svd3, unitarity_residual
from .optics import EulerAngles, euler_from_su2, su2_from_euler, su2_from_rotation

U_BPF = np.array([[-1.0j, 0.0], [0.0, 1.0j]], dtype=complex)

ANGLE_TOL = 1e-10
QE_TOL = 1e-8


class NotQuasiExtremeError(ValueError):
    """Raised when an affine map lacks the quasiextreme diagonal structure."""


def wrap_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    w = float(np.mod(a + np.pi, 2.0 * np.pi) - np.pi)
    return np.pi if w == -np.pi else w


def kraus_from_angles(alpha: float, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """The trace-preserving quasiextreme Kraus pair for angles (alpha, beta)."""
    k0 = np.array([[np.cos(beta), 0.0], [0.0, np.cos(alpha)]], dtype=complex)
    k1 = np.array([[0.0, np.sin(alpha)], [np.sin(beta), 0.0]], dtype=complex)
    return k0, k1


def gammas_from_angles(alpha: float, beta: float) -> tuple[float, float]:
    """Ancilla rotation angles gamma1 = pi/2 - alpha + beta, gamma2 = alpha + beta - pi/2."""
    return np.pi / 2.0 - alpha + beta, alpha + beta - np.pi / 2.0


@dataclass(frozen=True)
class QuasiExtremeBranch:
    """One quasiextreme branch: Kraus angles, ancilla angles and dressing unitaries.

    ``conditional_x`` records whether the feed-forward sigma_x acts on the
    odd-ancilla port; disabling it turns the off-diagonal K1 into its
    diagonal counterpart (the phase-damping behaviour).
    """

    alpha: float
    beta: float
    gamma1: float
    gamma2: float
    U: np.ndarray
    Uprime: np.ndarray
    conditional_x: bool = True

    def __post_init__(self):
        u = as_cmat(self.U, 2)
        up = as_cmat(self.Uprime, 2)
        if unitarity_residual(u) > ANGLE_TOL or unitarity_residual(up) > ANGLE_TOL:
            raise ValueError("branch unitaries must be unitary within 1e-10")
        object.__setattr__(self, "U", u)
        object.__setattr__(self, "Uprime", up)
        g1, g2 = gammas_from_angles(self.alpha, self.beta)
        if abs(wrap_angle(self.gamma1 - g1)) > ANGLE_TOL or abs(wrap_angle(self.gamma2 - g2)) > ANGLE_TOL:
            raise ValueError("gamma angles inconsistent with (alpha, beta)")

    @classmethod
    def from_alpha_beta(cls, alpha, beta, U=None, Uprime=None, conditional_x=True) -> "QuasiExtremeBranch":
        alpha = wrap_angle(alpha)
        beta = wrap_angle(beta)
        g1, g2 = gammas_from_angles(alpha, beta)
        return cls(
            alpha=alpha,
            beta=beta,
            gamma1=wrap_angle(g1),
            gamma2=wrap_angle(g2),
            U=ID2 if U is None else U,
            Uprime=ID2 if Uprime is None else Uprime,
            conditional_x=conditional_x,
        )

    def kraus_pair(self) -> tuple[np.ndarray, np.ndarray]:
        """Effective bare Kraus pair, honouring the conditional-x flag."""
        k0, k1 = kraus_from_angles(self.alpha, self.beta)
        if not self.conditional_x:
            k1 = np.array([[np.sin(self.beta), 0.0], [0.0, np.sin(self.alpha)]], dtype=complex)
        return k0, k1


@dataclass(frozen=True)
class AngleNuMu:
    """Bloch-distortion angles of a quasiextreme channel."""

    nu: float
    mu: float


@dataclass(frozen=True)
class DecompositionPlan:
    """Convex mix p * branch_a + (1 - p) * branch_b; branch_b may be absent only at p = 1."""

    branch_a: QuasiExtremeBranch
    branch_b: QuasiExtremeBranch | None
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"mixing weight must be in [0, 1], got {self.p}")
        if self.branch_b is None and self.p < 1.0:
            raise ValueError("branch_b is required whenever p < 1")


def closed_form_plan(kind: ChannelKind | str, lam: float) -> DecompositionPlan:
    """Decomposition parameters of the five named channels.

    AD, PD and BF need a single branch (p = 1) with
    ``alpha = arcsin(sqrt(lam))`` and ``beta = 0`` (AD/PD) or
    ``beta = alpha`` (BF); the PD branch additionally disables the
    feed-forward sigma_x.  PF and BPF mix a flip branch, weighted by
    ``lam``, with an identity branch: the PF flip branch is
    ``alpha = pi, beta = 0`` and the BPF flip branch is
    ``alpha = beta = pi/2`` dressed with U = diag(-i, i).
    """
    kind = ChannelKind(kind)
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"decoherence parameter must be in [0, 1], got {lam}")
    if kind in (ChannelKind.AD, ChannelKind.PD, ChannelKind.BF):
        alpha = float(np.arcsin(np.sqrt(lam)))
        beta = alpha if kind is ChannelKind.BF else 0.0
        branch = QuasiExtremeBranch.from_alpha_beta(
            alpha, beta, conditional_x=kind is not ChannelKind.PD
        )
        return DecompositionPlan(branch_a=branch, branch_b=None, p=1.0)
    identity = QuasiExtremeBranch.from_alpha_beta(0.0, 0.0)
    if kind is ChannelKind.PF:
        flip = QuasiExtremeBranch.from_alpha_beta(np.pi, 0.0)
    else:
        flip = QuasiExtremeBranch.from_alpha_beta(np.pi / 2.0, np.pi / 2.0, U=U_BPF)
    return DecompositionPlan(branch_a=flip, branch_b=identity, p=float(lam))


def plan_to_channel(plan: DecompositionPlan, label: str = "") -> KrausChannel:
    """Kraus set {sqrt(w) U K_i U'} over both branches, zero operators dropped."""
    ops = []
    for branch, weight in ((plan.branch_a, plan.p), (plan.branch_b, 1.0 - plan.p)):
        if branch is None:
            continue
        root = np.sqrt(weight)
        for k in branch.kraus_pair():
            m = root * (branch.U @ k @ branch.Uprime)
            if np.linalg.norm(m) >= ZERO_OP_TOL:
                ops.append(m)
    return KrausChannel(tuple(ops), label)


def extract_nu_mu(aff: AffineRep, tol: float = QE_TOL) -> AngleNuMu:
    """Recover (nu, mu) from a quasiextreme affine map.

    Requires T diagonal with T = diag(cos nu, cos mu, cos nu cos mu) and
    t = (0, 0, sin nu sin mu); nu is taken in [0, pi] and mu in (-pi, pi].
    Raises :class:`NotQuasiExtremeError` when the structure is absent.
    """
    T, t = aff.T, aff.t
    off = T - np.diag(np.diag(T))
    if np.abs(off).max() > tol:
        raise NotQuasiExtremeError("distortion matrix is not diagonal")
    if abs(t[0]) > tol or abs(t[1]) > tol:
        raise NotQuasiExtremeError("displacement is not along z")
    cnu, cmu, prod = T[0, 0], T[1, 1], T[2, 2]
    if abs(cnu) > 1.0 + tol or abs(cmu) > 1.0 + tol:
        raise NotQuasiExtremeError("diagonal entries exceed unit magnitude")
    nu = float(np.arccos(np.clip(cnu, -1.0, 1.0)))
    snu = np.sin(nu)
    if snu > tol:
        smu = t[2] / snu
        mu = float(np.arctan2(smu, cmu))
    else:
        mu = float(np.arccos(np.clip(cmu, -1.0, 1.0)))
    if abs(np.cos(nu) * np.cos(mu) - prod) > tol or abs(np.sin(nu) * np.sin(mu) - t[2]) > tol:
        raise NotQuasiExtremeError("diagonal and displacement are mutually inconsistent")
    if abs(np.cos(mu) - cmu) > tol:
        raise NotQuasiExtremeError("second diagonal entry is not a cosine consistent with t_z")
    return AngleNuMu(nu=nu, mu=float(mu))


def branch_from_nu_mu(nm: AngleNuMu, U=None, Uprime=None, conditional_x=True) -> QuasiExtremeBranch:
    return QuasiExtremeBranch.from_alpha_beta(
        (nm.mu + nm.nu) / 2.0, (nm.mu - nm.nu) / 2.0, U=U, Uprime=Uprime, conditional_x=conditional_x
    )


@dataclass(frozen=True)
class FitResult:
    """Outcome of :func:`fit_plan`; ``converged`` is False above residual 1e-4."""

    plan: DecompositionPlan
    residual: float
    converged: bool
    starts_used: int


def _signed_permutation_rotations():
    """All 24 signed 3x3 permutation matrices with determinant +1."""
    from itertools import permutations, product

    out = []
    for perm in permutations(range(3)):
        for signs in product((1.0, -1.0), repeat=3):
            m = np.zeros((3, 3))
            for col, row in enumerate(perm):
                m[row, col] = signs[col]
            if np.linalg.det(m) > 0:
                out.append(m)
    return out

_ROT_PERMS = _signed_permutation_rotations()
_DET1_SIGNS = [np.diag(d) for d in ((1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0))]


def _single_branch_candidates(aff: AffineRep):
    """Closed-form p = 1 plans for channels that are rotated quasiextreme maps.

    Writes T = L diag(s) R^T, then scans the finite set of axis
    relabellings P, Q = P S (proper signed permutations) under which
    P^T diag(s) Q matches the quasiextreme diagonal and L^T t points
    along z.  Every hit yields an exact plan; the caller keeps the best.
    """
    left, s, right = svd3(aff.T)
    plans = []
    for perm in _ROT_PERMS:
        lp = left @ perm
        tk = lp.T @ aff.t
        if abs(tk[0]) > QE_TOL or abs(tk[1]) > QE_TOL:
            continue
        for sign in _DET1_SIGNS:
            q = perm @ sign
            tmat = perm.T @ np.diag(s) @ q
            try:
                nm = extract_nu_mu(AffineRep(T=tmat, t=tk))
            except NotQuasiExtremeError:
                continue
            branch = branch_from_nu_mu(nm, U=su2_from_rotation(lp), Uprime=su2_from_rotation((right @ q).T))
            plans.append(DecompositionPlan(branch_a=branch, branch_b=None, p=1.0))
    return plans


def _plan_from_params(x) -> DecompositionPlan:
    p = float(np.sin(x[4]) ** 2)
    branch_a = QuasiExtremeBranch.from_alpha_beta(
        x[0], x[1], U=su2_from_euler(EulerAngles(*x[5:8])), Uprime=su2_from_euler(EulerAngles(*x[8:11]))
    )
    branch_b = QuasiExtremeBranch.from_alpha_beta(
        x[2], x[3], U=su2_from_euler(EulerAngles(*x[11:14])), Uprime=su2_from_euler(EulerAngles(*x[14:17]))
    )
    return DecompositionPlan(branch_a=branch_a, branch_b=branch_b, p=p)


def _params_from_plan(plan: DecompositionPlan) -> np.ndarray:
    def euler(u):
        e = euler_from_su2(u)
        return [e.phi, e.xi, e.zeta]

    b = plan.branch_b if plan.branch_b is not None else QuasiExtremeBranch.from_alpha_beta(0.0, 0.0)
    return np.array(
        [plan.branch_a.alpha, plan.branch_a.beta, b.alpha, b.beta, float(np.arcsin(np.sqrt(plan.p)))]
        + euler(plan.branch_a.U)
        + euler(plan.branch_a.Uprime)
        + euler(b.U)
        + euler(b.Uprime)
    )


def _tidy_plan(plan: DecompositionPlan) -> DecompositionPlan:
    """Snap the weight to the boundary and keep the heavier branch first."""
    p = plan.p
    a, b = plan.branch_a, plan.branch_b
    if p < 0.5 and b is not None:
        a, b, p = b, a, 1.0 - p
    if p > 1.0 - 1e-12:
        return DecompositionPlan(branch_a=a, branch_b=None, p=1.0)
    return DecompositionPlan(branch_a=a, branch_b=b, p=p)


def fit_plan(
    ch: KrausChannel,
    *,
    max_starts: int = 32,
    seed: int = 7,
    target_residual: float = 1e-9,
) -> FitResult:
    """Fit a two-branch plan to an arbitrary CPTP channel.

    Stage one recognizes rotated single-branch channels in closed form
    from the signed SVD of the distortion matrix; any two-Kraus channel
    lands here with residual at the arithmetic floor.  Stage two runs
    multi-start Levenberg-Marquardt least squares over all seventeen
    parameters (branch angles, mixing weight, Euler angles of the four
    dressing unitaries) against the Choi-matrix difference, with a
    Nelder-Mead polish of the best start.  Starts are merged by lowest
    residual with the start index as tiebreak, so results are
    deterministic for a fixed seed.

    Non-convergence (residual above 1e-4) is reported in the result, not
    raised.
    """
    report = validate_channel(ch)
    if not report.ok:
        raise ValueError("fit_plan requires a CPTP channel")
    target = to_choi(ch)

    def residual_of(plan):
        return frob_dist(to_choi(plan_to_channel(plan)), target)

    best_plan = None
    best_res = np.inf
    for cand in _single_branch_candidates(to_affine(ch)):
        r = residual_of(cand)
        if r < best_res:
            best_plan, best_res = cand, r
    if best_res <= target_residual:
        return FitResult(plan=_tidy_plan(best_plan), residual=float(best_res), converged=True, starts_used=0)

    def residual_vec(x):
        diff = to_choi(plan_to_channel(_plan_from_params(x))) - target
        return np.concatenate([diff.real.ravel(), diff.imag.ravel()])

    rng = np.random.default_rng(seed)
    starts_used = 0
    for idx in range(max_starts):
        if idx == 0 and best_plan is not None:
            x0 = _params_from_plan(best_plan)
        else:
            x0 = rng.uniform(-np.pi, np.pi, size=17)
            x0[4] = rng.uniform(0.0, np.pi / 2.0)
        sol = optimize.least_squares(residual_vec, x0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=6000)
        starts_used = idx + 1
        plan = _plan_from_params(sol.x)
        r = residual_of(plan)
        if r < best_res:
            best_plan, best_res = plan, r
        if best_res <= target_residual:
            break

    if best_res > target_residual and best_plan is not None:
        # Derivative-free polish of the best start.
        sol = optimize.minimize(
            lambda x: float(np.linalg.norm(residual_vec(x))),
            _params_from_plan(best_plan),
            method="Nelder-Mead",
            options={"maxiter": 4000, "xatol": 1e-12, "fatol": 1e-14},
        )
        plan = _plan_from_params(sol.x)
        r = residual_of(plan)
        if r < best_res:
            best_plan, best_res = plan, r

    return FitResult(
        plan=_tidy_plan(best_plan),
        residual=float(best_res),
        converged=bool(best_res <= 1e-4),
        starts_used=starts_used,
    )


def _unitary_to_json(u) -> list | None:
    if frob_dist(u, ID2) <= 1e-12:
        return None
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(u)]


def _unitary_from_json(rows) -> np.ndarray:
    if rows is None:
        return ID2
    return np.array([[complex(c[0], c[1]) for c in row] for row in rows], dtype=complex)


def plan_to_json(plan: DecompositionPlan) -> str:
    branches = []
    for br in (plan.branch_a, plan.branch_b):
        if br is None:
            continue
        branches.append(
            {
                "alpha": br.alpha,
                "beta": br.beta,
                "gamma1": br.gamma1,
                "gamma2": br.gamma2,
                "U": _unitary_to_json(br.U),
                "Uprime": _unitary_to_json(br.Uprime),
                "conditional_x": br.conditional_x,
            }
        )
    return json.dumps({"p": plan.p, "branches": branches}, sort_keys=True)


def plan_from_json(text: str) -> DecompositionPlan:
    payload = json.loads(text)
    branches = [
        QuasiExtremeBranch(
            alpha=b["alpha"],
            beta=b["beta"],
            gamma1=b["gamma1"],
            gamma2=b["gamma2"],
            U=_unitary_from_json(b.get("U")),
            Uprime=_unitary_from_json(b.get("Uprime")),
            conditional_x=b.get("conditional_x", True),
        )
        for b in payload["branches"]
    ]
    branch_b = branches[1] if len(branches) > 1 else None
    return DecompositionPlan(branch_a=branches[0], branch_b=branch_b, p=payload["p"])
