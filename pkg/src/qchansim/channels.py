"""Single-qubit CPTP channels as Kraus sets, with affine and Choi forms.

Conventions: |H> = |0> = (1, 0)^T, |V> = |1> = (0, 1)^T, and the Pauli basis
is sigma_x = [[0,1],[1,0]], sigma_y = [[0,-i],[i,0]], sigma_z = [[1,0],[0,-1]].
A channel acts as ``rho -> sum_i K_i rho K_i^dag`` and on Bloch vectors as
``r -> T r + t``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .matops import (
    ID2,
    PAULIS,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    as_cmat,
    assert_density_matrix,
    dagger,
    frob_dist,
)

TRACE_TOL = 1e-8
CHOI_EIG_TOL = 1e-8
ZERO_OP_TOL = 1e-12


class ChannelKind(str, Enum):
    """The five named decoherence channels."""

    AD = "AD"
    PD = "PD"
    BF = "BF"
    PF = "PF"
    BPF = "BPF"


@dataclass(frozen=True)
class KrausChannel:
    """An ordered set of 2x2 Kraus operators with a human-readable label."""

    ops: tuple
    label: str = ""

    def __post_init__(self):
        if len(self.ops) == 0:
            raise ValueError("a channel needs at least one Kraus operator")
        coerced = tuple(as_cmat(k, 2) for k in self.ops)
        object.__setattr__(self, "ops", coerced)


@dataclass(frozen=True)
class CPTPReport:
    """Diagnostics from :func:`validate_channel`."""

    trace_residual: float
    min_choi_eig: float
    ok: bool


@dataclass(frozen=True)
class AffineRep:
    """Bloch-sphere representation r -> T r + t of a channel."""

    T: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        T = np.asarray(self.T, dtype=float)
        t = np.asarray(self.t, dtype=float)
        if T.shape != (3, 3) or t.shape != (3,):
            raise ValueError("AffineRep needs a 3x3 matrix and a 3-vector")
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "t", t)

    def image_in_unit_ball(self, samples: int = 200, slack: float = 1e-8) -> bool:
        """Check ||T r + t|| <= 1 + slack on a deterministic sphere sample."""
        k = np.arange(samples)
        z = 1.0 - 2.0 * (k + 0.5) / samples
        phi = np.pi * (1.0 + np.sqrt(5.0)) * k
        pts = np.stack([np.sqrt(1 - z**2) * np.cos(phi), np.sqrt(1 - z**2) * np.sin(phi), z])
        out = self.T @ pts + self.t[:, None]
        return bool(np.linalg.norm(out, axis=0).max() <= 1.0 + slack)


def builtin_channel(kind: ChannelKind | str, lam: float, label: str = "") -> KrausChannel:
    """Kraus operators of a named channel at decoherence parameter ``lam``.

    AD damps the excited state |V>, PD damps the phase without populating,
    BF/PF/BPF flip with probability ``lam`` via sigma_x / sigma_z / sigma_y.
    Kraus operators with negligible norm are dropped.
    """
    kind = ChannelKind(kind)
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"decoherence parameter must be in [0, 1], got {lam}")
    root = np.sqrt(lam)
    coroot = np.sqrt(1.0 - lam)
    if kind is ChannelKind.AD:
        ops = [np.diag([1.0, coroot]), np.array([[0.0, root], [0.0, 0.0]])]
    elif kind is ChannelKind.PD:
        ops = [np.diag([1.0, coroot]), np.diag([0.0, root])]
    elif kind is ChannelKind.BF:
        ops = [coroot * ID2, root * PAULI_X]
    elif kind is ChannelKind.PF:
        ops = [coroot * ID2, root * PAULI_Z]
    else:
        ops = [coroot * ID2, root * PAULI_Y]
    ops = [k for k in ops if np.linalg.norm(k) >= ZERO_OP_TOL]
    return KrausChannel(tuple(ops), label or f"{kind.value}(lambda={lam:g})")


def apply_channel(ch: KrausChannel, rho) -> np.ndarray:
    """sum_i K_i rho K_i^dag for a valid density matrix ``rho``."""
    rho = assert_density_matrix(rho)
    out = np.zeros((2, 2), dtype=complex)
    for k in ch.ops:
        out += k @ rho @ dagger(k)
    return out


def to_choi(ch: KrausChannel) -> np.ndarray:
    """Choi matrix J = sum_ij |i><j| (x) E(|i><j|); Tr J = 2 when E is TP."""
    j = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for jdx in range(2):
            e = np.zeros((2, 2), dtype=complex)
            e[i, jdx] = 1.0
            img = np.zeros((2, 2), dtype=complex)
            for k in ch.ops:
                img += k @ e @ dagger(k)
            j += np.kron(e, img)
    return j


def validate_channel(ch: KrausChannel) -> CPTPReport:
    """CPTP diagnostics: never raises, returns residuals and a verdict."""
    acc = np.zeros((2, 2), dtype=complex)
    for k in ch.ops:
        acc += dagger(k) @ k
    trace_residual = frob_dist(acc, ID2)
    j = to_choi(ch)
    min_eig = float(np.linalg.eigvalsh((j + dagger(j)) / 2.0).min())
    ok = trace_residual <= TRACE_TOL and min_eig >= -CHOI_EIG_TOL
    return CPTPReport(trace_residual=trace_residual, min_choi_eig=min_eig, ok=ok)


def to_affine(ch: KrausChannel) -> AffineRep:
    """Distortion matrix and displacement: T_ij = Tr[s_i E(s_j)]/2, t_i = Tr[s_i E(I)]/2."""

    def image(op):
        out = np.zeros((2, 2), dtype=complex)
        for k in ch.ops:
            out += k @ op @ dagger(k)
        return out

    T = np.empty((3, 3))
    for jdx, sj in enumerate(PAULIS):
        img = image(sj)
        for idx, si in enumerate(PAULIS):
            T[idx, jdx] = 0.5 * np.trace(si @ img).real
    img_id = image(ID2)
    t = np.array([0.5 * np.trace(si @ img_id).real for si in PAULIS])
    return AffineRep(T=T, t=t)


def _complex_to_pairs(m) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def _pairs_to_complex(rows) -> np.ndarray:
    return np.array([[complex(c[0], c[1]) for c in row] for row in rows], dtype=complex)


def channel_to_json(ch: KrausChannel) -> str:
    """Serialize as {label, kraus: [2x2 row-major [re, im] pairs, ...]}."""
    payload = {"label": ch.label, "kraus": [_complex_to_pairs(k) for k in ch.ops]}
    return json.dumps(payload, sort_keys=True)


def channel_from_json(text: str) -> KrausChannel:
    payload = json.loads(text)
    ops = tuple(_pairs_to_complex(k) for k in payload["kraus"])
    return KrausChannel(ops, payload.get("label", ""))
