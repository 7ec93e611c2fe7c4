"""Dense Householder-reflection machinery and QR factorization.

All matrices are plain float64 numpy arrays in row-major order.  Reflectors
are stored full length with leading zeros; a reflector may be exactly the
zero vector, in which case the corresponding reflection is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Pivot tail below this fraction of ||X||_F means the column is linearly
# dependent on the previous ones.
RANK_TOL = 1e-12

# Relative threshold under which the pivot cancellation is treated as exact,
# producing a zero reflector (H = I).
CANCEL_TOL = 1e-12


class RankDeficiencyError(Exception):
    """The input matrix does not have full column rank."""


def as_matrix(a) -> np.ndarray:
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError("expected a 2-D matrix with at least one row and column")
    return m


def as_vector(a) -> np.ndarray:
    v = np.ascontiguousarray(a, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("expected a 1-D vector with at least one entry")
    return v


@dataclass(frozen=True)
class SignPolicy:
    """Which sign d_k to use when building reflector k.

    "standard" picks d_k = sgn(pivot) (with sgn(0) = +1), which avoids
    cancellation and guarantees nonzero reflectors for full-rank input.
    "to-positive" always maps the pivot column to the positive axis
    direction (d_k = -1).  "custom" uses an explicit sequence of +-1.
    """

    kind: str
    signs: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("standard", "to-positive", "custom"):
            raise ValueError(f"unknown sign policy kind: {self.kind!r}")
        if (self.kind == "custom") != (self.signs is not None):
            raise ValueError("custom policy requires signs, others forbid them")
        if self.signs is not None and any(s not in (-1, 1) for s in self.signs):
            raise ValueError("custom signs must all be +1 or -1")

    @classmethod
    def custom(cls, signs: Sequence[int]) -> "SignPolicy":
        return cls("custom", tuple(int(s) for s in signs))

    def sign_for(self, step: int, pivot: float) -> float:
        if self.kind == "standard":
            return 1.0 if pivot >= 0.0 else -1.0
        if self.kind == "to-positive":
            return -1.0
        if step >= len(self.signs):
            raise ValueError(
                f"custom sign policy has {len(self.signs)} signs, need step {step + 1}"
            )
        return float(self.signs[step])


STANDARD = SignPolicy("standard")
TO_POSITIVE = SignPolicy("to-positive")


@dataclass(frozen=True)
class HouseholderQR:
    """Implicit product of p reflections with the triangular factor T.

    ``reflectors[k]`` is v_{k+1}, zero in its first k components; ``vnorm2``
    caches ||v||^2 (0.0 marks an identity reflection).
    """

    n: int
    p: int
    reflectors: tuple[np.ndarray, ...]
    vnorm2: tuple[float, ...]
    T: np.ndarray
    policy: SignPolicy

    @property
    def nonzero_reflector_count(self) -> int:
        return sum(1 for w in self.vnorm2 if w > 0.0)


def make_reflector(x, k: int, sign: int) -> np.ndarray:
    """Reflector v with zeros in components 1..k-1 sending x to a multiple
    of e_k while leaving components 1..k-1 of x unchanged.

    Returns the all-zero vector when the pivot cancellation is exact
    (the reflection is then the identity).
    """
    x = as_vector(x)
    n = x.size
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range for vector of length {n}")
    d = float(sign)
    if d not in (-1.0, 1.0):
        raise ValueError("sign must be +1 or -1")
    tail = x[k - 1:]
    norm = float(np.linalg.norm(tail))
    if norm == 0.0:
        raise RankDeficiencyError(f"all-zero tail from component {k}")
    v = np.zeros(n)
    v[k - 1:] = tail
    v[k - 1] += d * norm
    if abs(v[k - 1]) <= CANCEL_TOL * norm:
        return np.zeros(n)
    return v


def apply_reflection(v, x) -> np.ndarray:
    """Apply (I - 2 v v^T / ||v||^2) to x; identity when v = 0."""
    v = as_vector(v)
    x = as_vector(x)
    if v.size != x.size:
        raise ValueError("reflector and vector lengths differ")
    vn2 = float(v @ v)
    if vn2 == 0.0:
        return x.copy()
    return x - (2.0 * (v @ x) / vn2) * v


def householder_qr(X, policy: SignPolicy = STANDARD) -> HouseholderQR:
    """Factor X as H_1 ... H_p [T; 0] with T upper triangular.

    Raises RankDeficiencyError when a pivot tail norm falls below
    RANK_TOL * ||X||_F.
    """
    X = as_matrix(X)
    n, p = X.shape
    if p > n:
        raise ValueError(f"need p <= n, got {n}x{p}")
    if policy.kind == "custom" and len(policy.signs) != p:
        raise ValueError(f"custom policy has {len(policy.signs)} signs, need {p}")
    scale = float(np.linalg.norm(X))
    A = X.copy()
    reflectors = []
    vnorm2 = []
    for k in range(p):
        tail = A[k:, k]
        norm = float(np.linalg.norm(tail))
        if norm <= RANK_TOL * scale:
            raise RankDeficiencyError(
                f"rank deficiency detected at column {k + 1}: pivot tail norm {norm:.3e}"
            )
        d = policy.sign_for(k, float(A[k, k]))
        if abs(A[k, k] + d * norm) <= CANCEL_TOL * norm:
            # exact cancellation: H_k = I; drop the sub-diagonal dust
            reflectors.append(np.zeros(n))
            vnorm2.append(0.0)
            A[k + 1:, k] = 0.0
            continue
        v = np.zeros(n)
        v[k] = A[k, k] + d * norm
        v[k + 1:] = A[k + 1:, k]
        vn2 = float(v @ v)
        A[k:, k:] -= np.outer(v[k:], (2.0 / vn2) * (v[k:] @ A[k:, k:]))
        A[k + 1:, k] = 0.0
        reflectors.append(v)
        vnorm2.append(vn2)
    T = np.triu(A[:p, :p])
    return HouseholderQR(
        n=n, p=p, reflectors=tuple(reflectors), vnorm2=tuple(vnorm2),
        T=T, policy=policy,
    )


def apply_Qt(qr: HouseholderQR, x) -> np.ndarray:
    """Apply H_p ... H_1 (= U^T) to x in O(np) operations."""
    x = as_vector(x)
    if x.size != qr.n:
        raise ValueError(f"vector length {x.size} != n = {qr.n}")
    y = x.copy()
    for v, vn2 in zip(qr.reflectors, qr.vnorm2):
        if vn2 > 0.0:
            y -= (2.0 * (v @ y) / vn2) * v
    return y


def apply_Q(qr: HouseholderQR, x) -> np.ndarray:
    """Apply H_1 ... H_p (= U) to x; inverse of apply_Qt."""
    x = as_vector(x)
    if x.size != qr.n:
        raise ValueError(f"vector length {x.size} != n = {qr.n}")
    y = x.copy()
    for v, vn2 in zip(reversed(qr.reflectors), reversed(qr.vnorm2)):
        if vn2 > 0.0:
            y -= (2.0 * (v @ y) / vn2) * v
    return y


def reconstruct(qr: HouseholderQR) -> np.ndarray:
    """Rebuild X = H_1 ... H_p [T; 0] column by column."""
    n, p = qr.n, qr.p
    X = np.zeros((n, p))
    for j in range(p):
        col = np.zeros(n)
        col[:p] = qr.T[:, j]
        X[:, j] = apply_Q(qr, col)
    return X


def explicit_orthocomplement_basis(qr: HouseholderQR) -> np.ndarray:
    """Materialize U_2, the last n-p columns of H_1 ... H_p.

    This is the O(n^2 p) brute-force route, kept as the oracle for the
    closed-formula orthocomplement action.
    """
    n, p = qr.n, qr.p
    if p >= n:
        raise ValueError("orthocomplement is empty when p = n")
    M = np.zeros((n, n - p))
    M[p:, :] = np.eye(n - p)
    for v, vn2 in zip(reversed(qr.reflectors), reversed(qr.vnorm2)):
        if vn2 > 0.0:
            M -= np.outer(v, (2.0 / vn2) * (v @ M))
    return M
