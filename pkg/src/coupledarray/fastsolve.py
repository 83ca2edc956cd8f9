"""Fast solves for Toeplitz and circulant systems.

ULA impedance matrices are symmetric Toeplitz and UCA impedance matrices are
symmetric circulant, so N x N solves drop from O(N^3) to O(N^2) (Levinson)
or O(N log N) (FFT). Every structured path checks its residual and falls
back to a dense factorisation when the structured algorithm is not
trustworthy; the fallback is reported in :class:`SolveInfo`.
"""

from dataclasses import dataclass, field
import enum
import logging
import warnings

import numpy as np
import scipy.linalg

from .errors import DomainError, NumericalError

__all__ = [
    "StructureKind",
    "StructuredMatrix",
    "SolveInfo",
    "solve",
    "quadratic_form",
    "solve_low_rank_update",
    "levinson_symmetric",
    "COND_LIMIT",
]

log = logging.getLogger(__name__)

#: Structured paths hand over to dense factorisation above this condition number.
COND_LIMIT = 1e12
_RESIDUAL_TARGET = 1e-12
_RESIDUAL_LIMIT = 1e-10


class StructureKind(enum.Enum):
    DENSE = "dense"
    TOEPLITZ = "toeplitz"
    CIRCULANT = "circulant"


@dataclass(frozen=True, eq=False)
class StructuredMatrix:
    """A square matrix stored by its structure.

    Toeplitz and circulant matrices are kept as their first column and are
    assumed symmetric (first row equals first column), which is the case for
    every impedance matrix built from pairwise distances.

    Attributes
    ----------
    kind : StructureKind
    generator : ndarray
        First column (Toeplitz, circulant) or the full matrix (dense).
    hermitian : bool
        True when the matrix is Hermitian, i.e. a real generator here.
    """

    kind: StructureKind
    generator: np.ndarray
    hermitian: bool = field(default=None)

    def __post_init__(self):
        g = np.asarray(self.generator)
        if self.kind is StructureKind.DENSE:
            if g.ndim != 2 or g.shape[0] != g.shape[1]:
                raise DomainError("dense generator must be a square matrix")
            herm = bool(np.allclose(g, g.conj().T, rtol=0, atol=1e-14 * np.abs(g).max()))
        else:
            if g.ndim != 1 or g.size < 1:
                raise DomainError("structured generator must be a non-empty vector")
            if self.kind is StructureKind.CIRCULANT:
                n = g.size
                mirror = g[(-np.arange(n)) % n]
                if not np.allclose(g, mirror, rtol=0, atol=1e-13 * np.abs(g).max()):
                    raise DomainError("circulant generator must satisfy g[k] = g[N-k]")
            herm = not np.iscomplexobj(g) or bool(np.all(g.imag == 0))
        if self.hermitian is None:
            object.__setattr__(self, "hermitian", herm)
        object.__setattr__(self, "generator", g)

    @classmethod
    def dense(cls, a):
        return cls(StructureKind.DENSE, np.asarray(a))

    @classmethod
    def toeplitz(cls, first_column):
        return cls(StructureKind.TOEPLITZ, np.asarray(first_column))

    @classmethod
    def circulant(cls, first_column):
        return cls(StructureKind.CIRCULANT, np.asarray(first_column))

    @property
    def size(self):
        return self.generator.shape[0]

    def to_dense(self):
        if self.kind is StructureKind.DENSE:
            return self.generator
        if self.kind is StructureKind.TOEPLITZ:
            return scipy.linalg.toeplitz(self.generator, self.generator)
        return scipy.linalg.circulant(self.generator)

    def matvec(self, x):
        x = np.asarray(x)
        if self.kind is StructureKind.DENSE:
            return self.generator @ x
        if self.kind is StructureKind.TOEPLITZ:
            if self.size == 1:
                return self.generator[0] * x
            return scipy.linalg.matmul_toeplitz((self.generator, self.generator), x)
        lam = np.fft.fft(self.generator)
        lam = lam if x.ndim == 1 else lam[:, None]
        out = np.fft.ifft(lam * np.fft.fft(x, axis=0), axis=0)
        if not np.iscomplexobj(x) and not np.iscomplexobj(self.generator):
            out = out.real
        return out

    def real_part(self):
        """Elementwise real part; for symmetric matrices this is the Hermitian part."""
        return StructuredMatrix(self.kind, np.array(self.generator.real))

    def shifted(self, s):
        """self + s I."""
        g = np.array(self.generator, dtype=np.result_type(self.generator, s), copy=True)
        if self.kind is StructureKind.DENSE:
            g[np.diag_indices(self.size)] += s
        else:
            g[0] += s
        return StructuredMatrix(self.kind, g)


@dataclass
class SolveInfo:
    """Diagnostics of one structured solve."""

    path: str
    residual: float = float("nan")
    condition: float = float("nan")
    fallback: bool = False
    refinements: int = 0
    notes: list = field(default_factory=list)


def levinson_symmetric(t, b):
    """Solve a real symmetric positive definite Toeplitz system by Levinson's recursion.

    Parameters
    ----------
    t : (N,) float ndarray
        First column of the matrix.
    b : (N,) or (N, K) ndarray
        Right-hand side(s); may be complex.

    Returns
    -------
    x : ndarray
    betas : (N,) ndarray
        Normalised prediction errors; all positive iff the matrix is PD.

    Raises
    ------
    NumericalError
        If a prediction error becomes non-positive (matrix not PD).
    """
    t = np.asarray(t, dtype=float)
    n = t.size
    b = np.asarray(b)
    t0 = t[0]
    if not t0 > 0:
        raise NumericalError("Toeplitz matrix is not positive definite (t0 <= 0)", min_eigenvalue=t0)
    r = t[1:] / t0
    bb = b / t0
    squeeze = bb.ndim == 1
    if squeeze:
        bb = bb[:, None]
    x = np.zeros((n, bb.shape[1]), dtype=np.result_type(bb, float))
    betas = np.ones(n)
    x[0] = bb[0]
    if n == 1:
        return (x[:, 0] if squeeze else x), betas
    y = np.zeros(n)
    y[0] = -r[0]
    beta = 1.0
    alpha = -r[0]
    for k in range(1, n):
        beta = (1.0 - alpha * alpha) * beta
        betas[k] = beta
        if not beta > 0:
            raise NumericalError(
                f"Toeplitz matrix is not positive definite (prediction error {beta:.3g} at order {k})",
                min_eigenvalue=beta * t0,
            )
        rk = r[:k][::-1]  # r_k, ..., r_1 paired with x_0..x_{k-1}
        mu = (bb[k] - rk @ x[:k]) / beta
        x[:k] += mu[None, :] * y[:k][::-1, None]
        x[k] = mu
        if k < n - 1:
            alpha = -(r[k] + r[:k] @ y[:k][::-1]) / beta
            y[:k] = y[:k] + alpha * y[:k][::-1]
            y[k] = alpha
    return (x[:, 0] if squeeze else x), betas


def _dense_solve(a, b, hermitian):
    if hermitian:
        try:
            c = scipy.linalg.cho_factor(a)
        except np.linalg.LinAlgError:
            w = np.linalg.eigvalsh(a)
            raise NumericalError(
                f"matrix is not positive definite (smallest eigenvalue {w[0]:.6g})",
                min_eigenvalue=float(w[0]),
            ) from None
        return scipy.linalg.cho_solve(c, b)
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            return scipy.linalg.solve(a, b)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning):
            cond = float(np.linalg.cond(a))
            raise NumericalError(
                f"matrix is singular to working precision (condition number {cond:.3g})",
                condition=cond,
            ) from None


def _rel_residual(a, x, b):
    r = b - a.matvec(x)
    nb = np.linalg.norm(b)
    return float(np.linalg.norm(r) / nb) if nb else float(np.linalg.norm(r))


def _fallback(a, b, info, reason):
    info.fallback = True
    info.notes.append(reason)
    log.info("structured solve falls back to dense: %s", reason)
    info.path = "dense-fallback"
    x = _dense_solve(a.to_dense(), b, a.hermitian)
    info.residual = _rel_residual(a, x, b)
    return x


def _solve_circulant(a, b, info):
    lam = np.fft.fft(a.generator)
    if a.hermitian:
        if np.abs(lam.imag).max() > 1e-12 * np.abs(lam).max():
            raise NumericalError("circulant generator does not give a real spectrum")
        lam = lam.real
        if lam.min() <= 0:
            raise NumericalError(
                f"circulant matrix is not positive definite (smallest eigenvalue {lam.min():.6g})",
                min_eigenvalue=float(lam.min()),
            )
    mag = np.abs(lam)
    info.condition = float(mag.max() / mag.min()) if mag.min() > 0 else float("inf")
    if info.condition > COND_LIMIT:
        info.notes.append(f"condition number {info.condition:.3g} exceeds {COND_LIMIT:.0e}")
        return _fallback(a, b, info, "ill-conditioned circulant")
    lam_b = lam if b.ndim == 1 else lam[:, None]
    x = np.fft.ifft(np.fft.fft(b, axis=0) / lam_b, axis=0)
    if a.hermitian and not np.iscomplexobj(b):
        x = x.real
    info.residual = _rel_residual(a, x, b)
    return x


def _toeplitz_norm1(t):
    """Exact 1-norm of the symmetric Toeplitz matrix with first column ``t``."""
    a = np.abs(t)
    cs = np.cumsum(a)
    j = np.arange(t.size)
    return float((cs[j] + cs[t.size - 1 - j] - a[0]).max())


def _inverse_norm1(solve_fn, n, max_iter=5):
    """Hager's estimate of ||A^-1||_1 for real symmetric A, from a few solves.

    Deterministic (fixed start vectors), with Higham's alternating-sign
    safeguard. Typically takes four to six solves.
    """
    x = np.full(n, 1.0 / n)
    est = 0.0
    for _ in range(max_iter):
        y = solve_fn(x)
        est = float(np.abs(y).sum())
        z = solve_fn(np.where(y >= 0, 1.0, -1.0))
        j = int(np.argmax(np.abs(z)))
        if np.abs(z[j]) <= z @ x:
            break
        x = np.zeros(n)
        x[j] = 1.0
    alt = (-1.0) ** np.arange(n) * (1.0 + np.arange(n) / max(n - 1, 1))
    return max(est, 2.0 * float(np.abs(solve_fn(alt)).sum()) / (3.0 * n))


def _solve_toeplitz(a, b, info):
    g = a.generator
    if a.hermitian:
        try:
            x, _ = levinson_symmetric(g.real, b)
        except NumericalError as exc:
            # rounding can break the recursion on PD but ill-conditioned input;
            # the dense Cholesky decides whether the matrix really is indefinite
            return _fallback(a, b, info, f"Levinson breakdown: {exc}")
        def step(rhs):
            return levinson_symmetric(g.real, rhs)[0]

        est = _toeplitz_norm1(g.real) * _inverse_norm1(step, a.size)
        info.condition = float(est)
        if est > COND_LIMIT:
            info.notes.append(f"estimated condition number {est:.3g} exceeds {COND_LIMIT:.0e}")
            return _fallback(a, b, info, "ill-conditioned Toeplitz")

    else:
        try:
            x = scipy.linalg.solve_toeplitz((g, g), b)
        except np.linalg.LinAlgError as exc:
            return _fallback(a, b, info, f"Levinson breakdown: {exc}")

        def step(rhs):
            return scipy.linalg.solve_toeplitz((g, g), rhs)

    info.residual = _rel_residual(a, x, b)
    while info.residual > _RESIDUAL_TARGET and info.refinements < 3:
        x = x + step(b - a.matvec(x))
        info.refinements += 1
        info.residual = _rel_residual(a, x, b)
    if not np.isfinite(info.residual) or info.residual > _RESIDUAL_LIMIT:
        return _fallback(a, b, info, f"Levinson residual {info.residual:.3g} after refinement")
    return x


def solve(a, b, return_info=False):
    """Solve ``a x = b`` using the structure of ``a``.

    Parameters
    ----------
    a : StructuredMatrix
    b : (N,) or (N, K) array_like
    return_info : bool
        Also return a :class:`SolveInfo`.

    Raises
    ------
    NumericalError
        If a Hermitian ``a`` is not positive definite, or a general ``a`` is
        singular.
    """
    b = np.asarray(b)
    if b.shape[0] != a.size:
        raise DomainError(f"right-hand side has {b.shape[0]} rows, matrix is {a.size} x {a.size}")
    info = SolveInfo(path=a.kind.value)
    if a.kind is StructureKind.CIRCULANT:
        x = _solve_circulant(a, b, info)
    elif a.kind is StructureKind.TOEPLITZ:
        x = _solve_toeplitz(a, b, info)
    else:
        x = _dense_solve(a.generator, b, a.hermitian)
        info.residual = _rel_residual(a, x, b)
    return (x, info) if return_info else x


def quadratic_form(a, v, return_info=False):
    """v^H a^-1 v for Hermitian positive definite ``a``."""
    if not a.hermitian:
        raise DomainError("quadratic_form needs a Hermitian matrix")
    v = np.asarray(v)
    x, info = solve(a, v, return_info=True)
    val = float(np.real(np.vdot(v, x)))
    return (val, info) if return_info else val


def solve_low_rank_update(a, u, c, v, b, return_info=False):
    """Solve (a + U C V^H) x = b with a structured base matrix ``a``.

    Uses the Woodbury identity in the form
    (A + U C V^H)^-1 = A^-1 - A^-1 U C (I + V^H A^-1 U C)^-1 V^H A^-1,
    which does not require C to be invertible.
    """
    u = np.atleast_2d(np.asarray(u).T).T
    v = np.atleast_2d(np.asarray(v).T).T
    c = np.atleast_2d(c)
    b = np.asarray(b)
    rhs = np.column_stack([b.reshape(a.size, -1), u])
    sol, info = solve(a, rhs, return_info=True)
    k = b.reshape(a.size, -1).shape[1]
    y, au = sol[:, :k], sol[:, k:]
    cap = np.eye(c.shape[0]) + v.conj().T @ au @ c
    corr = au @ c @ np.linalg.solve(cap, v.conj().T @ y)
    x = (y - corr).reshape(b.shape)
    return (x, info) if return_info else x
